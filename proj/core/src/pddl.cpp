#include "symplan/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <unordered_map>
#include <vector>

namespace symplan {

namespace {

struct Token {
  enum Kind { LParen, RParen, Symbol, End } kind;
  std::string text;
  int line, col;
};

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](char c) {
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ';') {  // comment to end of line
      while (i < text.size() && text[i] != '\n') advance(text[i++]);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(c);
      ++i;
      continue;
    }
    if (c == '(' || c == ')') {
      out.push_back({c == '(' ? Token::LParen : Token::RParen, std::string(1, c), line, col});
      advance(c);
      ++i;
      continue;
    }
    const int sl = line, sc = col;
    std::string sym;
    while (i < text.size()) {
      c = text[i];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';') break;
      sym += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      advance(c);
      ++i;
    }
    out.push_back({Token::Symbol, sym, sl, sc});
  }
  out.push_back({Token::End, "", line, col});
  return out;
}

struct Cursor {
  const std::vector<Token>* tokens;
  std::size_t pos = 0;

  const Token& peek() const { return (*tokens)[pos]; }
  const Token& next() { return (*tokens)[pos == tokens->size() - 1 ? pos : pos++]; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(msg + (t.kind == Token::End ? " at end of input" : " near '" + t.text + "'"),
                     t.line, t.col);
  }
  void expect_lparen(const std::string& what) {
    if (peek().kind != Token::LParen) fail("expected '(' starting " + what);
    next();
  }
  void expect_rparen(const std::string& what) {
    if (peek().kind != Token::RParen) fail("expected ')' closing " + what);
    next();
  }
  std::string symbol(const std::string& what) {
    if (peek().kind != Token::Symbol) fail("expected " + what);
    return next().text;
  }
  bool accept_symbol(const std::string& s) {
    if (peek().kind == Token::Symbol && peek().text == s) {
      next();
      return true;
    }
    return false;
  }
  void skip_balanced() {  // consumes one complete form
    if (peek().kind == Token::Symbol) {
      next();
      return;
    }
    expect_lparen("form");
    int depth = 1;
    while (depth > 0) {
      const Token& t = next();
      if (t.kind == Token::End) fail("unbalanced parentheses");
      if (t.kind == Token::LParen) ++depth;
      if (t.kind == Token::RParen) --depth;
    }
  }
};

// `a b - t c - u d` with untyped trailing names defaulting to `object`.
std::vector<TypedName> parse_typed_list(Cursor& cur, bool variables) {
  std::vector<TypedName> out;
  std::vector<std::string> pending;
  while (cur.peek().kind == Token::Symbol) {
    std::string s = cur.next().text;
    if (s == "-") {
      const std::string type = cur.symbol("type name");
      for (auto& name : pending) out.push_back({name, type});
      pending.clear();
      continue;
    }
    if (variables) {
      if (s.empty() || s[0] != '?') cur.fail("expected variable (starting with '?')");
      s = s.substr(1);
    }
    pending.push_back(s);
  }
  for (auto& name : pending) out.push_back({name, "object"});
  return out;
}

struct RawAtom {
  std::string pred;
  std::vector<std::string> args;
  int line, col;
};

RawAtom parse_atom_form(Cursor& cur) {
  const Token& open = cur.peek();
  cur.expect_lparen("atom");
  RawAtom a;
  a.line = open.line;
  a.col = open.col;
  a.pred = cur.symbol("predicate name");
  while (cur.peek().kind == Token::Symbol) a.args.push_back(cur.next().text);
  cur.expect_rparen("atom");
  return a;
}

struct RawDomain {
  std::string name;
  std::vector<std::pair<std::string, std::string>> types;
  std::vector<Predicate> predicates;
  struct RawSchema {
    std::string name;
    std::vector<TypedName> params;
    std::vector<RawAtom> pre, add, del;
  };
  std::vector<RawSchema> schemas;
};

void parse_condition_list(Cursor& cur, std::vector<RawAtom>& pos, std::vector<RawAtom>* neg,
                          const char* what) {
  // single atom, (and ...), possibly with (not ...) entries when neg != null
  cur.expect_lparen(what);
  if (cur.accept_symbol("and")) {
    while (cur.peek().kind == Token::LParen) {
      Cursor probe = cur;
      probe.next();
      if (probe.peek().kind == Token::Symbol && probe.peek().text == "not") {
        if (!neg) cur.fail(std::string("negative literals not supported in ") + what);
        cur.next();
        cur.next();  // '(' 'not'
        neg->push_back(parse_atom_form(cur));
        cur.expect_rparen("(not ...)");
      } else {
        pos.push_back(parse_atom_form(cur));
      }
    }
    cur.expect_rparen(what);
    return;
  }
  if (cur.peek().kind == Token::RParen) {  // () — empty condition
    cur.expect_rparen(what);
    return;
  }
  if (cur.peek().kind == Token::Symbol && cur.peek().text == "not") {
    if (!neg) cur.fail(std::string("negative literals not supported in ") + what);
    cur.next();
    neg->push_back(parse_atom_form(cur));
    cur.expect_rparen(what);
    return;
  }
  // bare atom: re-parse the whole form
  RawAtom a;
  a.pred = cur.symbol("predicate name");
  const Token& t = (*cur.tokens)[cur.pos - 1];
  a.line = t.line;
  a.col = t.col;
  while (cur.peek().kind == Token::Symbol) a.args.push_back(cur.next().text);
  cur.expect_rparen(what);
  pos.push_back(a);
}

RawDomain parse_domain(const std::string& text) {
  const std::vector<Token> tokens = lex(text);
  Cursor cur{&tokens};
  RawDomain dom;
  cur.expect_lparen("domain definition");
  if (cur.symbol("define") != "define") cur.fail("expected 'define'");
  cur.expect_lparen("(domain NAME)");
  if (cur.symbol("domain") != "domain") cur.fail("expected 'domain'");
  dom.name = cur.symbol("domain name");
  cur.expect_rparen("(domain NAME)");

  static const std::set<std::string> supported_reqs = {":strips", ":typing"};

  while (cur.peek().kind == Token::LParen) {
    Cursor probe = cur;
    probe.next();
    const std::string section = probe.peek().text;
    if (section == ":requirements") {
      cur.next();
      cur.next();
      while (cur.peek().kind == Token::Symbol) {
        const std::string req = cur.next().text;
        if (!supported_reqs.count(req)) {
          throw ParseError("unsupported requirement " + req, cur.peek().line, cur.peek().col);
        }
      }
      cur.expect_rparen(":requirements");
    } else if (section == ":types") {
      cur.next();
      cur.next();
      auto typed = parse_typed_list(cur, false);
      for (auto& t : typed) dom.types.emplace_back(t.name, t.type);
      cur.expect_rparen(":types");
    } else if (section == ":predicates") {
      cur.next();
      cur.next();
      while (cur.peek().kind == Token::LParen) {
        cur.expect_lparen("predicate declaration");
        Predicate p;
        p.name = cur.symbol("predicate name");
        auto params = parse_typed_list(cur, true);
        for (auto& t : params) p.param_types.push_back(t.type);
        cur.expect_rparen("predicate declaration");
        dom.predicates.push_back(std::move(p));
      }
      cur.expect_rparen(":predicates");
    } else if (section == ":action") {
      cur.next();
      cur.next();
      RawDomain::RawSchema schema;
      schema.name = cur.symbol("action name");
      while (cur.peek().kind == Token::Symbol) {
        const std::string key = cur.next().text;
        if (key == ":parameters") {
          cur.expect_lparen(":parameters");
          schema.params = parse_typed_list(cur, true);
          cur.expect_rparen(":parameters");
        } else if (key == ":precondition") {
          parse_condition_list(cur, schema.pre, nullptr, ":precondition");
        } else if (key == ":effect") {
          parse_condition_list(cur, schema.add, &schema.del, ":effect");
        } else {
          cur.fail("unsupported action field " + key);
        }
      }
      cur.expect_rparen(":action");
      dom.schemas.push_back(std::move(schema));
    } else {
      cur.fail("unsupported domain section " + section);
    }
  }
  cur.expect_rparen("domain definition");
  return dom;
}

struct RawProblem {
  std::string name;
  std::string domain;
  std::vector<TypedName> objects;
  std::vector<RawAtom> init;
  std::vector<RawAtom> goal;
};

RawProblem parse_problem(const std::string& text) {
  const std::vector<Token> tokens = lex(text);
  Cursor cur{&tokens};
  RawProblem prob;
  cur.expect_lparen("problem definition");
  if (cur.symbol("define") != "define") cur.fail("expected 'define'");
  cur.expect_lparen("(problem NAME)");
  if (cur.symbol("problem") != "problem") cur.fail("expected 'problem'");
  prob.name = cur.symbol("problem name");
  cur.expect_rparen("(problem NAME)");

  while (cur.peek().kind == Token::LParen) {
    Cursor probe = cur;
    probe.next();
    const std::string section = probe.peek().text;
    if (section == ":domain") {
      cur.next();
      cur.next();
      prob.domain = cur.symbol("domain name");
      cur.expect_rparen(":domain");
    } else if (section == ":objects") {
      cur.next();
      cur.next();
      prob.objects = parse_typed_list(cur, false);
      cur.expect_rparen(":objects");
    } else if (section == ":init") {
      cur.next();
      cur.next();
      while (cur.peek().kind == Token::LParen) prob.init.push_back(parse_atom_form(cur));
      cur.expect_rparen(":init");
    } else if (section == ":goal") {
      cur.next();
      cur.next();
      parse_condition_list(cur, prob.goal, nullptr, ":goal");
      cur.expect_rparen(":goal");
    } else {
      cur.fail("unsupported problem section " + section);
    }
  }
  cur.expect_rparen("problem definition");
  return prob;
}

}  // namespace

Problem parse_pddl(const std::string& domain_text, const std::string& problem_text) {
  RawDomain dom = parse_domain(domain_text);
  RawProblem prob = parse_problem(problem_text);
  if (!prob.domain.empty() && prob.domain != dom.name) {
    throw ParseError("problem references domain '" + prob.domain + "' but got '" + dom.name + "'");
  }

  Problem p;
  p.domain_name = dom.name;
  p.problem_name = prob.name;
  p.objects.types = dom.types;

  // declared type names must resolve
  for (const auto& [child, parent] : dom.types) {
    (void)child;
    if (parent != "object" && !p.objects.type_exists(parent)) {
      throw ParseError("undeclared type '" + parent + "'");
    }
  }

  // predicates, sorted by name, unique
  p.predicates = dom.predicates;
  std::sort(p.predicates.begin(), p.predicates.end(),
            [](const Predicate& a, const Predicate& b) { return a.name < b.name; });
  for (std::size_t i = 0; i + 1 < p.predicates.size(); ++i) {
    if (p.predicates[i].name == p.predicates[i + 1].name) {
      throw ParseError("duplicate predicate '" + p.predicates[i].name + "'");
    }
  }
  std::unordered_map<std::string, int> pred_index;
  for (std::size_t i = 0; i < p.predicates.size(); ++i) {
    pred_index[p.predicates[i].name] = static_cast<int>(i);
    for (const auto& t : p.predicates[i].param_types) {
      if (!p.objects.type_exists(t)) {
        throw ParseError("undeclared type '" + t + "' in predicate '" + p.predicates[i].name +
                         "'");
      }
    }
  }

  // objects, sorted by name, unique, resolvable types
  p.objects.objects = prob.objects;
  std::sort(p.objects.objects.begin(), p.objects.objects.end(),
            [](const TypedName& a, const TypedName& b) { return a.name < b.name; });
  for (std::size_t i = 0; i + 1 < p.objects.objects.size(); ++i) {
    if (p.objects.objects[i].name == p.objects.objects[i + 1].name) {
      throw ParseError("duplicate object '" + p.objects.objects[i].name + "'");
    }
  }
  for (std::size_t i = 0; i < p.objects.objects.size(); ++i) {
    p.objects.index[p.objects.objects[i].name] = static_cast<int>(i);
    if (!p.objects.type_exists(p.objects.objects[i].type)) {
      throw ParseError("undeclared type '" + p.objects.objects[i].type + "' for object '" +
                       p.objects.objects[i].name + "'");
    }
  }

  auto lookup_pred = [&](const RawAtom& a) {
    auto it = pred_index.find(a.pred);
    if (it == pred_index.end()) {
      throw ParseError("undeclared predicate '" + a.pred + "'", a.line, a.col);
    }
    const Predicate& pred = p.predicates[it->second];
    if (static_cast<int>(a.args.size()) != pred.arity()) {
      throw ParseError("predicate '" + a.pred + "' expects " + std::to_string(pred.arity()) +
                           " arguments, got " + std::to_string(a.args.size()),
                       a.line, a.col);
    }
    return it->second;
  };

  auto ground_atom = [&](const RawAtom& a) {
    Atom atom;
    atom.pred = lookup_pred(a);
    const Predicate& pred = p.predicates[atom.pred];
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      const int obj = p.objects.find(a.args[i]);
      if (obj < 0) throw ParseError("undeclared object '" + a.args[i] + "'", a.line, a.col);
      if (!p.objects.is_subtype(p.objects.objects[obj].type, pred.param_types[i])) {
        throw ParseError("object '" + a.args[i] + "' has type '" +
                             p.objects.objects[obj].type + "', predicate '" + a.pred +
                             "' expects '" + pred.param_types[i] + "'",
                         a.line, a.col);
      }
      atom.args.push_back(obj);
    }
    return atom;
  };

  // schemas, sorted by name
  for (const auto& raw : dom.schemas) {
    ActionSchema schema;
    schema.name = raw.name;
    schema.params = raw.params;
    std::unordered_map<std::string, int> param_index;
    for (std::size_t i = 0; i < schema.params.size(); ++i) {
      if (!p.objects.type_exists(schema.params[i].type)) {
        throw ParseError("undeclared type '" + schema.params[i].type + "' in action '" +
                         raw.name + "'");
      }
      param_index[schema.params[i].name] = static_cast<int>(i);
    }
    auto lift = [&](const RawAtom& a) {
      LiftedAtom la;
      la.pred = lookup_pred(a);
      for (const auto& arg : a.args) {
        if (arg.empty() || arg[0] != '?') {
          throw ParseError("constants in action bodies are not supported ('" + arg + "')",
                           a.line, a.col);
        }
        auto it = param_index.find(arg.substr(1));
        if (it == param_index.end()) {
          throw ParseError("variable '" + arg + "' not in :parameters of '" + raw.name + "'",
                           a.line, a.col);
        }
        la.args.push_back(it->second);
      }
      return la;
    };
    for (const auto& a : raw.pre) schema.pre.push_back(lift(a));
    for (const auto& a : raw.add) schema.add.push_back(lift(a));
    for (const auto& a : raw.del) schema.del.push_back(lift(a));
    p.schemas.push_back(std::move(schema));
  }
  std::sort(p.schemas.begin(), p.schemas.end(),
            [](const ActionSchema& a, const ActionSchema& b) { return a.name < b.name; });
  for (std::size_t i = 0; i + 1 < p.schemas.size(); ++i) {
    if (p.schemas[i].name == p.schemas[i + 1].name) {
      throw ParseError("duplicate action '" + p.schemas[i].name + "'");
    }
  }

  std::vector<Atom> init;
  for (const auto& a : prob.init) init.push_back(ground_atom(a));
  p.init = State::from(std::move(init));  // duplicates in :init collapse silently

  std::vector<Atom> goal;
  for (const auto& a : prob.goal) goal.push_back(ground_atom(a));
  std::sort(goal.begin(), goal.end());
  goal.erase(std::unique(goal.begin(), goal.end()), goal.end());
  p.goal = std::move(goal);

  return p;
}

}  // namespace symplan

#include "symplan/strips.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace symplan {

bool ObjectTable::type_exists(const std::string& t) const {
  if (t == "object") return true;
  for (const auto& [child, parent] : types) {
    if (child == t || parent == t) return true;
  }
  return false;
}

bool ObjectTable::is_subtype(const std::string& t, const std::string& ancestor) const {
  if (ancestor == "object" || t == ancestor) return true;
  std::string cur = t;
  // parent chains are short; a linear walk per level is fine
  for (int depth = 0; depth < 64; ++depth) {
    bool advanced = false;
    for (const auto& [child, parent] : types) {
      if (child == cur) {
        cur = parent;
        advanced = true;
        break;
      }
    }
    if (!advanced) return false;
    if (cur == ancestor) return true;
  }
  return false;
}

State State::from(std::vector<Atom> atoms) {
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  return State{std::move(atoms)};
}

bool State::contains(const Atom& a) const {
  return std::binary_search(atoms.begin(), atoms.end(), a);
}

bool State::contains_all(const std::vector<Atom>& subset) const {
  return std::includes(atoms.begin(), atoms.end(), subset.begin(), subset.end());
}

int Problem::pred_index(const std::string& name) const {
  for (std::size_t i = 0; i < predicates.size(); ++i) {
    if (predicates[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int Problem::max_arity() const {
  int m = 0;
  for (const auto& p : predicates) m = std::max(m, p.arity());
  return m;
}

std::string Problem::atom_to_string(const Atom& a) const {
  std::string s = "(" + predicates[a.pred].name;
  for (int arg : a.args) s += " " + objects.objects[arg].name;
  return s + ")";
}

std::string action_to_string(const Problem& p, const GroundAction& a) {
  std::string s = "(" + p.schemas[a.schema].name;
  for (int obj : a.binding) s += " " + p.objects.objects[obj].name;
  return s + ")";
}

namespace {

Atom substitute(const LiftedAtom& la, const std::vector<int>& binding) {
  Atom a;
  a.pred = la.pred;
  a.args.reserve(la.args.size());
  for (int v : la.args) a.args.push_back(binding[v]);
  return a;
}

std::vector<Atom> substitute_sorted(const std::vector<LiftedAtom>& atoms,
                                    const std::vector<int>& binding) {
  std::vector<Atom> out;
  out.reserve(atoms.size());
  for (const auto& la : atoms) out.push_back(substitute(la, binding));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Objects compatible with each parameter type, in canonical object order.
std::vector<std::vector<int>> candidate_objects(const Problem& p, const ActionSchema& schema) {
  std::vector<std::vector<int>> cands(schema.params.size());
  for (std::size_t i = 0; i < schema.params.size(); ++i) {
    for (int o = 0; o < p.objects.size(); ++o) {
      if (p.objects.is_subtype(p.objects.objects[o].type, schema.params[i].type)) {
        cands[i].push_back(o);
      }
    }
  }
  return cands;
}

}  // namespace

std::vector<GroundAction> ground_actions(const Problem& p) {
  std::vector<GroundAction> out;
  for (std::size_t si = 0; si < p.schemas.size(); ++si) {
    const ActionSchema& schema = p.schemas[si];
    const auto cands = candidate_objects(p, schema);
    const int n = static_cast<int>(schema.params.size());
    bool empty = false;
    for (const auto& c : cands) empty |= c.empty();
    if (empty) continue;

    std::vector<int> cursor(n, 0);
    while (true) {
      GroundAction a;
      a.schema = static_cast<int>(si);
      a.binding.resize(n);
      for (int i = 0; i < n; ++i) a.binding[i] = cands[i][cursor[i]];
      a.pre = substitute_sorted(schema.pre, a.binding);
      a.add = substitute_sorted(schema.add, a.binding);
      a.del = substitute_sorted(schema.del, a.binding);
      out.push_back(std::move(a));

      int i = n - 1;  // rightmost parameter advances fastest -> lexicographic bindings
      for (; i >= 0; --i) {
        if (++cursor[i] < static_cast<int>(cands[i].size())) break;
        cursor[i] = 0;
      }
      if (i < 0) break;  // zero-parameter schemas ground exactly once
    }
  }
  return out;
}

bool applicable(const State& s, const GroundAction& a) {
  return s.contains_all(a.pre);
}

State apply(const State& s, const GroundAction& a) {
  if (!applicable(s, a)) {
    throw Error("apply: action not applicable");
  }
  std::vector<Atom> kept;
  kept.reserve(s.atoms.size() + a.add.size());
  std::set_difference(s.atoms.begin(), s.atoms.end(), a.del.begin(), a.del.end(),
                      std::back_inserter(kept));
  std::vector<Atom> out;
  out.reserve(kept.size() + a.add.size());
  std::set_union(kept.begin(), kept.end(), a.add.begin(), a.add.end(), std::back_inserter(out));
  return State{std::move(out)};
}

bool is_goal(const State& s, const std::vector<Atom>& goal) {
  return s.contains_all(goal);
}

PlanCheck validate_plan(const Problem& p, const std::vector<GroundAction>& plan) {
  PlanCheck result;
  result.length = static_cast<int>(plan.size());
  State s = p.init;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (!applicable(s, plan[i])) {
      result.failure_index = static_cast<int>(i);
      return result;
    }
    s = apply(s, plan[i]);
  }
  if (!is_goal(s, p.goal)) {
    result.failure_index = result.length;
    return result;
  }
  result.valid = true;
  return result;
}

// ---------------------------------------------------------------------------

GroundTask::GroundTask(Problem p) : problem(std::move(p)) {
  actions = ground_actions(problem);

  pred_is_static.assign(problem.predicates.size(), 1);
  for (const auto& schema : problem.schemas) {
    for (const auto& la : schema.add) pred_is_static[la.pred] = 0;
    for (const auto& la : schema.del) pred_is_static[la.pred] = 0;
  }

  // All type-consistent ground atoms; predicate-major, args in object order,
  // so the vector is already sorted.
  for (std::size_t pi = 0; pi < problem.predicates.size(); ++pi) {
    const Predicate& pred = problem.predicates[pi];
    std::vector<std::vector<int>> cands(pred.param_types.size());
    bool empty = false;
    for (std::size_t t = 0; t < pred.param_types.size(); ++t) {
      for (int o = 0; o < problem.objects.size(); ++o) {
        if (problem.objects.is_subtype(problem.objects.objects[o].type, pred.param_types[t])) {
          cands[t].push_back(o);
        }
      }
      empty |= cands[t].empty();
    }
    if (empty) continue;
    const int n = pred.arity();
    std::vector<int> cursor(n, 0);
    while (true) {
      Atom a;
      a.pred = static_cast<int>(pi);
      a.args.resize(n);
      for (int i = 0; i < n; ++i) a.args[i] = cands[i][cursor[i]];
      atom_universe.push_back(std::move(a));
      int i = n - 1;
      for (; i >= 0; --i) {
        if (++cursor[i] < static_cast<int>(cands[i].size())) break;
        cursor[i] = 0;
      }
      if (i < 0) break;
    }
  }
  atom_index_.reserve(atom_universe.size() * 2);
  for (std::size_t i = 0; i < atom_universe.size(); ++i) {
    atom_index_.emplace(atom_universe[i], static_cast<int>(i));
  }

  auto ids_of = [this](const std::vector<Atom>& atoms, bool want_static) {
    std::vector<std::int32_t> ids;
    for (const Atom& a : atoms) {
      if (static_cast<bool>(pred_is_static[a.pred]) != want_static) continue;
      ids.push_back(static_cast<std::int32_t>(atom_id(a)));
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  };

  init_ids = ids_of(problem.init.atoms, false);
  static_init_ids = ids_of(problem.init.atoms, true);

  std::vector<std::int32_t> static_goal = ids_of(problem.goal, true);
  static_goal_satisfied = std::includes(static_init_ids.begin(), static_init_ids.end(),
                                        static_goal.begin(), static_goal.end());
  goal_ids = ids_of(problem.goal, false);

  for (std::size_t ai = 0; ai < actions.size(); ++ai) {
    const GroundAction& a = actions[ai];
    std::vector<std::int32_t> static_pre = ids_of(a.pre, true);
    // static atoms never change, so unsatisfied static preconditions prune
    // the action from search entirely
    if (!std::includes(static_init_ids.begin(), static_init_ids.end(), static_pre.begin(),
                       static_pre.end())) {
      continue;
    }
    ActiveAction act;
    act.action = static_cast<std::int32_t>(ai);
    act.pre = ids_of(a.pre, false);
    act.add = ids_of(a.add, false);
    act.del = ids_of(a.del, false);
    active.push_back(std::move(act));
  }
}

int GroundTask::atom_id(const Atom& a) const {
  auto it = atom_index_.find(a);
  if (it == atom_index_.end()) throw Error("atom not in universe: " + problem.atom_to_string(a));
  return it->second;
}

bool GroundTask::applicable(const IdState& s, const ActiveAction& a) const {
  return std::includes(s.begin(), s.end(), a.pre.begin(), a.pre.end());
}

IdState GroundTask::apply(const IdState& s, const ActiveAction& a) const {
  IdState kept;
  kept.reserve(s.size() + a.add.size());
  std::set_difference(s.begin(), s.end(), a.del.begin(), a.del.end(), std::back_inserter(kept));
  IdState out;
  out.reserve(kept.size() + a.add.size());
  std::set_union(kept.begin(), kept.end(), a.add.begin(), a.add.end(), std::back_inserter(out));
  return out;
}

bool GroundTask::is_goal(const IdState& s) const {
  return static_goal_satisfied &&
         std::includes(s.begin(), s.end(), goal_ids.begin(), goal_ids.end());
}

std::vector<Atom> GroundTask::full_state_atoms(const IdState& s) const {
  std::vector<std::int32_t> merged;
  merged.reserve(s.size() + static_init_ids.size());
  std::merge(s.begin(), s.end(), static_init_ids.begin(), static_init_ids.end(),
             std::back_inserter(merged));
  std::vector<Atom> out;
  out.reserve(merged.size());
  for (std::int32_t id : merged) out.push_back(atom_universe[id]);
  return out;
}

int GroundTask::find_action(const std::string& schema,
                            const std::vector<std::string>& args) const {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const GroundAction& a = actions[i];
    if (problem.schemas[a.schema].name != schema) continue;
    if (a.binding.size() != args.size()) continue;
    bool match = true;
    for (std::size_t j = 0; j < args.size(); ++j) {
      if (problem.objects.objects[a.binding[j]].name != args[j]) {
        match = false;
        break;
      }
    }
    if (match) return static_cast<int>(i);
  }
  return -1;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json atom_json(const Problem& p, const Atom& a) {
  nlohmann::json j = nlohmann::json::array();
  j.push_back(p.predicates[a.pred].name);
  for (int arg : a.args) j.push_back(p.objects.objects[arg].name);
  return j;
}

}  // namespace

std::string problem_to_json(const Problem& p) {
  nlohmann::json j;
  j["domain"] = p.domain_name;
  j["problem"] = p.problem_name;
  j["predicates"] = nlohmann::json::array();
  for (const auto& pred : p.predicates) {
    j["predicates"].push_back({{"name", pred.name}, {"param_types", pred.param_types}});
  }
  j["objects"] = nlohmann::json::array();
  for (const auto& o : p.objects.objects) {
    j["objects"].push_back({{"name", o.name}, {"type", o.type}});
  }
  j["schemas"] = nlohmann::json::array();
  for (const auto& s : p.schemas) j["schemas"].push_back(s.name);
  j["init"] = nlohmann::json::array();
  for (const auto& a : p.init.atoms) j["init"].push_back(atom_json(p, a));
  j["goal"] = nlohmann::json::array();
  for (const auto& a : p.goal) j["goal"].push_back(atom_json(p, a));
  return j.dump();
}

std::string state_to_json(const Problem& p, const State& s) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& a : s.atoms) j.push_back(atom_json(p, a));
  return j.dump();
}

std::string plan_to_json(const Problem& p, const std::vector<GroundAction>& plan) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& a : plan) {
    nlohmann::json step = nlohmann::json::array();
    step.push_back(p.schemas[a.schema].name);
    for (int obj : a.binding) step.push_back(p.objects.objects[obj].name);
    j.push_back(step);
  }
  return j.dump();
}

namespace {

void write_typed_names(std::ostringstream& os, const std::vector<TypedName>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) os << " ";
    os << names[i].name << " - " << names[i].type;
  }
}

void write_lifted(std::ostringstream& os, const Problem& p, const ActionSchema& schema,
                  const LiftedAtom& la) {
  os << "(" << p.predicates[la.pred].name;
  for (int v : la.args) os << " ?" << schema.params[v].name;
  os << ")";
}

}  // namespace

std::string domain_to_pddl(const Problem& p) {
  std::ostringstream os;
  os << "(define (domain " << p.domain_name << ")\n";
  os << "  (:requirements :strips :typing)\n";
  if (!p.objects.types.empty()) {
    os << "  (:types";
    for (const auto& [child, parent] : p.objects.types) os << " " << child << " - " << parent;
    os << ")\n";
  }
  os << "  (:predicates\n";
  for (const auto& pred : p.predicates) {
    os << "    (" << pred.name;
    for (std::size_t i = 0; i < pred.param_types.size(); ++i) {
      os << " ?x" << i << " - " << pred.param_types[i];
    }
    os << ")\n";
  }
  os << "  )\n";
  for (const auto& schema : p.schemas) {
    os << "  (:action " << schema.name << "\n    :parameters (";
    for (std::size_t i = 0; i < schema.params.size(); ++i) {
      if (i) os << " ";
      os << "?" << schema.params[i].name << " - " << schema.params[i].type;
    }
    os << ")\n    :precondition (and";
    for (const auto& la : schema.pre) {
      os << " ";
      write_lifted(os, p, schema, la);
    }
    os << ")\n    :effect (and";
    for (const auto& la : schema.add) {
      os << " ";
      write_lifted(os, p, schema, la);
    }
    for (const auto& la : schema.del) {
      os << " (not ";
      write_lifted(os, p, schema, la);
      os << ")";
    }
    os << ")\n  )\n";
  }
  os << ")\n";
  return os.str();
}

std::string problem_to_pddl(const Problem& p) {
  std::ostringstream os;
  os << "(define (problem " << p.problem_name << ")\n";
  os << "  (:domain " << p.domain_name << ")\n";
  os << "  (:objects ";
  write_typed_names(os, p.objects.objects);
  os << ")\n  (:init\n";
  for (const auto& a : p.init.atoms) os << "    " << p.atom_to_string(a) << "\n";
  os << "  )\n  (:goal (and";
  for (const auto& a : p.goal) os << " " << p.atom_to_string(a);
  os << "))\n)\n";
  return os.str();
}

}  // namespace symplan

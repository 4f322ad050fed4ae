#include "symplan/tokenizer.hpp"

#include <algorithm>
#include <limits>

#include "json.hpp"

namespace symplan {

Vocabulary Vocabulary::build(const Problem& domain_instance, int max_objects) {
  Vocabulary v;
  v.names = {"<pad>", "<bos>", "<eos>", "<start>", "<goal>", "<action>"};
  v.n_preds = static_cast<int>(domain_instance.predicates.size());
  v.first_pred = static_cast<int>(v.names.size());
  for (const auto& p : domain_instance.predicates) {
    v.names.push_back(p.name);
    v.pred_arity.push_back(p.arity());
    v.max_arity = std::max(v.max_arity, p.arity());
  }
  v.first_goal_pred = static_cast<int>(v.names.size());
  for (const auto& p : domain_instance.predicates) v.names.push_back("goal_" + p.name);
  v.first_action = static_cast<int>(v.names.size());
  v.n_actions = static_cast<int>(domain_instance.schemas.size());
  for (const auto& s : domain_instance.schemas) {
    v.names.push_back(s.name);
    v.action_arity.push_back(static_cast<int>(s.params.size()));
  }
  v.first_object = static_cast<int>(v.names.size());
  v.n_objects = max_objects;
  for (int i = 0; i < max_objects; ++i) v.names.push_back("obj_" + std::to_string(i));
  for (int i = 0; i < static_cast<int>(v.names.size()); ++i) v.ids[v.names[i]] = i;
  return v;
}

int Vocabulary::goalify_token(int pred_token) const {
  if (is_goal_pred(pred_token)) {
    throw Error("goalify: '" + names[pred_token] + "' is already a goal predicate");
  }
  if (!is_pred(pred_token)) {
    throw Error("goalify: token " + std::to_string(pred_token) + " is not a predicate");
  }
  return first_goal_pred + (pred_token - first_pred);
}

std::string Vocabulary::to_json() const {
  nlohmann::json j;
  j["names"] = names;
  j["n_preds"] = n_preds;
  j["n_actions"] = n_actions;
  j["n_objects"] = n_objects;
  j["max_arity"] = max_arity;
  j["pred_arity"] = pred_arity;
  j["action_arity"] = action_arity;
  nlohmann::json t;  // explicit token -> id map for portability
  for (std::size_t i = 0; i < names.size(); ++i) t[names[i]] = i;
  j["token_ids"] = t;
  return j.dump();
}

Vocabulary Vocabulary::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  Vocabulary v;
  v.names = j.at("names").get<std::vector<std::string>>();
  v.n_preds = j.at("n_preds").get<int>();
  v.n_actions = j.at("n_actions").get<int>();
  v.n_objects = j.at("n_objects").get<int>();
  v.max_arity = j.at("max_arity").get<int>();
  v.pred_arity = j.at("pred_arity").get<std::vector<int>>();
  v.action_arity = j.at("action_arity").get<std::vector<int>>();
  v.first_pred = 6;
  v.first_goal_pred = v.first_pred + v.n_preds;
  v.first_action = v.first_goal_pred + v.n_preds;
  v.first_object = v.first_action + v.n_actions;
  for (int i = 0; i < static_cast<int>(v.names.size()); ++i) v.ids[v.names[i]] = i;
  return v;
}

RenamingMap RenamingMap::identity(int n_objects) {
  RenamingMap m;
  m.obj_to_slot.resize(n_objects);
  for (int i = 0; i < n_objects; ++i) m.obj_to_slot[i] = i;
  return m;
}

std::vector<std::int32_t> RenamingMap::slot_to_obj(int n_slots) const {
  std::vector<std::int32_t> inv(n_slots, -1);
  for (std::size_t o = 0; o < obj_to_slot.size(); ++o) {
    inv[obj_to_slot[o]] = static_cast<std::int32_t>(o);
  }
  return inv;
}

RenamingMode renaming_mode_from_name(const std::string& name) {
  if (name == "identity") return RenamingMode::identity;
  if (name == "rename_one") return RenamingMode::rename_one;
  if (name == "rename_both") return RenamingMode::rename_both;
  throw Error("unknown renaming mode '" + name + "'");
}

const char* renaming_mode_name(RenamingMode m) {
  switch (m) {
    case RenamingMode::identity: return "identity";
    case RenamingMode::rename_one: return "rename_one";
    case RenamingMode::rename_both: return "rename_both";
  }
  return "?";
}

std::pair<RenamingMap, RenamingMap> make_renaming(int n_objects, RenamingMode mode,
                                                  int vocab_objects, Rng& rng) {
  if (n_objects > vocab_objects) {
    throw Error("too many objects: " + std::to_string(n_objects) + " > vocabulary " +
                std::to_string(vocab_objects));
  }
  auto random_map = [&]() {
    RenamingMap m;
    auto slots = rng.sample_without_replacement(vocab_objects, n_objects);
    m.obj_to_slot.assign(slots.begin(), slots.end());
    return m;
  };
  switch (mode) {
    case RenamingMode::identity:
      return {RenamingMap::identity(n_objects), RenamingMap::identity(n_objects)};
    case RenamingMode::rename_one:
      return {RenamingMap::identity(n_objects), random_map()};
    case RenamingMode::rename_both: {
      RenamingMap a = random_map();
      RenamingMap b = random_map();
      return {std::move(a), std::move(b)};
    }
  }
  throw Error("bad renaming mode");
}

std::uint64_t count_renamings(int n_objects, int vocab_objects) {
  std::uint64_t total = 1;
  for (int i = 0; i < n_objects; ++i) {
    const std::uint64_t factor = static_cast<std::uint64_t>(vocab_objects - i);
    if (total > std::numeric_limits<std::uint64_t>::max() / factor) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    total *= factor;
  }
  return total;
}

namespace {

// (pred token, raw object args): canonical, renaming-independent sort key
struct RawAtomKey {
  int pred_token;
  const std::vector<int>* args;
  bool operator<(const RawAtomKey& o) const {
    if (pred_token != o.pred_token) return pred_token < o.pred_token;
    return *args < *o.args;
  }
};

}  // namespace

EncodedAtoms encode_atoms(const Vocabulary& vocab, const Problem& p,
                          const std::vector<Atom>& state_atoms, const std::vector<Atom>& goal_atoms,
                          const RenamingMap& sigma) {
  if (vocab.n_preds != static_cast<int>(p.predicates.size())) {
    throw Error("encode_atoms: vocabulary built for a different domain");
  }
  std::vector<RawAtomKey> keys;
  keys.reserve(state_atoms.size() + goal_atoms.size());
  for (const Atom& a : state_atoms) keys.push_back({vocab.pred_token(a.pred), &a.args});
  for (const Atom& a : goal_atoms) {
    keys.push_back({vocab.goalify_token(vocab.pred_token(a.pred)), &a.args});
  }
  std::sort(keys.begin(), keys.end());

  EncodedAtoms out;
  out.width = vocab.atom_width();
  out.n_atoms = static_cast<int>(keys.size());
  out.tokens.assign(static_cast<std::size_t>(out.n_atoms) * out.width, vocab.pad);
  for (int i = 0; i < out.n_atoms; ++i) {
    std::int32_t* row = out.row(i);
    row[0] = keys[i].pred_token;
    const auto& args = *keys[i].args;
    if (static_cast<int>(args.size()) > vocab.max_arity) {
      throw Error("encode_atoms: arity overflow");
    }
    for (std::size_t k = 0; k < args.size(); ++k) {
      const int obj = args[k];
      if (obj < 0 || obj >= static_cast<int>(sigma.obj_to_slot.size())) {
        throw Error("encode_atoms: unmapped object index " + std::to_string(obj));
      }
      row[1 + k] = vocab.object_token(sigma.obj_to_slot[obj]);
    }
  }
  return out;
}

std::vector<std::int32_t> encode_plan(const Vocabulary& vocab, const Problem& p,
                                      const std::vector<const GroundAction*>& plan,
                                      const RenamingMap& sigma) {
  std::vector<std::int32_t> out{static_cast<std::int32_t>(vocab.bos)};
  for (const GroundAction* a : plan) {
    out.push_back(vocab.action_token(a->schema));
    for (int obj : a->binding) out.push_back(vocab.object_token(sigma.obj_to_slot[obj]));
  }
  out.push_back(static_cast<std::int32_t>(vocab.eos));
  (void)p;
  return out;
}

FlatEncoding encode_plangpt(const Vocabulary& vocab, const Problem& p,
                            const std::vector<Atom>& state_atoms,
                            const std::vector<Atom>& goal_atoms,
                            const std::vector<const GroundAction*>& plan,
                            const RenamingMap& sigma) {
  (void)p;
  FlatEncoding out;
  auto push_atoms = [&](std::vector<Atom> atoms) {
    std::sort(atoms.begin(), atoms.end());  // pre-sorted canonical order
    for (const Atom& a : atoms) {
      out.tokens.push_back(vocab.pred_token(a.pred));
      for (int obj : a.args) out.tokens.push_back(vocab.object_token(sigma.obj_to_slot[obj]));
    }
  };
  out.tokens.push_back(vocab.start);
  push_atoms(state_atoms);
  out.tokens.push_back(vocab.goal_marker);
  push_atoms(goal_atoms);
  out.action_marker_pos = static_cast<int>(out.tokens.size());
  out.tokens.push_back(vocab.action_marker);
  for (const GroundAction* a : plan) {
    out.tokens.push_back(vocab.action_token(a->schema));
    for (int obj : a->binding) out.tokens.push_back(vocab.object_token(sigma.obj_to_slot[obj]));
  }
  out.tokens.push_back(vocab.eos);
  return out;
}

std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  return perm;
}

EncodedAtoms apply_permutation(const EncodedAtoms& atoms, const std::vector<int>& perm) {
  EncodedAtoms out;
  out.width = atoms.width;
  out.n_atoms = atoms.n_atoms;
  out.tokens.resize(atoms.tokens.size());
  for (int i = 0; i < atoms.n_atoms; ++i) {
    std::copy(atoms.row(perm[i]), atoms.row(perm[i]) + atoms.width, out.row(i));
  }
  return out;
}

EncodedAtoms shuffle_atoms(const EncodedAtoms& atoms, Rng& rng) {
  return apply_permutation(atoms, random_permutation(atoms.n_atoms, rng));
}

DecodedAtoms decode_atoms(const Vocabulary& vocab, const Problem& p, const EncodedAtoms& atoms,
                          const RenamingMap& sigma) {
  const auto inv = sigma.slot_to_obj(vocab.n_objects);
  DecodedAtoms out;
  for (int i = 0; i < atoms.n_atoms; ++i) {
    const std::int32_t* row = atoms.row(i);
    const bool goal = vocab.is_goal_pred(row[0]);
    if (!goal && !vocab.is_pred(row[0])) {
      throw Error("decode_atoms: row does not start with a predicate token");
    }
    Atom a;
    a.pred = row[0] - (goal ? vocab.first_goal_pred : vocab.first_pred);
    const int arity = vocab.pred_arity[a.pred];
    for (int k = 0; k < arity; ++k) {
      const std::int32_t t = row[1 + k];
      if (!vocab.is_object(t)) throw Error("decode_atoms: expected object token");
      const std::int32_t obj = inv[t - vocab.first_object];
      if (obj < 0) throw Error("decode_atoms: object slot not mapped by renaming");
      a.args.push_back(obj);
    }
    for (int k = 1 + arity; k < atoms.width; ++k) {
      if (row[k] != vocab.pad) throw Error("decode_atoms: expected padding");
    }
    (goal ? out.goal : out.state).push_back(std::move(a));
  }
  (void)p;
  return out;
}

DecodedPlan decode_plan_tokens(const Vocabulary& vocab, const Problem& p,
                               const std::vector<std::int32_t>& tokens,
                               const RenamingMap& sigma) {
  (void)p;
  const auto inv = sigma.slot_to_obj(vocab.n_objects);
  DecodedPlan out;
  std::size_t i = 0;
  if (i < tokens.size() && tokens[i] == vocab.bos) ++i;
  while (i < tokens.size()) {
    if (tokens[i] == vocab.eos) return out;
    if (!vocab.is_action(tokens[i])) {
      out.malformed = true;
      out.error = "expected action name token at position " + std::to_string(i);
      return out;
    }
    const int schema = tokens[i] - vocab.first_action;
    const int arity = vocab.action_arity[schema];
    if (i + arity >= tokens.size()) {
      out.malformed = true;
      out.error = "truncated action tuple";
      return out;
    }
    std::vector<int> args;
    for (int k = 1; k <= arity; ++k) {
      const std::int32_t t = tokens[i + k];
      if (!vocab.is_object(t)) {
        out.malformed = true;
        out.error = "expected object token at position " + std::to_string(i + k);
        return out;
      }
      args.push_back(inv[t - vocab.first_object]);  // -1 when outside the instance
    }
    out.actions.emplace_back(schema, std::move(args));
    i += 1 + arity;
  }
  out.malformed = true;  // ran out of tokens with no EOS
  out.error = "missing <eos>";
  return out;
}

TokenizedPair build_pair(const LabeledSample& sample, const Vocabulary& vocab, RenamingMode mode,
                         bool with_plan, bool with_flat, Rng& rng, bool shuffle) {
  const Expansion& e = *sample.expansion;
  const Problem& p = e.task.problem;
  TokenizedPair pair;
  pair.h_star = sample.h_star;
  auto [sa, sb] = make_renaming(p.objects.size(), mode, vocab.n_objects, rng);
  pair.sigma_a = std::move(sa);
  pair.sigma_b = std::move(sb);

  const std::vector<Atom> state_atoms = e.task.full_state_atoms(e.states[sample.state]);
  pair.xa = encode_atoms(vocab, p, state_atoms, p.goal, pair.sigma_a);
  pair.xb = encode_atoms(vocab, p, state_atoms, p.goal, pair.sigma_b);
  if (shuffle) {
    // one shared shuffle keeps the pair positionally aligned
    const auto perm = random_permutation(pair.xa.n_atoms, rng);
    pair.xa = apply_permutation(pair.xa, perm);
    pair.xb = apply_permutation(pair.xb, perm);
  }

  if (with_plan || with_flat) {
    std::vector<const GroundAction*> plan;
    plan.reserve(sample.plan.size());
    for (std::int32_t ai : sample.plan) plan.push_back(&e.task.actions[ai]);
    if (with_plan) {
      pair.ya = encode_plan(vocab, p, plan, pair.sigma_a);
      pair.yb = encode_plan(vocab, p, plan, pair.sigma_b);
    }
    if (with_flat) {
      pair.flat_a = encode_plangpt(vocab, p, state_atoms, p.goal, plan, pair.sigma_a);
      pair.flat_b = encode_plangpt(vocab, p, state_atoms, p.goal, plan, pair.sigma_b);
    }
  }
  return pair;
}

}  // namespace symplan

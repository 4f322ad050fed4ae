#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "symplan/error.hpp"

namespace symplan {

// Lifted STRIPS task representation. Problems are normalized on construction:
// identifiers lower-cased, predicates/objects/schemas sorted by name, so index
// order coincides with lexicographic name order and plain integer comparisons
// give the canonical atom/state order everywhere downstream.

struct Predicate {
  std::string name;
  std::vector<std::string> param_types;
  int arity() const { return static_cast<int>(param_types.size()); }
};

struct TypedName {
  std::string name;
  std::string type;
};

struct ObjectTable {
  std::vector<TypedName> objects;                          // sorted by name
  std::vector<std::pair<std::string, std::string>> types;  // child -> parent
  std::unordered_map<std::string, int> index;

  int find(const std::string& name) const {
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
  }
  bool type_exists(const std::string& t) const;
  // true if t == ancestor or ancestor reachable through parent chain
  bool is_subtype(const std::string& t, const std::string& ancestor) const;
  int size() const { return static_cast<int>(objects.size()); }
};

struct Atom {
  int pred = -1;
  std::vector<int> args;  // object indices
  auto operator<=>(const Atom&) const = default;
};

struct AtomHash {
  std::size_t operator()(const Atom& a) const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mixin = [&h](std::uint64_t v) {
      h ^= v;
      h *= 1099511628211ULL;
    };
    mixin(static_cast<std::uint64_t>(a.pred));
    for (int x : a.args) mixin(static_cast<std::uint64_t>(x));
    return static_cast<std::size_t>(h);
  }
};

// Atom over schema parameters (args index into ActionSchema::params).
struct LiftedAtom {
  int pred = -1;
  std::vector<int> args;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> params;
  std::vector<LiftedAtom> pre, add, del;
};

// Canonical sorted set of ground atoms.
struct State {
  std::vector<Atom> atoms;

  static State from(std::vector<Atom> atoms);
  bool contains(const Atom& a) const;
  bool contains_all(const std::vector<Atom>& subset) const;
  auto operator<=>(const State&) const = default;
};

struct Problem {
  std::string domain_name;
  std::string problem_name;
  std::vector<Predicate> predicates;    // sorted by name
  ObjectTable objects;                  // sorted by name
  std::vector<ActionSchema> schemas;    // sorted by name
  State init;
  std::vector<Atom> goal;               // sorted

  int pred_index(const std::string& name) const;
  int max_arity() const;
  std::string atom_to_string(const Atom& a) const;
};

struct GroundAction {
  int schema = -1;
  std::vector<int> binding;             // param index -> object index
  std::vector<Atom> pre, add, del;      // sorted
};

std::string action_to_string(const Problem& p, const GroundAction& a);

// All type-consistent groundings, ordered by (schema name, lexicographic
// binding). Deterministic.
std::vector<GroundAction> ground_actions(const Problem& p);

bool applicable(const State& s, const GroundAction& a);
// s' = (s \ del(a)) ∪ add(a); throws Error if not applicable.
State apply(const State& s, const GroundAction& a);
bool is_goal(const State& s, const std::vector<Atom>& goal);

struct PlanCheck {
  bool valid = false;
  int length = 0;
  std::optional<int> failure_index;  // first inapplicable step, or plan length on goal failure
};

PlanCheck validate_plan(const Problem& p, const std::vector<GroundAction>& plan);

// ---------------------------------------------------------------------------
// Interned ground task: atoms as dense ids, split into static predicates
// (never added or deleted) and dynamic ones. Search-facing modules work on
// sorted id vectors; `actions` keeps the full spec-visible grounding while
// `active` holds the dynamic parts of actions whose static preconditions hold
// in the initial state.

using IdState = std::vector<std::int32_t>;  // sorted dynamic atom ids

constexpr std::int32_t kNoDistance = -1;  // h* for states that cannot reach a goal

struct IdStateHash {
  std::size_t operator()(const IdState& s) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::int32_t x : s) {
      h ^= static_cast<std::uint64_t>(x);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

struct GroundTask {
  Problem problem;
  std::vector<GroundAction> actions;   // full grounding, spec order
  std::vector<Atom> atom_universe;     // all type-consistent ground atoms, sorted
  std::vector<char> pred_is_static;

  struct ActiveAction {
    std::int32_t action;               // index into `actions`
    std::vector<std::int32_t> pre, add, del;  // dynamic atom ids, sorted
  };
  std::vector<ActiveAction> active;

  IdState init_ids;                     // dynamic atoms of init
  std::vector<std::int32_t> static_init_ids;
  std::vector<std::int32_t> goal_ids;   // dynamic goal atoms
  bool static_goal_satisfied = true;    // static goal atoms hold in init

  GroundTask() = default;
  explicit GroundTask(Problem p);

  int atom_id(const Atom& a) const;
  const Atom& atom(std::int32_t id) const { return atom_universe[id]; }

  bool applicable(const IdState& s, const ActiveAction& a) const;
  IdState apply(const IdState& s, const ActiveAction& a) const;
  bool is_goal(const IdState& s) const;

  // Dynamic state + static atoms, as canonical sorted symbolic atoms.
  std::vector<Atom> full_state_atoms(const IdState& s) const;

  // Index of the ground action with this schema name and argument objects,
  // -1 if absent. Used by policies and decoders.
  int find_action(const std::string& schema, const std::vector<std::string>& args) const;

 private:
  std::unordered_map<Atom, int, AtomHash> atom_index_;
};

// Canonical JSON for debugging dumps (atoms as ["pred","arg1",...]).
std::string problem_to_json(const Problem& p);
std::string state_to_json(const Problem& p, const State& s);
std::string plan_to_json(const Problem& p, const std::vector<GroundAction>& plan);

// Canonical PDDL text; parse(to_pddl(p)) is equivalent to p.
std::string domain_to_pddl(const Problem& p);
std::string problem_to_pddl(const Problem& p);

}  // namespace symplan

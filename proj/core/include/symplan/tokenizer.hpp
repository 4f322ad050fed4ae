#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "symplan/expansion.hpp"
#include "symplan/rng.hpp"
#include "symplan/strips.hpp"

namespace symplan {

// Symbolic token vocabulary for one domain. Layout (dense, stable):
//   PAD BOS EOS START GOAL ACTION | predicates | goal-predicates | action
//   names | obj_0..obj_{V-1}
// Object tokens form a single shared pool across types.
struct Vocabulary {
  std::vector<std::string> names;
  std::unordered_map<std::string, int> ids;

  int pad = 0, bos = 1, eos = 2, start = 3, goal_marker = 4, action_marker = 5;
  int first_pred = 6;
  int n_preds = 0;
  int first_goal_pred = 0;
  int first_action = 0;
  int n_actions = 0;
  int first_object = 0;
  int n_objects = 0;  // V, default 123
  int max_arity = 0;  // m over the domain's predicates
  std::vector<int> pred_arity;
  std::vector<int> action_arity;

  static constexpr int kDefaultMaxObjects = 123;

  static Vocabulary build(const Problem& domain_instance, int max_objects = kDefaultMaxObjects);

  int size() const { return static_cast<int>(names.size()); }
  int atom_width() const { return 1 + max_arity; }
  int pred_token(int ordinal) const { return first_pred + ordinal; }
  int goal_pred_token(int ordinal) const { return first_goal_pred + ordinal; }
  int action_token(int ordinal) const { return first_action + ordinal; }
  int object_token(int slot) const { return first_object + slot; }
  bool is_pred(int t) const { return t >= first_pred && t < first_pred + n_preds; }
  bool is_goal_pred(int t) const { return t >= first_goal_pred && t < first_goal_pred + n_preds; }
  bool is_action(int t) const { return t >= first_action && t < first_action + n_actions; }
  bool is_object(int t) const { return t >= first_object && t < first_object + n_objects; }

  // base predicate token -> goal predicate token; throws on unknown
  // predicates and on goal-of-goal application.
  int goalify_token(int pred_token) const;

  std::string to_json() const;
  static Vocabulary from_json(const std::string& text);
};

// Injective instance-object -> object-slot assignment. Canonical object order
// is the problem's sorted object order.
struct RenamingMap {
  std::vector<std::int32_t> obj_to_slot;

  static RenamingMap identity(int n_objects);
  std::vector<std::int32_t> slot_to_obj(int n_slots) const;  // -1 where unmapped
};

enum class RenamingMode { identity, rename_one, rename_both };
RenamingMode renaming_mode_from_name(const std::string& name);
const char* renaming_mode_name(RenamingMode m);

// rename_one fixes sigma to the canonical identity assignment and randomizes
// sigma'; rename_both randomizes both independently. Throws when n > V.
std::pair<RenamingMap, RenamingMap> make_renaming(int n_objects, RenamingMode mode, int vocab_objects,
                                                  Rng& rng);

// V! / (V-n)! saturating at uint64 max.
std::uint64_t count_renamings(int n_objects, int vocab_objects);

// Fixed-width atom token rows, row-major (n_atoms x width).
struct EncodedAtoms {
  std::vector<std::int32_t> tokens;
  int width = 0;
  int n_atoms = 0;

  std::int32_t* row(int i) { return tokens.data() + static_cast<std::size_t>(i) * width; }
  const std::int32_t* row(int i) const {
    return tokens.data() + static_cast<std::size_t>(i) * width;
  }
};

// State atoms plus goalified goal atoms in canonical (renaming-independent)
// order. Atom shuffling is applied separately.
EncodedAtoms encode_atoms(const Vocabulary& vocab, const Problem& p,
                          const std::vector<Atom>& state_atoms, const std::vector<Atom>& goal_atoms,
                          const RenamingMap& sigma);

// BOS, then (action name, argument objects) per step, then EOS.
std::vector<std::int32_t> encode_plan(const Vocabulary& vocab, const Problem& p,
                                      const std::vector<const GroundAction*>& plan,
                                      const RenamingMap& sigma);

// PlanGPT-style flat stream: START state atoms GOAL goal atoms ACTION plan
// EOS, atoms pre-sorted canonically, no atom padding. Returns the stream and
// the index of the ACTION marker.
struct FlatEncoding {
  std::vector<std::int32_t> tokens;
  int action_marker_pos = 0;
};
FlatEncoding encode_plangpt(const Vocabulary& vocab, const Problem& p,
                            const std::vector<Atom>& state_atoms,
                            const std::vector<Atom>& goal_atoms,
                            const std::vector<const GroundAction*>& plan,
                            const RenamingMap& sigma);

std::vector<int> random_permutation(int n, Rng& rng);
EncodedAtoms apply_permutation(const EncodedAtoms& atoms, const std::vector<int>& perm);
// uniform shuffle; training applies the same permutation to both pair members
EncodedAtoms shuffle_atoms(const EncodedAtoms& atoms, Rng& rng);

// ---------------------------------------------------------------------------
// Decode helpers: exact inverses of the encoders on their images.

struct DecodedAtoms {
  std::vector<Atom> state;
  std::vector<Atom> goal;
};
// throws Error on malformed rows or unmapped objects
DecodedAtoms decode_atoms(const Vocabulary& vocab, const Problem& p, const EncodedAtoms& atoms,
                          const RenamingMap& sigma);

struct DecodedPlan {
  bool malformed = false;
  std::string error;
  // (schema ordinal, object indices) per action; valid only when !malformed
  std::vector<std::pair<int, std::vector<int>>> actions;
};
// Tokens between BOS and EOS parsed into action tuples. Unknown object slots
// surface as object index -1 (the tuple shape is still an action).
DecodedPlan decode_plan_tokens(const Vocabulary& vocab, const Problem& p,
                               const std::vector<std::int32_t>& tokens, const RenamingMap& sigma);

// ---------------------------------------------------------------------------
// Pair construction for training.

struct TokenizedPair {
  EncodedAtoms xa, xb;
  std::vector<std::int32_t> ya, yb;  // plan streams (plan mode)
  FlatEncoding flat_a, flat_b;       // decoder-only streams (plan mode)
  RenamingMap sigma_a, sigma_b;
  double h_star = 0.0;
};

// Tokenizes one sample twice under a fresh renaming pair, with one shared
// atom shuffle so positions align.
TokenizedPair build_pair(const LabeledSample& sample, const Vocabulary& vocab, RenamingMode mode,
                         bool with_plan, bool with_flat, Rng& rng, bool shuffle = true);

}  // namespace symplan

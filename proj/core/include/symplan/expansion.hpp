#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "symplan/rng.hpp"
#include "symplan/strips.hpp"

namespace symplan {

// Exhaustive reachable state space of one problem with exact goal distances.
// Immutable after construction; safe to share across threads.
struct Expansion {
  GroundTask task;
  std::string problem_id;
  std::vector<IdState> states;
  std::vector<std::int32_t> h_star;  // kNoDistance when no goal is reachable
  // forward edges: (index into task.active, successor state index)
  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> transitions;
  std::unordered_map<IdState, std::int32_t, IdStateHash> state_index;
  std::vector<std::int32_t> distances;  // distinct finite h* values, ascending
  std::vector<std::vector<std::int32_t>> states_at_distance;  // parallel to distances
  std::int32_t init_index = 0;

  std::int32_t index_of(const IdState& s) const {
    auto it = state_index.find(s);
    return it == state_index.end() ? -1 : it->second;
  }
  bool solvable() const { return !distances.empty(); }
  std::int32_t h_star_init() const { return h_star[init_index]; }
};

inline constexpr std::size_t kDefaultStateCap = 2'000'000;

// Forward BFS from init enumerates reachable states; backward BFS from the
// reachable goal states fills h*. Throws CapExceededError past the cap.
Expansion expand(GroundTask task, std::size_t state_cap = kDefaultStateCap,
                 std::string problem_id = "");
Expansion expand(const Problem& p, std::size_t state_cap = kDefaultStateCap,
                 std::string problem_id = "");

// h*(s) == 0 iff goal, else 1 + min over applicable successors; unreachable
// goals carry kNoDistance. Returns the first violated state index, if any.
std::optional<std::int32_t> bellman_violation(const Expansion& e);

struct LabeledSample {
  const Expansion* expansion = nullptr;
  std::int32_t state = -1;
  std::int32_t h_star = 0;
  std::vector<std::int32_t> plan;  // ground action indices (task.actions)
};

// Appendix-E sampling: problem uniform, then a uniformly random goal distance
// occurring in it, then a uniform state at that distance, then a stepwise
// uniform optimal plan.
LabeledSample sample_pair(const std::vector<const Expansion*>& expansions, Rng& rng);

enum class SampleMode { plan, heuristic };

// JSONL dump of `count` samples; deterministic for a fixed seed. Heuristic
// mode omits the plan field. A non-empty header (e.g. the config hash) is
// written as the first line.
void export_dataset(const std::vector<const Expansion*>& expansions, int count, SampleMode mode,
                    const std::string& out_file, Rng& rng, const std::string& header = "");

}  // namespace symplan

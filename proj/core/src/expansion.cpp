#include "symplan/expansion.hpp"

#include <algorithm>
#include <deque>
#include <fstream>

#include "json.hpp"

namespace symplan {

Expansion expand(GroundTask task, std::size_t state_cap, std::string problem_id) {
  Expansion e;
  e.task = std::move(task);
  e.problem_id = problem_id.empty() ? e.task.problem.problem_name : std::move(problem_id);

  e.states.push_back(e.task.init_ids);
  e.state_index.emplace(e.task.init_ids, 0);
  e.init_index = 0;

  std::deque<std::int32_t> frontier{0};
  while (!frontier.empty()) {
    const std::int32_t si = frontier.front();
    frontier.pop_front();
    if (static_cast<std::size_t>(si) >= e.transitions.size()) e.transitions.resize(si + 1);
    const IdState s = e.states[si];  // copy: e.states may reallocate below
    for (std::size_t ai = 0; ai < e.task.active.size(); ++ai) {
      const auto& act = e.task.active[ai];
      if (!e.task.applicable(s, act)) continue;
      IdState succ = e.task.apply(s, act);
      auto [it, inserted] = e.state_index.emplace(std::move(succ),
                                                  static_cast<std::int32_t>(e.states.size()));
      if (inserted) {
        if (e.states.size() >= state_cap) {
          throw CapExceededError("expansion cap (" + std::to_string(state_cap) +
                                 " states) exceeded on " + e.problem_id);
        }
        e.states.push_back(it->first);
        frontier.push_back(it->second);
      }
      e.transitions[si].emplace_back(static_cast<std::int32_t>(ai), it->second);
    }
  }
  e.transitions.resize(e.states.size());

  // backward BFS over reversed edges from the reachable goal states
  const std::int32_t n = static_cast<std::int32_t>(e.states.size());
  std::vector<std::vector<std::int32_t>> reverse(n);
  for (std::int32_t si = 0; si < n; ++si) {
    for (const auto& [ai, succ] : e.transitions[si]) {
      (void)ai;
      if (succ != si) reverse[succ].push_back(si);
    }
  }
  e.h_star.assign(n, kNoDistance);
  std::deque<std::int32_t> queue;
  for (std::int32_t si = 0; si < n; ++si) {
    if (e.task.is_goal(e.states[si])) {
      e.h_star[si] = 0;
      queue.push_back(si);
    }
  }
  while (!queue.empty()) {
    const std::int32_t si = queue.front();
    queue.pop_front();
    for (std::int32_t pred : reverse[si]) {
      if (e.h_star[pred] == kNoDistance) {
        e.h_star[pred] = e.h_star[si] + 1;
        queue.push_back(pred);
      }
    }
  }

  std::int32_t max_d = -1;
  for (std::int32_t si = 0; si < n; ++si) max_d = std::max(max_d, e.h_star[si]);
  if (max_d >= 0) {
    std::vector<std::vector<std::int32_t>> buckets(max_d + 1);
    for (std::int32_t si = 0; si < n; ++si) {
      if (e.h_star[si] != kNoDistance) buckets[e.h_star[si]].push_back(si);
    }
    for (std::int32_t d = 0; d <= max_d; ++d) {
      if (!buckets[d].empty()) {
        e.distances.push_back(d);
        e.states_at_distance.push_back(std::move(buckets[d]));
      }
    }
  }
  return e;
}

Expansion expand(const Problem& p, std::size_t state_cap, std::string problem_id) {
  return expand(GroundTask(p), state_cap, std::move(problem_id));
}

std::optional<std::int32_t> bellman_violation(const Expansion& e) {
  for (std::int32_t si = 0; si < static_cast<std::int32_t>(e.states.size()); ++si) {
    const bool goal = e.task.is_goal(e.states[si]);
    if (goal != (e.h_star[si] == 0)) return si;
    if (goal) continue;
    std::int32_t best = kNoDistance;
    for (const auto& [ai, succ] : e.transitions[si]) {
      (void)ai;
      if (e.h_star[succ] != kNoDistance && (best == kNoDistance || e.h_star[succ] < best)) {
        best = e.h_star[succ];
      }
    }
    const std::int32_t expect = best == kNoDistance ? kNoDistance : best + 1;
    if (e.h_star[si] != expect) return si;
  }
  return std::nullopt;
}

LabeledSample sample_pair(const std::vector<const Expansion*>& expansions, Rng& rng) {
  std::vector<const Expansion*> usable;
  for (const Expansion* e : expansions) {
    if (e->solvable()) usable.push_back(e);
  }
  if (usable.empty()) throw Error("sample_pair: no expansion has a solvable state");

  const Expansion& e = *usable[rng.index(usable.size())];
  const std::size_t di = rng.index(e.distances.size());
  const auto& pool = e.states_at_distance[di];
  LabeledSample sample;
  sample.expansion = &e;
  sample.state = pool[rng.index(pool.size())];
  sample.h_star = e.distances[di];

  std::int32_t cur = sample.state;
  for (std::int32_t v = sample.h_star; v > 0; --v) {
    std::vector<std::pair<std::int32_t, std::int32_t>> descending;
    for (const auto& edge : e.transitions[cur]) {
      if (e.h_star[edge.second] == v - 1) descending.push_back(edge);
    }
    if (descending.empty()) throw Error("sample_pair: h* inconsistency");  // unreachable
    const auto& [ai, succ] = descending[rng.index(descending.size())];
    sample.plan.push_back(e.task.active[ai].action);
    cur = succ;
  }
  return sample;
}

void export_dataset(const std::vector<const Expansion*>& expansions, int count, SampleMode mode,
                    const std::string& out_file, Rng& rng, const std::string& header) {
  std::ofstream f(out_file);
  if (!f) throw Error("cannot write " + out_file);
  if (!header.empty()) f << header << "\n";
  for (int i = 0; i < count; ++i) {
    const LabeledSample s = sample_pair(expansions, rng);
    const Expansion& e = *s.expansion;
    const Problem& p = e.task.problem;
    nlohmann::json j;
    j["problem_id"] = e.problem_id;
    nlohmann::json atoms = nlohmann::json::array();
    for (const Atom& a : e.task.full_state_atoms(e.states[s.state])) {
      nlohmann::json ja = nlohmann::json::array();
      ja.push_back(p.predicates[a.pred].name);
      for (int arg : a.args) ja.push_back(p.objects.objects[arg].name);
      atoms.push_back(ja);
    }
    j["atoms"] = atoms;
    nlohmann::json goal = nlohmann::json::array();
    for (const Atom& a : p.goal) {
      nlohmann::json ja = nlohmann::json::array();
      ja.push_back(p.predicates[a.pred].name);
      for (int arg : a.args) ja.push_back(p.objects.objects[arg].name);
      goal.push_back(ja);
    }
    j["goal"] = goal;
    j["h_star"] = s.h_star;
    if (mode == SampleMode::plan) {
      nlohmann::json plan = nlohmann::json::array();
      for (std::int32_t ai : s.plan) {
        const GroundAction& a = e.task.actions[ai];
        nlohmann::json ja = nlohmann::json::array();
        ja.push_back(p.schemas[a.schema].name);
        for (int obj : a.binding) ja.push_back(p.objects.objects[obj].name);
        plan.push_back(ja);
      }
      j["plan"] = plan;
    }
    f << j.dump() << "\n";
  }
}

}  // namespace symplan

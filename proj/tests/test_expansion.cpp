#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "symplan/domains.hpp"
#include "symplan/expansion.hpp"

using namespace symplan;

TEST_CASE("gripper n=2 has h*(init)=5 and consistent distances") {
  const auto inst = generate({Domain::gripper, 2, 1});
  const Expansion e = expand(GroundTask(inst.problem));
  CHECK(e.h_star_init() == 5);
  CHECK_FALSE(bellman_violation(e).has_value());
  // distances present: 0..5 (goal states up to the start)
  CHECK(e.distances.front() == 0);
  CHECK(e.distances.back() >= 5);
  for (std::size_t d = 0; d < e.distances.size(); ++d) {
    for (std::int32_t si : e.states_at_distance[d]) CHECK(e.h_star[si] == e.distances[d]);
  }
}

TEST_CASE("goal states carry h*=0 and only they do") {
  const auto inst = generate({Domain::gripper, 2, 1});
  const Expansion e = expand(GroundTask(inst.problem));
  for (std::size_t si = 0; si < e.states.size(); ++si) {
    CHECK((e.h_star[si] == 0) == e.task.is_goal(e.states[si]));
  }
}

TEST_CASE("gripper closed form: policy length equals h* for n in 1..6") {
  for (int n = 1; n <= 6; ++n) {
    const auto inst = generate({Domain::gripper, n, 1});
    const Expansion e = expand(GroundTask(inst.problem));
    const auto plan = reference_policy_plan(e.task);
    CHECK(e.h_star_init() == static_cast<int>(plan.size()));
    CHECK_FALSE(bellman_violation(e).has_value());
  }
}

TEST_CASE("visitall single cell expands to exactly one state labeled 0") {
  const auto inst = generate({Domain::visitall, 1, 1});
  const Expansion e = expand(GroundTask(inst.problem));
  CHECK(e.states.size() == 1);
  CHECK(e.h_star_init() == 0);
}

TEST_CASE("expansion cap raises a named error") {
  const auto inst = generate({Domain::gripper, 4, 1});
  CHECK_THROWS_WITH_AS(expand(GroundTask(inst.problem), 10, "gripper-n4"),
                       doctest::Contains("gripper-n4"), CapExceededError);
}

TEST_CASE("sampled plans always have length h* and validate") {
  const auto inst = generate({Domain::gripper, 3, 1});
  const Expansion e = expand(GroundTask(inst.problem));
  Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    const LabeledSample s = sample_pair({&e}, rng);
    CHECK(static_cast<int>(s.plan.size()) == s.h_star);
    // replay from the sampled state
    IdState cur = e.states[s.state];
    for (std::int32_t ai : s.plan) {
      const GroundAction& ga = e.task.actions[ai];
      bool advanced = false;
      for (const auto& act : e.task.active) {
        if (act.action == ai) {
          REQUIRE(e.task.applicable(cur, act));
          cur = e.task.apply(cur, act);
          advanced = true;
          break;
        }
      }
      REQUIRE(advanced);
      (void)ga;
    }
    CHECK(e.task.is_goal(cur));
  }
}

TEST_CASE("degenerate expansion where every state is a goal yields empty plans") {
  const auto inst = generate({Domain::visitall, 1, 1});
  const Expansion e = expand(GroundTask(inst.problem));
  Rng rng(5);
  const LabeledSample s = sample_pair({&e}, rng);
  CHECK(s.h_star == 0);
  CHECK(s.plan.empty());
}

TEST_CASE("goal-distance histogram is uniform over the distinct distances") {
  const auto inst = generate({Domain::gripper, 2, 1});
  const Expansion e = expand(GroundTask(inst.problem));
  Rng rng(1234);
  const int draws = 10000;
  std::map<int, int> hist;
  for (int i = 0; i < draws; ++i) hist[sample_pair({&e}, rng).h_star]++;
  CHECK(hist.size() == e.distances.size());
  // chi-squared against uniform; 99.9% quantile for k-1 dof stays far above
  const double expected = static_cast<double>(draws) / e.distances.size();
  double chi2 = 0.0;
  for (const auto& [d, n] : hist) {
    (void)d;
    chi2 += (n - expected) * (n - expected) / expected;
  }
  const double quantile_999[] = {0, 10.83, 13.82, 16.27, 18.47, 20.52, 22.46, 24.32};
  REQUIRE(e.distances.size() <= 8);
  CHECK(chi2 < quantile_999[e.distances.size() - 1]);
}

TEST_CASE("export_dataset is deterministic and heuristic mode omits plans") {
  namespace fs = std::filesystem;
  const auto inst = generate({Domain::gripper, 2, 1});
  const Expansion e = expand(GroundTask(inst.problem));
  const std::string f1 = (fs::temp_directory_path() / "symplan_ds1.jsonl").string();
  const std::string f2 = (fs::temp_directory_path() / "symplan_ds2.jsonl").string();
  {
    Rng r1(7), r2(7);
    export_dataset({&e}, 50, SampleMode::plan, f1, r1);
    export_dataset({&e}, 50, SampleMode::plan, f2, r2);
  }
  std::stringstream a, b;
  a << std::ifstream(f1).rdbuf();
  b << std::ifstream(f2).rdbuf();
  CHECK(a.str() == b.str());
  CHECK(a.str().find("\"plan\"") != std::string::npos);
  {
    Rng r(7);
    export_dataset({&e}, 10, SampleMode::heuristic, f1, r);
  }
  std::stringstream c;
  c << std::ifstream(f1).rdbuf();
  CHECK(c.str().find("\"plan\"") == std::string::npos);
  CHECK(c.str().find("\"h_star\"") != std::string::npos);
  {
    Rng r(7);
    export_dataset({&e}, 0, SampleMode::plan, f1, r);
  }
  std::stringstream d;
  d << std::ifstream(f1).rdbuf();
  CHECK(d.str().empty());
  fs::remove(f1);
  fs::remove(f2);
}

TEST_CASE("sample_pair refuses a pool with no solvable state") {
  // a problem whose goal is unreachable: gripper goal edited to an impossible pair
  auto inst = generate({Domain::gripper, 1, 1});
  Problem p = inst.problem;
  const int carry = p.pred_index("carry");
  const int b1 = p.objects.find("ball1");
  const int l = p.objects.find("left");
  const int r = p.objects.find("right");
  p.goal = {Atom{carry, {b1, l}}, Atom{carry, {b1, r}}};  // one ball in both grippers
  const Expansion e = expand(GroundTask(p));
  CHECK_FALSE(e.solvable());
  Rng rng(1);
  CHECK_THROWS_AS(sample_pair({&e}, rng), Error);
}

TEST_CASE("bellman_violation flags corrupted distances") {
  const auto inst = generate({Domain::gripper, 2, 1});
  Expansion e = expand(GroundTask(inst.problem));
  e.h_star[e.init_index] += 1;
  CHECK(bellman_violation(e).has_value());
}

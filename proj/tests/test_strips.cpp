#include <algorithm>

#include "doctest.h"
#include "symplan/domains.hpp"
#include "symplan/expansion.hpp"
#include "symplan/pddl.hpp"
#include "symplan/strips.hpp"

using namespace symplan;

namespace {

GeneratedInstance gripper(int n, std::uint64_t seed = 1) {
  return generate({Domain::gripper, n, seed});
}

const GroundAction& find(const GroundTask& task, const std::string& name,
                         const std::vector<std::string>& args) {
  const int idx = task.find_action(name, args);
  REQUIRE(idx >= 0);
  return task.actions[idx];
}

}  // namespace

TEST_CASE("grounding counts for gripper follow 4 + 8n") {
  for (int n = 1; n <= 6; ++n) {
    const auto inst = gripper(n);
    const auto actions = ground_actions(inst.problem);
    CHECK(static_cast<int>(actions.size()) == 4 + 8 * n);
  }
}

TEST_CASE("grounding detail: move 4, pick 8, drop 8 on two balls") {
  const auto inst = gripper(2);
  const auto actions = ground_actions(inst.problem);
  int move = 0, pick = 0, drop = 0;
  for (const auto& a : actions) {
    const std::string& name = inst.problem.schemas[a.schema].name;
    move += name == "move";
    pick += name == "pick";
    drop += name == "drop";
  }
  CHECK(move == 4);
  CHECK(pick == 8);
  CHECK(drop == 8);
}

TEST_CASE("zero-parameter schemas ground exactly once") {
  const std::string dom = R"((define (domain noop0)
    (:requirements :strips :typing)
    (:predicates (flag))
    (:action raise :parameters () :precondition (and) :effect (and (flag)))))";
  const std::string prob = R"((define (problem p) (:domain noop0)
    (:objects) (:init) (:goal (flag))))";
  const Problem p = parse_pddl(dom, prob);
  CHECK(ground_actions(p).size() == 1);
}

TEST_CASE("no objects of a required type means zero groundings") {
  const std::string dom = R"((define (domain t)
    (:requirements :strips :typing)
    (:types a b)
    (:predicates (pa ?x - a) (pb ?x - b))
    (:action only-b :parameters (?x - b) :precondition (and) :effect (and (pb ?x)))))";
  const std::string prob = R"((define (problem p) (:domain t)
    (:objects o1 o2 - a) (:init) (:goal (and))))";
  CHECK(ground_actions(parse_pddl(dom, prob)).empty());
}

TEST_CASE("applicable is exactly the subset test") {
  const auto inst = gripper(2);
  const GroundTask task(inst.problem);
  const auto& pick = find(task, "pick", {"ball1", "rooma", "left"});
  CHECK(applicable(inst.problem.init, pick));
  const auto& bad = find(task, "pick", {"ball1", "roomb", "left"});
  CHECK_FALSE(applicable(inst.problem.init, bad));

  GroundAction empty_pre = pick;
  empty_pre.pre.clear();
  CHECK(applicable(State{}, empty_pre));
}

TEST_CASE("apply follows the delete-then-add set equation") {
  const auto inst = gripper(2);
  const GroundTask task(inst.problem);
  const auto& pick = find(task, "pick", {"ball1", "rooma", "left"});
  const State s1 = apply(inst.problem.init, pick);
  // carry(ball1, left) present, at(ball1, rooma) and free(left) gone
  const int carry = inst.problem.pred_index("carry");
  const int at = inst.problem.pred_index("at");
  const int free_p = inst.problem.pred_index("free");
  const int b1 = inst.problem.objects.find("ball1");
  const int ra = inst.problem.objects.find("rooma");
  const int left = inst.problem.objects.find("left");
  CHECK(s1.contains(Atom{carry, {b1, left}}));
  CHECK_FALSE(s1.contains(Atom{at, {b1, ra}}));
  CHECK_FALSE(s1.contains(Atom{free_p, {left}}));

  SUBCASE("empty effect leaves the state unchanged") {
    GroundAction noop = pick;
    noop.add.clear();
    noop.del.clear();
    CHECK(apply(inst.problem.init, noop) == inst.problem.init);
  }
  SUBCASE("atom in both del and add survives (delete first)") {
    GroundAction both = pick;
    both.pre.clear();
    both.add = {Atom{at, {b1, ra}}};
    both.del = {Atom{at, {b1, ra}}};
    const State s2 = apply(inst.problem.init, both);
    CHECK(s2.contains(Atom{at, {b1, ra}}));
  }
  SUBCASE("inapplicable apply throws") {
    const auto& bad = find(task, "pick", {"ball1", "roomb", "left"});
    CHECK_THROWS_AS(apply(inst.problem.init, bad), Error);
  }
}

TEST_CASE("is_goal") {
  const auto inst = gripper(2);
  CHECK(is_goal(inst.problem.init, {}));
  CHECK_FALSE(is_goal(inst.problem.init, inst.problem.goal));
  CHECK(is_goal(inst.problem.init, inst.problem.init.atoms));
}

TEST_CASE("validate_plan on the hand gripper plan") {
  const auto inst = gripper(2);
  const GroundTask task(inst.problem);
  const std::vector<GroundAction> plan = {
      find(task, "pick", {"ball1", "rooma", "left"}),
      find(task, "pick", {"ball2", "rooma", "right"}),
      find(task, "move", {"rooma", "roomb"}),
      find(task, "drop", {"ball1", "roomb", "left"}),
      find(task, "drop", {"ball2", "roomb", "right"}),
  };
  const PlanCheck check = validate_plan(inst.problem, plan);
  CHECK(check.valid);
  CHECK(check.length == 5);
  CHECK_FALSE(check.failure_index.has_value());

  SUBCASE("failure index points at the first inapplicable step") {
    std::vector<GroundAction> broken = plan;
    std::swap(broken[2], broken[3]);  // drop before moving
    const PlanCheck bad = validate_plan(inst.problem, broken);
    CHECK_FALSE(bad.valid);
    CHECK(bad.failure_index == 2);
  }
  SUBCASE("empty plan is valid iff the goal already holds") {
    Problem trivial = inst.problem;
    trivial.goal.clear();
    const PlanCheck ok = validate_plan(trivial, {});
    CHECK(ok.valid);
    CHECK(ok.length == 0);
    const PlanCheck missing = validate_plan(inst.problem, {});
    CHECK_FALSE(missing.valid);
    CHECK(missing.failure_index == 0);  // goal failure at plan end
  }
}

TEST_CASE("state canonicalization is a fixed point") {
  const auto inst = gripper(3);
  std::vector<Atom> atoms = inst.problem.init.atoms;
  std::reverse(atoms.begin(), atoms.end());
  atoms.push_back(atoms.front());  // duplicate
  const State s = State::from(atoms);
  CHECK(s == inst.problem.init);
  CHECK(State::from(s.atoms) == s);
}

TEST_CASE("apply/applicable agree with the transition relation by brute force") {
  // every stored transition satisfies the set equation, on a small space
  const auto inst = gripper(2);
  const Expansion e = expand(GroundTask(inst.problem));
  REQUIRE(e.states.size() < 10000);
  for (std::size_t si = 0; si < e.states.size(); ++si) {
    for (const auto& [ai, succ] : e.transitions[si]) {
      const auto& act = e.task.active[ai];
      REQUIRE(e.task.applicable(e.states[si], act));
      CHECK(e.task.apply(e.states[si], act) == e.states[succ]);
    }
    // and no applicable action is missing from the transition list
    std::size_t applicable_count = 0;
    for (const auto& act : e.task.active) {
      applicable_count += e.task.applicable(e.states[si], act) ? 1 : 0;
    }
    CHECK(applicable_count == e.transitions[si].size());
  }
}

TEST_CASE("JSON serialization shape") {
  const auto inst = gripper(2);
  const std::string j = problem_to_json(inst.problem);
  CHECK(j.find("\"predicates\"") != std::string::npos);
  CHECK(j.find("\"objects\"") != std::string::npos);
  CHECK(j.find("\"init\"") != std::string::npos);
  CHECK(j.find("\"goal\"") != std::string::npos);
  CHECK(j.find("[\"at\",\"ball1\",\"rooma\"]") != std::string::npos);
}

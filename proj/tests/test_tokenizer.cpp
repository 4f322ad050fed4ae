#include <set>

#include "doctest.h"
#include "symplan/domains.hpp"
#include "symplan/expansion.hpp"
#include "symplan/tokenizer.hpp"

using namespace symplan;

namespace {

struct Fixture {
  GeneratedInstance inst = generate({Domain::gripper, 2, 1});
  Expansion e = expand(GroundTask(inst.problem));
  Vocabulary vocab = Vocabulary::build(inst.problem, 8);
};

}  // namespace

TEST_CASE("vocabulary layout is dense and stable") {
  Fixture f;
  const Vocabulary& v = f.vocab;
  CHECK(v.size() == 6 + 4 + 4 + 3 + 8);
  CHECK(v.names[v.pad] == "<pad>");
  CHECK(v.names[v.first_pred] == "at");  // sorted predicate order
  CHECK(v.names[v.first_goal_pred] == "goal_at");
  CHECK(v.names[v.first_action] == "drop");
  CHECK(v.names[v.first_object] == "obj_0");
  CHECK(v.max_arity == 2);
  CHECK(v.atom_width() == 3);
  // round trip through json
  const Vocabulary w = Vocabulary::from_json(v.to_json());
  CHECK(w.names == v.names);
  CHECK(w.first_object == v.first_object);
  CHECK(w.action_arity == v.action_arity);
}

TEST_CASE("goalify maps base to goal predicates bijectively") {
  Fixture f;
  const Vocabulary& v = f.vocab;
  std::set<int> seen;
  for (int i = 0; i < v.n_preds; ++i) {
    const int g = v.goalify_token(v.pred_token(i));
    CHECK(v.is_goal_pred(g));
    seen.insert(g);
  }
  CHECK(static_cast<int>(seen.size()) == v.n_preds);
  // goal_at(t3, l2) naming convention
  CHECK(v.names[v.goalify_token(v.ids.at("at"))] == "goal_at");
  // applying twice is rejected
  CHECK_THROWS_WITH_AS(v.goalify_token(v.goalify_token(v.pred_token(0))),
                       doctest::Contains("already a goal predicate"), Error);
  CHECK_THROWS_AS(v.goalify_token(v.pad), Error);
}

TEST_CASE("renaming: 8 objects in an 8-name vocabulary admit 40320 assignments") {
  CHECK(count_renamings(8, 8) == 40320);
  CHECK(count_renamings(2, 3) == 6);
  CHECK(count_renamings(0, 5) == 1);
}

TEST_CASE("make_renaming modes") {
  Rng rng(3);
  SUBCASE("identity") {
    auto [a, b] = make_renaming(5, RenamingMode::identity, 8, rng);
    CHECK(a.obj_to_slot == b.obj_to_slot);
    for (int i = 0; i < 5; ++i) CHECK(a.obj_to_slot[i] == i);
  }
  SUBCASE("rename_one fixes the canonical side") {
    auto [a, b] = make_renaming(5, RenamingMode::rename_one, 8, rng);
    for (int i = 0; i < 5; ++i) CHECK(a.obj_to_slot[i] == i);
    std::set<std::int32_t> slots(b.obj_to_slot.begin(), b.obj_to_slot.end());
    CHECK(slots.size() == 5);  // injective
  }
  SUBCASE("rename_both is reproducible under a fixed seed") {
    Rng r1(42), r2(42);
    auto [a1, b1] = make_renaming(6, RenamingMode::rename_both, 8, r1);
    auto [a2, b2] = make_renaming(6, RenamingMode::rename_both, 8, r2);
    CHECK(a1.obj_to_slot == a2.obj_to_slot);
    CHECK(b1.obj_to_slot == b2.obj_to_slot);
  }
  SUBCASE("too many objects") {
    CHECK_THROWS_WITH_AS(make_renaming(9, RenamingMode::rename_both, 8, rng),
                         doctest::Contains("too many objects"), Error);
  }
}

TEST_CASE("encode_atoms: state plus goalified goal, fixed width, canonical order") {
  Fixture f;
  const Problem& p = f.inst.problem;
  const RenamingMap sigma = RenamingMap::identity(p.objects.size());
  const EncodedAtoms enc = encode_atoms(f.vocab, p, p.init.atoms, p.goal, sigma);
  CHECK(enc.n_atoms == static_cast<int>(p.init.atoms.size() + p.goal.size()));
  CHECK(enc.width == 3);
  int goal_rows = 0;
  for (int i = 0; i < enc.n_atoms; ++i) goal_rows += f.vocab.is_goal_pred(enc.row(i)[0]) ? 1 : 0;
  CHECK(goal_rows == static_cast<int>(p.goal.size()));
  // length is renaming independent
  Rng rng(7);
  auto [sa, sb] = make_renaming(p.objects.size(), RenamingMode::rename_both, 8, rng);
  CHECK(encode_atoms(f.vocab, p, p.init.atoms, p.goal, sa).n_atoms == enc.n_atoms);
  (void)sb;
}

TEST_CASE("pair alignment: sigma_b o sigma_a^{-1} carries X to X' and Y to Y'") {
  Fixture f;
  Rng rng(17);
  for (int round = 0; round < 20; ++round) {
    const LabeledSample s = sample_pair({&f.e}, rng);
    const TokenizedPair pair = build_pair(s, f.vocab, RenamingMode::rename_both, true, true, rng);
    // token-level substitution map
    std::vector<int> sub(f.vocab.size(), -1);
    for (std::size_t obj = 0; obj < pair.sigma_a.obj_to_slot.size(); ++obj) {
      sub[f.vocab.object_token(pair.sigma_a.obj_to_slot[obj])] =
          f.vocab.object_token(pair.sigma_b.obj_to_slot[obj]);
    }
    auto mapped = [&](std::int32_t t) { return f.vocab.is_object(t) ? sub[t] : t; };
    REQUIRE(pair.xa.n_atoms == pair.xb.n_atoms);
    for (std::size_t i = 0; i < pair.xa.tokens.size(); ++i) {
      CHECK(mapped(pair.xa.tokens[i]) == pair.xb.tokens[i]);
    }
    REQUIRE(pair.ya.size() == pair.yb.size());
    for (std::size_t i = 0; i < pair.ya.size(); ++i) {
      CHECK(mapped(pair.ya[i]) == pair.yb[i]);
    }
    REQUIRE(pair.flat_a.tokens.size() == pair.flat_b.tokens.size());
    for (std::size_t i = 0; i < pair.flat_a.tokens.size(); ++i) {
      CHECK(mapped(pair.flat_a.tokens[i]) == pair.flat_b.tokens[i]);
    }
  }
}

TEST_CASE("encode/decode round trip on random samples") {
  Fixture f;
  Rng rng(23);
  for (int round = 0; round < 100; ++round) {
    const LabeledSample s = sample_pair({&f.e}, rng);
    auto [sa, sb] = make_renaming(f.inst.problem.objects.size(), RenamingMode::rename_both, 8, rng);
    (void)sb;
    const auto atoms = f.e.task.full_state_atoms(f.e.states[s.state]);
    const EncodedAtoms enc = encode_atoms(f.vocab, f.inst.problem, atoms, f.inst.problem.goal, sa);
    const DecodedAtoms dec = decode_atoms(f.vocab, f.inst.problem, enc, sa);
    CHECK(State::from(dec.state) == State::from(atoms));
    CHECK(State::from(dec.goal).atoms == f.inst.problem.goal);

    std::vector<const GroundAction*> plan;
    for (std::int32_t ai : s.plan) plan.push_back(&f.e.task.actions[ai]);
    const auto y = encode_plan(f.vocab, f.inst.problem, plan, sa);
    const DecodedPlan dp = decode_plan_tokens(f.vocab, f.inst.problem, y, sa);
    REQUIRE_FALSE(dp.malformed);
    REQUIRE(dp.actions.size() == plan.size());
    for (std::size_t i = 0; i < plan.size(); ++i) {
      CHECK(dp.actions[i].first == plan[i]->schema);
      CHECK(dp.actions[i].second == plan[i]->binding);
    }
  }
}

TEST_CASE("plan encoding edge cases") {
  Fixture f;
  const RenamingMap sigma = RenamingMap::identity(f.inst.problem.objects.size());
  SUBCASE("empty plan is [BOS, EOS]") {
    const auto y = encode_plan(f.vocab, f.inst.problem, {}, sigma);
    CHECK(y == std::vector<std::int32_t>{1, 2});
  }
  SUBCASE("EOS-only stream decodes to an empty plan") {
    const DecodedPlan dp = decode_plan_tokens(f.vocab, f.inst.problem,
                                              {static_cast<std::int32_t>(f.vocab.eos)}, sigma);
    CHECK_FALSE(dp.malformed);
    CHECK(dp.actions.empty());
  }
  SUBCASE("truncated action tuple is malformed") {
    const int pick = f.vocab.ids.at("pick");
    const DecodedPlan dp = decode_plan_tokens(
        f.vocab, f.inst.problem,
        {static_cast<std::int32_t>(f.vocab.bos), static_cast<std::int32_t>(pick),
         static_cast<std::int32_t>(f.vocab.object_token(0)), static_cast<std::int32_t>(f.vocab.eos)},
        sigma);
    CHECK(dp.malformed);
  }
  SUBCASE("non-action token where a name belongs is malformed") {
    const DecodedPlan dp = decode_plan_tokens(
        f.vocab, f.inst.problem,
        {static_cast<std::int32_t>(f.vocab.bos), static_cast<std::int32_t>(f.vocab.pad)}, sigma);
    CHECK(dp.malformed);
  }
}

TEST_CASE("plangpt flat encoding layout and token count arithmetic") {
  Fixture f;
  const Problem& p = f.inst.problem;
  const RenamingMap sigma = RenamingMap::identity(p.objects.size());
  const GroundTask& task = f.e.task;
  std::vector<const GroundAction*> plan;
  const int idx = task.find_action("pick", {"ball1", "rooma", "left"});
  REQUIRE(idx >= 0);
  plan.push_back(&task.actions[idx]);

  const FlatEncoding flat = encode_plangpt(f.vocab, p, p.init.atoms, p.goal, plan, sigma);
  // 3 markers + sum(1+arity) over atoms + plan tokens + eos
  int atom_tokens = 0;
  for (const auto& a : p.init.atoms) atom_tokens += 1 + static_cast<int>(a.args.size());
  for (const auto& a : p.goal) atom_tokens += 1 + static_cast<int>(a.args.size());
  CHECK(static_cast<int>(flat.tokens.size()) == 3 + atom_tokens + 4 + 1);
  CHECK(flat.tokens.front() == f.vocab.start);
  CHECK(flat.tokens.back() == f.vocab.eos);
  CHECK(flat.tokens[flat.action_marker_pos] == f.vocab.action_marker);
  // goal atoms use base predicates in the flat form
  for (const std::int32_t t : flat.tokens) CHECK_FALSE(f.vocab.is_goal_pred(t));

  SUBCASE("empty state, goal, and plan leave only the markers") {
    const FlatEncoding empty = encode_plangpt(f.vocab, p, {}, {}, {}, sigma);
    CHECK(empty.tokens ==
          std::vector<std::int32_t>{static_cast<std::int32_t>(f.vocab.start),
                                    static_cast<std::int32_t>(f.vocab.goal_marker),
                                    static_cast<std::int32_t>(f.vocab.action_marker),
                                    static_cast<std::int32_t>(f.vocab.eos)});
  }
}

TEST_CASE("shuffle_atoms keeps rows intact") {
  Fixture f;
  const Problem& p = f.inst.problem;
  const RenamingMap sigma = RenamingMap::identity(p.objects.size());
  const EncodedAtoms enc = encode_atoms(f.vocab, p, p.init.atoms, p.goal, sigma);
  Rng rng(5);
  const EncodedAtoms shuffled = shuffle_atoms(enc, rng);
  CHECK(shuffled.n_atoms == enc.n_atoms);
  auto rows = [](const EncodedAtoms& a) {
    std::multiset<std::vector<std::int32_t>> out;
    for (int i = 0; i < a.n_atoms; ++i) {
      out.insert(std::vector<std::int32_t>(a.row(i), a.row(i) + a.width));
    }
    return out;
  };
  CHECK(rows(shuffled) == rows(enc));
  // singleton stays fixed
  EncodedAtoms one;
  one.width = 3;
  one.n_atoms = 1;
  one.tokens = {6, 7, 0};
  CHECK(shuffle_atoms(one, rng).tokens == one.tokens);
  // fixed seed reproducible
  Rng r1(9), r2(9);
  CHECK(shuffle_atoms(enc, r1).tokens == shuffle_atoms(enc, r2).tokens);
}

#include "symplan/domains.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "symplan/pddl.hpp"

namespace symplan {

const char* domain_name(Domain d) {
  switch (d) {
    case Domain::blocksworld: return "blocksworld";
    case Domain::gripper: return "gripper";
    case Domain::logistics: return "logistics";
    case Domain::visitall: return "visitall";
  }
  return "?";
}

Domain domain_from_name(const std::string& name) {
  for (Domain d : {Domain::blocksworld, Domain::gripper, Domain::logistics, Domain::visitall}) {
    if (name == domain_name(d)) return d;
  }
  throw Error("unknown domain '" + name + "'");
}

const char* split_name(Split s) {
  switch (s) {
    case Split::training: return "training";
    case Split::validation: return "validation";
    case Split::interpolation: return "interpolation";
    case Split::extrapolation: return "extrapolation";
  }
  return "?";
}

Split split_from_name(const std::string& name) {
  for (Split s :
       {Split::training, Split::validation, Split::interpolation, Split::extrapolation}) {
    if (name == split_name(s)) return s;
  }
  throw Error("unknown split '" + name + "'");
}

// ---------------------------------------------------------------------------
// Domain PDDL

namespace {

const std::string kGripperDomain = R"((define (domain gripper)
  (:requirements :strips :typing)
  (:types room ball gripper)
  (:predicates
    (at-robby ?r - room)
    (at ?b - ball ?r - room)
    (free ?g - gripper)
    (carry ?b - ball ?g - gripper))
  (:action move
    :parameters (?from - room ?to - room)
    :precondition (and (at-robby ?from))
    :effect (and (at-robby ?to) (not (at-robby ?from))))
  (:action pick
    :parameters (?b - ball ?r - room ?g - gripper)
    :precondition (and (at ?b ?r) (at-robby ?r) (free ?g))
    :effect (and (carry ?b ?g) (not (at ?b ?r)) (not (free ?g))))
  (:action drop
    :parameters (?b - ball ?r - room ?g - gripper)
    :precondition (and (carry ?b ?g) (at-robby ?r))
    :effect (and (at ?b ?r) (free ?g) (not (carry ?b ?g))))
)
)";

const std::string kBlocksworldDomain = R"((define (domain blocksworld)
  (:requirements :strips :typing)
  (:types block)
  (:predicates
    (on ?x - block ?y - block)
    (ontable ?x - block)
    (clear ?x - block)
    (handempty)
    (holding ?x - block))
  (:action pick-up
    :parameters (?x - block)
    :precondition (and (clear ?x) (ontable ?x) (handempty))
    :effect (and (holding ?x) (not (ontable ?x)) (not (clear ?x)) (not (handempty))))
  (:action put-down
    :parameters (?x - block)
    :precondition (and (holding ?x))
    :effect (and (ontable ?x) (clear ?x) (handempty) (not (holding ?x))))
  (:action stack
    :parameters (?x - block ?y - block)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (on ?x ?y) (clear ?x) (handempty) (not (holding ?x)) (not (clear ?y))))
  (:action unstack
    :parameters (?x - block ?y - block)
    :precondition (and (on ?x ?y) (clear ?x) (handempty))
    :effect (and (holding ?x) (clear ?y) (not (on ?x ?y)) (not (clear ?x)) (not (handempty))))
)
)";

const std::string kLogisticsDomain = R"((define (domain logistics)
  (:requirements :strips :typing)
  (:types locatable city location - object
          vehicle package - locatable
          truck airplane - vehicle
          airport - location)
  (:predicates
    (at ?x - locatable ?l - location)
    (in ?p - package ?v - vehicle)
    (in-city ?l - location ?c - city))
  (:action load
    :parameters (?p - package ?v - vehicle ?l - location)
    :precondition (and (at ?p ?l) (at ?v ?l))
    :effect (and (in ?p ?v) (not (at ?p ?l))))
  (:action unload
    :parameters (?p - package ?v - vehicle ?l - location)
    :precondition (and (in ?p ?v) (at ?v ?l))
    :effect (and (at ?p ?l) (not (in ?p ?v))))
  (:action drive
    :parameters (?t - truck ?from - location ?to - location ?c - city)
    :precondition (and (at ?t ?from) (in-city ?from ?c) (in-city ?to ?c))
    :effect (and (at ?t ?to) (not (at ?t ?from))))
  (:action fly
    :parameters (?a - airplane ?from - airport ?to - airport)
    :precondition (and (at ?a ?from))
    :effect (and (at ?a ?to) (not (at ?a ?from))))
)
)";

const std::string kVisitallDomain = R"((define (domain visitall)
  (:requirements :strips :typing)
  (:types cell)
  (:predicates
    (at-robot ?c - cell)
    (visited ?c - cell)
    (connected ?a - cell ?b - cell))
  (:action move
    :parameters (?from - cell ?to - cell)
    :precondition (and (at-robot ?from) (connected ?from ?to))
    :effect (and (at-robot ?to) (visited ?to) (not (at-robot ?from))))
)
)";

}  // namespace

const std::string& domain_pddl(Domain d) {
  switch (d) {
    case Domain::gripper: return kGripperDomain;
    case Domain::blocksworld: return kBlocksworldDomain;
    case Domain::logistics: return kLogisticsDomain;
    case Domain::visitall: return kVisitallDomain;
  }
  throw Error("bad domain");
}

// ---------------------------------------------------------------------------
// Generators

namespace {

std::string gripper_problem(int n, std::uint64_t /*seed: same-size instances are isomorphic*/) {
  std::ostringstream os;
  os << "(define (problem gripper-" << n << ")\n  (:domain gripper)\n  (:objects";
  for (int i = 1; i <= n; ++i) os << " ball" << i;
  os << " - ball rooma roomb - room left right - gripper)\n  (:init\n";
  os << "    (at-robby rooma)\n    (free left)\n    (free right)\n";
  for (int i = 1; i <= n; ++i) os << "    (at ball" << i << " rooma)\n";
  os << "  )\n  (:goal (and";
  for (int i = 1; i <= n; ++i) os << " (at ball" << i << " roomb)";
  os << "))\n)\n";
  return os.str();
}

// Uniform sample over blocksworld configurations: sets of ordered towers.
// counts[m] is A000262(m); towers are drawn anchored at the lowest-index
// remaining block so each configuration has exactly one derivation.
std::vector<std::vector<int>> sample_towers(int n, Rng& rng) {
  std::vector<long double> counts(n + 1);
  counts[0] = 1.0L;
  std::vector<long double> fact(n + 1, 1.0L);
  for (int i = 1; i <= n; ++i) fact[i] = fact[i - 1] * i;
  auto binom = [&](int a, int b) { return fact[a] / (fact[b] * fact[a - b]); };
  for (int m = 1; m <= n; ++m) {
    long double total = 0.0L;
    for (int s = 1; s <= m; ++s) total += binom(m - 1, s - 1) * fact[s] * counts[m - s];
    counts[m] = total;
  }

  std::vector<int> remaining(n);
  for (int i = 0; i < n; ++i) remaining[i] = i;
  std::vector<std::vector<int>> towers;
  while (!remaining.empty()) {
    const int m = static_cast<int>(remaining.size());
    long double r = static_cast<long double>(rng.uniform_double()) * counts[m];
    int size = m;
    for (int s = 1; s <= m; ++s) {
      const long double w = binom(m - 1, s - 1) * fact[s] * counts[m - s];
      if (r < w) {
        size = s;
        break;
      }
      r -= w;
    }
    // anchor = lowest remaining block, plus size-1 uniform companions
    std::vector<int> tower;
    tower.push_back(remaining[0]);
    std::vector<int> rest(remaining.begin() + 1, remaining.end());
    rng.shuffle(rest);
    for (int i = 0; i < size - 1; ++i) tower.push_back(rest[i]);
    rng.shuffle(tower);
    towers.push_back(tower);

    std::vector<int> next(rest.begin() + (size - 1), rest.end());
    std::sort(next.begin(), next.end());
    remaining = std::move(next);
  }
  return towers;
}

std::string blocksworld_problem(int n, std::uint64_t seed) {
  Rng rng(Rng::mix(seed ^ 0xb10c5ULL));
  const auto towers = sample_towers(n, rng);

  // single goal tower; resample until it is not already satisfied
  std::vector<int> goal(n);
  for (int i = 0; i < n; ++i) goal[i] = i;
  auto satisfied = [&](const std::vector<int>& g) {
    std::map<int, int> on;  // upper -> lower
    for (const auto& t : towers) {
      for (std::size_t i = 1; i < t.size(); ++i) on[t[i]] = t[i - 1];
    }
    for (std::size_t i = 1; i < g.size(); ++i) {
      auto it = on.find(g[i]);
      if (it == on.end() || it->second != g[i - 1]) return false;
    }
    return true;
  };
  if (n >= 2) {
    do {
      rng.shuffle(goal);
    } while (satisfied(goal));
  }

  std::ostringstream os;
  os << "(define (problem blocksworld-" << n << "-" << seed << ")\n  (:domain blocksworld)\n";
  os << "  (:objects";
  for (int i = 1; i <= n; ++i) os << " b" << i;
  os << " - block)\n  (:init\n    (handempty)\n";
  for (const auto& t : towers) {
    os << "    (ontable b" << t.front() + 1 << ")\n";
    for (std::size_t i = 1; i < t.size(); ++i) {
      os << "    (on b" << t[i] + 1 << " b" << t[i - 1] + 1 << ")\n";
    }
    os << "    (clear b" << t.back() + 1 << ")\n";
  }
  os << "  )\n  (:goal (and";
  for (int i = 1; i < n; ++i) os << " (on b" << goal[i] + 1 << " b" << goal[i - 1] + 1 << ")";
  os << "))\n)\n";
  return os.str();
}

// Two cities, two locations each (one airport), one truck per city, one
// airplane. The spec's city-count formula explodes the reachable state space
// past the expansion cap at five goals, so the topology stays fixed and only
// the package count scales.
std::string logistics_problem(int n_goals, std::uint64_t seed) {
  Rng rng(Rng::mix(seed ^ 0x10915ULL));
  const std::vector<std::string> locs = {"apt1", "loc1", "apt2", "loc2"};

  std::ostringstream os;
  os << "(define (problem logistics-" << n_goals << "-" << seed << ")\n  (:domain logistics)\n";
  os << "  (:objects";
  for (int i = 1; i <= n_goals; ++i) os << " pkg" << i;
  os << " - package truck1 truck2 - truck plane1 - airplane\n"
     << "            apt1 apt2 - airport loc1 loc2 - location city1 city2 - city)\n";
  os << "  (:init\n";
  os << "    (in-city apt1 city1)\n    (in-city loc1 city1)\n";
  os << "    (in-city apt2 city2)\n    (in-city loc2 city2)\n";
  int t1 = rng.uniform_int(0, 1), t2 = 2 + rng.uniform_int(0, 1);
  os << "    (at truck1 " << locs[t1] << ")\n    (at truck2 " << locs[t2] << ")\n";
  os << "    (at plane1 " << (rng.uniform_int(0, 1) ? "apt2" : "apt1") << ")\n";
  std::vector<std::pair<int, int>> pkg_locs;
  for (int i = 1; i <= n_goals; ++i) {
    const int src = rng.uniform_int(0, 3);
    int dst = rng.uniform_int(0, 2);
    if (dst >= src) ++dst;  // goal differs from start so every package moves
    pkg_locs.emplace_back(src, dst);
    os << "    (at pkg" << i << " " << locs[src] << ")\n";
  }
  os << "  )\n  (:goal (and";
  for (int i = 1; i <= n_goals; ++i) {
    os << " (at pkg" << i << " " << locs[pkg_locs[i - 1].second] << ")";
  }
  os << "))\n)\n";
  return os.str();
}

// Most-square grid w x h with w >= h and w*h = n.
std::pair<int, int> visitall_grid(int n) {
  int h = 1;
  for (int d = 1; d * d <= n; ++d) {
    if (n % d == 0) h = d;
  }
  return {n / h, h};
}

std::string visitall_problem(int n, std::uint64_t seed) {
  Rng rng(Rng::mix(seed ^ 0x715a11ULL));
  const auto [w, h] = visitall_grid(n);
  auto cell = [](int x, int y) {
    return "loc-x" + std::to_string(x) + "-y" + std::to_string(y);
  };
  const int sx = rng.uniform_int(0, w - 1), sy = rng.uniform_int(0, h - 1);

  std::ostringstream os;
  os << "(define (problem visitall-" << n << "-" << seed << ")\n  (:domain visitall)\n";
  os << "  (:objects";
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) os << " " << cell(x, y);
  }
  os << " - cell)\n  (:init\n";
  os << "    (at-robot " << cell(sx, sy) << ")\n    (visited " << cell(sx, sy) << ")\n";
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) {
        os << "    (connected " << cell(x, y) << " " << cell(x + 1, y) << ")\n";
        os << "    (connected " << cell(x + 1, y) << " " << cell(x, y) << ")\n";
      }
      if (y + 1 < h) {
        os << "    (connected " << cell(x, y) << " " << cell(x, y + 1) << ")\n";
        os << "    (connected " << cell(x, y + 1) << " " << cell(x, y) << ")\n";
      }
    }
  }
  os << "  )\n  (:goal (and";
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) os << " (visited " << cell(x, y) << ")";
  }
  os << "))\n)\n";
  return os.str();
}

}  // namespace

GeneratedInstance generate(const InstanceSpec& spec) {
  if (spec.size_parameter < 1) {
    throw Error(std::string(domain_name(spec.domain)) + ": size_parameter must be >= 1");
  }
  GeneratedInstance inst;
  inst.spec = spec;
  inst.domain_text = domain_pddl(spec.domain);
  switch (spec.domain) {
    case Domain::gripper:
      inst.problem_text = gripper_problem(spec.size_parameter, spec.seed);
      break;
    case Domain::blocksworld:
      inst.problem_text = blocksworld_problem(spec.size_parameter, spec.seed);
      break;
    case Domain::logistics:
      inst.problem_text = logistics_problem(spec.size_parameter, spec.seed);
      break;
    case Domain::visitall:
      inst.problem_text = visitall_problem(spec.size_parameter, spec.seed);
      break;
  }
  inst.problem = parse_pddl(inst.domain_text, inst.problem_text);
  inst.id = std::string(domain_name(spec.domain)) + "-n" + std::to_string(spec.size_parameter) +
            "-s" + std::to_string(spec.seed);
  return inst;
}

// ---------------------------------------------------------------------------
// Reference policies

namespace {

struct Sim {
  const GroundTask& task;
  State state;
  std::vector<GroundAction> plan;

  explicit Sim(const GroundTask& t) : task(t), state(t.problem.init) {}

  void act(const std::string& schema, const std::vector<std::string>& args) {
    const int idx = task.find_action(schema, args);
    if (idx < 0) {
      throw Error("reference policy: no ground action (" + schema + " ...)");
    }
    const GroundAction& a = task.actions[idx];
    state = apply(state, a);  // throws if the policy is wrong
    plan.push_back(a);
  }

  bool holds(const std::string& pred, const std::vector<std::string>& args) const {
    Atom a;
    a.pred = task.problem.pred_index(pred);
    for (const auto& arg : args) a.args.push_back(task.problem.objects.find(arg));
    return state.contains(a);
  }
};

std::vector<GroundAction> gripper_policy(const GroundTask& task) {
  const Problem& p = task.problem;
  std::vector<std::string> balls, grippers;
  for (const auto& o : p.objects.objects) {
    if (o.type == "ball") balls.push_back(o.name);
    if (o.type == "gripper") grippers.push_back(o.name);
  }
  Sim sim(task);
  while (!is_goal(sim.state, p.goal)) {
    if (!sim.holds("at-robby", {"rooma"})) {
      // drop everything we carry, then return to rooma if balls remain
      bool dropped = false;
      for (const auto& b : balls) {
        for (const auto& g : grippers) {
          if (sim.holds("carry", {b, g})) {
            sim.act("drop", {b, "roomb", g});
            dropped = true;
          }
        }
      }
      if (!dropped && !is_goal(sim.state, p.goal)) sim.act("move", {"roomb", "rooma"});
      continue;
    }
    // in rooma: pick as many balls as possible, then head to roomb
    bool picked = false;
    for (const auto& g : grippers) {
      if (!sim.holds("free", {g})) continue;
      for (const auto& b : balls) {
        if (sim.holds("at", {b, "rooma"})) {
          sim.act("pick", {b, "rooma", g});
          picked = true;
          break;
        }
      }
    }
    bool carrying = false;
    for (const auto& b : balls) {
      for (const auto& g : grippers) carrying |= sim.holds("carry", {b, g});
    }
    if (carrying) {
      sim.act("move", {"rooma", "roomb"});
    } else if (!picked) {
      throw Error("gripper policy stuck");
    }
  }
  return sim.plan;
}

std::vector<GroundAction> blocksworld_policy(const GroundTask& task) {
  const Problem& p = task.problem;
  const int n = p.objects.size();
  auto block = [&](int i) { return p.objects.objects[i].name; };

  // goal chain bottom -> top from the on() goal atoms
  const int on = p.pred_index("on");
  std::map<int, int> above;  // lower -> upper
  std::vector<char> has_below(n, 0);
  for (const auto& a : p.goal) {
    if (a.pred != on) continue;
    above[a.args[1]] = a.args[0];
    has_below[a.args[0]] = 1;
  }
  std::vector<int> chain;
  if (!above.empty()) {
    int bottom = -1;
    for (const auto& [lower, upper] : above) {
      (void)upper;
      if (!has_below[lower]) bottom = lower;
    }
    for (int b = bottom; chain.size() < static_cast<std::size_t>(n);) {
      chain.push_back(b);
      auto it = above.find(b);
      if (it == above.end()) break;
      b = it->second;
    }
  }

  // blocks already in final position: a correct prefix of the goal tower
  Sim sim(task);
  std::vector<char> final_pos(n, 0);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const bool ok = i == 0 ? sim.holds("ontable", {block(chain[0])})
                           : (final_pos[chain[i - 1]] &&
                              sim.holds("on", {block(chain[i]), block(chain[i - 1])}));
    if (!ok) break;
    final_pos[chain[i]] = 1;
  }

  // phase 1: clear every misplaced block to the table
  bool moved = true;
  while (moved) {
    moved = false;
    for (int x = 0; x < n && !moved; ++x) {
      if (final_pos[x] || !sim.holds("clear", {block(x)})) continue;
      for (int y = 0; y < n; ++y) {
        if (x != y && sim.holds("on", {block(x), block(y)})) {
          sim.act("unstack", {block(x), block(y)});
          sim.act("put-down", {block(x)});
          moved = true;
          break;
        }
      }
    }
  }
  // phase 2: build the goal tower above the correct prefix
  for (std::size_t i = 1; i < chain.size(); ++i) {
    if (final_pos[chain[i]]) continue;
    sim.act("pick-up", {block(chain[i])});
    sim.act("stack", {block(chain[i]), block(chain[i - 1])});
  }
  return sim.plan;
}

std::vector<GroundAction> visitall_policy(const GroundTask& task) {
  const Problem& p = task.problem;
  // cell names carry their coordinates
  int w = 0, h = 0;
  std::map<std::pair<int, int>, std::string> cells;
  std::pair<int, int> pos{-1, -1};
  const int at_robot = p.pred_index("at-robot");
  for (const auto& o : p.objects.objects) {
    int x, y;
    if (std::sscanf(o.name.c_str(), "loc-x%d-y%d", &x, &y) != 2) {
      throw Error("visitall policy: unexpected cell name " + o.name);
    }
    cells[{x, y}] = o.name;
    w = std::max(w, x + 1);
    h = std::max(h, y + 1);
  }
  for (const auto& a : p.init.atoms) {
    if (a.pred == at_robot) {
      int x, y;
      std::sscanf(p.objects.objects[a.args[0]].name.c_str(), "loc-x%d-y%d", &x, &y);
      pos = {x, y};
    }
  }

  Sim sim(task);
  auto step = [&](int x, int y) {
    sim.act("move", {cells[pos], cells[{x, y}]});
    pos = {x, y};
  };
  if (w * h > 1) {
    // walk to the nearest corner, then snake through the rows
    std::pair<int, int> corner{pos.first * 2 >= w ? w - 1 : 0, pos.second * 2 >= h ? h - 1 : 0};
    while (pos.first != corner.first) step(pos.first + (corner.first > pos.first ? 1 : -1), pos.second);
    while (pos.second != corner.second) step(pos.first, pos.second + (corner.second > pos.second ? 1 : -1));
    int dx = pos.first == 0 ? 1 : -1;
    const int dy = pos.second == 0 ? 1 : -1;
    for (int row = 0; row < h; ++row) {
      while ((dx > 0 && pos.first < w - 1) || (dx < 0 && pos.first > 0)) {
        step(pos.first + dx, pos.second);
      }
      if (row + 1 < h) {
        step(pos.first, pos.second + dy);
        dx = -dx;
      }
    }
  }
  if (!is_goal(sim.state, p.goal)) throw Error("visitall policy failed to cover grid");
  return sim.plan;
}

std::vector<GroundAction> logistics_policy(const GroundTask& task) {
  const Problem& p = task.problem;
  std::vector<std::string> packages;
  for (const auto& o : p.objects.objects) {
    if (o.type == "package") packages.push_back(o.name);
  }
  std::map<std::string, std::string> city_of;  // location -> city
  const int in_city = p.pred_index("in-city");
  for (const auto& a : p.init.atoms) {
    if (a.pred == in_city) {
      city_of[p.objects.objects[a.args[0]].name] = p.objects.objects[a.args[1]].name;
    }
  }
  std::map<std::string, std::string> truck_of;    // city -> truck
  std::map<std::string, std::string> airport_of;  // city -> airport
  for (const auto& o : p.objects.objects) {
    if (o.type == "airport") airport_of[city_of[o.name]] = o.name;
  }

  Sim sim(task);
  auto loc_of = [&](const std::string& thing) -> std::string {
    for (const auto& [loc, city] : city_of) {
      (void)city;
      if (sim.holds("at", {thing, loc})) return loc;
    }
    throw Error("logistics policy: cannot locate " + thing);
  };
  for (const auto& o : p.objects.objects) {
    if (o.type == "truck") truck_of[city_of[loc_of(o.name)]] = o.name;
  }
  std::string plane;
  for (const auto& o : p.objects.objects) {
    if (o.type == "airplane") plane = o.name;
  }

  auto goal_loc = [&](const std::string& pkg) -> std::string {
    const int at = p.pred_index("at");
    for (const auto& a : p.goal) {
      if (a.pred == at && p.objects.objects[a.args[0]].name == pkg) {
        return p.objects.objects[a.args[1]].name;
      }
    }
    throw Error("logistics policy: no goal for " + pkg);
  };

  // deliver one package at a time
  auto truck_leg = [&](const std::string& pkg, const std::string& from, const std::string& to) {
    const std::string city = city_of.at(from);
    const std::string truck = truck_of.at(city);
    const std::string truck_at = loc_of(truck);
    if (truck_at != from) sim.act("drive", {truck, truck_at, from, city});
    sim.act("load", {pkg, truck, from});
    sim.act("drive", {truck, from, to, city});
    sim.act("unload", {pkg, truck, to});
  };
  for (const auto& pkg : packages) {
    const std::string dst = goal_loc(pkg);
    std::string src = loc_of(pkg);
    if (src == dst) continue;
    if (city_of.at(src) == city_of.at(dst)) {
      truck_leg(pkg, src, dst);
      continue;
    }
    const std::string apt_s = airport_of.at(city_of.at(src));
    const std::string apt_d = airport_of.at(city_of.at(dst));
    if (src != apt_s) {
      truck_leg(pkg, src, apt_s);
      src = apt_s;
    }
    const std::string plane_at = loc_of(plane);
    if (plane_at != apt_s) sim.act("fly", {plane, plane_at, apt_s});
    sim.act("load", {pkg, plane, apt_s});
    sim.act("fly", {plane, apt_s, apt_d});
    sim.act("unload", {pkg, plane, apt_d});
    if (dst != apt_d) truck_leg(pkg, apt_d, dst);
  }
  return sim.plan;
}

}  // namespace

std::vector<GroundAction> reference_policy_plan(const GroundTask& task) {
  const std::string& d = task.problem.domain_name;
  std::vector<GroundAction> plan;
  if (d == "gripper") {
    plan = gripper_policy(task);
  } else if (d == "blocksworld") {
    plan = blocksworld_policy(task);
  } else if (d == "visitall") {
    plan = visitall_policy(task);
  } else if (d == "logistics") {
    plan = logistics_policy(task);
  } else {
    throw Error("reference_policy_plan: unsupported domain '" + d + "'");
  }
  const PlanCheck check = validate_plan(task.problem, plan);
  if (!check.valid) throw Error("reference policy produced an invalid plan for " + d);
  return plan;
}

std::vector<GroundAction> reference_policy_plan(const Problem& p) {
  return reference_policy_plan(GroundTask(p));
}

// ---------------------------------------------------------------------------
// Schedules

SplitSchedule SplitSchedule::defaults(Domain d) {
  SplitSchedule s;
  s.domain = d;
  switch (d) {
    case Domain::blocksworld:
      s.training = {4, 6, 7};
      s.validation = {8};
      s.interpolation = {5};
      s.extrapolation = {9, 10, 11, 12, 13, 14, 15, 16, 17};
      s.training_count = 9;
      s.validation_count = 3;
      s.interpolation_count = 3;
      s.extrapolation_count = 20;
      break;
    case Domain::gripper:
      s.training = {2, 4, 6, 8};
      s.validation = {9, 10};
      s.interpolation = {3, 5, 7};
      for (int n = 12; n <= 42; n += 2) s.extrapolation.push_back(n);
      s.training_count = 4;
      s.validation_count = 2;
      s.interpolation_count = 3;
      s.extrapolation_count = 16;
      break;
    case Domain::logistics:
      s.training = {1, 3, 5};
      s.validation = {6};
      s.interpolation = {2, 4};
      for (int n = 7; n <= 15; ++n) s.extrapolation.push_back(n);
      s.training_count = 12;
      s.validation_count = 3;
      s.interpolation_count = 9;
      s.extrapolation_count = 18;
      break;
    case Domain::visitall:
      s.training = {1, 3, 4, 6, 10, 11, 12, 14, 16};
      s.validation = {18, 20};
      s.interpolation = {2, 5, 8, 9, 15};
      for (int n = 24; n <= 121; ++n) s.extrapolation.push_back(n);
      s.training_count = 207;
      s.validation_count = 10;
      s.interpolation_count = 37;
      s.extrapolation_count = 219;
      break;
  }
  return s;
}

const std::vector<int>& SplitSchedule::sizes(Split s) const {
  switch (s) {
    case Split::training: return training;
    case Split::validation: return validation;
    case Split::interpolation: return interpolation;
    case Split::extrapolation: return extrapolation;
  }
  throw Error("bad split");
}

int SplitSchedule::count(Split s) const {
  switch (s) {
    case Split::training: return training_count;
    case Split::validation: return validation_count;
    case Split::interpolation: return interpolation_count;
    case Split::extrapolation: return extrapolation_count;
  }
  throw Error("bad split");
}

std::vector<InstanceSpec> schedule_specs(const SplitSchedule& schedule, Split split,
                                         std::uint64_t base_seed) {
  std::vector<InstanceSpec> specs;
  const auto& sizes = schedule.sizes(split);
  const int count = schedule.count(split);
  if (sizes.empty() || count <= 0) return specs;
  for (int i = 0; i < count; ++i) {
    const int size = sizes[i % sizes.size()];
    InstanceSpec spec;
    spec.domain = schedule.domain;
    spec.size_parameter = size;
    spec.seed = Rng::mix(base_seed ^ Rng::mix((static_cast<std::uint64_t>(split) << 40) ^
                                              (static_cast<std::uint64_t>(size) << 20) ^
                                              static_cast<std::uint64_t>(i)));
    specs.push_back(spec);
  }
  return specs;
}

std::vector<ManifestEntry> emit_split(const SplitSchedule& schedule, const std::string& out_dir,
                                      std::uint64_t base_seed) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string domain_file = std::string("domain_") + domain_name(schedule.domain) + ".pddl";
  {
    std::ofstream f(fs::path(out_dir) / domain_file);
    if (!f) throw Error("cannot write " + out_dir + "/" + domain_file);
    f << domain_pddl(schedule.domain);
  }

  std::vector<ManifestEntry> manifest;
  std::ofstream mf(fs::path(out_dir) / "manifest.jsonl");
  if (!mf) throw Error("cannot write manifest.jsonl in " + out_dir);
  for (Split split :
       {Split::training, Split::validation, Split::interpolation, Split::extrapolation}) {
    for (const auto& spec : schedule_specs(schedule, split, base_seed)) {
      GeneratedInstance inst = generate(spec);
      ManifestEntry e;
      e.id = inst.id + "-" + split_name(split);
      e.problem_file = e.id + ".pddl";
      e.domain_file = domain_file;
      e.domain = spec.domain;
      e.size = spec.size_parameter;
      e.split = split;
      e.seed = spec.seed;
      std::ofstream pf(fs::path(out_dir) / e.problem_file);
      pf << inst.problem_text;
      nlohmann::json j;
      j["file"] = e.problem_file;
      j["domain_file"] = e.domain_file;
      j["id"] = e.id;
      j["domain"] = domain_name(e.domain);
      j["size"] = e.size;
      j["split"] = split_name(e.split);
      j["seed"] = e.seed;
      mf << j.dump() << "\n";
      manifest.push_back(std::move(e));
    }
  }
  return manifest;
}

}  // namespace symplan

#include "symplan/decode.hpp"

#include <algorithm>
#include <chrono>

#include "json.hpp"
#include "symplan/parallel.hpp"

namespace symplan {

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::greedy: return "greedy";
    case Strategy::applicability_filtered: return "applicability_filtered";
    case Strategy::regrounding: return "regrounding";
    case Strategy::heuristic_greedy: return "heuristic_greedy";
  }
  return "?";
}

Strategy strategy_from_name(const std::string& name) {
  for (Strategy s : {Strategy::greedy, Strategy::applicability_filtered, Strategy::regrounding,
                     Strategy::heuristic_greedy}) {
    if (name == strategy_name(s)) return s;
  }
  throw Error("unknown strategy '" + name + "'");
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::solved: return "solved";
    case Outcome::max_tokens: return "max_tokens";
    case Outcome::invalid_action: return "invalid_action";
    case Outcome::malformed_action: return "malformed_action";
  }
  return "?";
}

EncodedAtoms encode_state(const GroundTask& task, const Vocabulary& vocab, const IdState& state,
                          const RenamingMap& sigma) {
  return encode_atoms(vocab, task.problem, task.full_state_atoms(state), task.problem.goal,
                      sigma);
}

namespace {

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// encoder-decoder / decoder-only next-token adapter
class ModelSeq : public SeqModel {
 public:
  ModelSeq(const Model<float>& model, const Vocabulary& vocab, const GroundTask& task,
           bool deterministic)
      : model_(model), vocab_(vocab), task_(task),
        sigma_(RenamingMap::identity(task.problem.objects.size())),
        opts_{deterministic} {}

  void condition(const IdState& state) override {
    if (model_.cfg.variant == Variant::decoder_only) {
      FlatEncoding flat = encode_plangpt(vocab_, task_.problem,
                                         task_.full_state_atoms(state), task_.problem.goal, {},
                                         sigma_);
      flat_prefix_.assign(flat.tokens.begin(), flat.tokens.end() - 1);  // strip trailing EOS
      return;
    }
    const EncodedAtoms enc = encode_state(task_, vocab_, state, sigma_);
    Graph<float> g(opts_);
    g.recording = false;
    auto bound = model_.bind(g);
    Trace<float> t = model_.encoder_forward(bound, enc);
    enc_out_ = t.enc_out.val();
  }

  std::vector<float> next_logits(const std::vector<std::int32_t>& suffix) override {
    Graph<float> g(opts_);
    g.recording = false;
    auto bound = model_.bind(g);
    Value<float> logits;
    if (model_.cfg.variant == Variant::decoder_only) {
      std::vector<std::int32_t> tokens = flat_prefix_;
      tokens.insert(tokens.end(), suffix.begin(), suffix.end());
      Trace<float> t = model_.decoder_only_forward(bound, tokens, false, nullptr, true);
      logits = t.logits;
    } else {
      std::vector<std::int32_t> prefix{static_cast<std::int32_t>(vocab_.bos)};
      prefix.insert(prefix.end(), suffix.begin(), suffix.end());
      Value<float> enc = g.constant(enc_out_);
      logits = model_.decoder_forward(bound, enc, prefix, nullptr, false, nullptr, true);
    }
    const auto& row = logits.val();
    return std::vector<float>(row.data(), row.data() + row.cols());
  }

 private:
  const Model<float>& model_;
  const Vocabulary& vocab_;
  const GroundTask& task_;
  RenamingMap sigma_;
  KernelOpts opts_;
  Mat<float> enc_out_;
  std::vector<std::int32_t> flat_prefix_;
};

class ModelHeuristic : public HeuristicFn {
 public:
  ModelHeuristic(const Model<float>& model, const Vocabulary& vocab, const GroundTask& task,
                 bool deterministic)
      : model_(model), vocab_(vocab), task_(task),
        sigma_(RenamingMap::identity(task.problem.objects.size())),
        opts_{deterministic} {}

  double estimate(const IdState& state) override {
    const EncodedAtoms enc = encode_state(task_, vocab_, state, sigma_);
    Graph<float> g(opts_);
    g.recording = false;
    auto bound = model_.bind(g);
    Trace<float> t = model_.encoder_forward(bound, enc);
    return static_cast<double>(model_.heuristic_readout(bound, t).scalar());
  }

 private:
  const Model<float>& model_;
  const Vocabulary& vocab_;
  const GroundTask& task_;
  RenamingMap sigma_;
  KernelOpts opts_;
};

class OracleHeuristic : public HeuristicFn {
 public:
  explicit OracleHeuristic(const Expansion& e) : e_(e) {}
  double estimate(const IdState& state) override {
    const std::int32_t idx = e_.index_of(state);
    if (idx < 0 || e_.h_star[idx] == kNoDistance) return 1e18;
    return static_cast<double>(e_.h_star[idx]);
  }

 private:
  const Expansion& e_;
};

// token tuples of the applicable ground actions in the current state
struct ApplicableSet {
  struct Entry {
    std::int32_t active_index;
    std::vector<std::int32_t> tokens;  // action token + argument object tokens
  };
  std::vector<Entry> entries;
};

ApplicableSet applicable_tuples(const GroundTask& task, const Vocabulary& vocab,
                                const IdState& state, const RenamingMap& sigma) {
  ApplicableSet set;
  for (std::size_t i = 0; i < task.active.size(); ++i) {
    if (!task.applicable(state, task.active[i])) continue;
    const GroundAction& a = task.actions[task.active[i].action];
    ApplicableSet::Entry e;
    e.active_index = static_cast<std::int32_t>(i);
    e.tokens.push_back(vocab.action_token(a.schema));
    for (int obj : a.binding) e.tokens.push_back(vocab.object_token(sigma.obj_to_slot[obj]));
    set.entries.push_back(std::move(e));
  }
  return set;
}

// tokens that extend `partial` towards at least one applicable action
std::vector<std::int32_t> allowed_next_tokens(const ApplicableSet& set,
                                              const std::vector<std::int32_t>& partial) {
  std::vector<std::int32_t> allowed;
  for (const auto& e : set.entries) {
    if (e.tokens.size() <= partial.size()) continue;
    if (!std::equal(partial.begin(), partial.end(), e.tokens.begin())) continue;
    allowed.push_back(e.tokens[partial.size()]);
  }
  std::sort(allowed.begin(), allowed.end());
  allowed.erase(std::unique(allowed.begin(), allowed.end()), allowed.end());
  return allowed;
}

int argmax_token(const std::vector<float>& logits) {
  int best = 0;
  for (int t = 1; t < static_cast<int>(logits.size()); ++t) {
    if (logits[t] > logits[best]) best = t;  // ties keep the lowest token id
  }
  return best;
}

int argmax_masked(const std::vector<float>& logits, const std::vector<std::int32_t>& allowed) {
  int best = -1;
  for (std::int32_t t : allowed) {
    if (best < 0 || logits[t] > logits[best]) best = t;
  }
  return best;
}

// completed, existing ground actions from a raw token stream (for partial
// plans after budget exhaustion)
std::vector<int> parse_complete_actions(const GroundTask& task, const Vocabulary& vocab,
                                        const std::vector<std::int32_t>& tokens,
                                        const RenamingMap& sigma) {
  const DecodedPlan decoded = decode_plan_tokens(vocab, task.problem, tokens, sigma);
  std::vector<int> plan;
  for (const auto& [schema, args] : decoded.actions) {
    if (std::find(args.begin(), args.end(), -1) != args.end()) break;
    std::vector<std::string> names;
    for (int obj : args) names.push_back(task.problem.objects.objects[obj].name);
    const int idx = task.find_action(task.problem.schemas[schema].name, names);
    if (idx < 0) break;
    plan.push_back(idx);
  }
  return plan;
}

}  // namespace

std::unique_ptr<SeqModel> make_seq_model(const Model<float>& model, const Vocabulary& vocab,
                                         const GroundTask& task, bool deterministic) {
  return std::make_unique<ModelSeq>(model, vocab, task, deterministic);
}

std::unique_ptr<HeuristicFn> make_heuristic_model(const Model<float>& model,
                                                  const Vocabulary& vocab, const GroundTask& task,
                                                  bool deterministic) {
  return std::make_unique<ModelHeuristic>(model, vocab, task, deterministic);
}

std::unique_ptr<HeuristicFn> make_oracle_heuristic(const Expansion& expansion) {
  return std::make_unique<OracleHeuristic>(expansion);
}

// Alg. D.1: raw argmax until EOS or the token budget; the decoded plan is
// validated post hoc.
DecodeResult decode_greedy(const GroundTask& task, const Vocabulary& vocab, SeqModel& model,
                           int max_tokens) {
  Timer timer;
  DecodeResult r;
  const RenamingMap sigma = RenamingMap::identity(task.problem.objects.size());
  model.condition(task.init_ids);
  std::vector<std::int32_t> suffix;
  bool saw_eos = false;
  while (static_cast<int>(suffix.size()) < max_tokens) {
    const int t = argmax_token(model.next_logits(suffix));
    suffix.push_back(t);
    if (t == vocab.eos) {
      saw_eos = true;
      break;
    }
  }
  r.tokens_generated = static_cast<int>(suffix.size());
  if (!saw_eos) {
    r.outcome = Outcome::max_tokens;
    r.plan = parse_complete_actions(task, vocab, suffix, sigma);
    r.seconds = timer.seconds();
    return r;
  }
  const DecodedPlan decoded = decode_plan_tokens(vocab, task.problem, suffix, sigma);
  if (decoded.malformed) {
    r.outcome = Outcome::malformed_action;
    r.note = decoded.error;
    r.plan = parse_complete_actions(task, vocab, suffix, sigma);
    r.seconds = timer.seconds();
    return r;
  }
  State s = task.problem.init;
  for (const auto& [schema, args] : decoded.actions) {
    int idx = -1;
    if (std::find(args.begin(), args.end(), -1) == args.end()) {
      std::vector<std::string> names;
      for (int obj : args) names.push_back(task.problem.objects.objects[obj].name);
      idx = task.find_action(task.problem.schemas[schema].name, names);
    }
    if (idx < 0 || !applicable(s, task.actions[idx])) {
      r.outcome = Outcome::invalid_action;  // names no instantiable/applicable action
      r.seconds = timer.seconds();
      return r;
    }
    s = apply(s, task.actions[idx]);
    r.plan.push_back(idx);
  }
  r.outcome = is_goal(s, task.problem.goal) ? Outcome::solved : Outcome::invalid_action;
  if (r.outcome == Outcome::invalid_action) r.note = "plan executes but misses the goal";
  r.seconds = timer.seconds();
  return r;
}

// Alg. D.2: argmax over tokens that extend an applicable action; stops on the
// simulated goal, never on EOS (EOS stays masked out).
DecodeResult decode_applicability_filtered(const GroundTask& task, const Vocabulary& vocab,
                                           SeqModel& model, int max_tokens) {
  Timer timer;
  DecodeResult r;
  const RenamingMap sigma = RenamingMap::identity(task.problem.objects.size());
  model.condition(task.init_ids);
  IdState state = task.init_ids;
  ApplicableSet applicable = applicable_tuples(task, vocab, state, sigma);
  std::vector<std::int32_t> suffix;
  std::vector<std::int32_t> partial;
  while (true) {
    if (task.is_goal(state)) {
      r.outcome = Outcome::solved;
      break;
    }
    if (static_cast<int>(suffix.size()) >= max_tokens) {
      r.outcome = Outcome::max_tokens;
      break;
    }
    const auto allowed = allowed_next_tokens(applicable, partial);
    if (allowed.empty()) {
      r.outcome = Outcome::invalid_action;
      r.note = "dead end: no applicable action extends the generated prefix";
      break;
    }
    const int t = argmax_masked(model.next_logits(suffix), allowed);
    suffix.push_back(t);
    partial.push_back(t);
    // completed tuple -> execute it
    for (const auto& e : applicable.entries) {
      if (e.tokens == partial) {
        state = task.apply(state, task.active[e.active_index]);
        r.plan.push_back(task.active[e.active_index].action);
        partial.clear();
        applicable = applicable_tuples(task, vocab, state, sigma);
        break;
      }
    }
  }
  r.tokens_generated = static_cast<int>(suffix.size());
  r.seconds = timer.seconds();
  return r;
}

// Alg. D.3: one applicability-filtered action from a [BOS] prefix, apply it,
// re-encode the new state; the budget counts actions.
DecodeResult decode_regrounding(const GroundTask& task, const Vocabulary& vocab, SeqModel& model,
                                int max_actions) {
  Timer timer;
  DecodeResult r;
  const RenamingMap sigma = RenamingMap::identity(task.problem.objects.size());
  IdState state = task.init_ids;
  while (true) {
    if (task.is_goal(state)) {
      r.outcome = Outcome::solved;
      break;
    }
    if (static_cast<int>(r.plan.size()) >= max_actions) {
      r.outcome = Outcome::max_tokens;
      break;
    }
    model.condition(state);
    ApplicableSet applicable = applicable_tuples(task, vocab, state, sigma);
    std::vector<std::int32_t> partial;
    bool executed = false;
    while (!executed) {
      const auto allowed = allowed_next_tokens(applicable, partial);
      if (allowed.empty()) {
        r.outcome = Outcome::invalid_action;
        r.note = "dead end: no applicable action";
        r.tokens_generated += static_cast<int>(partial.size());
        r.seconds = timer.seconds();
        return r;
      }
      const int t = argmax_masked(model.next_logits(partial), allowed);
      partial.push_back(t);
      for (const auto& e : applicable.entries) {
        if (e.tokens == partial) {
          state = task.apply(state, task.active[e.active_index]);
          r.plan.push_back(task.active[e.active_index].action);
          executed = true;
          break;
        }
      }
    }
    r.tokens_generated += static_cast<int>(partial.size());
  }
  r.seconds = timer.seconds();
  return r;
}

// Alg. D.4: greedy descent on the heuristic over applicable successors,
// canonical tie-break, action budget.
DecodeResult decode_heuristic_greedy(const GroundTask& task, HeuristicFn& h, int max_actions) {
  Timer timer;
  DecodeResult r;
  IdState state = task.init_ids;
  while (true) {
    if (task.is_goal(state)) {
      r.outcome = Outcome::solved;
      break;
    }
    if (static_cast<int>(r.plan.size()) >= max_actions) {
      r.outcome = Outcome::max_tokens;
      break;
    }
    int best_active = -1;
    double best_h = 0.0;
    IdState best_succ;
    for (std::size_t i = 0; i < task.active.size(); ++i) {
      if (!task.applicable(state, task.active[i])) continue;
      IdState succ = task.apply(state, task.active[i]);
      const double est = h.estimate(succ);
      if (best_active < 0 || est < best_h) {  // strict: ties keep canonical order
        best_active = static_cast<int>(i);
        best_h = est;
        best_succ = std::move(succ);
      }
    }
    if (best_active < 0) {
      r.outcome = Outcome::invalid_action;
      r.note = "dead end: no applicable action";
      break;
    }
    state = std::move(best_succ);
    r.plan.push_back(task.active[best_active].action);
  }
  r.seconds = timer.seconds();
  return r;
}

DecodeResult decode(const GroundTask& task, const Vocabulary& vocab, const Model<float>& model,
                    const DecodeConfig& cfg, bool deterministic) {
  try {
    if (cfg.strategy == Strategy::heuristic_greedy) {
      if (model.cfg.variant != Variant::encoder_only) {
        throw Error("heuristic_greedy requires an encoder_only model");
      }
      auto h = make_heuristic_model(model, vocab, task, deterministic);
      return decode_heuristic_greedy(task, *h, cfg.max_tokens);
    }
    if (model.cfg.variant == Variant::encoder_only) {
      throw Error(std::string(strategy_name(cfg.strategy)) + " requires a decoder-bearing model");
    }
    auto seq = make_seq_model(model, vocab, task, deterministic);
    switch (cfg.strategy) {
      case Strategy::greedy: return decode_greedy(task, vocab, *seq, cfg.max_tokens);
      case Strategy::applicability_filtered:
        return decode_applicability_filtered(task, vocab, *seq, cfg.max_tokens);
      case Strategy::regrounding: return decode_regrounding(task, vocab, *seq, cfg.max_tokens);
      default: throw Error("bad strategy");
    }
  } catch (const PositionOverflowError& ex) {
    // Limitation 4 surfaced: learned positions cannot express the input
    DecodeResult r;
    r.outcome = Outcome::max_tokens;
    r.note = std::string("position overflow: ") + ex.what();
    return r;
  }
}

std::vector<DecodeResult> batch_decode(const std::vector<const GroundTask*>& tasks,
                                       const Vocabulary& vocab, const Model<float>& model,
                                       const DecodeConfig& cfg, bool deterministic) {
  std::vector<DecodeResult> results(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    try {
      results[i] = decode(*tasks[i], vocab, model, cfg, deterministic);
    } catch (const std::exception& ex) {
      results[i].outcome = Outcome::malformed_action;
      results[i].note = std::string("decode error: ") + ex.what();
    }
  }, deterministic ? 1 : 0);
  return results;
}

std::string decode_record_json(const std::string& problem_id, Strategy strategy,
                               const GroundTask& task, const DecodeResult& result) {
  nlohmann::json j;
  j["problem_id"] = problem_id;
  j["strategy"] = strategy_name(strategy);
  j["outcome"] = outcome_name(result.outcome);
  nlohmann::json plan = nlohmann::json::array();
  for (int ai : result.plan) {
    const GroundAction& a = task.actions[ai];
    nlohmann::json step = nlohmann::json::array();
    step.push_back(task.problem.schemas[a.schema].name);
    for (int obj : a.binding) step.push_back(task.problem.objects.objects[obj].name);
    plan.push_back(step);
  }
  j["plan"] = plan;
  j["tokens_generated"] = result.tokens_generated;
  j["seconds"] = result.seconds;
  if (!result.note.empty()) j["note"] = result.note;
  return j.dump();
}

}  // namespace symplan

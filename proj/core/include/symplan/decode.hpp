#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "symplan/expansion.hpp"
#include "symplan/model.hpp"
#include "symplan/tokenizer.hpp"

namespace symplan {

enum class Strategy { greedy, applicability_filtered, regrounding, heuristic_greedy };
const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

enum class Outcome { solved, max_tokens, invalid_action, malformed_action };
const char* outcome_name(Outcome o);

struct DecodeConfig {
  Strategy strategy = Strategy::greedy;
  // token budget for greedy/applicability_filtered, action budget for
  // regrounding/heuristic_greedy (Alg. D.3/D.4 test plan length)
  int max_tokens = 500;
};

struct DecodeResult {
  Outcome outcome = Outcome::malformed_action;
  std::vector<int> plan;  // indices into task.actions
  int tokens_generated = 0;
  double seconds = 0.0;
  std::string note;  // error detail (position overflow, dead end, ...)
};

// Autoregressive next-token interface over one problem. condition() fixes the
// state the encoder sees; next_logits() scores the token following the
// generated suffix (BOS handled internally).
class SeqModel {
 public:
  virtual ~SeqModel() = default;
  virtual void condition(const IdState& state) = 0;
  virtual std::vector<float> next_logits(const std::vector<std::int32_t>& suffix) = 0;
};

class HeuristicFn {
 public:
  virtual ~HeuristicFn() = default;
  virtual double estimate(const IdState& state) = 0;
};

// Model-backed adapters; evaluation uses the canonical identity renaming.
std::unique_ptr<SeqModel> make_seq_model(const Model<float>& model, const Vocabulary& vocab,
                                         const GroundTask& task, bool deterministic = false);
std::unique_ptr<HeuristicFn> make_heuristic_model(const Model<float>& model,
                                                  const Vocabulary& vocab, const GroundTask& task,
                                                  bool deterministic = false);
// exact-h* oracle (tests and the oracle-plug property)
std::unique_ptr<HeuristicFn> make_oracle_heuristic(const Expansion& expansion);

DecodeResult decode_greedy(const GroundTask& task, const Vocabulary& vocab, SeqModel& model,
                           int max_tokens = 500);
DecodeResult decode_applicability_filtered(const GroundTask& task, const Vocabulary& vocab,
                                           SeqModel& model, int max_tokens = 500);
DecodeResult decode_regrounding(const GroundTask& task, const Vocabulary& vocab, SeqModel& model,
                                int max_actions = 500);
DecodeResult decode_heuristic_greedy(const GroundTask& task, HeuristicFn& h,
                                     int max_actions = 500);

DecodeResult decode(const GroundTask& task, const Vocabulary& vocab, const Model<float>& model,
                    const DecodeConfig& cfg, bool deterministic = false);

// Independent decodes, parallel across problems, results in input order.
// Per-problem failures land in the result note and never abort the batch.
std::vector<DecodeResult> batch_decode(const std::vector<const GroundTask*>& tasks,
                                       const Vocabulary& vocab, const Model<float>& model,
                                       const DecodeConfig& cfg, bool deterministic = false);

// {problem_id, strategy, outcome, plan, tokens_generated, seconds}
std::string decode_record_json(const std::string& problem_id, Strategy strategy,
                               const GroundTask& task, const DecodeResult& result);

// encoder input for a state under a given renaming (canonical order, no shuffle)
EncodedAtoms encode_state(const GroundTask& task, const Vocabulary& vocab, const IdState& state,
                          const RenamingMap& sigma);

}  // namespace symplan

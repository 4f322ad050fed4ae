#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "symplan/decode.hpp"
#include "symplan/expansion.hpp"
#include "symplan/losses.hpp"
#include "symplan/model.hpp"
#include "symplan/tokenizer.hpp"

namespace symplan {

struct TrainConfig {
  // AdamW + schedule; defaults are the chosen Table E.2 row and the fixed
  // Appendix E constants
  double lr = 1e-4;
  double min_lr = 1e-7;
  int warmup_steps = 2000;
  int horizon = 500000;
  double weight_decay = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 0.0;  // off by default (clipping did not help)

  int batch_size = 32;  // samples before pair doubling
  int epochs = 70;
  int samples_per_epoch = 100000;
  RenamingMode renaming = RenamingMode::rename_both;
  LossWeights weights;
  bool normalize_contrastive = false;
  std::uint64_t seed = 0;
  bool deterministic = false;

  // divergence detection (artifact-defined thresholds)
  int div_window = 500;
  double div_factor = 10.0;
  double div_floor = 1.0;

  int validation_samples = 128;
  int heldout_pairs = 16;

  static TrainConfig paper() { return TrainConfig{}; }
  // warmup/horizon scaled by the paper's 2000/500000 ratio
  static TrainConfig desk() {
    TrainConfig c;
    c.warmup_steps = 200;
    c.horizon = 20000;
    c.epochs = 30;
    c.samples_per_epoch = 2000;
    c.batch_size = 16;
    return c;
  }
};

// linear warmup to lr, cosine decay to min_lr at the horizon, flat after
double lr_at(const TrainConfig& cfg, std::int64_t step);

class AdamW {
 public:
  AdamW(double beta1, double beta2, double eps, double weight_decay)
      : beta1_(beta1), beta2_(beta2), eps_(eps), wd_(weight_decay) {}

  void step(Model<float>& model, double lr);
  std::int64_t steps_taken() const { return t_; }

 private:
  double beta1_, beta2_, eps_, wd_;
  std::int64_t t_ = 0;
  std::vector<Mat<float>> m_, v_;
};

struct DivergenceVerdict {
  bool diverged = false;
  enum class Reason { none, nan, plateau_spike } reason = Reason::none;
  std::int64_t step = -1;
};

// NaN/inf at any step diverges immediately; otherwise the trailing-window
// rolling median must exceed max(factor x best rolling median, floor) for a
// full window.
class DivergenceDetector {
 public:
  DivergenceDetector(int window = 500, double factor = 10.0, double floor = 1.0)
      : window_(window), factor_(factor), floor_(floor) {}

  void push(double total_loss);
  const DivergenceVerdict& verdict() const { return verdict_; }

 private:
  int window_;
  double factor_, floor_;
  std::deque<double> buf_;
  double best_median_ = -1.0;
  int exceed_run_ = 0;
  std::int64_t step_ = 0;
  DivergenceVerdict verdict_;
};

DivergenceVerdict detect_divergence(const std::vector<double>& history, int window = 500,
                                    double factor = 10.0, double floor = 1.0);

// Appendix E.2 criteria, lexicographic in decreasing order of importance.
struct CheckpointScore {
  double coverage = 0.0;
  double pct_max_tokens = 1.0;
  double pct_invalid = 1.0;
  double pct_malformed = 1.0;
  double token_accuracy = 0.0;
  double loss = std::numeric_limits<double>::infinity();

  bool better_than(const CheckpointScore& o) const;
};

struct TrainLogRow {
  std::int64_t step = 0;
  LossBreakdown loss;
  double lr = 0.0;
  double grad_norm = 0.0;
};

// Fixed evaluation data: validation instances for decoding plus pre-encoded
// scoring samples and held-out renamed pairs (fixed seed, stable across
// checkpoints).
struct ValidationContext {
  const Vocabulary* vocab = nullptr;
  std::vector<const Expansion*> expansions;
  struct EvalSample {
    EncodedAtoms x;
    std::vector<std::int32_t> y;
    FlatEncoding flat;
    double h_star = 0.0;
  };
  std::vector<EvalSample> samples;
  std::vector<TokenizedPair> heldout_pairs;
  RenamingMode renaming = RenamingMode::rename_both;
};

ValidationContext make_validation(const std::vector<const Expansion*>& expansions,
                                  const Vocabulary& vocab, Variant variant, RenamingMode renaming,
                                  int n_samples, int n_pairs, std::uint64_t seed);

CheckpointScore score_checkpoint(const Model<float>& model, const ValidationContext& val,
                                 bool deterministic = false);

// mean L_att / L_hid over the held-out pairs (1/B included)
struct PairDiscrepancy {
  double att = 0.0;
  double hid = 0.0;
};
PairDiscrepancy pair_discrepancy(const Model<float>& model, const ValidationContext& val,
                                 bool deterministic = false);

struct StepResult {
  LossBreakdown loss;
  double lr = 0.0;
  double grad_norm = 0.0;
  bool applied = false;  // false when the loss was non-finite and the step skipped
};

// forward both pair members, combined loss, AdamW update at the scheduled lr
StepResult train_step(Model<float>& model, AdamW& opt, const std::vector<TokenizedPair>& batch,
                      const TrainConfig& cfg, std::int64_t step, Rng& dropout_rng);

struct EpochScore {
  int epoch = 0;
  std::int64_t step = 0;
  CheckpointScore score;
  PairDiscrepancy discrepancy;
};

struct TrainResult {
  ParamStore<float> best_params;
  CheckpointScore best_score;
  int best_epoch = -1;
  std::vector<TrainLogRow> log;
  std::vector<EpochScore> scores;
  DivergenceVerdict verdict;
  std::uint64_t init_checksum = 0;
  PairDiscrepancy initial_discrepancy;
};

// Epoch loop with fresh sampling per epoch, per-epoch validation scoring,
// best-checkpoint retention, divergence abort.
TrainResult run_training(Model<float>& model, const TrainConfig& cfg,
                         const std::vector<const Expansion*>& training,
                         const ValidationContext& val);

std::uint64_t params_checksum(const ParamStore<float>& params);

}  // namespace symplan

#include "symplan/trainer.hpp"

#include <algorithm>
#include <cmath>

namespace symplan {

double lr_at(const TrainConfig& cfg, std::int64_t step) {
  if (step <= 0) return 0.0;
  if (step < cfg.warmup_steps) {
    return cfg.lr * static_cast<double>(step) / cfg.warmup_steps;
  }
  if (step >= cfg.horizon || cfg.horizon <= cfg.warmup_steps) return cfg.min_lr;
  const double t =
      static_cast<double>(step - cfg.warmup_steps) / (cfg.horizon - cfg.warmup_steps);
  return cfg.min_lr + 0.5 * (cfg.lr - cfg.min_lr) * (1.0 + std::cos(M_PI * t));
}

void AdamW::step(Model<float>& model, double lr) {
  if (m_.empty()) {
    m_.resize(model.grads.size());
    v_.resize(model.grads.size());
    for (std::size_t i = 0; i < model.grads.size(); ++i) {
      m_[i] = Mat<float>::Zero(model.grads[i].rows(), model.grads[i].cols());
      v_[i] = Mat<float>::Zero(model.grads[i].rows(), model.grads[i].cols());
    }
  }
  ++t_;
  const float bc1 = 1.0f - std::pow(static_cast<float>(beta1_), static_cast<float>(t_));
  const float bc2 = 1.0f - std::pow(static_cast<float>(beta2_), static_cast<float>(t_));
  for (std::size_t i = 0; i < model.grads.size(); ++i) {
    const Mat<float>& g = model.grads[i];
    Mat<float>& p = model.params.entries[i].value;
    m_[i] = static_cast<float>(beta1_) * m_[i] + (1.0f - static_cast<float>(beta1_)) * g;
    v_[i] = static_cast<float>(beta2_) * v_[i] +
            (1.0f - static_cast<float>(beta2_)) * g.cwiseProduct(g);
    // decoupled weight decay: shrinks parameters even under zero gradient
    p.array() -= static_cast<float>(lr) *
                 ((m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() +
                                           static_cast<float>(eps_)) +
                  static_cast<float>(wd_) * p.array());
  }
}

void DivergenceDetector::push(double total_loss) {
  if (verdict_.diverged) return;
  ++step_;
  if (!std::isfinite(total_loss)) {
    verdict_ = {true, DivergenceVerdict::Reason::nan, step_};
    return;
  }
  buf_.push_back(total_loss);
  if (static_cast<int>(buf_.size()) > window_) buf_.pop_front();
  if (static_cast<int>(buf_.size()) < window_) return;
  std::vector<double> sorted(buf_.begin(), buf_.end());
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  if (best_median_ < 0.0 || median < best_median_) best_median_ = median;
  const double threshold = std::max(factor_ * best_median_, floor_);
  if (median > threshold) {
    if (++exceed_run_ >= window_) {
      verdict_ = {true, DivergenceVerdict::Reason::plateau_spike, step_};
    }
  } else {
    exceed_run_ = 0;
  }
}

DivergenceVerdict detect_divergence(const std::vector<double>& history, int window, double factor,
                                    double floor) {
  DivergenceDetector det(window, factor, floor);
  for (double x : history) {
    det.push(x);
    if (det.verdict().diverged) break;
  }
  return det.verdict();
}

bool CheckpointScore::better_than(const CheckpointScore& o) const {
  if (coverage != o.coverage) return coverage > o.coverage;
  if (pct_max_tokens != o.pct_max_tokens) return pct_max_tokens < o.pct_max_tokens;
  if (pct_invalid != o.pct_invalid) return pct_invalid < o.pct_invalid;
  if (pct_malformed != o.pct_malformed) return pct_malformed < o.pct_malformed;
  if (token_accuracy != o.token_accuracy) return token_accuracy > o.token_accuracy;
  return loss < o.loss;
}

namespace {

// prediction-loss contribution of one pair member; returns (sum node, count)
struct MemberLoss {
  Value<float> sum;
  int count = 0;
};

struct MemberInputs {
  const EncodedAtoms* x = nullptr;
  const std::vector<std::int32_t>* y = nullptr;
  const FlatEncoding* flat = nullptr;
  double h_star = 0.0;
};

MemberLoss forward_member(const Model<float>& model, Graph<float>& g,
                          const Model<float>::Bound& bound, const MemberInputs& in,
                          Trace<float>* trace, bool train, Rng* drop) {
  MemberLoss out;
  switch (model.cfg.variant) {
    case Variant::encoder_only: {
      *trace = model.encoder_forward(bound, *in.x, train, drop);
      Value<float> pred = model.heuristic_readout(bound, *trace);
      trace->h_pred = pred;
      Mat<float> target(1, 1);
      target(0, 0) = static_cast<float>(in.h_star);
      out.sum = ag::square_sum(ag::sub(pred, g.constant(target)));
      out.count = 1;
      return out;
    }
    case Variant::encoder_decoder: {
      *trace = model.encoder_forward(bound, *in.x, train, drop);
      std::vector<std::int32_t> prefix(in.y->begin(), in.y->end() - 1);
      Value<float> logits =
          model.decoder_forward(bound, trace->enc_out, prefix, trace, train, drop);
      out.sum = ag::cross_entropy_sum(logits, shifted_targets(*in.y), &out.count);
      return out;
    }
    case Variant::decoder_only: {
      const auto& tokens = in.flat->tokens;
      std::vector<std::int32_t> prefix(tokens.begin(), tokens.end() - 1);
      *trace = model.decoder_only_forward(bound, prefix, train, drop);
      // loss over the plan region only: positions from the <action> marker on
      std::vector<int> targets(prefix.size(), -1);
      for (std::size_t i = in.flat->action_marker_pos; i + 1 < tokens.size(); ++i) {
        targets[i] = tokens[i + 1];
      }
      out.sum = ag::cross_entropy_sum(trace->logits, targets, &out.count);
      return out;
    }
  }
  throw Error("bad variant");
}

MemberInputs member_a(const TokenizedPair& p) {
  return {&p.xa, &p.ya, &p.flat_a, p.h_star};
}
MemberInputs member_b(const TokenizedPair& p) {
  return {&p.xb, &p.yb, &p.flat_b, p.h_star};
}

}  // namespace

StepResult train_step(Model<float>& model, AdamW& opt, const std::vector<TokenizedPair>& batch,
                      const TrainConfig& cfg, std::int64_t step, Rng& dropout_rng) {
  StepResult result;
  result.lr = lr_at(cfg, step);
  KernelOpts opts{cfg.deterministic};
  Graph<float> g(opts);
  auto bound = model.bind(g);
  model.zero_grads();

  Value<float> pred_sum = g.constant(Mat<float>::Zero(1, 1));
  Value<float> att_sum = g.constant(Mat<float>::Zero(1, 1));
  Value<float> hid_sum = g.constant(Mat<float>::Zero(1, 1));
  int pred_count = 0;
  Rng* drop = cfg.deterministic || model.cfg.dropout <= 0.0 ? nullptr : &dropout_rng;
  for (const TokenizedPair& pair : batch) {
    Trace<float> ta, tb;
    MemberLoss la = forward_member(model, g, bound, member_a(pair), &ta, true, drop);
    MemberLoss lb = forward_member(model, g, bound, member_b(pair), &tb, true, drop);
    pred_sum = ag::add(pred_sum, ag::add(la.sum, lb.sum));
    pred_count += la.count + lb.count;
    att_sum = ag::add(att_sum, att_sse(g, ta, tb, cfg.normalize_contrastive));
    hid_sum = ag::add(hid_sum, hid_sse(g, ta, tb, model.cfg.k, cfg.normalize_contrastive));
  }
  const double b = static_cast<double>(batch.size());
  Value<float> l_pred = ag::scale(pred_sum, pred_count > 0 ? 1.0 / pred_count : 0.0);
  Value<float> l_att = ag::scale(att_sum, 1.0 / b);
  Value<float> l_hid = ag::scale(hid_sum, 1.0 / b);
  LossValues<float> lv = combined(l_pred, l_att, l_hid, cfg.weights);
  result.loss = lv.values();
  if (!std::isfinite(result.loss.total)) {
    return result;  // skipped; the divergence detector sees the loss
  }
  g.backward(lv.total);
  if (cfg.grad_clip > 0.0) {
    const double norm = model.grad_norm();
    if (norm > cfg.grad_clip) {
      const float s = static_cast<float>(cfg.grad_clip / norm);
      for (auto& gm : model.grads) gm *= s;
    }
  }
  result.grad_norm = model.grad_norm();
  opt.step(model, result.lr);
  result.applied = true;
  return result;
}

ValidationContext make_validation(const std::vector<const Expansion*>& expansions,
                                  const Vocabulary& vocab, Variant variant, RenamingMode renaming,
                                  int n_samples, int n_pairs, std::uint64_t seed) {
  ValidationContext val;
  val.vocab = &vocab;
  val.expansions = expansions;
  val.renaming = renaming;
  Rng rng(Rng::mix(seed ^ 0xe5a1ULL));
  const bool with_plan = variant == Variant::encoder_decoder;
  const bool with_flat = variant == Variant::decoder_only;
  for (int i = 0; i < n_samples; ++i) {
    const LabeledSample s = sample_pair(expansions, rng);
    const Expansion& e = *s.expansion;
    const Problem& p = e.task.problem;
    // scoring samples carry one random renaming each (held-out names)
    auto [ident, sigma] = make_renaming(p.objects.size(), RenamingMode::rename_one,
                                        vocab.n_objects, rng);
    (void)ident;
    ValidationContext::EvalSample es;
    es.h_star = s.h_star;
    const auto atoms = e.task.full_state_atoms(e.states[s.state]);
    es.x = encode_atoms(vocab, p, atoms, p.goal, sigma);
    if (with_plan || with_flat) {
      std::vector<const GroundAction*> plan;
      for (std::int32_t ai : s.plan) plan.push_back(&e.task.actions[ai]);
      if (with_plan) es.y = encode_plan(vocab, p, plan, sigma);
      if (with_flat) es.flat = encode_plangpt(vocab, p, atoms, p.goal, plan, sigma);
    }
    val.samples.push_back(std::move(es));
  }
  for (int i = 0; i < n_pairs; ++i) {
    const LabeledSample s = sample_pair(expansions, rng);
    val.heldout_pairs.push_back(build_pair(s, vocab, renaming, with_plan, with_flat, rng,
                                           /*shuffle=*/false));
  }
  return val;
}

CheckpointScore score_checkpoint(const Model<float>& model, const ValidationContext& val,
                                 bool deterministic) {
  CheckpointScore score;
  const Variant variant = model.cfg.variant;

  DecodeConfig dc;
  dc.strategy = variant == Variant::encoder_only ? Strategy::heuristic_greedy : Strategy::greedy;
  int solved = 0, max_tok = 0, invalid = 0, malformed = 0;
  for (const Expansion* e : val.expansions) {
    const DecodeResult r = decode(e->task, *val.vocab, model, dc, deterministic);
    switch (r.outcome) {
      case Outcome::solved: ++solved; break;
      case Outcome::max_tokens: ++max_tok; break;
      case Outcome::invalid_action: ++invalid; break;
      case Outcome::malformed_action: ++malformed; break;
    }
  }
  const double n = static_cast<double>(val.expansions.size());
  score.coverage = n > 0 ? solved / n : 0.0;
  score.pct_max_tokens = n > 0 ? max_tok / n : 0.0;
  if (variant == Variant::encoder_only) {
    // the encoder architecture cannot emit invalid or malformed actions
    score.pct_invalid = 0.0;
    score.pct_malformed = 0.0;
  } else {
    score.pct_invalid = n > 0 ? invalid / n : 0.0;
    score.pct_malformed = n > 0 ? malformed / n : 0.0;
  }

  // teacher-forced accuracy + validation prediction loss on fixed samples
  KernelOpts opts{deterministic};
  double loss_sum = 0.0;
  std::int64_t correct = 0, total = 0;
  for (const auto& es : val.samples) {
    Graph<float> g(opts);
    g.recording = false;
    auto bound = model.bind(g);
    Trace<float> t;
    MemberInputs in{&es.x, &es.y, &es.flat, es.h_star};
    MemberLoss ml = forward_member(model, g, bound, in, &t, false, nullptr);
    loss_sum += static_cast<double>(ml.sum.scalar());
    if (variant == Variant::encoder_only) {
      total += 1;
      if (std::abs(static_cast<double>(t.h_pred.scalar()) - es.h_star) < 0.5) ++correct;
    } else {
      const auto& logits = t.logits.val();
      const std::vector<int> targets =
          variant == Variant::encoder_decoder
              ? shifted_targets(es.y)
              : [&] {
                  std::vector<int> tg(es.flat.tokens.size() - 1, -1);
                  for (std::size_t i = es.flat.action_marker_pos; i + 1 < es.flat.tokens.size();
                       ++i) {
                    tg[i] = es.flat.tokens[i + 1];
                  }
                  return tg;
                }();
      for (int i = 0; i < logits.rows(); ++i) {
        if (targets[i] < 0) continue;
        int arg = 0;
        logits.row(i).maxCoeff(&arg);
        ++total;
        if (arg == targets[i]) ++correct;
      }
    }
    (void)ml;
  }
  // mean over counted positions (CE) or samples (MSE)
  std::int64_t denom = 0;
  for (const auto& es : val.samples) {
    if (variant == Variant::encoder_only) {
      denom += 1;
    } else if (variant == Variant::encoder_decoder) {
      denom += static_cast<std::int64_t>(es.y.size()) - 1;
    } else {
      denom += static_cast<std::int64_t>(es.flat.tokens.size()) - es.flat.action_marker_pos - 1;
    }
  }
  score.loss = denom > 0 ? loss_sum / static_cast<double>(denom) : 0.0;
  score.token_accuracy = total > 0 ? static_cast<double>(correct) / total : 0.0;
  return score;
}

PairDiscrepancy pair_discrepancy(const Model<float>& model, const ValidationContext& val,
                                 bool deterministic) {
  PairDiscrepancy out;
  if (val.heldout_pairs.empty()) return out;
  KernelOpts opts{deterministic};
  for (const TokenizedPair& pair : val.heldout_pairs) {
    Graph<float> g(opts);
    g.recording = false;
    auto bound = model.bind(g);
    Trace<float> ta, tb;
    forward_member(model, g, bound, member_a(pair), &ta, false, nullptr);
    forward_member(model, g, bound, member_b(pair), &tb, false, nullptr);
    out.att += static_cast<double>(att_sse(g, ta, tb).scalar());
    out.hid += static_cast<double>(hid_sse(g, ta, tb, model.cfg.k).scalar());
  }
  out.att /= static_cast<double>(val.heldout_pairs.size());
  out.hid /= static_cast<double>(val.heldout_pairs.size());
  return out;
}

std::uint64_t params_checksum(const ParamStore<float>& params) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t bytes) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& e : params.entries) {
    mix(e.name.data(), e.name.size());
    mix(e.value.data(), sizeof(float) * static_cast<std::size_t>(e.value.size()));
  }
  return h;
}

TrainResult run_training(Model<float>& model, const TrainConfig& cfg,
                         const std::vector<const Expansion*>& training,
                         const ValidationContext& val) {
  if (!val.vocab) throw Error("run_training: validation context missing vocabulary");
  TrainResult result;
  result.init_checksum = params_checksum(model.params);
  result.initial_discrepancy = pair_discrepancy(model, val, cfg.deterministic);
  result.best_params = model.params;
  result.best_score = score_checkpoint(model, val, cfg.deterministic);
  result.best_epoch = 0;
  result.scores.push_back({0, 0, result.best_score, result.initial_discrepancy});

  AdamW opt(cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.weight_decay);
  DivergenceDetector detector(cfg.div_window, cfg.div_factor, cfg.div_floor);
  Rng sample_rng(Rng::mix(cfg.seed ^ 0x5a3d1e5ULL));
  Rng drop_rng(Rng::mix(cfg.seed ^ 0xd40b0a7ULL));

  const bool with_plan = model.cfg.variant == Variant::encoder_decoder;
  const bool with_flat = model.cfg.variant == Variant::decoder_only;
  const int steps_per_epoch = std::max(1, cfg.samples_per_epoch / std::max(1, cfg.batch_size));

  std::int64_t step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (int s = 0; s < steps_per_epoch; ++s) {
      std::vector<TokenizedPair> batch;
      batch.reserve(cfg.batch_size);
      for (int i = 0; i < cfg.batch_size; ++i) {
        const LabeledSample sample = sample_pair(training, sample_rng);
        batch.push_back(
            build_pair(sample, *val.vocab, cfg.renaming, with_plan, with_flat, sample_rng));
      }
      const StepResult sr = train_step(model, opt, batch, cfg, step, drop_rng);
      result.log.push_back({step, sr.loss, sr.lr, sr.grad_norm});
      detector.push(sr.loss.total);
      if (detector.verdict().diverged) {
        result.verdict = detector.verdict();
        return result;
      }
      ++step;
    }
    EpochScore es;
    es.epoch = epoch;
    es.step = step;
    es.score = score_checkpoint(model, val, cfg.deterministic);
    es.discrepancy = pair_discrepancy(model, val, cfg.deterministic);
    result.scores.push_back(es);
    if (es.score.better_than(result.best_score)) {
      result.best_score = es.score;
      result.best_params = model.params;
      result.best_epoch = epoch;
    }
  }
  return result;
}

}  // namespace symplan

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symplan/autograd.hpp"
#include "symplan/error.hpp"
#include "symplan/rng.hpp"
#include "symplan/tokenizer.hpp"

namespace symplan {

enum class Variant { encoder_only, encoder_decoder, decoder_only };
const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

enum class Positional { none, learned_absolute };

struct ModelConfig {
  int d = 64;
  int heads = 4;
  int n_layers = 3;  // applications of the one shared layer
  int k = 16;        // contrastive projection width (first k dims)
  int vocab_size = 0;
  int atom_width = 0;  // 1 + max predicate arity (encoder variants)
  Variant variant = Variant::encoder_decoder;
  bool use_layernorm = false;
  bool qkv_bias = false;
  Positional positional = Positional::none;  // learned_absolute for decoder_only
  int max_positions = 0;
  int mlp_hidden = 0;  // 0 -> 4*d
  double dropout = 0.1;
  bool tied_output = true;  // output projection shares the token embedding table

  int d_k() const { return d / heads; }
  int mlp_width() const { return mlp_hidden > 0 ? mlp_hidden : 4 * d; }
  void validate() const;

  // desk profile: d=64, 3 layers, 4 heads, k=16
  static ModelConfig desk(Variant v, int vocab_size, int atom_width);
  // paper profile: d=768, 12 layers, 12 heads, k=32
  static ModelConfig paper(Variant v, int vocab_size, int atom_width);

  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

enum class AttnKind { enc_self, dec_self, dec_cross };

template <class S>
struct AttnRecord {
  int layer = 0;
  int head = 0;
  AttnKind kind = AttnKind::enc_self;
  Value<S> alpha;  // row-stochastic
};

// Everything captured during one forward pass: all attention score matrices
// and the post-layer hidden states of both streams.
template <class S>
struct Trace {
  std::vector<AttnRecord<S>> attn;
  std::vector<Value<S>> enc_hidden;
  std::vector<Value<S>> dec_hidden;
  Value<S> enc_out;
  Value<S> logits;
  Value<S> h_pred;
};

template <class S>
struct ParamStore {
  struct Entry {
    std::string name;
    Mat<S> value;
  };
  std::vector<Entry> entries;

  int add(const std::string& name, int rows, int cols) {
    entries.push_back({name, Mat<S>::Zero(rows, cols)});
    return static_cast<int>(entries.size()) - 1;
  }
  Mat<S>& value(int h) { return entries[h].value; }
  const Mat<S>& value(int h) const { return entries[h].value; }
  std::int64_t scalar_count() const {
    std::int64_t n = 0;
    for (const auto& e : entries) n += e.value.size();
    return n;
  }
};

template <class S>
struct AttnWeightVals {
  Value<S> wq, wk, wv, wo;
  Value<S> bq, bk, bv;  // invalid unless qkv_bias
};

// softmax(Q_i K_i^T / sqrt(d_k)) V_i per head, heads concatenated and
// projected by W_O. Alphas are appended to trace (when given).
template <class S>
Value<S> multi_head_attention(Value<S> x_q, Value<S> x_kv, const AttnWeightVals<S>& w, int heads,
                              bool causal, int layer, AttnKind kind, Trace<S>* trace) {
  const int d = x_q.cols();
  const int dk = d / heads;
  Value<S> q = ag::matmul(x_q, w.wq);
  Value<S> k = ag::matmul(x_kv, w.wk);
  Value<S> v = ag::matmul(x_kv, w.wv);
  if (w.bq.valid()) q = ag::add_rowvec(q, w.bq);
  if (w.bk.valid()) k = ag::add_rowvec(k, w.bk);
  if (w.bv.valid()) v = ag::add_rowvec(v, w.bv);
  std::vector<Value<S>> heads_out;
  heads_out.reserve(heads);
  for (int h = 0; h < heads; ++h) {
    Value<S> qh = ag::slice_cols(q, h * dk, dk);
    Value<S> kh = ag::slice_cols(k, h * dk, dk);
    Value<S> vh = ag::slice_cols(v, h * dk, dk);
    Value<S> scores = ag::scale(ag::matmul_nt(qh, kh), 1.0 / std::sqrt(double(dk)));
    Value<S> alpha = ag::softmax_rows(scores, causal);
    if (trace) trace->attn.push_back({layer, h, kind, alpha});
    heads_out.push_back(ag::matmul(alpha, vh, /*canonical_sum=*/true));
  }
  return ag::matmul(ag::concat_cols(heads_out), w.wo);
}

template <class S>
class Model {
 public:
  ModelConfig cfg;
  ParamStore<S> params;
  mutable std::vector<Mat<S>> grads;  // accumulation scratch, parallel to params

  // leaf handles into `params`
  struct Handles {
    int e_tok = -1;
    int w_atom = -1, b_atom = -1;
    // encoder layer
    int enc_wq = -1, enc_wk = -1, enc_wv = -1, enc_wo = -1;
    int enc_bq = -1, enc_bk = -1, enc_bv = -1;
    int enc_w1 = -1, enc_b1 = -1, enc_w2 = -1, enc_b2 = -1;
    int enc_ln1g = -1, enc_ln1b = -1, enc_ln2g = -1, enc_ln2b = -1;
    // decoder layer (self + cross + mlp); decoder_only uses self + mlp
    int dec_wq1 = -1, dec_wk1 = -1, dec_wv1 = -1, dec_wo1 = -1;
    int dec_bq1 = -1, dec_bk1 = -1, dec_bv1 = -1;
    int dec_wq2 = -1, dec_wk2 = -1, dec_wv2 = -1, dec_wo2 = -1;
    int dec_bq2 = -1, dec_bk2 = -1, dec_bv2 = -1;
    int dec_w1 = -1, dec_b1 = -1, dec_w2 = -1, dec_b2 = -1;
    int dec_ln1g = -1, dec_ln1b = -1, dec_ln2g = -1, dec_ln2b = -1, dec_ln3g = -1, dec_ln3b = -1;
    int out_w = -1, out_b = -1;
    // encoder-only readout MLP
    int r_w1 = -1, r_b1 = -1, r_w2 = -1, r_b2 = -1;
    int pos = -1;  // decoder_only learned positions
  } h;

  explicit Model(ModelConfig config) : cfg(std::move(config)) {
    cfg.validate();
    allocate();
  }

  void init_params(Rng& rng);
  void zero_grads() {
    for (auto& gmat : grads) gmat.setZero();
  }
  std::int64_t param_count() const { return params.scalar_count(); }
  double grad_norm() const {
    double s = 0;
    for (const auto& gmat : grads) s += static_cast<double>(gmat.squaredNorm());
    return std::sqrt(s);
  }

  struct Bound {
    std::vector<Value<S>> v;  // parallel to params.entries
    Value<S> at(int handle) const { return handle < 0 ? Value<S>{} : v[handle]; }
  };

  Bound bind(Graph<S>& g) const {
    Bound b;
    b.v.resize(params.entries.size());
    for (std::size_t i = 0; i < params.entries.size(); ++i) {
      b.v[i] = g.leaf(params.entries[i].value, g.recording ? &grads[i] : nullptr);
    }
    return b;
  }

  // --- forward passes ------------------------------------------------------

  // atom tokens -> per-atom embeddings: W (E[p] | E[o1] | ... | E[pad]..) + b
  Value<S> embed_atoms(const Bound& b, const EncodedAtoms& atoms) const {
    if (atoms.width != cfg.atom_width) throw Error("embed_atoms: atom width mismatch");
    Value<S> cat = ag::embed_concat(b.at(h.e_tok), atoms.tokens, atoms.width);
    return ag::linear(cat, b.at(h.w_atom), b.at(h.b_atom));
  }

  // n_layers applications of the shared encoder layer, no positional signal
  Trace<S> encoder_forward(const Bound& b, const EncodedAtoms& atoms, bool train = false,
                           Rng* drop = nullptr) const {
    if (atoms.n_atoms == 0) throw Error("encoder_forward: empty sequence");
    Trace<S> t;
    Value<S> x = embed_atoms(b, atoms);
    AttnWeightVals<S> aw{b.at(h.enc_wq), b.at(h.enc_wk), b.at(h.enc_wv), b.at(h.enc_wo),
                         b.at(h.enc_bq), b.at(h.enc_bk), b.at(h.enc_bv)};
    for (int layer = 0; layer < cfg.n_layers; ++layer) {
      Value<S> att =
          multi_head_attention(x, x, aw, cfg.heads, false, layer, AttnKind::enc_self, &t);
      x = ag::add(x, maybe_dropout(att, train, drop));
      x = maybe_ln(b, x, h.enc_ln1g, h.enc_ln1b);
      Value<S> mlp = ffn(x, b.at(h.enc_w1), b.at(h.enc_b1), b.at(h.enc_w2), b.at(h.enc_b2));
      x = ag::add(x, maybe_dropout(mlp, train, drop));
      x = maybe_ln(b, x, h.enc_ln2g, h.enc_ln2b);
      t.enc_hidden.push_back(x);
    }
    t.enc_out = x;
    return t;
  }

  // causal self-attention + cross-attention over enc_out + MLP, shared
  // weights, NoPE; returns logits per prefix position
  Value<S> decoder_forward(const Bound& b, Value<S> enc_out,
                           const std::vector<std::int32_t>& prefix, Trace<S>* t,
                           bool train = false, Rng* drop = nullptr,
                           bool last_only = false) const {
    if (prefix.empty()) throw Error("decoder_forward: empty prefix");
    Value<S> y = ag::embed_rows(b.at(h.e_tok), prefix);
    AttnWeightVals<S> self_w{b.at(h.dec_wq1), b.at(h.dec_wk1), b.at(h.dec_wv1), b.at(h.dec_wo1),
                             b.at(h.dec_bq1), b.at(h.dec_bk1), b.at(h.dec_bv1)};
    AttnWeightVals<S> cross_w{b.at(h.dec_wq2), b.at(h.dec_wk2), b.at(h.dec_wv2), b.at(h.dec_wo2),
                              b.at(h.dec_bq2), b.at(h.dec_bk2), b.at(h.dec_bv2)};
    // shared weights make the cross K/V identical across layer applications
    Value<S> k_enc = ag::matmul(enc_out, cross_w.wk);
    Value<S> v_enc = ag::matmul(enc_out, cross_w.wv);
    if (cross_w.bk.valid()) k_enc = ag::add_rowvec(k_enc, cross_w.bk);
    if (cross_w.bv.valid()) v_enc = ag::add_rowvec(v_enc, cross_w.bv);
    const int dk = cfg.d_k();
    for (int layer = 0; layer < cfg.n_layers; ++layer) {
      Value<S> att =
          multi_head_attention(y, y, self_w, cfg.heads, true, layer, AttnKind::dec_self, t);
      y = ag::add(y, maybe_dropout(att, train, drop));
      y = maybe_ln(b, y, h.dec_ln1g, h.dec_ln1b);

      Value<S> q = ag::matmul(y, cross_w.wq);
      if (cross_w.bq.valid()) q = ag::add_rowvec(q, cross_w.bq);
      std::vector<Value<S>> heads_out;
      for (int head = 0; head < cfg.heads; ++head) {
        Value<S> qh = ag::slice_cols(q, head * dk, dk);
        Value<S> kh = ag::slice_cols(k_enc, head * dk, dk);
        Value<S> vh = ag::slice_cols(v_enc, head * dk, dk);
        Value<S> scores = ag::scale(ag::matmul_nt(qh, kh), 1.0 / std::sqrt(double(dk)));
        Value<S> alpha = ag::softmax_rows(scores, false);
        if (t) t->attn.push_back({layer, head, AttnKind::dec_cross, alpha});
        heads_out.push_back(ag::matmul(alpha, vh, true));
      }
      Value<S> cross = ag::matmul(ag::concat_cols(heads_out), cross_w.wo);
      y = ag::add(y, maybe_dropout(cross, train, drop));
      y = maybe_ln(b, y, h.dec_ln2g, h.dec_ln2b);

      Value<S> mlp = ffn(y, b.at(h.dec_w1), b.at(h.dec_b1), b.at(h.dec_w2), b.at(h.dec_b2));
      y = ag::add(y, maybe_dropout(mlp, train, drop));
      y = maybe_ln(b, y, h.dec_ln3g, h.dec_ln3b);
      if (t) t->dec_hidden.push_back(y);
    }
    if (last_only) y = ag::slice_rows(y, y.rows() - 1, 1);
    Value<S> logits = output_logits(b, y);
    if (t) t->logits = logits;
    return logits;
  }

  // sum of the first-k dims of the final hidden states -> 2-layer MLP
  Value<S> heuristic_readout(const Bound& b, const Trace<S>& t) const {
    Value<S> last = t.enc_out;
    Value<S> pooled = ag::sum_rows(ag::slice_cols(last, 0, cfg.k));
    Value<S> hidden = ag::relu(ag::linear(pooled, b.at(h.r_w1), b.at(h.r_b1)));
    return ag::linear(hidden, b.at(h.r_w2), b.at(h.r_b2));
  }

  // PlanGPT-style flat stream with learned absolute positions
  Trace<S> decoder_only_forward(const Bound& b, const std::vector<std::int32_t>& tokens,
                                bool train = false, Rng* drop = nullptr,
                                bool last_only = false) const {
    if (tokens.empty()) throw Error("decoder_only_forward: empty sequence");
    if (static_cast<int>(tokens.size()) > cfg.max_positions) {
      throw PositionOverflowError("sequence length " + std::to_string(tokens.size()) +
                                  " exceeds max_positions " + std::to_string(cfg.max_positions));
    }
    Trace<S> t;
    Value<S> y = ag::embed_rows(b.at(h.e_tok), tokens);
    std::vector<std::int32_t> pos_ids(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) pos_ids[i] = static_cast<std::int32_t>(i);
    y = ag::add(y, ag::embed_rows(b.at(h.pos), pos_ids));
    AttnWeightVals<S> self_w{b.at(h.dec_wq1), b.at(h.dec_wk1), b.at(h.dec_wv1), b.at(h.dec_wo1),
                             b.at(h.dec_bq1), b.at(h.dec_bk1), b.at(h.dec_bv1)};
    for (int layer = 0; layer < cfg.n_layers; ++layer) {
      Value<S> att =
          multi_head_attention(y, y, self_w, cfg.heads, true, layer, AttnKind::dec_self, &t);
      y = ag::add(y, maybe_dropout(att, train, drop));
      y = maybe_ln(b, y, h.dec_ln1g, h.dec_ln1b);
      Value<S> mlp = ffn(y, b.at(h.dec_w1), b.at(h.dec_b1), b.at(h.dec_w2), b.at(h.dec_b2));
      y = ag::add(y, maybe_dropout(mlp, train, drop));
      y = maybe_ln(b, y, h.dec_ln3g, h.dec_ln3b);
      t.dec_hidden.push_back(y);
    }
    if (last_only) y = ag::slice_rows(y, y.rows() - 1, 1);
    t.logits = output_logits(b, y);
    return t;
  }

 private:
  void allocate();

  Value<S> ffn(Value<S> x, Value<S> w1, Value<S> b1, Value<S> w2, Value<S> b2) const {
    return ag::linear(ag::relu(ag::linear(x, w1, b1)), w2, b2);
  }
  Value<S> output_logits(const Bound& b, Value<S> y) const {
    Value<S> scores = cfg.tied_output ? ag::matmul_nt(y, b.at(h.e_tok))
                                      : ag::matmul(y, b.at(h.out_w));
    return ag::add_rowvec(scores, b.at(h.out_b));
  }
  Value<S> maybe_dropout(Value<S> x, bool train, Rng* drop) const {
    if (!train || cfg.dropout <= 0.0 || drop == nullptr) return x;
    return ag::dropout(x, cfg.dropout, *drop);
  }
  Value<S> maybe_ln(const Bound& b, Value<S> x, int hg, int hb) const {
    if (!cfg.use_layernorm) return x;
    return ag::layer_norm_rows(x, b.at(hg), b.at(hb));
  }
};

template <class S>
void Model<S>::allocate() {
  auto& p = params;
  const int d = cfg.d;
  const int mlp = cfg.mlp_width();
  h.e_tok = p.add("e_tok", cfg.vocab_size, d);

  const bool enc = cfg.variant != Variant::decoder_only;
  const bool dec = cfg.variant != Variant::encoder_only;
  if (enc) {
    h.w_atom = p.add("w_atom", cfg.atom_width * d, d);
    h.b_atom = p.add("b_atom", 1, d);
    h.enc_wq = p.add("enc.wq", d, d);
    h.enc_wk = p.add("enc.wk", d, d);
    h.enc_wv = p.add("enc.wv", d, d);
    h.enc_wo = p.add("enc.wo", d, d);
    if (cfg.qkv_bias) {
      h.enc_bq = p.add("enc.bq", 1, d);
      h.enc_bk = p.add("enc.bk", 1, d);
      h.enc_bv = p.add("enc.bv", 1, d);
    }
    h.enc_w1 = p.add("enc.mlp.w1", d, mlp);
    h.enc_b1 = p.add("enc.mlp.b1", 1, mlp);
    h.enc_w2 = p.add("enc.mlp.w2", mlp, d);
    h.enc_b2 = p.add("enc.mlp.b2", 1, d);
    if (cfg.use_layernorm) {
      h.enc_ln1g = p.add("enc.ln1.g", 1, d);
      h.enc_ln1b = p.add("enc.ln1.b", 1, d);
      h.enc_ln2g = p.add("enc.ln2.g", 1, d);
      h.enc_ln2b = p.add("enc.ln2.b", 1, d);
    }
  }
  if (dec) {
    h.dec_wq1 = p.add("dec.self.wq", d, d);
    h.dec_wk1 = p.add("dec.self.wk", d, d);
    h.dec_wv1 = p.add("dec.self.wv", d, d);
    h.dec_wo1 = p.add("dec.self.wo", d, d);
    if (cfg.qkv_bias) {
      h.dec_bq1 = p.add("dec.self.bq", 1, d);
      h.dec_bk1 = p.add("dec.self.bk", 1, d);
      h.dec_bv1 = p.add("dec.self.bv", 1, d);
    }
    if (cfg.variant == Variant::encoder_decoder) {
      h.dec_wq2 = p.add("dec.cross.wq", d, d);
      h.dec_wk2 = p.add("dec.cross.wk", d, d);
      h.dec_wv2 = p.add("dec.cross.wv", d, d);
      h.dec_wo2 = p.add("dec.cross.wo", d, d);
      if (cfg.qkv_bias) {
        h.dec_bq2 = p.add("dec.cross.bq", 1, d);
        h.dec_bk2 = p.add("dec.cross.bk", 1, d);
        h.dec_bv2 = p.add("dec.cross.bv", 1, d);
      }
    }
    h.dec_w1 = p.add("dec.mlp.w1", d, mlp);
    h.dec_b1 = p.add("dec.mlp.b1", 1, mlp);
    h.dec_w2 = p.add("dec.mlp.w2", mlp, d);
    h.dec_b2 = p.add("dec.mlp.b2", 1, d);
    if (cfg.use_layernorm) {
      h.dec_ln1g = p.add("dec.ln1.g", 1, d);
      h.dec_ln1b = p.add("dec.ln1.b", 1, d);
      h.dec_ln3g = p.add("dec.ln3.g", 1, d);
      h.dec_ln3b = p.add("dec.ln3.b", 1, d);
      if (cfg.variant == Variant::encoder_decoder) {
        h.dec_ln2g = p.add("dec.ln2.g", 1, d);
        h.dec_ln2b = p.add("dec.ln2.b", 1, d);
      }
    }
    if (!cfg.tied_output) h.out_w = p.add("out.w", d, cfg.vocab_size);
    h.out_b = p.add("out.b", 1, cfg.vocab_size);
  }
  if (cfg.variant == Variant::encoder_only) {
    h.r_w1 = p.add("readout.w1", cfg.k, cfg.k);
    h.r_b1 = p.add("readout.b1", 1, cfg.k);
    h.r_w2 = p.add("readout.w2", cfg.k, 1);
    h.r_b2 = p.add("readout.b2", 1, 1);
  }
  if (cfg.variant == Variant::decoder_only) {
    h.pos = p.add("pos", cfg.max_positions, d);
  }
  grads.resize(params.entries.size());
  for (std::size_t i = 0; i < params.entries.size(); ++i) {
    grads[i] = Mat<S>::Zero(params.entries[i].value.rows(), params.entries[i].value.cols());
  }
}

template <class S>
void Model<S>::init_params(Rng& rng) {
  // residual-branch outputs get the usual 1/sqrt(2*n_layers) damping so the
  // stream magnitude stays level across the shared-layer applications
  const double residual_scale = 1.0 / std::sqrt(2.0 * std::max(1, cfg.n_layers));
  for (auto& e : params.entries) {
    const bool is_embedding = e.name == "e_tok" || e.name == "pos";
    const bool is_bias = e.value.rows() == 1 && e.name.find(".w") == std::string::npos &&
                         e.name != "e_tok";
    const bool is_ln_gain = e.name.find(".ln") != std::string::npos &&
                            e.name.back() == 'g';
    const bool is_residual_out = e.name.find(".wo") != std::string::npos ||
                                 e.name.find(".mlp.w2") != std::string::npos;
    if (is_ln_gain) {
      e.value.setOnes();
    } else if (is_bias) {
      e.value.setZero();
    } else if (is_embedding) {
      for (int i = 0; i < e.value.rows(); ++i) {
        for (int j = 0; j < e.value.cols(); ++j) {
          e.value(i, j) = S(rng.normal(0.0, 1.0 / std::sqrt(double(cfg.d))));
        }
      }
    } else {
      double std = std::sqrt(2.0 / (e.value.rows() + e.value.cols()));
      if (is_residual_out) std *= residual_scale;
      // hot query/key projections: attention starts with distinct per-head
      // patterns instead of a uniform wash
      const bool is_qk = e.name.find(".wq") != std::string::npos ||
                         e.name.find(".wk") != std::string::npos;
      if (is_qk) std *= 8.0;
      for (int i = 0; i < e.value.rows(); ++i) {
        for (int j = 0; j < e.value.cols(); ++j) e.value(i, j) = S(rng.normal(0.0, std));
      }
    }
  }
}

}  // namespace symplan

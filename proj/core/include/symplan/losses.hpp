#pragma once

#include <vector>

#include "symplan/autograd.hpp"
#include "symplan/model.hpp"

namespace symplan {

struct LossWeights {
  double w1 = 1.0, w2 = 1.0, w3 = 1.0;
};

struct LossBreakdown {
  double l_pred = 0.0, l_att = 0.0, l_hid = 0.0, total = 0.0;
};

namespace detail {
template <class S>
Value<S> zero_scalar(Graph<S>& g) {
  return g.constant(Mat<S>::Zero(1, 1));
}
}  // namespace detail

// Sum over every attention module of the squared elementwise score
// differences between the two pair members. No per-module averaging; the 1/B
// factor is applied by the caller. normalize_per_entry (non-default) divides
// each module's term by its entry count.
template <class S>
Value<S> att_sse(Graph<S>& g, const Trace<S>& a, const Trace<S>& b,
                 bool normalize_per_entry = false) {
  if (a.attn.size() != b.attn.size()) throw Error("att_loss: trace shape mismatch");
  Value<S> total = detail::zero_scalar(g);
  for (std::size_t i = 0; i < a.attn.size(); ++i) {
    const auto& ra = a.attn[i];
    const auto& rb = b.attn[i];
    if (ra.layer != rb.layer || ra.head != rb.head || ra.kind != rb.kind ||
        ra.alpha.rows() != rb.alpha.rows() || ra.alpha.cols() != rb.alpha.cols()) {
      throw Error("att_loss: trace shape mismatch (broken pair)");
    }
    Value<S> term = ag::square_sum(ag::sub(ra.alpha, rb.alpha));
    if (normalize_per_entry) {
      term = ag::scale(term, 1.0 / (double(ra.alpha.rows()) * ra.alpha.cols()));
    }
    total = ag::add(total, term);
  }
  return total;
}

// Sum over both streams and all layer applications of the squared differences
// of the first-k hidden dims. 1/B applied by the caller.
template <class S>
Value<S> hid_sse(Graph<S>& g, const Trace<S>& a, const Trace<S>& b, int k,
                 bool normalize_per_entry = false) {
  if (a.enc_hidden.size() != b.enc_hidden.size() || a.dec_hidden.size() != b.dec_hidden.size()) {
    throw Error("hid_loss: trace shape mismatch");
  }
  Value<S> total = detail::zero_scalar(g);
  auto accumulate = [&](const std::vector<Value<S>>& ha, const std::vector<Value<S>>& hb) {
    for (std::size_t l = 0; l < ha.size(); ++l) {
      if (ha[l].rows() != hb[l].rows() || ha[l].cols() != hb[l].cols()) {
        throw Error("hid_loss: trace shape mismatch (broken pair)");
      }
      Value<S> term =
          ag::square_sum(ag::sub(ag::slice_cols(ha[l], 0, k), ag::slice_cols(hb[l], 0, k)));
      if (normalize_per_entry) term = ag::scale(term, 1.0 / (double(ha[l].rows()) * k));
      total = ag::add(total, term);
    }
  };
  accumulate(a.enc_hidden, b.enc_hidden);
  accumulate(a.dec_hidden, b.dec_hidden);
  return total;
}

// next-token targets for a decoder stream: input tokens[0..n-2], row i
// predicts tokens[i+1]
inline std::vector<int> shifted_targets(const std::vector<std::int32_t>& stream, int from = 0) {
  std::vector<int> targets(stream.size() - 1, -1);
  for (std::size_t i = from; i + 1 < stream.size(); ++i) targets[i] = stream[i + 1];
  return targets;
}

template <class S>
struct LossValues {
  Value<S> l_pred, l_att, l_hid, total;
  LossBreakdown values() const {
    LossBreakdown b;
    b.l_pred = static_cast<double>(l_pred.scalar());
    b.l_att = static_cast<double>(l_att.scalar());
    b.l_hid = static_cast<double>(l_hid.scalar());
    b.total = static_cast<double>(total.scalar());
    return b;
  }
};

// total = w1*l_pred + w2*l_att + w3*l_hid
template <class S>
LossValues<S> combined(Value<S> l_pred, Value<S> l_att, Value<S> l_hid, const LossWeights& w) {
  LossValues<S> out;
  out.l_pred = l_pred;
  out.l_att = l_att;
  out.l_hid = l_hid;
  out.total = ag::add(ag::add(ag::scale(l_pred, w.w1), ag::scale(l_att, w.w2)),
                      ag::scale(l_hid, w.w3));
  return out;
}

}  // namespace symplan

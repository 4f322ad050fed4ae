#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "symplan/error.hpp"
#include "symplan/rng.hpp"

namespace symplan {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

// Deterministic kernels trade speed for reduction orders that are invariant
// under permutations of attention key positions: matmuls run as plain loops
// (no SIMD remainder effects) and position-indexed sums are accumulated in
// sorted order. Transcendentals go through std:: scalar calls in both modes.
struct KernelOpts {
  bool deterministic = false;
};

// Reverse-mode tape over dense matrices. One Graph per forward pass (or per
// training step); creation order is the topological order used by backward().
template <class S>
class Graph;

template <class S>
struct Value {
  Graph<S>* graph = nullptr;
  int idx = -1;

  bool valid() const { return graph != nullptr; }
  const Mat<S>& val() const;
  int rows() const { return static_cast<int>(val().rows()); }
  int cols() const { return static_cast<int>(val().cols()); }
  S scalar() const { return val()(0, 0); }
};

template <class S>
class Graph {
 public:
  struct Node {
    Mat<S> value;
    Mat<S> grad;
    std::function<void()> backward;
    bool needs_grad = false;
    Mat<S>* grad_sink = nullptr;
  };

  explicit Graph(KernelOpts opts = {}) : opts_(opts) {}

  const KernelOpts& opts() const { return opts_; }
  bool recording = true;

  Value<S> leaf(Mat<S> value, Mat<S>* grad_sink = nullptr) {
    Node n;
    n.value = std::move(value);
    n.grad_sink = grad_sink;
    n.needs_grad = recording && grad_sink != nullptr;
    nodes.push_back(std::move(n));
    return {this, static_cast<int>(nodes.size()) - 1};
  }
  Value<S> constant(Mat<S> value) { return leaf(std::move(value), nullptr); }

  Value<S> make(Mat<S> value, bool needs_grad, std::function<void()> backward) {
    Node n;
    n.value = std::move(value);
    if (recording && needs_grad) {
      n.needs_grad = true;
      n.backward = std::move(backward);
    }
    nodes.push_back(std::move(n));
    return {this, static_cast<int>(nodes.size()) - 1};
  }

  bool wants(std::initializer_list<Value<S>> parents) const {
    if (!recording) return false;
    for (const Value<S>& p : parents) {
      if (nodes[p.idx].needs_grad) return true;
    }
    return false;
  }

  Mat<S>& grad(int idx) {
    Node& n = nodes[idx];
    if (n.grad.size() == 0) n.grad = Mat<S>::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  // Seeds d(root)/d(root) = 1 and sweeps the tape in reverse creation order,
  // then flushes leaf gradients into their external sinks.
  void backward(Value<S> root) {
    if (root.rows() != 1 || root.cols() != 1) throw Error("backward: root must be scalar");
    grad(root.idx)(0, 0) = S(1);
    for (int i = static_cast<int>(nodes.size()) - 1; i >= 0; --i) {
      Node& n = nodes[i];
      if (n.needs_grad && n.backward && n.grad.size() != 0) n.backward();
    }
    for (Node& n : nodes) {
      if (n.grad_sink && n.grad.size() != 0) *n.grad_sink += n.grad;
    }
  }

  std::vector<Node> nodes;

 private:
  KernelOpts opts_;
};

template <class S>
const Mat<S>& Value<S>::val() const {
  return graph->nodes[idx].value;
}

namespace ag {

template <class S>
Mat<S> matmul_plain(const Mat<S>& a, const Mat<S>& b) {
  const int n = static_cast<int>(a.rows()), m = static_cast<int>(b.cols()),
            k = static_cast<int>(a.cols());
  Mat<S> c(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      S acc = S(0);
      for (int t = 0; t < k; ++t) acc += a(i, t) * b(t, j);
      c(i, j) = acc;
    }
  }
  return c;
}

// Accumulates each entry's addends in ascending value order; the reduction
// over attention key positions becomes permutation-invariant bit-for-bit.
template <class S>
Mat<S> matmul_sorted(const Mat<S>& a, const Mat<S>& b) {
  const int n = static_cast<int>(a.rows()), m = static_cast<int>(b.cols()),
            k = static_cast<int>(a.cols());
  Mat<S> c(n, m);
  std::vector<S> buf(k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int t = 0; t < k; ++t) buf[t] = a(i, t) * b(t, j);
      std::sort(buf.begin(), buf.end());
      S acc = S(0);
      for (S v : buf) acc += v;
      c(i, j) = acc;
    }
  }
  return c;
}

// c = a * b. canonical_sum marks reductions that run over sequence positions
// (the alpha*V product in attention).
template <class S>
Value<S> matmul(Value<S> a, Value<S> b, bool canonical_sum = false) {
  Graph<S>& g = *a.graph;
  Mat<S> v;
  if (g.opts().deterministic) {
    v = canonical_sum ? matmul_sorted<S>(a.val(), b.val()) : matmul_plain<S>(a.val(), b.val());
  } else {
    v = a.val() * b.val();
  }
  const bool wants = g.wants({a, b});
  Value<S> out = g.make(std::move(v), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, b, out] {
      const Mat<S>& go = g.grad(out.idx);
      if (g.nodes[a.idx].needs_grad) g.grad(a.idx).noalias() += go * b.val().transpose();
      if (g.nodes[b.idx].needs_grad) g.grad(b.idx).noalias() += a.val().transpose() * go;
    };
  }
  return out;
}

// c = a * b^T
template <class S>
Value<S> matmul_nt(Value<S> a, Value<S> b) {
  Graph<S>& g = *a.graph;
  Mat<S> v;
  if (g.opts().deterministic) {
    const Mat<S> bt = b.val().transpose();
    v = matmul_plain<S>(a.val(), bt);
  } else {
    v = a.val() * b.val().transpose();
  }
  const bool wants = g.wants({a, b});
  Value<S> out = g.make(std::move(v), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, b, out] {
      const Mat<S>& go = g.grad(out.idx);
      if (g.nodes[a.idx].needs_grad) g.grad(a.idx).noalias() += go * b.val();
      if (g.nodes[b.idx].needs_grad) g.grad(b.idx).noalias() += go.transpose() * a.val();
    };
  }
  return out;
}

template <class S>
Value<S> add(Value<S> a, Value<S> b) {
  Graph<S>& g = *a.graph;
  const bool wants = g.wants({a, b});
  Value<S> out = g.make(a.val() + b.val(), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, b, out] {
      const Mat<S>& go = g.grad(out.idx);
      if (g.nodes[a.idx].needs_grad) g.grad(a.idx) += go;
      if (g.nodes[b.idx].needs_grad) g.grad(b.idx) += go;
    };
  }
  return out;
}

template <class S>
Value<S> sub(Value<S> a, Value<S> b) {
  Graph<S>& g = *a.graph;
  const bool wants = g.wants({a, b});
  Value<S> out = g.make(a.val() - b.val(), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, b, out] {
      const Mat<S>& go = g.grad(out.idx);
      if (g.nodes[a.idx].needs_grad) g.grad(a.idx) += go;
      if (g.nodes[b.idx].needs_grad) g.grad(b.idx) -= go;
    };
  }
  return out;
}

template <class S>
Value<S> hadamard(Value<S> a, Value<S> b) {
  Graph<S>& g = *a.graph;
  const bool wants = g.wants({a, b});
  Value<S> out = g.make(a.val().cwiseProduct(b.val()), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, b, out] {
      const Mat<S>& go = g.grad(out.idx);
      if (g.nodes[a.idx].needs_grad) g.grad(a.idx) += go.cwiseProduct(b.val());
      if (g.nodes[b.idx].needs_grad) g.grad(b.idx) += go.cwiseProduct(a.val());
    };
  }
  return out;
}

template <class S>
Value<S> scale(Value<S> a, double c) {
  Graph<S>& g = *a.graph;
  const bool wants = g.wants({a});
  Value<S> out = g.make(a.val() * S(c), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, out, c] {
      if (g.nodes[a.idx].needs_grad) g.grad(a.idx) += g.grad(out.idx) * S(c);
    };
  }
  return out;
}

// broadcast 1 x m row (bias) over every row of a
template <class S>
Value<S> add_rowvec(Value<S> a, Value<S> row) {
  Graph<S>& g = *a.graph;
  Mat<S> v = a.val();
  v.rowwise() += row.val().row(0);
  const bool wants = g.wants({a, row});
  Value<S> out = g.make(std::move(v), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, row, out] {
      const Mat<S>& go = g.grad(out.idx);
      if (g.nodes[a.idx].needs_grad) g.grad(a.idx) += go;
      if (g.nodes[row.idx].needs_grad) g.grad(row.idx) += go.colwise().sum();
    };
  }
  return out;
}

template <class S>
Value<S> relu(Value<S> a) {
  Graph<S>& g = *a.graph;
  const bool wants = g.wants({a});
  Value<S> out = g.make(a.val().cwiseMax(S(0)), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, out] {
      if (!g.nodes[a.idx].needs_grad) return;
      g.grad(a.idx) += g.grad(out.idx).cwiseProduct(
          (a.val().array() > S(0)).template cast<S>().matrix());
    };
  }
  return out;
}

// Row softmax with optional causal (lower-triangular) mask. Scalar std::exp
// throughout; deterministic mode sums the exponentials in sorted order.
template <class S>
Value<S> softmax_rows(Value<S> a, bool causal = false) {
  Graph<S>& g = *a.graph;
  const Mat<S>& x = a.val();
  const int n = static_cast<int>(x.rows()), m = static_cast<int>(x.cols());
  Mat<S> p(n, m);
  std::vector<S> exps;
  for (int i = 0; i < n; ++i) {
    const int limit = causal ? i + 1 : m;
    S mx = x(i, 0);
    for (int j = 1; j < limit; ++j) mx = std::max(mx, x(i, j));
    exps.assign(limit, S(0));
    for (int j = 0; j < limit; ++j) exps[j] = std::exp(x(i, j) - mx);
    S denom = S(0);
    if (g.opts().deterministic) {
      std::vector<S> sorted = exps;
      std::sort(sorted.begin(), sorted.end());
      for (S v : sorted) denom += v;
    } else {
      for (S v : exps) denom += v;
    }
    for (int j = 0; j < limit; ++j) p(i, j) = exps[j] / denom;
    for (int j = limit; j < m; ++j) p(i, j) = S(0);
  }
  const bool wants = g.wants({a});
  Value<S> out = g.make(std::move(p), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, out] {
      if (!g.nodes[a.idx].needs_grad) return;
      const Mat<S>& pr = out.val();
      const Mat<S>& go = g.grad(out.idx);
      Mat<S>& ga = g.grad(a.idx);
      for (int i = 0; i < pr.rows(); ++i) {
        const S dot = go.row(i).cwiseProduct(pr.row(i)).sum();
        ga.row(i).array() += pr.row(i).array() * (go.row(i).array() - dot);
      }
    };
  }
  return out;
}

template <class S>
Value<S> slice_cols(Value<S> a, int j0, int w) {
  Graph<S>& g = *a.graph;
  const bool wants = g.wants({a});
  Value<S> out = g.make(a.val().middleCols(j0, w), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, out, j0, w] {
      if (g.nodes[a.idx].needs_grad) g.grad(a.idx).middleCols(j0, w) += g.grad(out.idx);
    };
  }
  return out;
}

template <class S>
Value<S> slice_rows(Value<S> a, int i0, int h) {
  Graph<S>& g = *a.graph;
  const bool wants = g.wants({a});
  Value<S> out = g.make(a.val().middleRows(i0, h), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, out, i0, h] {
      if (g.nodes[a.idx].needs_grad) g.grad(a.idx).middleRows(i0, h) += g.grad(out.idx);
    };
  }
  return out;
}

template <class S>
Value<S> concat_cols(const std::vector<Value<S>>& parts) {
  Graph<S>& g = *parts.front().graph;
  int cols = 0;
  for (const auto& p : parts) cols += p.cols();
  Mat<S> v(parts.front().rows(), cols);
  int at = 0;
  bool wants = false;
  for (const auto& p : parts) {
    v.middleCols(at, p.cols()) = p.val();
    at += p.cols();
    wants = wants || (g.recording && g.nodes[p.idx].needs_grad);
  }
  Value<S> out = g.make(std::move(v), wants, nullptr);
  if (wants) {
    std::vector<Value<S>> ps = parts;
    g.nodes[out.idx].backward = [&g, ps, out] {
      const Mat<S>& go = g.grad(out.idx);
      int at = 0;
      for (const auto& p : ps) {
        if (g.nodes[p.idx].needs_grad) g.grad(p.idx) += go.middleCols(at, p.cols());
        at += p.cols();
      }
    };
  }
  return out;
}

// 1 x m column sums (sum over sequence positions); sorted accumulation in
// deterministic mode.
template <class S>
Value<S> sum_rows(Value<S> a) {
  Graph<S>& g = *a.graph;
  const Mat<S>& x = a.val();
  Mat<S> v(1, x.cols());
  if (g.opts().deterministic) {
    std::vector<S> buf(x.rows());
    for (int j = 0; j < x.cols(); ++j) {
      for (int i = 0; i < x.rows(); ++i) buf[i] = x(i, j);
      std::sort(buf.begin(), buf.end());
      S acc = S(0);
      for (S t : buf) acc += t;
      v(0, j) = acc;
    }
  } else {
    v = x.colwise().sum();
  }
  const bool wants = g.wants({a});
  Value<S> out = g.make(std::move(v), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, out] {
      if (!g.nodes[a.idx].needs_grad) return;
      g.grad(a.idx).rowwise() += g.grad(out.idx).row(0);
    };
  }
  return out;
}

// rows of table indexed by ids
template <class S>
Value<S> embed_rows(Value<S> table, const std::vector<std::int32_t>& ids) {
  Graph<S>& g = *table.graph;
  Mat<S> v(static_cast<int>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) v.row(i) = table.val().row(ids[i]);
  const bool wants = g.wants({table});
  Value<S> out = g.make(std::move(v), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, table, out, ids] {
      if (!g.nodes[table.idx].needs_grad) return;
      const Mat<S>& go = g.grad(out.idx);
      Mat<S>& gt = g.grad(table.idx);
      for (std::size_t i = 0; i < ids.size(); ++i) gt.row(ids[i]) += go.row(i);
    };
  }
  return out;
}

// one row per atom: the width embeddings concatenated (n x width*d)
template <class S>
Value<S> embed_concat(Value<S> table, const std::vector<std::int32_t>& ids, int width) {
  Graph<S>& g = *table.graph;
  const int d = table.cols();
  const int n = static_cast<int>(ids.size()) / width;
  Mat<S> v(n, width * d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < width; ++k) {
      v.row(i).segment(k * d, d) = table.val().row(ids[i * width + k]);
    }
  }
  const bool wants = g.wants({table});
  Value<S> out = g.make(std::move(v), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, table, out, ids, width, d, n] {
      if (!g.nodes[table.idx].needs_grad) return;
      const Mat<S>& go = g.grad(out.idx);
      Mat<S>& gt = g.grad(table.idx);
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < width; ++k) {
          gt.row(ids[i * width + k]) += go.row(i).segment(k * d, d);
        }
      }
    };
  }
  return out;
}

// inverted dropout; identity when rate == 0
template <class S>
Value<S> dropout(Value<S> a, double rate, Rng& rng) {
  if (rate <= 0.0) return a;
  Graph<S>& g = *a.graph;
  const S keep = S(1.0 - rate);
  Mat<S> mask(a.rows(), a.cols());
  for (int i = 0; i < mask.rows(); ++i) {
    for (int j = 0; j < mask.cols(); ++j) {
      mask(i, j) = rng.uniform_double() < rate ? S(0) : S(1) / keep;
    }
  }
  const bool wants = g.wants({a});
  Value<S> out = g.make(a.val().cwiseProduct(mask), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, out, mask] {
      if (g.nodes[a.idx].needs_grad) g.grad(a.idx) += g.grad(out.idx).cwiseProduct(mask);
    };
  }
  return out;
}

// per-row layer normalization with learned gain/bias (1 x d each)
template <class S>
Value<S> layer_norm_rows(Value<S> a, Value<S> gamma, Value<S> beta, double eps = 1e-5) {
  Graph<S>& g = *a.graph;
  const Mat<S>& x = a.val();
  const int n = static_cast<int>(x.rows()), d = static_cast<int>(x.cols());
  Mat<S> xhat(n, d), v(n, d);
  Mat<S> inv_std(n, 1);
  for (int i = 0; i < n; ++i) {
    const S mean = x.row(i).mean();
    const S var = (x.row(i).array() - mean).square().mean();
    const S is = S(1) / std::sqrt(var + S(eps));
    inv_std(i, 0) = is;
    xhat.row(i) = (x.row(i).array() - mean) * is;
    v.row(i) = xhat.row(i).cwiseProduct(gamma.val().row(0)) + beta.val().row(0);
  }
  const bool wants = g.wants({a, gamma, beta});
  Value<S> out = g.make(std::move(v), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, gamma, beta, out, xhat, inv_std, d] {
      const Mat<S>& go = g.grad(out.idx);
      if (g.nodes[gamma.idx].needs_grad) {
        g.grad(gamma.idx) += go.cwiseProduct(xhat).colwise().sum();
      }
      if (g.nodes[beta.idx].needs_grad) g.grad(beta.idx) += go.colwise().sum();
      if (g.nodes[a.idx].needs_grad) {
        Mat<S>& ga = g.grad(a.idx);
        for (int i = 0; i < go.rows(); ++i) {
          Eigen::Matrix<S, 1, Eigen::Dynamic> dxhat =
              go.row(i).cwiseProduct(gamma.val().row(0));
          const S m1 = dxhat.mean();
          const S m2 = dxhat.cwiseProduct(xhat.row(i)).mean();
          ga.row(i).array() +=
              inv_std(i, 0) * (dxhat.array() - m1 - xhat.row(i).array() * m2);
        }
      }
      (void)d;
    };
  }
  return out;
}

// 1 x 1 sum of squared entries
template <class S>
Value<S> square_sum(Value<S> a) {
  Graph<S>& g = *a.graph;
  Mat<S> v(1, 1);
  v(0, 0) = a.val().squaredNorm();
  const bool wants = g.wants({a});
  Value<S> out = g.make(std::move(v), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, a, out] {
      if (g.nodes[a.idx].needs_grad) g.grad(a.idx) += S(2) * g.grad(out.idx)(0, 0) * a.val();
    };
  }
  return out;
}

// 1 x 1 sum over rows of -log softmax(row)[target]; rows with target < 0 are
// skipped. Returns the node plus the number of counted rows via out param.
template <class S>
Value<S> cross_entropy_sum(Value<S> logits, const std::vector<int>& targets, int* counted = nullptr) {
  Graph<S>& g = *logits.graph;
  const Mat<S>& x = logits.val();
  Mat<S> probs(x.rows(), x.cols());
  double total = 0.0;  // loss terms in double: -log p underflows in float
  int count = 0;
  for (int i = 0; i < x.rows(); ++i) {
    const double mx = static_cast<double>(x.row(i).maxCoeff());
    double denom = 0.0;
    for (int j = 0; j < x.cols(); ++j) denom += std::exp(static_cast<double>(x(i, j)) - mx);
    for (int j = 0; j < x.cols(); ++j) {
      probs(i, j) = static_cast<S>(std::exp(static_cast<double>(x(i, j)) - mx) / denom);
    }
    if (targets[i] >= 0) {
      total += mx + std::log(denom) - static_cast<double>(x(i, targets[i]));
      ++count;
    }
  }
  if (counted) *counted = count;
  Mat<S> v(1, 1);
  v(0, 0) = static_cast<S>(total);
  const bool wants = g.wants({logits});
  Value<S> out = g.make(std::move(v), wants, nullptr);
  if (wants) {
    g.nodes[out.idx].backward = [&g, logits, out, probs, targets] {
      if (!g.nodes[logits.idx].needs_grad) return;
      const S go = g.grad(out.idx)(0, 0);
      Mat<S>& gl = g.grad(logits.idx);
      for (int i = 0; i < probs.rows(); ++i) {
        if (targets[i] < 0) continue;
        gl.row(i) += go * probs.row(i);
        gl(i, targets[i]) -= go;
      }
    };
  }
  return out;
}

template <class S>
Value<S> linear(Value<S> x, Value<S> w) {
  return matmul(x, w);
}

template <class S>
Value<S> linear(Value<S> x, Value<S> w, Value<S> b) {
  return add_rowvec(matmul(x, w), b);
}

}  // namespace ag
}  // namespace symplan

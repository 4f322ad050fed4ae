#pragma once

#include <functional>
#include <string>

#include "symplan/model.hpp"

namespace symplan {

struct GradCheckReport {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  std::string worst_param;
  int checked = 0;
  bool passed(double tol) const { return max_rel_err < tol; }
};

// Central finite differences against the analytic tape gradients. The loss
// builder must be deterministic (dropout off). stride > 1 subsamples large
// tensors; the default sweeps every parameter element.
template <class S>
GradCheckReport grad_check(
    Model<S>& model,
    const std::function<Value<S>(Graph<S>&, typename Model<S>::Bound&)>& build_loss,
    double fd_step = 1e-5, int stride = 1) {
  model.zero_grads();
  {
    Graph<S> g;
    auto bound = model.bind(g);
    Value<S> loss = build_loss(g, bound);
    g.backward(loss);
  }

  auto eval = [&]() -> double {
    Graph<S> g;
    g.recording = false;
    auto bound = model.bind(g);
    return static_cast<double>(build_loss(g, bound).scalar());
  };

  GradCheckReport report;
  for (std::size_t t = 0; t < model.params.entries.size(); ++t) {
    auto& entry = model.params.entries[t];
    for (int i = 0; i < entry.value.size(); i += stride) {
      S* cell = entry.value.data() + i;
      const S orig = *cell;
      const double an = static_cast<double>(model.grads[t].data()[i]);
      double rel = 0.0, abs_err = 0.0;
      // entries that land within h of a ReLU kink give O(1) central-diff
      // error; shrinking h moves the stencil off the kink, while a genuinely
      // wrong gradient stays wrong at every h
      for (double h : {fd_step, fd_step / 8.0, fd_step / 64.0}) {
        *cell = orig + S(h);
        const double plus = eval();
        *cell = orig - S(h);
        const double minus = eval();
        *cell = orig;
        const double fd = (plus - minus) / (2.0 * h);
        abs_err = std::abs(an - fd);
        if (abs_err < 1e-10 && std::abs(an) < 1e-10) {
          rel = 0.0;
          break;
        }
        rel = abs_err / std::max({std::abs(an), std::abs(fd), 1e-8});
        if (rel < 5e-4) break;
      }
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = entry.name + "[" + std::to_string(i) + "]";
      }
      report.max_abs_err = std::max(report.max_abs_err, abs_err);
      ++report.checked;
    }
  }
  return report;
}

}  // namespace symplan

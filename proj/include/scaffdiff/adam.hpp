//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_ADAM_HPP_
#define SCAFFDIFF_ADAM_HPP_

#include <cmath>

#include "scaffdiff/params.hpp"

namespace scaffdiff::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  int64_t step = 0;
  GradMap m;
  GradMap v;
};

/// Standard Adam update with bias correction, applied in place.
inline void adam_step(ModelParams &params, const GradMap &grads,
                      AdamState &state, const AdamConfig &cfg) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (auto &[name, p] : params) {
    auto git = grads.find(name);
    SCAFFDIFF_CHECK(git != grads.end(), "adam_step: missing gradient for '",
                    name, "'");
    const Tensor &g = git->second;
    SCAFFDIFF_CHECK(g.same_shape(p), "adam_step: gradient shape ",
                    g.shape_str(), " != parameter shape ", p.shape_str(),
                    " for '", name, "'");
    Tensor &m = state.m.try_emplace(name, Tensor(p.shape())).first->second;
    Tensor &v = state.v.try_emplace(name, Tensor(p.shape())).first->second;
    for (size_t i = 0; i < p.data().size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace scaffdiff::nn

#endif  // SCAFFDIFF_ADAM_HPP_

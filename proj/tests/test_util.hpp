//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_TESTS_TEST_UTIL_HPP_
#define SCAFFDIFF_TESTS_TEST_UTIL_HPP_

#include <functional>

#include "scaffdiff/params.hpp"
#include "scaffdiff/rng.hpp"

namespace scaffdiff::testing {

/// Central finite differences over every parameter entry. The loss callback
/// must be a pure function of the parameter store.
inline GradMap fd_gradients(const std::function<double(const ModelParams &)> &loss,
                            ModelParams &params, double step = 1e-5) {
  GradMap grads;
  for (auto &[name, value] : params) {
    Tensor g(value.shape());
    for (size_t i = 0; i < value.data().size(); ++i) {
      const double orig = value[i];
      value[i] = orig + step;
      const double up = loss(params);
      value[i] = orig - step;
      const double down = loss(params);
      value[i] = orig;
      g[i] = (up - down) / (2.0 * step);
    }
    grads.emplace(name, std::move(g));
  }
  return grads;
}

inline double max_rel_error(const GradMap &a, const GradMap &b,
                            double floor = 1e-6) {
  double worst = 0.0;
  for (const auto &[name, ga] : a) {
    const Tensor &gb = b.at(name);
    for (size_t i = 0; i < ga.data().size(); ++i) {
      const double denom =
          std::max({std::fabs(ga[i]), std::fabs(gb[i]), floor});
      worst = std::max(worst, std::fabs(ga[i] - gb[i]) / denom);
    }
  }
  return worst;
}

/// Uniform random rotation from a normalized quaternion.
inline Tensor random_rotation(RngState &rng) {
  double q[4];
  double norm = 0.0;
  for (auto &v : q) {
    v = rng.normal();
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (auto &v : q) v /= norm;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Tensor r({3, 3});
  r.at(0, 0) = 1 - 2 * (y * y + z * z);
  r.at(0, 1) = 2 * (x * y - w * z);
  r.at(0, 2) = 2 * (x * z + w * y);
  r.at(1, 0) = 2 * (x * y + w * z);
  r.at(1, 1) = 1 - 2 * (x * x + z * z);
  r.at(1, 2) = 2 * (y * z - w * x);
  r.at(2, 0) = 2 * (x * z - w * y);
  r.at(2, 1) = 2 * (y * z + w * x);
  r.at(2, 2) = 1 - 2 * (x * x + y * y);
  return r;
}

/// coords -> coords R^T + tau (row-vector convention).
inline Tensor rigid_motion(const Tensor &coords, const Tensor &rot,
                           const std::array<double, 3> &tau = {0, 0, 0}) {
  Tensor out = matmul_nt(coords, rot);
  for (int64_t i = 0; i < out.rows(); ++i)
    for (int64_t k = 0; k < 3; ++k) out.at(i, k) += tau[static_cast<size_t>(k)];
  return out;
}

}  // namespace scaffdiff::testing

#endif  // SCAFFDIFF_TESTS_TEST_UTIL_HPP_

//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_PARAMS_HPP_
#define SCAFFDIFF_PARAMS_HPP_

#include <map>
#include <string>
#include <vector>

#include "scaffdiff/rng.hpp"
#include "scaffdiff/tensor.hpp"

namespace scaffdiff {

/// Flat named parameter store. Keys are unique and shapes are fixed at
/// insertion; values may be updated in place by the optimizer.
class ModelParams {
 public:
  void insert(const std::string &name, Tensor value) {
    SCAFFDIFF_CHECK(store_.find(name) == store_.end(),
                    "duplicate parameter key '", name, "'");
    store_.emplace(name, std::move(value));
  }

  bool has(const std::string &name) const {
    return store_.find(name) != store_.end();
  }

  const Tensor &get(const std::string &name) const {
    auto it = store_.find(name);
    SCAFFDIFF_CHECK(it != store_.end(), "unknown parameter key '", name, "'");
    return it->second;
  }

  /// In-place value update; the shape stays fixed.
  void set(const std::string &name, const Tensor &value) {
    auto it = store_.find(name);
    SCAFFDIFF_CHECK(it != store_.end(), "unknown parameter key '", name, "'");
    SCAFFDIFF_CHECK(it->second.same_shape(value), "parameter '", name,
                    "' shape is immutable: ", it->second.shape_str(), " vs ",
                    value.shape_str());
    it->second = value;
  }

  size_t size() const { return store_.size(); }
  int64_t numel() const {
    int64_t n = 0;
    for (const auto &[k, v] : store_) n += v.numel();
    return n;
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    out.reserve(store_.size());
    for (const auto &[k, v] : store_) out.push_back(k);
    return out;
  }

  auto begin() const { return store_.begin(); }
  auto end() const { return store_.end(); }
  auto begin() { return store_.begin(); }
  auto end() { return store_.end(); }

  /// Merge another store under a key prefix.
  void adopt(const std::string &prefix, const ModelParams &other) {
    for (const auto &[k, v] : other) insert(prefix + k, v);
  }

  void fill(double value) {
    for (auto &[k, v] : store_)
      for (auto &x : v.data()) x = value;
  }

 private:
  std::map<std::string, Tensor> store_;
};

using GradMap = std::map<std::string, Tensor>;

inline double grad_norm(const GradMap &grads) {
  double acc = 0.0;
  for (const auto &[k, g] : grads)
    for (double v : g.data()) acc += v * v;
  return std::sqrt(acc);
}

/// Gaussian fan-in init for a weight matrix.
inline Tensor init_weight(RngState &rng, int64_t fan_in, int64_t fan_out,
                          double gain = 1.0) {
  Tensor w = gaussian(rng, fan_in, fan_out);
  const double s = gain / std::sqrt(static_cast<double>(fan_in));
  for (auto &v : w.data()) v *= s;
  return w;
}

}  // namespace scaffdiff

#endif  // SCAFFDIFF_PARAMS_HPP_

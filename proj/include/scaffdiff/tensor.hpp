//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_TENSOR_HPP_
#define SCAFFDIFF_TENSOR_HPP_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "scaffdiff/error.hpp"

namespace scaffdiff {

/// Dense row-major array of 64-bit floats. Rank 1 or 2; the network layers
/// treat every tensor as rows x cols with rank-1 meaning a single row.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    validate_shape();
    data_.assign(static_cast<size_t>(numel()), 0.0);
  }

  Tensor(std::vector<int64_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    validate_shape();
    SCAFFDIFF_CHECK(static_cast<int64_t>(data_.size()) == numel(),
                    "tensor data length ", data_.size(),
                    " does not match shape product ", numel());
  }

  static Tensor zeros(int64_t rows, int64_t cols) {
    return Tensor({rows, cols});
  }

  static Tensor full(int64_t rows, int64_t cols, double value) {
    Tensor t({rows, cols});
    for (auto &v : t.data_) v = value;
    return t;
  }

  static Tensor scalar(double value) { return Tensor({1, 1}, {value}); }

  static Tensor row(std::initializer_list<double> values) {
    return Tensor({1, static_cast<int64_t>(values.size())},
                  std::vector<double>(values));
  }

  static Tensor from_rows(const std::vector<std::vector<double>> &rows) {
    SCAFFDIFF_CHECK(!rows.empty(), "from_rows: empty row list");
    const int64_t cols = static_cast<int64_t>(rows[0].size());
    Tensor t({static_cast<int64_t>(rows.size()), cols});
    for (size_t i = 0; i < rows.size(); ++i) {
      SCAFFDIFF_CHECK(static_cast<int64_t>(rows[i].size()) == cols,
                      "from_rows: ragged row ", i);
      for (int64_t j = 0; j < cols; ++j) t.at(static_cast<int64_t>(i), j) = rows[i][j];
    }
    return t;
  }

  static Tensor identity(int64_t n) {
    Tensor t({n, n});
    for (int64_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
  }

  const std::vector<int64_t> &shape() const { return shape_; }
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }

  int64_t numel() const {
    return std::accumulate(shape_.begin(), shape_.end(), int64_t{1},
                           std::multiplies<int64_t>());
  }

  int64_t rows() const { return rank() == 2 ? shape_[0] : 1; }
  int64_t cols() const { return shape_.empty() ? 0 : shape_.back(); }

  double &at(int64_t r, int64_t c) { return data_[static_cast<size_t>(r * cols() + c)]; }
  double at(int64_t r, int64_t c) const { return data_[static_cast<size_t>(r * cols() + c)]; }

  double &operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  std::vector<double> &data() { return data_; }
  const std::vector<double> &data() const { return data_; }

  bool same_shape(const Tensor &other) const { return shape_ == other.shape_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double value() const {
    SCAFFDIFF_CHECK(numel() == 1, "value(): tensor has ", numel(), " entries");
    return data_[0];
  }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

 private:
  void validate_shape() const {
    SCAFFDIFF_CHECK(!shape_.empty() && shape_.size() <= 2,
                    "tensor rank must be 1 or 2");
    for (int64_t d : shape_)
      SCAFFDIFF_CHECK(d > 0, "tensor dimensions must be positive, got ", d);
  }

  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

inline Tensor matmul(const Tensor &a, const Tensor &b) {
  SCAFFDIFF_CHECK(a.cols() == b.rows(), "matmul: inner dims ", a.shape_str(),
                  " vs ", b.shape_str());
  const int64_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out({n, m});
  // ikj order keeps the inner loop contiguous in both b and out.
  for (int64_t i = 0; i < n; ++i) {
    double *orow = &out.data()[static_cast<size_t>(i * m)];
    const double *arow = &a.data()[static_cast<size_t>(i * k)];
    for (int64_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) continue;
      const double *brow = &b.data()[static_cast<size_t>(kk * m)];
      for (int64_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

/// a * b^T without materializing the transpose.
inline Tensor matmul_nt(const Tensor &a, const Tensor &b) {
  SCAFFDIFF_CHECK(a.cols() == b.cols(), "matmul_nt: inner dims ",
                  a.shape_str(), " vs ", b.shape_str());
  const int64_t n = a.rows(), k = a.cols(), m = b.rows();
  Tensor out({n, m});
  for (int64_t i = 0; i < n; ++i) {
    const double *arow = &a.data()[static_cast<size_t>(i * k)];
    for (int64_t j = 0; j < m; ++j) {
      const double *brow = &b.data()[static_cast<size_t>(j * k)];
      double acc = 0.0;
      for (int64_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      out.at(i, j) = acc;
    }
  }
  return out;
}

inline Tensor transpose(const Tensor &a) {
  Tensor out({a.cols(), a.rows()});
  for (int64_t i = 0; i < a.rows(); ++i)
    for (int64_t j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
  return out;
}

inline Tensor add(const Tensor &a, const Tensor &b) {
  SCAFFDIFF_CHECK(a.same_shape(b), "add: shape mismatch ", a.shape_str(),
                  " vs ", b.shape_str());
  Tensor out = a;
  for (size_t i = 0; i < out.data().size(); ++i) out[i] += b[i];
  return out;
}

inline Tensor sub(const Tensor &a, const Tensor &b) {
  SCAFFDIFF_CHECK(a.same_shape(b), "sub: shape mismatch ", a.shape_str(),
                  " vs ", b.shape_str());
  Tensor out = a;
  for (size_t i = 0; i < out.data().size(); ++i) out[i] -= b[i];
  return out;
}

inline Tensor mul(const Tensor &a, const Tensor &b) {
  SCAFFDIFF_CHECK(a.same_shape(b), "mul: shape mismatch ", a.shape_str(),
                  " vs ", b.shape_str());
  Tensor out = a;
  for (size_t i = 0; i < out.data().size(); ++i) out[i] *= b[i];
  return out;
}

inline Tensor scale(const Tensor &a, double c) {
  Tensor out = a;
  for (auto &v : out.data()) v *= c;
  return out;
}

inline double dot(const Tensor &a, const Tensor &b) {
  SCAFFDIFF_CHECK(a.same_shape(b), "dot: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double sum(const Tensor &a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  return acc;
}

inline double max_abs(const Tensor &a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::fabs(v));
  return m;
}

inline double max_abs_diff(const Tensor &a, const Tensor &b) {
  SCAFFDIFF_CHECK(a.same_shape(b), "max_abs_diff: shape mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace scaffdiff

#endif  // SCAFFDIFF_TENSOR_HPP_

//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_AUTOGRAD_HPP_
#define SCAFFDIFF_AUTOGRAD_HPP_

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "scaffdiff/params.hpp"
#include "scaffdiff/tensor.hpp"

namespace scaffdiff::ad {

// Tape node. The backprop closure pushes the incoming gradient into the
// parents; nodes reachable only through constants carry no closure at all,
// so frozen subgraphs cost nothing on the backward pass.
struct Node {
  Tensor val;
  Tensor grad;
  bool has_grad = false;
  bool requires_grad = false;
  std::string param_name;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(const Tensor &)> backprop;

  void accumulate(const Tensor &g) {
    if (!requires_grad) return;
    if (!has_grad) {
      grad = g;
      has_grad = true;
    } else {
      for (size_t i = 0; i < grad.data().size(); ++i) grad[i] += g[i];
    }
  }
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> n) : n_(std::move(n)) {}

  const Tensor &val() const { return n_->val; }
  int64_t rows() const { return n_->val.rows(); }
  int64_t cols() const { return n_->val.cols(); }
  bool defined() const { return n_ != nullptr; }
  bool requires_grad() const { return n_->requires_grad; }
  std::shared_ptr<Node> node() const { return n_; }

 private:
  std::shared_ptr<Node> n_;
};

inline Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->val = std::move(value);
  return Var(n);
}

inline Var leaf(Tensor value, std::string param_name) {
  auto n = std::make_shared<Node>();
  n->val = std::move(value);
  n->requires_grad = true;
  n->param_name = std::move(param_name);
  return Var(n);
}

namespace detail {

inline std::shared_ptr<Node> make_op(Tensor value,
                                     std::vector<Var> inputs) {
  auto n = std::make_shared<Node>();
  n->val = std::move(value);
  for (const auto &v : inputs) {
    n->parents.push_back(v.node());
    n->requires_grad = n->requires_grad || v.requires_grad();
  }
  return n;
}

}  // namespace detail

inline Var add(const Var &a, const Var &b) {
  auto n = detail::make_op(scaffdiff::add(a.val(), b.val()), {a, b});
  if (n->requires_grad) {
    auto pa = a.node(), pb = b.node();
    n->backprop = [pa, pb](const Tensor &g) {
      pa->accumulate(g);
      pb->accumulate(g);
    };
  }
  return Var(n);
}

inline Var sub(const Var &a, const Var &b) {
  auto n = detail::make_op(scaffdiff::sub(a.val(), b.val()), {a, b});
  if (n->requires_grad) {
    auto pa = a.node(), pb = b.node();
    n->backprop = [pa, pb](const Tensor &g) {
      pa->accumulate(g);
      pb->accumulate(scaffdiff::scale(g, -1.0));
    };
  }
  return Var(n);
}

inline Var mul(const Var &a, const Var &b) {
  auto n = detail::make_op(scaffdiff::mul(a.val(), b.val()), {a, b});
  if (n->requires_grad) {
    auto pa = a.node(), pb = b.node();
    n->backprop = [pa, pb](const Tensor &g) {
      pa->accumulate(scaffdiff::mul(g, pb->val));
      pb->accumulate(scaffdiff::mul(g, pa->val));
    };
  }
  return Var(n);
}

inline Var scale(const Var &a, double c) {
  auto n = detail::make_op(scaffdiff::scale(a.val(), c), {a});
  if (n->requires_grad) {
    auto pa = a.node();
    n->backprop = [pa, c](const Tensor &g) {
      pa->accumulate(scaffdiff::scale(g, c));
    };
  }
  return Var(n);
}

inline Var add_scalar(const Var &a, double c) {
  Tensor out = a.val();
  for (auto &v : out.data()) v += c;
  auto n = detail::make_op(std::move(out), {a});
  if (n->requires_grad) {
    auto pa = a.node();
    n->backprop = [pa](const Tensor &g) { pa->accumulate(g); };
  }
  return Var(n);
}

inline Var matmul(const Var &a, const Var &b) {
  auto n = detail::make_op(scaffdiff::matmul(a.val(), b.val()), {a, b});
  if (n->requires_grad) {
    auto pa = a.node(), pb = b.node();
    n->backprop = [pa, pb](const Tensor &g) {
      if (pa->requires_grad) pa->accumulate(scaffdiff::matmul_nt(g, pb->val));
      if (pb->requires_grad)
        pb->accumulate(scaffdiff::matmul(scaffdiff::transpose(pa->val), g));
    };
  }
  return Var(n);
}

/// a * b^T.
inline Var matmul_nt(const Var &a, const Var &b) {
  auto n = detail::make_op(scaffdiff::matmul_nt(a.val(), b.val()), {a, b});
  if (n->requires_grad) {
    auto pa = a.node(), pb = b.node();
    n->backprop = [pa, pb](const Tensor &g) {
      if (pa->requires_grad) pa->accumulate(scaffdiff::matmul(g, pb->val));
      if (pb->requires_grad)
        pb->accumulate(scaffdiff::matmul(scaffdiff::transpose(g), pa->val));
    };
  }
  return Var(n);
}

/// Broadcast a 1 x D bias over the rows of an N x D matrix.
inline Var add_rowvec(const Var &a, const Var &b) {
  SCAFFDIFF_CHECK(b.rows() == 1 && b.cols() == a.cols(),
                  "add_rowvec: bias shape ", b.val().shape_str(),
                  " does not broadcast over ", a.val().shape_str());
  Tensor out = a.val();
  for (int64_t i = 0; i < out.rows(); ++i)
    for (int64_t j = 0; j < out.cols(); ++j) out.at(i, j) += b.val().at(0, j);
  auto n = detail::make_op(std::move(out), {a, b});
  if (n->requires_grad) {
    auto pa = a.node(), pb = b.node();
    n->backprop = [pa, pb](const Tensor &g) {
      if (pa->requires_grad) pa->accumulate(g);
      if (pb->requires_grad) {
        Tensor gb({1, g.cols()});
        for (int64_t i = 0; i < g.rows(); ++i)
          for (int64_t j = 0; j < g.cols(); ++j) gb.at(0, j) += g.at(i, j);
        pb->accumulate(gb);
      }
    };
  }
  return Var(n);
}

/// Multiply each row of an N x D matrix by the matching entry of an N x 1
/// column (edge-weight times edge-vector).
inline Var mul_colvec(const Var &a, const Var &c) {
  SCAFFDIFF_CHECK(c.cols() == 1 && c.rows() == a.rows(),
                  "mul_colvec: column shape ", c.val().shape_str(),
                  " does not broadcast over ", a.val().shape_str());
  Tensor out = a.val();
  for (int64_t i = 0; i < out.rows(); ++i)
    for (int64_t j = 0; j < out.cols(); ++j) out.at(i, j) *= c.val().at(i, 0);
  auto n = detail::make_op(std::move(out), {a, c});
  if (n->requires_grad) {
    auto pa = a.node(), pc = c.node();
    n->backprop = [pa, pc](const Tensor &g) {
      if (pa->requires_grad) {
        Tensor ga = g;
        for (int64_t i = 0; i < ga.rows(); ++i)
          for (int64_t j = 0; j < ga.cols(); ++j)
            ga.at(i, j) *= pc->val.at(i, 0);
        pa->accumulate(ga);
      }
      if (pc->requires_grad) {
        Tensor gc({g.rows(), 1});
        for (int64_t i = 0; i < g.rows(); ++i) {
          double acc = 0.0;
          for (int64_t j = 0; j < g.cols(); ++j)
            acc += g.at(i, j) * pa->val.at(i, j);
          gc.at(i, 0) = acc;
        }
        pc->accumulate(gc);
      }
    };
  }
  return Var(n);
}

inline Var concat_cols(const std::vector<Var> &parts) {
  SCAFFDIFF_CHECK(!parts.empty(), "concat_cols: no inputs");
  const int64_t rows = parts[0].rows();
  int64_t cols = 0;
  for (const auto &p : parts) {
    SCAFFDIFF_CHECK(p.rows() == rows, "concat_cols: row mismatch");
    cols += p.cols();
  }
  Tensor out({rows, cols});
  int64_t off = 0;
  for (const auto &p : parts) {
    for (int64_t i = 0; i < rows; ++i)
      for (int64_t j = 0; j < p.cols(); ++j)
        out.at(i, off + j) = p.val().at(i, j);
    off += p.cols();
  }
  auto n = detail::make_op(std::move(out), parts);
  if (n->requires_grad) {
    std::vector<std::shared_ptr<Node>> ps;
    std::vector<int64_t> widths;
    for (const auto &p : parts) {
      ps.push_back(p.node());
      widths.push_back(p.cols());
    }
    n->backprop = [ps, widths, rows](const Tensor &g) {
      int64_t off = 0;
      for (size_t k = 0; k < ps.size(); ++k) {
        if (ps[k]->requires_grad) {
          Tensor gk({rows, widths[k]});
          for (int64_t i = 0; i < rows; ++i)
            for (int64_t j = 0; j < widths[k]; ++j)
              gk.at(i, j) = g.at(i, off + j);
          ps[k]->accumulate(gk);
        }
        off += widths[k];
      }
    };
  }
  return Var(n);
}

inline Var concat_rows(const std::vector<Var> &parts) {
  SCAFFDIFF_CHECK(!parts.empty(), "concat_rows: no inputs");
  const int64_t cols = parts[0].cols();
  int64_t rows = 0;
  for (const auto &p : parts) {
    SCAFFDIFF_CHECK(p.cols() == cols, "concat_rows: column mismatch");
    rows += p.rows();
  }
  Tensor out({rows, cols});
  int64_t off = 0;
  for (const auto &p : parts) {
    for (int64_t i = 0; i < p.rows(); ++i)
      for (int64_t j = 0; j < cols; ++j) out.at(off + i, j) = p.val().at(i, j);
    off += p.rows();
  }
  auto n = detail::make_op(std::move(out), parts);
  if (n->requires_grad) {
    std::vector<std::shared_ptr<Node>> ps;
    std::vector<int64_t> heights;
    for (const auto &p : parts) {
      ps.push_back(p.node());
      heights.push_back(p.rows());
    }
    n->backprop = [ps, heights, cols](const Tensor &g) {
      int64_t off = 0;
      for (size_t k = 0; k < ps.size(); ++k) {
        if (ps[k]->requires_grad) {
          Tensor gk({heights[k], cols});
          for (int64_t i = 0; i < heights[k]; ++i)
            for (int64_t j = 0; j < cols; ++j) gk.at(i, j) = g.at(off + i, j);
          ps[k]->accumulate(gk);
        }
        off += heights[k];
      }
    };
  }
  return Var(n);
}

inline Var slice_cols(const Var &a, int64_t lo, int64_t hi) {
  SCAFFDIFF_CHECK(0 <= lo && lo < hi && hi <= a.cols(), "slice_cols: [", lo,
                  ",", hi, ") out of range for ", a.val().shape_str());
  Tensor out({a.rows(), hi - lo});
  for (int64_t i = 0; i < a.rows(); ++i)
    for (int64_t j = lo; j < hi; ++j) out.at(i, j - lo) = a.val().at(i, j);
  auto n = detail::make_op(std::move(out), {a});
  if (n->requires_grad) {
    auto pa = a.node();
    n->backprop = [pa, lo](const Tensor &g) {
      Tensor ga({pa->val.rows(), pa->val.cols()});
      for (int64_t i = 0; i < g.rows(); ++i)
        for (int64_t j = 0; j < g.cols(); ++j) ga.at(i, lo + j) = g.at(i, j);
      pa->accumulate(ga);
    };
  }
  return Var(n);
}

inline Var slice_rows(const Var &a, int64_t lo, int64_t hi) {
  SCAFFDIFF_CHECK(0 <= lo && lo < hi && hi <= a.rows(), "slice_rows: [", lo,
                  ",", hi, ") out of range for ", a.val().shape_str());
  Tensor out({hi - lo, a.cols()});
  for (int64_t i = lo; i < hi; ++i)
    for (int64_t j = 0; j < a.cols(); ++j) out.at(i - lo, j) = a.val().at(i, j);
  auto n = detail::make_op(std::move(out), {a});
  if (n->requires_grad) {
    auto pa = a.node();
    n->backprop = [pa, lo](const Tensor &g) {
      Tensor ga({pa->val.rows(), pa->val.cols()});
      for (int64_t i = 0; i < g.rows(); ++i)
        for (int64_t j = 0; j < g.cols(); ++j) ga.at(lo + i, j) = g.at(i, j);
      pa->accumulate(ga);
    };
  }
  return Var(n);
}

inline Var gather_rows(const Var &a, const std::vector<int64_t> &idx) {
  for (int64_t i : idx)
    SCAFFDIFF_CHECK(0 <= i && i < a.rows(), "gather_rows: index ", i,
                    " out of range [0,", a.rows(), ")");
  Tensor out({static_cast<int64_t>(idx.size()), a.cols()});
  for (size_t e = 0; e < idx.size(); ++e)
    for (int64_t j = 0; j < a.cols(); ++j)
      out.at(static_cast<int64_t>(e), j) = a.val().at(idx[e], j);
  auto n = detail::make_op(std::move(out), {a});
  if (n->requires_grad) {
    auto pa = a.node();
    n->backprop = [pa, idx](const Tensor &g) {
      Tensor ga({pa->val.rows(), pa->val.cols()});
      for (size_t e = 0; e < idx.size(); ++e)
        for (int64_t j = 0; j < g.cols(); ++j)
          ga.at(idx[e], j) += g.at(static_cast<int64_t>(e), j);
      pa->accumulate(ga);
    };
  }
  return Var(n);
}

/// out[i, :] = sum over edges e with idx[e] == i of a[e, :].
inline Var scatter_add_rows(const Var &a, const std::vector<int64_t> &idx,
                            int64_t n_out) {
  SCAFFDIFF_CHECK(static_cast<int64_t>(idx.size()) == a.rows(),
                  "scatter_add_rows: index count ", idx.size(),
                  " vs rows ", a.rows());
  for (int64_t i : idx)
    SCAFFDIFF_CHECK(0 <= i && i < n_out, "scatter_add_rows: index ", i,
                    " out of range [0,", n_out, ")");
  Tensor out({n_out, a.cols()});
  for (size_t e = 0; e < idx.size(); ++e)
    for (int64_t j = 0; j < a.cols(); ++j)
      out.at(idx[e], j) += a.val().at(static_cast<int64_t>(e), j);
  auto n = detail::make_op(std::move(out), {a});
  if (n->requires_grad) {
    auto pa = a.node();
    n->backprop = [pa, idx](const Tensor &g) {
      Tensor ga({pa->val.rows(), pa->val.cols()});
      for (size_t e = 0; e < idx.size(); ++e)
        for (int64_t j = 0; j < g.cols(); ++j)
          ga.at(static_cast<int64_t>(e), j) = g.at(idx[e], j);
      pa->accumulate(ga);
    };
  }
  return Var(n);
}

inline Var sum_cols(const Var &a) {
  Tensor out({a.rows(), 1});
  for (int64_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (int64_t j = 0; j < a.cols(); ++j) acc += a.val().at(i, j);
    out.at(i, 0) = acc;
  }
  auto n = detail::make_op(std::move(out), {a});
  if (n->requires_grad) {
    auto pa = a.node();
    n->backprop = [pa](const Tensor &g) {
      Tensor ga({pa->val.rows(), pa->val.cols()});
      for (int64_t i = 0; i < ga.rows(); ++i)
        for (int64_t j = 0; j < ga.cols(); ++j) ga.at(i, j) = g.at(i, 0);
      pa->accumulate(ga);
    };
  }
  return Var(n);
}

inline Var sum_all(const Var &a) {
  auto n = detail::make_op(Tensor::scalar(scaffdiff::sum(a.val())), {a});
  if (n->requires_grad) {
    auto pa = a.node();
    n->backprop = [pa](const Tensor &g) {
      pa->accumulate(Tensor::full(pa->val.rows(), pa->val.cols(), g[0]));
    };
  }
  return Var(n);
}

inline Var sigmoid(const Var &a) {
  Tensor out = a.val();
  for (auto &v : out.data()) v = 1.0 / (1.0 + std::exp(-v));
  auto n = detail::make_op(std::move(out), {a});
  if (n->requires_grad) {
    auto pa = a.node();
    auto self = n.get();
    n->backprop = [pa, self](const Tensor &g) {
      Tensor ga = g;
      for (size_t i = 0; i < ga.data().size(); ++i) {
        const double s = self->val[i];
        ga[i] *= s * (1.0 - s);
      }
      pa->accumulate(ga);
    };
  }
  return Var(n);
}

inline Var silu(const Var &a) {
  Tensor out = a.val();
  for (auto &v : out.data()) v = v / (1.0 + std::exp(-v));
  auto n = detail::make_op(std::move(out), {a});
  if (n->requires_grad) {
    auto pa = a.node();
    n->backprop = [pa](const Tensor &g) {
      Tensor ga = g;
      for (size_t i = 0; i < ga.data().size(); ++i) {
        const double x = pa->val[i];
        const double s = 1.0 / (1.0 + std::exp(-x));
        ga[i] *= s * (1.0 + x * (1.0 - s));
      }
      pa->accumulate(ga);
    };
  }
  return Var(n);
}

inline Var softmax_rows(const Var &a) {
  Tensor out = a.val();
  for (int64_t i = 0; i < out.rows(); ++i) {
    double mx = out.at(i, 0);
    for (int64_t j = 1; j < out.cols(); ++j) mx = std::max(mx, out.at(i, j));
    double z = 0.0;
    for (int64_t j = 0; j < out.cols(); ++j) {
      out.at(i, j) = std::exp(out.at(i, j) - mx);
      z += out.at(i, j);
    }
    for (int64_t j = 0; j < out.cols(); ++j) out.at(i, j) /= z;
  }
  auto n = detail::make_op(std::move(out), {a});
  if (n->requires_grad) {
    auto pa = a.node();
    auto self = n.get();
    n->backprop = [pa, self](const Tensor &g) {
      Tensor ga = g;
      for (int64_t i = 0; i < ga.rows(); ++i) {
        double dot = 0.0;
        for (int64_t j = 0; j < ga.cols(); ++j)
          dot += g.at(i, j) * self->val.at(i, j);
        for (int64_t j = 0; j < ga.cols(); ++j)
          ga.at(i, j) = self->val.at(i, j) * (g.at(i, j) - dot);
      }
      pa->accumulate(ga);
    };
  }
  return Var(n);
}

/// sqrt(x + eps); eps keeps the derivative finite at coincident atoms.
inline Var sqrt_eps(const Var &a, double eps = 1e-12) {
  Tensor out = a.val();
  for (auto &v : out.data()) v = std::sqrt(v + eps);
  auto n = detail::make_op(std::move(out), {a});
  if (n->requires_grad) {
    auto pa = a.node();
    auto self = n.get();
    n->backprop = [pa, self](const Tensor &g) {
      Tensor ga = g;
      for (size_t i = 0; i < ga.data().size(); ++i)
        ga[i] *= 0.5 / self->val[i];
      pa->accumulate(ga);
    };
  }
  return Var(n);
}

inline Var recip(const Var &a) {
  Tensor out = a.val();
  for (auto &v : out.data()) {
    SCAFFDIFF_CHECK(v != 0.0, "recip: division by zero");
    v = 1.0 / v;
  }
  auto n = detail::make_op(std::move(out), {a});
  if (n->requires_grad) {
    auto pa = a.node();
    auto self = n.get();
    n->backprop = [pa, self](const Tensor &g) {
      Tensor ga = g;
      for (size_t i = 0; i < ga.data().size(); ++i)
        ga[i] *= -self->val[i] * self->val[i];
      pa->accumulate(ga);
    };
  }
  return Var(n);
}

/// Sum of squared entries as a scalar node.
inline Var sum_squares(const Var &a) { return sum_all(mul(a, a)); }

/// Reverse-mode sweep from a scalar loss. Returns gradients for every key
/// in `params`; parameters the loss never touched get zeros.
inline GradMap backward(const Var &loss, const ModelParams &params) {
  SCAFFDIFF_CHECK(loss.val().numel() == 1,
                  "backward: loss must be scalar, got shape ",
                  loss.val().shape_str());

  // Iterative post-order topological sort.
  std::vector<Node *> order;
  std::unordered_set<Node *> seen;
  std::vector<std::pair<Node *, size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto &[node, next] = stack.back();
    if (next < node->parents.size()) {
      Node *p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->accumulate(Tensor::scalar(1.0));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node *node = *it;
    if (node->has_grad && node->backprop) node->backprop(node->grad);
  }

  GradMap grads;
  for (Node *node : order) {
    if (node->param_name.empty()) continue;
    Tensor g = node->has_grad
                   ? node->grad
                   : Tensor({node->val.rows(), node->val.cols()});
    auto [it, inserted] = grads.emplace(node->param_name, std::move(g));
    if (!inserted && node->has_grad)
      it->second = scaffdiff::add(it->second, node->grad);
  }
  for (const auto &[name, value] : params)
    if (grads.find(name) == grads.end())
      grads.emplace(name, Tensor({value.rows(), value.cols()}));
  return grads;
}

/// Materializes each named parameter as a single tape leaf per forward pass.
class ParamBank {
 public:
  explicit ParamBank(const ModelParams &params, bool trainable = true)
      : params_(params), trainable_(trainable) {}

  Var operator()(const std::string &name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    Var v = trainable_ ? leaf(params_.get(name), name)
                       : constant(params_.get(name));
    cache_.emplace(name, v);
    return v;
  }

  const ModelParams &params() const { return params_; }

 private:
  const ModelParams &params_;
  bool trainable_;
  std::unordered_map<std::string, Var> cache_;
};

}  // namespace scaffdiff::ad

#endif  // SCAFFDIFF_AUTOGRAD_HPP_

//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_NN_HPP_
#define SCAFFDIFF_NN_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scaffdiff/autograd.hpp"
#include "scaffdiff/params.hpp"

namespace scaffdiff::nn {

enum class Act { none, silu, sigmoid };

/// Fully-connected stack. widths = [in, h1, ..., out]; parameters live at
/// "<prefix>/w<i>" and "<prefix>/b<i>".
struct MlpSpec {
  std::string prefix;
  std::vector<int64_t> widths;
  Act hidden_act = Act::silu;
  Act final_act = Act::none;

  int64_t in_dim() const { return widths.front(); }
  int64_t out_dim() const { return widths.back(); }
  size_t n_layers() const { return widths.size() - 1; }
};

inline void init_mlp(ModelParams &params, const MlpSpec &spec, RngState &rng,
                     double gain = 1.0) {
  SCAFFDIFF_CHECK(spec.widths.size() >= 2, "mlp '", spec.prefix,
                  "': need at least [in, out] widths");
  for (size_t i = 0; i + 1 < spec.widths.size(); ++i) {
    params.insert(spec.prefix + "/w" + std::to_string(i),
                  init_weight(rng, spec.widths[i], spec.widths[i + 1], gain));
    params.insert(spec.prefix + "/b" + std::to_string(i),
                  Tensor({1, spec.widths[i + 1]}));
  }
}

inline ad::Var apply_act(const ad::Var &x, Act act) {
  switch (act) {
    case Act::silu: return ad::silu(x);
    case Act::sigmoid: return ad::sigmoid(x);
    case Act::none: return x;
  }
  return x;
}

inline ad::Var mlp_forward(ad::ParamBank &bank, const MlpSpec &spec,
                           const ad::Var &input) {
  SCAFFDIFF_CHECK(input.cols() == spec.in_dim(), "mlp '", spec.prefix,
                  "' layer 0: input width ", input.cols(), " != expected ",
                  spec.in_dim());
  ad::Var x = input;
  for (size_t i = 0; i + 1 < spec.widths.size(); ++i) {
    const std::string si = std::to_string(i);
    x = ad::add_rowvec(ad::matmul(x, bank(spec.prefix + "/w" + si)),
                       bank(spec.prefix + "/b" + si));
    x = apply_act(x, i + 2 < spec.widths.size() ? spec.hidden_act
                                                : spec.final_act);
  }
  return x;
}

/// Plain-tensor evaluation for code paths that never need gradients.
inline Tensor mlp_forward(const ModelParams &params, const MlpSpec &spec,
                          const Tensor &input) {
  ad::ParamBank bank(params, /*trainable=*/false);
  return mlp_forward(bank, spec, ad::constant(input)).val();
}

// ---------------------------------------------------------------------------
// Graph edges

struct EdgeList {
  std::vector<int64_t> recv;  // message receiver i
  std::vector<int64_t> send;  // message sender j
  size_t size() const { return recv.size(); }
};

/// All ordered pairs (i, j), i != j, with |x_i - x_j| <= cutoff.
inline EdgeList build_edges(const Tensor &coords, double cutoff) {
  SCAFFDIFF_CHECK(coords.cols() == 3, "build_edges: coords must be N x 3");
  const int64_t n = coords.rows();
  const double c2 = cutoff * cutoff;
  EdgeList edges;
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double d2 = 0.0;
      for (int64_t k = 0; k < 3; ++k) {
        const double d = coords.at(i, k) - coords.at(j, k);
        d2 += d * d;
      }
      if (d2 <= c2) {
        edges.recv.push_back(i);
        edges.send.push_back(j);
      }
    }
  }
  return edges;
}

/// Cutoff edges plus full bipartite connectivity between two node ranges
/// (used for scaffold <-> R-group coupling).
inline EdgeList build_edges_joint(const Tensor &coords, double cutoff,
                                  std::pair<int64_t, int64_t> range_a,
                                  std::pair<int64_t, int64_t> range_b) {
  const int64_t n = coords.rows();
  std::vector<bool> have(static_cast<size_t>(n * n), false);
  EdgeList edges = build_edges(coords, cutoff);
  for (size_t e = 0; e < edges.size(); ++e)
    have[static_cast<size_t>(edges.recv[e] * n + edges.send[e])] = true;
  auto link = [&](int64_t i, int64_t j) {
    if (i == j) return;
    if (!have[static_cast<size_t>(i * n + j)]) {
      have[static_cast<size_t>(i * n + j)] = true;
      edges.recv.push_back(i);
      edges.send.push_back(j);
    }
  };
  for (int64_t a = range_a.first; a < range_a.second; ++a) {
    for (int64_t b = range_b.first; b < range_b.second; ++b) {
      link(a, b);
      link(b, a);
    }
  }
  return edges;
}

// ---------------------------------------------------------------------------
// EGNN layer

struct EgnnLayerConfig {
  int64_t hidden_dim = 64;
  int64_t message_dim = 64;
  bool coordinate_update = true;
  double distance_cutoff = 5.0;
  std::string prefix;

  MlpSpec phi_e() const {
    return {prefix + "/phi_e",
            {2 * hidden_dim + 1, message_dim, message_dim},
            Act::silu,
            Act::silu};
  }
  MlpSpec phi_x() const {
    return {prefix + "/phi_x", {message_dim, message_dim, 1}, Act::silu,
            Act::none};
  }
  MlpSpec phi_h() const {
    return {prefix + "/phi_h",
            {hidden_dim + message_dim, hidden_dim, hidden_dim},
            Act::silu,
            Act::none};
  }
};

inline void init_egnn_layer(ModelParams &params, const EgnnLayerConfig &cfg,
                            RngState &rng) {
  SCAFFDIFF_CHECK(cfg.hidden_dim > 0 && cfg.message_dim > 0,
                  "egnn '", cfg.prefix, "': dims must be positive");
  SCAFFDIFF_CHECK(cfg.distance_cutoff > 0, "egnn '", cfg.prefix,
                  "': cutoff must be positive");
  init_mlp(params, cfg.phi_e(), rng);
  init_mlp(params, cfg.phi_x(), rng);
  init_mlp(params, cfg.phi_h(), rng);
}

/// One equivariant message-passing step:
///   m_ij = phi_e(h_i, h_j, |x_i - x_j|^2)
///   x'_i = x_i + sum_j (x_i - x_j) * phi_x(m_ij) / (1 + |x_i - x_j|)
///   h'_i = phi_h(h_i, sum_j m_ij)
/// Coordinate updates are restricted to rows where coord_mask is nonzero;
/// an empty mask means all rows move.
inline std::pair<ad::Var, ad::Var> egnn_layer(
    ad::ParamBank &bank, const EgnnLayerConfig &cfg, const ad::Var &h,
    const ad::Var &x, const EdgeList &edges,
    const std::vector<double> &coord_mask = {}) {
  const int64_t n = h.rows();
  SCAFFDIFF_CHECK(x.rows() == n, "egnn '", cfg.prefix, "': h has ", n,
                  " rows but x has ", x.rows());
  SCAFFDIFF_CHECK(h.cols() == cfg.hidden_dim, "egnn '", cfg.prefix,
                  "': h width ", h.cols(), " != hidden_dim ", cfg.hidden_dim);
  for (size_t e = 0; e < edges.size(); ++e)
    SCAFFDIFF_CHECK(edges.recv[e] >= 0 && edges.recv[e] < n &&
                        edges.send[e] >= 0 && edges.send[e] < n,
                    "egnn '", cfg.prefix, "': edge ", e, " references node ",
                    edges.recv[e], "->", edges.send[e], " outside [0,", n,
                    ")");

  if (edges.size() == 0) {
    ad::Var agg = ad::constant(Tensor({n, cfg.message_dim}));
    ad::Var h_out =
        mlp_forward(bank, cfg.phi_h(), ad::concat_cols({h, agg}));
    return {h_out, x};
  }

  ad::Var hi = ad::gather_rows(h, edges.recv);
  ad::Var hj = ad::gather_rows(h, edges.send);
  ad::Var xi = ad::gather_rows(x, edges.recv);
  ad::Var xj = ad::gather_rows(x, edges.send);
  ad::Var dx = ad::sub(xi, xj);
  ad::Var d2 = ad::sum_cols(ad::mul(dx, dx));

  ad::Var m = mlp_forward(bank, cfg.phi_e(), ad::concat_cols({hi, hj, d2}));
  ad::Var agg = ad::scatter_add_rows(m, edges.recv, n);
  ad::Var h_out = mlp_forward(bank, cfg.phi_h(), ad::concat_cols({h, agg}));

  ad::Var x_out = x;
  if (cfg.coordinate_update) {
    ad::Var w = mlp_forward(bank, cfg.phi_x(), m);
    ad::Var inv = ad::recip(ad::add_scalar(ad::sqrt_eps(d2), 1.0));
    ad::Var delta =
        ad::scatter_add_rows(ad::mul_colvec(dx, ad::mul(w, inv)),
                             edges.recv, n);
    if (!coord_mask.empty()) {
      SCAFFDIFF_CHECK(static_cast<int64_t>(coord_mask.size()) == n,
                      "egnn '", cfg.prefix, "': coord_mask length ",
                      coord_mask.size(), " != node count ", n);
      Tensor mask({n, 1});
      for (int64_t i = 0; i < n; ++i) mask.at(i, 0) = coord_mask[i];
      delta = ad::mul_colvec(delta, ad::constant(mask));
    }
    x_out = ad::add(x, delta);
  }
  return {h_out, x_out};
}

// ---------------------------------------------------------------------------
// Cross attention

struct AttentionConfig {
  std::string prefix;
  int64_t query_dim = 0;
  int64_t key_dim = 0;
  int64_t value_dim = 0;
  int64_t attn_dim = 0;
  int64_t out_dim = 0;
};

inline void init_attention(ModelParams &params, const AttentionConfig &cfg,
                           RngState &rng) {
  params.insert(cfg.prefix + "/wq",
                init_weight(rng, cfg.query_dim, cfg.attn_dim));
  params.insert(cfg.prefix + "/wk",
                init_weight(rng, cfg.key_dim, cfg.attn_dim));
  params.insert(cfg.prefix + "/wv",
                init_weight(rng, cfg.value_dim, cfg.out_dim));
}

/// Scaled dot-product attention; every output row is a convex combination
/// of the projected value rows.
inline ad::Var cross_attention(ad::ParamBank &bank,
                               const AttentionConfig &cfg,
                               const ad::Var &queries, const ad::Var &keys,
                               const ad::Var &values) {
  SCAFFDIFF_CHECK(keys.rows() == values.rows(), "attention '", cfg.prefix,
                  "': ", keys.rows(), " keys vs ", values.rows(), " values");
  ad::Var q = ad::matmul(queries, bank(cfg.prefix + "/wq"));
  ad::Var k = ad::matmul(keys, bank(cfg.prefix + "/wk"));
  ad::Var v = ad::matmul(values, bank(cfg.prefix + "/wv"));
  ad::Var scores =
      ad::scale(ad::matmul_nt(q, k),
                1.0 / std::sqrt(static_cast<double>(cfg.attn_dim)));
  return ad::matmul(ad::softmax_rows(scores), v);
}

/// Attention weight matrix alone, for the row-stochasticity checks.
inline Tensor attention_weights(const ModelParams &params,
                                const AttentionConfig &cfg,
                                const Tensor &queries, const Tensor &keys) {
  ad::ParamBank bank(params, false);
  ad::Var q = ad::matmul(ad::constant(queries), bank(cfg.prefix + "/wq"));
  ad::Var k = ad::matmul(ad::constant(keys), bank(cfg.prefix + "/wk"));
  ad::Var scores =
      ad::scale(ad::matmul_nt(q, k),
                1.0 / std::sqrt(static_cast<double>(cfg.attn_dim)));
  return ad::softmax_rows(scores).val();
}

// ---------------------------------------------------------------------------
// Time conditioning

/// Sinusoidal embedding of t/T; dim must be even.
inline Tensor time_embedding(int64_t t, int64_t T, int64_t dim) {
  SCAFFDIFF_CHECK(dim > 0 && dim % 2 == 0,
                  "time_embedding: dim must be positive and even, got ", dim);
  const double tau = static_cast<double>(t) / static_cast<double>(T);
  Tensor emb({1, dim});
  const int64_t half = dim / 2;
  for (int64_t j = 0; j < half; ++j) {
    const double freq =
        std::pow(100.0, half > 1 ? static_cast<double>(j) / (half - 1) : 0.0);
    emb.at(0, 2 * j) = std::sin(freq * tau);
    emb.at(0, 2 * j + 1) = std::cos(freq * tau);
  }
  return emb;
}

}  // namespace scaffdiff::nn

#endif  // SCAFFDIFF_NN_HPP_

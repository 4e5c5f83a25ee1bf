//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_IPRIOR_HPP_
#define SCAFFDIFF_IPRIOR_HPP_

#include <string>
#include <utility>
#include <vector>

#include "scaffdiff/adam.hpp"
#include "scaffdiff/domain.hpp"
#include "scaffdiff/nn.hpp"
#include "scaffdiff/schedule.hpp"

namespace scaffdiff {

// ---------------------------------------------------------------------------
// Interaction representations

/// Per-atom interaction features for pocket, scaffold and R-group, plus the
/// geometry they were computed from. The `none` state (start of sampling,
/// before any R-group estimate exists) carries no data.
struct InteractionRepr {
  Tensor f_pocket, f_scaffold, f_rgroup;  // N x d
  Tensor x_pocket, x_scaffold, x_rgroup;  // N x 3
  bool is_none = true;

  static InteractionRepr none() { return InteractionRepr{}; }
};

// ---------------------------------------------------------------------------
// IPNet surrogate

struct IpNetConfig {
  int64_t hidden_dim = 64;
  int64_t message_dim = 64;
  int64_t n_layers = 3;
  int64_t feature_dim = 32;
  double distance_cutoff = 5.0;

  nn::MlpSpec embed_pocket() const {
    return {"ipnet/embed_p", {kAtomTypes, hidden_dim}, nn::Act::none,
            nn::Act::none};
  }
  nn::MlpSpec embed_ligand() const {
    return {"ipnet/embed_l", {kAtomTypes + 2, hidden_dim}, nn::Act::none,
            nn::Act::none};
  }
  nn::EgnnLayerConfig pocket_layer(int64_t i) const {
    return {hidden_dim, message_dim, /*coordinate_update=*/false,
            distance_cutoff, "ipnet/enc_p/layer" + std::to_string(i)};
  }
  nn::EgnnLayerConfig ligand_layer(int64_t i) const {
    return {hidden_dim, message_dim, /*coordinate_update=*/false,
            distance_cutoff, "ipnet/enc_l/layer" + std::to_string(i)};
  }
  nn::AttentionConfig cross_lp() const {
    return {"ipnet/cross_lp", hidden_dim, hidden_dim, hidden_dim, hidden_dim,
            hidden_dim};
  }
  nn::AttentionConfig cross_pl() const {
    return {"ipnet/cross_pl", hidden_dim, hidden_dim, hidden_dim, hidden_dim,
            hidden_dim};
  }
  nn::MlpSpec proj_pocket() const {
    return {"ipnet/proj_p", {hidden_dim, feature_dim}, nn::Act::none,
            nn::Act::none};
  }
  nn::MlpSpec proj_ligand() const {
    return {"ipnet/proj_l", {hidden_dim, feature_dim}, nn::Act::none,
            nn::Act::none};
  }
  nn::MlpSpec affinity_head() const {
    return {"ipnet/aff", {2 * hidden_dim, hidden_dim, 1}, nn::Act::silu,
            nn::Act::none};
  }
};

struct IpNetModel {
  IpNetConfig config;
  ModelParams params;
};

inline IpNetModel init_ipnet(const IpNetConfig &cfg, uint64_t seed) {
  IpNetModel model;
  model.config = cfg;
  RngState rng(seed);
  nn::init_mlp(model.params, cfg.embed_pocket(), rng);
  nn::init_mlp(model.params, cfg.embed_ligand(), rng);
  for (int64_t i = 0; i < cfg.n_layers; ++i) {
    nn::init_egnn_layer(model.params, cfg.pocket_layer(i), rng);
    nn::init_egnn_layer(model.params, cfg.ligand_layer(i), rng);
  }
  nn::init_attention(model.params, cfg.cross_lp(), rng);
  nn::init_attention(model.params, cfg.cross_pl(), rng);
  nn::init_mlp(model.params, cfg.proj_pocket(), rng);
  nn::init_mlp(model.params, cfg.proj_ligand(), rng);
  nn::init_mlp(model.params, cfg.affinity_head(), rng);
  return model;
}

namespace detail {

inline ad::Var mean_rows(const ad::Var &m) {
  Tensor ones({1, m.rows()});
  for (auto &v : ones.data()) v = 1.0 / static_cast<double>(m.rows());
  return ad::matmul(ad::constant(ones), m);
}

struct IpnetGraphOut {
  ad::Var f_pocket, f_ligand;  // ligand rows = scaffold then R-group
  ad::Var affinity;            // 1 x 1
};

/// Shared forward graph; types may be one-hot or continuous logits.
inline IpnetGraphOut ipnet_graph(ad::ParamBank &bank, const IpNetConfig &cfg,
                                 const Tensor &x_p, const Tensor &v_p,
                                 const Tensor &x_s, const Tensor &v_s,
                                 const Tensor &x_r, const Tensor &v_r) {
  SCAFFDIFF_CHECK(v_p.cols() == kAtomTypes && v_s.cols() == kAtomTypes &&
                      v_r.cols() == kAtomTypes,
                  "ipnet: type width must be ", kAtomTypes);
  const int64_t n_s = x_s.rows(), n_r = x_r.rows();

  // Pocket encoder.
  ad::Var h_p = nn::mlp_forward(bank, cfg.embed_pocket(), ad::constant(v_p));
  ad::Var xp = ad::constant(x_p);
  nn::EdgeList ep = nn::build_edges(x_p, cfg.distance_cutoff);
  for (int64_t i = 0; i < cfg.n_layers; ++i)
    h_p = nn::egnn_layer(bank, cfg.pocket_layer(i), h_p, xp, ep).first;

  // Ligand encoder over scaffold + R-group with role flags.
  Tensor x_l({n_s + n_r, 3});
  Tensor v_l({n_s + n_r, kAtomTypes + 2});
  for (int64_t i = 0; i < n_s; ++i) {
    for (int64_t k = 0; k < 3; ++k) x_l.at(i, k) = x_s.at(i, k);
    for (int64_t k = 0; k < kAtomTypes; ++k) v_l.at(i, k) = v_s.at(i, k);
    v_l.at(i, kAtomTypes) = 1.0;
  }
  for (int64_t i = 0; i < n_r; ++i) {
    for (int64_t k = 0; k < 3; ++k) x_l.at(n_s + i, k) = x_r.at(i, k);
    for (int64_t k = 0; k < kAtomTypes; ++k) v_l.at(n_s + i, k) = v_r.at(i, k);
    v_l.at(n_s + i, kAtomTypes + 1) = 1.0;
  }
  ad::Var h_l = nn::mlp_forward(bank, cfg.embed_ligand(), ad::constant(v_l));
  ad::Var xl = ad::constant(x_l);
  nn::EdgeList el = nn::build_edges_joint(x_l, cfg.distance_cutoff, {0, n_s},
                                          {n_s, n_s + n_r});
  for (int64_t i = 0; i < cfg.n_layers; ++i)
    h_l = nn::egnn_layer(bank, cfg.ligand_layer(i), h_l, xl, el).first;

  // Cross attention in both directions, with residual combine.
  ad::Var h_l2 =
      ad::add(h_l, nn::cross_attention(bank, cfg.cross_lp(), h_l, h_p, h_p));
  ad::Var h_p2 =
      ad::add(h_p, nn::cross_attention(bank, cfg.cross_pl(), h_p, h_l, h_l));

  IpnetGraphOut out;
  out.f_pocket = nn::mlp_forward(bank, cfg.proj_pocket(), h_p2);
  out.f_ligand = nn::mlp_forward(bank, cfg.proj_ligand(), h_l2);
  out.affinity = nn::mlp_forward(
      bank, cfg.affinity_head(),
      ad::concat_cols({mean_rows(h_p2), mean_rows(h_l2)}));
  return out;
}

}  // namespace detail

/// Interaction representations and affinity for a (pocket, scaffold,
/// R-group) complex. The R-group may carry continuous type logits.
inline std::pair<InteractionRepr, double> ipnet_forward(
    const IpNetModel &model, const Tensor &x_p, const Tensor &v_p,
    const Tensor &x_s, const Tensor &v_s, const Tensor &x_r,
    const Tensor &v_r) {
  ad::ParamBank bank(model.params, /*trainable=*/false);
  auto out = detail::ipnet_graph(bank, model.config, x_p, v_p, x_s, v_s, x_r,
                                 v_r);
  InteractionRepr repr;
  repr.is_none = false;
  repr.f_pocket = out.f_pocket.val();
  const int64_t n_s = x_s.rows();
  repr.f_scaffold = ad::slice_rows(out.f_ligand, 0, n_s).val();
  repr.f_rgroup =
      ad::slice_rows(out.f_ligand, n_s, out.f_ligand.rows()).val();
  repr.x_pocket = x_p;
  repr.x_scaffold = x_s;
  repr.x_rgroup = x_r;
  const double aff = out.affinity.val().value();
  SCAFFDIFF_CHECK(std::isfinite(aff), "ipnet: non-finite affinity");
  return {std::move(repr), aff};
}

inline std::pair<InteractionRepr, double> ipnet_forward(
    const IpNetModel &model, const Pocket &pocket, const Scaffold &scaffold,
    const PointSet &rgroup) {
  SCAFFDIFF_CHECK(pocket.size() >= 1 && scaffold.size() >= 1 &&
                      rgroup.size() >= 1,
                  "ipnet: empty point set");
  return ipnet_forward(model, pocket.coords, pocket.types, scaffold.coords,
                       scaffold.types, rgroup.coords, rgroup.types);
}

// ---------------------------------------------------------------------------
// Affinity pretraining

struct PretrainResult {
  IpNetModel model;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> loss_trace;
};

/// Regression of the affinity head against labeled tuples. Deterministic
/// per seed; tuples without labels are skipped.
inline PretrainResult pretrain_ipnet(const std::vector<ComplexTuple> &dataset,
                                     const IpNetConfig &cfg, int64_t steps,
                                     uint64_t seed, double lr = 1e-3) {
  std::vector<const ComplexTuple *> labeled;
  for (const auto &t : dataset)
    if (t.affinity && t.rgroup) labeled.push_back(&t);
  SCAFFDIFF_CHECK(!labeled.empty(),
                  "pretrain_ipnet: no labeled tuples in dataset");

  PretrainResult result;
  result.model = init_ipnet(cfg, seed);
  RngState rng(seed ^ 0x5eedf00dull);
  nn::AdamState opt;
  nn::AdamConfig opt_cfg;
  opt_cfg.lr = lr;

  auto sq_loss = [&](const ComplexTuple &tuple) {
    ad::ParamBank bank(result.model.params, /*trainable=*/true);
    auto out = detail::ipnet_graph(
        bank, cfg, tuple.pocket.coords, tuple.pocket.types,
        tuple.scaffold.coords, tuple.scaffold.types, tuple.rgroup->coords,
        tuple.rgroup->types);
    ad::Var err = ad::add_scalar(out.affinity, -*tuple.affinity);
    return ad::sum_squares(err);
  };

  for (int64_t step = 0; step < steps; ++step) {
    const auto &tuple = *labeled[rng.uniform_int(labeled.size())];
    ad::Var loss = sq_loss(tuple);
    GradMap grads = ad::backward(loss, result.model.params);
    nn::adam_step(result.model.params, grads, opt, opt_cfg);
    result.loss_trace.push_back(loss.val().value());
  }

  auto mean_loss = [&]() {
    double acc = 0.0;
    for (const auto *t : labeled) acc += sq_loss(*t).val().value();
    return acc / static_cast<double>(labeled.size());
  };
  // Recompute the initial loss with a fresh model of the same seed so the
  // before/after comparison uses the same tuples.
  IpNetModel fresh = init_ipnet(cfg, seed);
  std::swap(fresh.params, result.model.params);
  result.initial_loss = mean_loss();
  std::swap(fresh.params, result.model.params);
  result.final_loss = mean_loss();
  return result;
}

// ---------------------------------------------------------------------------
// Shift network psi_theta

enum class ShiftHead { equivariant, literal };

inline ShiftHead shift_head_from_string(const std::string &s) {
  if (s == "equivariant") return ShiftHead::equivariant;
  if (s == "literal") return ShiftHead::literal;
  throw ConfigError("shift_head must be 'equivariant' or 'literal', got '" +
                    s + "'");
}

struct ShiftConfig {
  int64_t feature_dim = 32;  // must match the IPNet feature width
  int64_t hidden_dim = 32;
  int64_t time_dim = 8;
  ShiftHead head = ShiftHead::equivariant;
  std::string prefix = "shift";

  nn::MlpSpec psi() const {
    return {prefix + "/psi", {feature_dim + time_dim, hidden_dim, hidden_dim},
            nn::Act::silu, nn::Act::silu};
  }
  nn::MlpSpec gate() const {
    return {prefix + "/gate", {2 * hidden_dim + 1, hidden_dim, 1},
            nn::Act::silu, nn::Act::none};
  }
  nn::MlpSpec literal_head() const {
    return {prefix + "/lit", {feature_dim + time_dim, hidden_dim, 3},
            nn::Act::silu, nn::Act::none};
  }
};

struct ShiftNetModel {
  ShiftConfig config;
  ModelParams params;
};

inline ShiftNetModel init_shiftnet(const ShiftConfig &cfg, uint64_t seed) {
  ShiftNetModel model;
  model.config = cfg;
  RngState rng(seed);
  nn::init_mlp(model.params, cfg.psi(), rng);
  nn::init_mlp(model.params, cfg.gate(), rng);
  nn::init_mlp(model.params, cfg.literal_head(), rng);
  return model;
}

namespace detail {

inline ad::Var broadcast_time(const Tensor &emb, int64_t rows) {
  Tensor out({rows, emb.cols()});
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < emb.cols(); ++j) out.at(i, j) = emb.at(0, j);
  return ad::constant(out);
}

}  // namespace detail

/// S_t^R = k_t * psi_theta(F^R, t), routed through an equivariant vector
/// head built from relative coordinates of the R-group and scaffold atoms
/// (the `literal` head emits raw MLP 3-vectors instead). A `none`
/// representation means zero shift.
inline ad::Var shift_graph(ad::ParamBank &bank, const ShiftConfig &cfg,
                           const InteractionRepr &repr,
                           const NoiseSchedule &schedule, int64_t t,
                           int64_t n_rgroup) {
  const double k_t = schedule.k(t);
  if (repr.is_none || k_t == 0.0)
    return ad::constant(Tensor({n_rgroup, 3}));

  const int64_t n_r = repr.f_rgroup.rows();
  SCAFFDIFF_CHECK(n_r == n_rgroup, "shift: representation has ", n_r,
                  " R-group rows, expected ", n_rgroup);
  SCAFFDIFF_CHECK(repr.f_rgroup.cols() == cfg.feature_dim,
                  "shift: feature width ", repr.f_rgroup.cols(),
                  " != configured ", cfg.feature_dim);

  const Tensor temb =
      nn::time_embedding(t, schedule.T(), cfg.time_dim);

  if (cfg.head == ShiftHead::literal) {
    ad::Var in = ad::concat_cols(
        {ad::constant(repr.f_rgroup), detail::broadcast_time(temb, n_r)});
    return ad::scale(nn::mlp_forward(bank, cfg.literal_head(), in), k_t);
  }

  // Invariant per-atom features for R-group and scaffold atoms.
  const int64_t n_s = repr.f_scaffold.rows();
  ad::Var feat_r = nn::mlp_forward(
      bank, cfg.psi(),
      ad::concat_cols({ad::constant(repr.f_rgroup),
                       detail::broadcast_time(temb, n_r)}));
  ad::Var feat_s = nn::mlp_forward(
      bank, cfg.psi(),
      ad::concat_cols({ad::constant(repr.f_scaffold),
                       detail::broadcast_time(temb, n_s)}));
  ad::Var feats = ad::concat_rows({feat_r, feat_s});

  Tensor coords({n_r + n_s, 3});
  for (int64_t i = 0; i < n_r; ++i)
    for (int64_t k = 0; k < 3; ++k) coords.at(i, k) = repr.x_rgroup.at(i, k);
  for (int64_t i = 0; i < n_s; ++i)
    for (int64_t k = 0; k < 3; ++k)
      coords.at(n_r + i, k) = repr.x_scaffold.at(i, k);

  // Fully connected receiver edges into the R-group atoms.
  std::vector<int64_t> recv, send;
  for (int64_t i = 0; i < n_r; ++i)
    for (int64_t j = 0; j < n_r + n_s; ++j)
      if (i != j) {
        recv.push_back(i);
        send.push_back(j);
      }
  if (recv.empty())  // single R-group atom and no scaffold context
    return ad::constant(Tensor({n_rgroup, 3}));

  ad::Var x = ad::constant(coords);
  ad::Var xi = ad::gather_rows(x, recv);
  ad::Var xj = ad::gather_rows(x, send);
  ad::Var dx = ad::sub(xi, xj);
  ad::Var d2 = ad::sum_cols(ad::mul(dx, dx));
  ad::Var gate_in = ad::concat_cols(
      {ad::gather_rows(feats, recv), ad::gather_rows(feats, send), d2});
  ad::Var w = nn::mlp_forward(bank, cfg.gate(), gate_in);
  ad::Var inv = ad::recip(ad::add_scalar(ad::sqrt_eps(d2), 1.0));
  ad::Var vec =
      ad::scatter_add_rows(ad::mul_colvec(dx, ad::mul(w, inv)), recv, n_r);
  return ad::scale(vec, k_t);
}

/// Plain-tensor shift for sampling.
inline Tensor shift(const ShiftNetModel &model, const InteractionRepr &repr,
                    const NoiseSchedule &schedule, int64_t t,
                    int64_t n_rgroup) {
  ad::ParamBank bank(model.params, /*trainable=*/false);
  return shift_graph(bank, model.config, repr, schedule, t, n_rgroup).val();
}

}  // namespace scaffdiff

#endif  // SCAFFDIFF_IPRIOR_HPP_

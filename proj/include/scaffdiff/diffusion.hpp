//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_DIFFUSION_HPP_
#define SCAFFDIFF_DIFFUSION_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scaffdiff/conservation.hpp"
#include "scaffdiff/iprior.hpp"

namespace scaffdiff {

inline constexpr int64_t kStateWidth = 3 + kAtomTypes;

/// R-group state along the trajectory: coordinates plus continuous type
/// logits, one row per atom.
struct DiffusionState {
  Tensor r;  // N_R x (3 + K)
  int64_t t = 0;
};

inline Tensor state_coords(const Tensor &r) {
  Tensor out({r.rows(), 3});
  for (int64_t i = 0; i < r.rows(); ++i)
    for (int64_t k = 0; k < 3; ++k) out.at(i, k) = r.at(i, k);
  return out;
}

inline Tensor state_types(const Tensor &r) {
  Tensor out({r.rows(), kAtomTypes});
  for (int64_t i = 0; i < r.rows(); ++i)
    for (int64_t k = 0; k < kAtomTypes; ++k) out.at(i, k) = r.at(i, 3 + k);
  return out;
}

inline Tensor make_state(const Tensor &coords, const Tensor &types) {
  SCAFFDIFF_CHECK(coords.rows() == types.rows() && coords.cols() == 3 &&
                      types.cols() == kAtomTypes,
                  "make_state: bad blocks ", coords.shape_str(), " / ",
                  types.shape_str());
  Tensor out({coords.rows(), kStateWidth});
  for (int64_t i = 0; i < coords.rows(); ++i) {
    for (int64_t k = 0; k < 3; ++k) out.at(i, k) = coords.at(i, k);
    for (int64_t k = 0; k < kAtomTypes; ++k)
      out.at(i, 3 + k) = types.at(i, k);
  }
  return out;
}

/// Widens an N x 3 coordinate shift to the full state width with zero type
/// columns; the mean shift never touches type channels.
inline Tensor pad_shift(const Tensor &s) {
  SCAFFDIFF_CHECK(s.cols() == 3, "pad_shift: expected N x 3, got ",
                  s.shape_str());
  Tensor out({s.rows(), kStateWidth});
  for (int64_t i = 0; i < s.rows(); ++i)
    for (int64_t k = 0; k < 3; ++k) out.at(i, k) = s.at(i, k);
  return out;
}

inline ad::Var pad_shift(const ad::Var &s) {
  return ad::concat_cols(
      {s, ad::constant(Tensor({s.rows(), kAtomTypes}))});
}

// ---------------------------------------------------------------------------
// Forward kernels

/// q(R_t | R_0) = N(alpha_t R_0 + S_t, sigma_t^2 I) with the shift applied
/// to coordinates only. Returns the sample and the injected noise.
inline std::pair<Tensor, Tensor> forward_marginal(const Tensor &r0,
                                                  const Tensor &shift_t,
                                                  const NoiseSchedule &schedule,
                                                  int64_t t, RngState &rng) {
  SCAFFDIFF_CHECK(r0.cols() == kStateWidth, "forward_marginal: state width ",
                  r0.cols(), " != ", kStateWidth);
  SCAFFDIFF_CHECK(shift_t.rows() == r0.rows() && shift_t.cols() == 3,
                  "forward_marginal: shift shape ", shift_t.shape_str(),
                  " does not match state ", r0.shape_str());
  const auto [a, s] = schedule.alpha_sigma(t);
  Tensor eps = gaussian(rng, r0.rows(), r0.cols());
  Tensor rt = scale(r0, a);
  const Tensor sp = pad_shift(shift_t);
  for (size_t i = 0; i < rt.data().size(); ++i)
    rt[i] += sp[i] + s * eps[i];
  return {std::move(rt), std::move(eps)};
}

/// q(R_t | R_{t-1}) = N(alpha_{t|t-1} (R_{t-1} - S_{t-1}) + S_t,
/// sigma^2_{t|t-1} I). `eps` substitutes the Gaussian draw when given
/// (zero tensor = noise-free mean composition).
inline Tensor forward_step(const Tensor &r_prev, const Tensor &shift_prev,
                           const Tensor &shift_cur,
                           const NoiseSchedule &schedule, int64_t t,
                           const Tensor &eps) {
  SCAFFDIFF_CHECK(t >= 2, "forward_step: t = ", t, " has no predecessor");
  const auto [a_cond, s2_cond] = schedule.conditional_coeffs(t);
  SCAFFDIFF_CHECK(s2_cond >= 0.0, "forward_step: negative one-step variance ",
                  s2_cond, " at t = ", t,
                  " (schedule is not a samplable chain)");
  SCAFFDIFF_CHECK(eps.same_shape(r_prev), "forward_step: noise shape ",
                  eps.shape_str(), " != state ", r_prev.shape_str());
  const double sd = std::sqrt(s2_cond);
  const Tensor sp_prev = pad_shift(shift_prev);
  const Tensor sp_cur = pad_shift(shift_cur);
  Tensor rt = r_prev;
  for (size_t i = 0; i < rt.data().size(); ++i)
    rt[i] = a_cond * (rt[i] - sp_prev[i]) + sp_cur[i] + sd * eps[i];
  return rt;
}

inline Tensor forward_step(const Tensor &r_prev, const Tensor &shift_prev,
                           const Tensor &shift_cur,
                           const NoiseSchedule &schedule, int64_t t,
                           RngState &rng) {
  return forward_step(r_prev, shift_prev, shift_cur, schedule, t,
                      gaussian(rng, r_prev.rows(), r_prev.cols()));
}

// ---------------------------------------------------------------------------
// Reverse posterior

struct PosteriorParams {
  Tensor mean;       // N_R x (3 + K)
  double variance;   // scalar sigma~(t)
};

/// Exact posterior of the shifted chain:
///   mu~ = (alpha_{t|t-1} sigma_{t-1}^2 / sigma_t^2) (R_t - S_t)
///       + (alpha_{t-1} sigma^2_{t|t-1} / sigma_t^2) R0_hat + S_{t-1}
///   sigma~ = sigma^2_{t|t-1} sigma_{t-1}^2 / sigma_t^2
/// Shifts act on coordinate columns only. The final step t = 1 is handled
/// by the sampler's deterministic rule, not here.
inline PosteriorParams posterior_params(const Tensor &r_t,
                                        const Tensor &r0_hat,
                                        const Tensor &shift_cur,
                                        const Tensor &shift_prev,
                                        const NoiseSchedule &schedule,
                                        int64_t t) {
  SCAFFDIFF_CHECK(t >= 2,
                  "posterior_params: t = 1 uses the final-step rule");
  SCAFFDIFF_CHECK(r_t.same_shape(r0_hat), "posterior_params: state shapes ",
                  r_t.shape_str(), " vs ", r0_hat.shape_str());
  const auto [a_cond, s2_cond] = schedule.conditional_coeffs(t);
  const double s2_t = schedule.sigma(t) * schedule.sigma(t);
  const double s2_prev = schedule.sigma(t - 1) * schedule.sigma(t - 1);
  const double c_t = a_cond * s2_prev / s2_t;
  const double c_0 = schedule.alpha(t - 1) * s2_cond / s2_t;

  const Tensor sp_cur = pad_shift(shift_cur);
  const Tensor sp_prev = pad_shift(shift_prev);
  PosteriorParams out;
  out.mean = r_t;
  for (size_t i = 0; i < out.mean.data().size(); ++i)
    out.mean[i] = c_t * (r_t[i] - sp_cur[i]) + c_0 * r0_hat[i] + sp_prev[i];
  out.variance = s2_cond * s2_prev / s2_t;
  SCAFFDIFF_CHECK(out.variance >= 0.0,
                  "posterior_params: negative variance at t = ", t);
  return out;
}

// ---------------------------------------------------------------------------
// R0 estimate

/// R0_hat = (1/alpha_t) R_t - (sigma_t/alpha_t) eps_hat, as written. The
/// formula does not subtract the mean shift, which leaves an S_t/alpha_t
/// residual on coordinates when shifts are active; `shift_correction`
/// removes it.
inline Tensor estimate_r0(const Tensor &r_t, const Tensor &eps_hat,
                          const NoiseSchedule &schedule, int64_t t,
                          bool shift_correction = false,
                          const Tensor *shift_cur = nullptr) {
  SCAFFDIFF_CHECK(r_t.same_shape(eps_hat), "estimate_r0: shapes ",
                  r_t.shape_str(), " vs ", eps_hat.shape_str());
  const auto [a, s] = schedule.alpha_sigma(t);
  SCAFFDIFF_CHECK(a != 0.0, "estimate_r0: alpha_t = 0 at t = ", t);
  Tensor out = r_t;
  for (size_t i = 0; i < out.data().size(); ++i)
    out[i] = r_t[i] / a - (s / a) * eps_hat[i];
  if (shift_correction) {
    SCAFFDIFF_CHECK(shift_cur != nullptr,
                    "estimate_r0: shift correction needs S_t");
    const Tensor sp = pad_shift(*shift_cur);
    for (size_t i = 0; i < out.data().size(); ++i) out[i] -= sp[i] / a;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Denoiser phi_theta

struct DenoiserConfig {
  int64_t hidden_dim = 64;
  int64_t message_dim = 64;
  int64_t n_layers = 3;
  int64_t feature_dim = 32;  // IPNet feature width
  int64_t time_dim = 8;
  double distance_cutoff = 5.0;
  std::string prefix = "den";

  // Node input: types | conservation | interaction feature | time | role.
  int64_t input_dim() const {
    return kAtomTypes + 1 + feature_dim + time_dim + 3;
  }
  nn::MlpSpec embed() const {
    return {prefix + "/embed", {input_dim(), hidden_dim}, nn::Act::none,
            nn::Act::none};
  }
  nn::EgnnLayerConfig layer(int64_t i) const {
    return {hidden_dim, message_dim, /*coordinate_update=*/true,
            distance_cutoff, prefix + "/layer" + std::to_string(i)};
  }
  nn::MlpSpec out_types() const {
    return {prefix + "/out_v", {hidden_dim, kAtomTypes}, nn::Act::none,
            nn::Act::none};
  }
};

struct DenoiserModel {
  DenoiserConfig config;
  ModelParams params;
};

inline DenoiserModel init_denoiser(const DenoiserConfig &cfg, uint64_t seed) {
  DenoiserModel model;
  model.config = cfg;
  RngState rng(seed);
  nn::init_mlp(model.params, cfg.embed(), rng);
  for (int64_t i = 0; i < cfg.n_layers; ++i)
    nn::init_egnn_layer(model.params, cfg.layer(i), rng);
  nn::init_mlp(model.params, cfg.out_types(), rng);
  return model;
}

/// Noise prediction on the R-group nodes of the joint graph
/// (R-group + scaffold + conservation-augmented pocket). Scaffold and
/// pocket nodes are frozen context: their coordinates never move.
/// A `none` representation enters as zero interaction features.
inline ad::Var denoise_graph(ad::ParamBank &bank, const DenoiserConfig &cfg,
                             const ad::Var &r_t, const Scaffold &scaffold,
                             const AugmentedPocket &pocket,
                             const InteractionRepr &repr,
                             const NoiseSchedule &schedule, int64_t t) {
  SCAFFDIFF_CHECK(r_t.cols() == kStateWidth, "denoise: state width ",
                  r_t.cols(), " != ", kStateWidth);
  const int64_t n_r = r_t.rows();
  const int64_t n_s = scaffold.size();
  const int64_t n_p = pocket.pocket.size();
  const int64_t n = n_r + n_s + n_p;

  Tensor f_r(Tensor({n_r, cfg.feature_dim}));
  Tensor f_s(Tensor({n_s, cfg.feature_dim}));
  Tensor f_p(Tensor({n_p, cfg.feature_dim}));
  if (!repr.is_none) {
    SCAFFDIFF_CHECK(repr.f_rgroup.rows() == n_r &&
                        repr.f_scaffold.rows() == n_s &&
                        repr.f_pocket.rows() == n_p,
                    "denoise: interaction representation rows do not match "
                    "the point sets");
    SCAFFDIFF_CHECK(repr.f_rgroup.cols() == cfg.feature_dim,
                    "denoise: feature width ", repr.f_rgroup.cols(),
                    " != configured ", cfg.feature_dim);
    f_r = repr.f_rgroup;
    f_s = repr.f_scaffold;
    f_p = repr.f_pocket;
  }

  const Tensor temb = nn::time_embedding(t, schedule.T(), cfg.time_dim);
  auto role_block = [&](int64_t rows, int which) {
    Tensor m({rows, 3});
    for (int64_t i = 0; i < rows; ++i) m.at(i, which) = 1.0;
    return m;
  };

  ad::Var x_r = ad::slice_cols(r_t, 0, 3);
  ad::Var v_r = ad::slice_cols(r_t, 3, kStateWidth);

  ad::Var in_r = ad::concat_cols(
      {v_r, ad::constant(Tensor({n_r, 1})), ad::constant(f_r),
       detail::broadcast_time(temb, n_r), ad::constant(role_block(n_r, 0))});
  ad::Var in_s = ad::constant([&] {
    Tensor m({n_s, cfg.input_dim()});
    for (int64_t i = 0; i < n_s; ++i) {
      int64_t off = 0;
      for (int64_t k = 0; k < kAtomTypes; ++k)
        m.at(i, off + k) = scaffold.types.at(i, k);
      off += kAtomTypes + 1;  // conservation slot stays zero
      for (int64_t k = 0; k < cfg.feature_dim; ++k)
        m.at(i, off + k) = f_s.at(i, k);
      off += cfg.feature_dim;
      for (int64_t k = 0; k < cfg.time_dim; ++k)
        m.at(i, off + k) = temb.at(0, k);
      off += cfg.time_dim;
      m.at(i, off + 1) = 1.0;
    }
    return m;
  }());
  ad::Var in_p = ad::constant([&] {
    Tensor m({n_p, cfg.input_dim()});
    for (int64_t i = 0; i < n_p; ++i) {
      int64_t off = 0;
      for (int64_t k = 0; k < kAtomTypes; ++k)
        m.at(i, off + k) = pocket.pocket.types.at(i, k);
      off += kAtomTypes;
      m.at(i, off) = pocket.conservation.at(i, 0);
      off += 1;
      for (int64_t k = 0; k < cfg.feature_dim; ++k)
        m.at(i, off + k) = f_p.at(i, k);
      off += cfg.feature_dim;
      for (int64_t k = 0; k < cfg.time_dim; ++k)
        m.at(i, off + k) = temb.at(0, k);
      off += cfg.time_dim;
      m.at(i, off + 2) = 1.0;
    }
    return m;
  }());

  ad::Var h = nn::mlp_forward(bank, cfg.embed(),
                              ad::concat_rows({in_r, in_s, in_p}));
  ad::Var x = ad::concat_rows({x_r, ad::constant(scaffold.coords),
                               ad::constant(pocket.pocket.coords)});

  nn::EdgeList edges = nn::build_edges_joint(
      x.val(), cfg.distance_cutoff, {n_r, n_r + n_s}, {0, n_r});
  std::vector<double> coord_mask(static_cast<size_t>(n), 0.0);
  for (int64_t i = 0; i < n_r; ++i) coord_mask[static_cast<size_t>(i)] = 1.0;

  for (int64_t i = 0; i < cfg.n_layers; ++i) {
    auto [h2, x2] = nn::egnn_layer(bank, cfg.layer(i), h, x, edges, coord_mask);
    h = h2;
    x = x2;
  }

  ad::Var eps_x = ad::sub(ad::slice_rows(x, 0, n_r), x_r);
  ad::Var eps_v =
      nn::mlp_forward(bank, cfg.out_types(), ad::slice_rows(h, 0, n_r));
  return ad::concat_cols({eps_x, eps_v});
}

/// Plain-tensor denoiser call for sampling.
inline Tensor denoise(const DenoiserModel &model, const Tensor &r_t,
                      const Scaffold &scaffold, const AugmentedPocket &pocket,
                      const InteractionRepr &repr,
                      const NoiseSchedule &schedule, int64_t t) {
  ad::ParamBank bank(model.params, /*trainable=*/false);
  return denoise_graph(bank, model.config, ad::constant(r_t), scaffold,
                       pocket, repr, schedule, t)
      .val();
}

// ---------------------------------------------------------------------------
// Training

/// Denoiser + shift network trained jointly against a frozen IPNet.
struct DiffusionModel {
  DenoiserConfig denoiser_cfg;
  ShiftConfig shift_cfg;
  ModelParams params;  // merged "den/..." and "shift/..." keys
};

inline DiffusionModel init_diffusion_model(const DenoiserConfig &den_cfg,
                                           const ShiftConfig &shift_cfg,
                                           uint64_t seed) {
  DiffusionModel model;
  model.denoiser_cfg = den_cfg;
  model.shift_cfg = shift_cfg;
  DenoiserModel den = init_denoiser(den_cfg, seed);
  ShiftNetModel sh = init_shiftnet(shift_cfg, seed ^ 0x51f7ull);
  model.params.adopt("", den.params);
  model.params.adopt("", sh.params);
  return model;
}

struct TrainingLossOut {
  ad::Var loss;
  int64_t t = 0;
};

/// Builds the training-loss graph for one tuple at one timestep:
///   F_0 = psi_IPNet(P, S, R_0); S_t = k_t psi_theta(F_0^R, t);
///   R_t = alpha_t R_0 + S_t + sigma_t eps; loss = |eps - eps_hat|^2
/// summed over R-group entries. Gradients reach the denoiser and the shift
/// network only; the interaction prior is a fixed condition.
inline TrainingLossOut training_loss_graph(
    ad::ParamBank &bank, const DiffusionModel &model,
    const AugmentedPocket &pocket, const ComplexTuple &tuple,
    const InteractionRepr &repr0, const NoiseSchedule &schedule, int64_t t,
    const Tensor &eps) {
  SCAFFDIFF_CHECK(tuple.rgroup.has_value(),
                  "training_loss: tuple has no ground-truth R-group");
  const Tensor r0 = make_state(tuple.rgroup->coords, tuple.rgroup->types);
  const auto [a, s] = schedule.alpha_sigma(t);

  ad::Var s_t = shift_graph(bank, model.shift_cfg, repr0, schedule, t,
                            r0.rows());
  ad::Var r_t = ad::add(ad::add(ad::constant(scale(r0, a)), pad_shift(s_t)),
                        ad::constant(scale(eps, s)));
  ad::Var eps_hat = denoise_graph(bank, model.denoiser_cfg, r_t,
                                  tuple.scaffold, pocket, repr0, schedule, t);
  TrainingLossOut out;
  out.loss = ad::sum_squares(ad::sub(ad::constant(eps), eps_hat));
  out.t = t;
  return out;
}

/// Spec-level convenience: samples t uniformly, runs IPNet on the ground
/// truth, draws the noise and returns the scalar loss value.
inline double training_loss(const DiffusionModel &model,
                            const IpNetModel &ipnet,
                            const AugmentedPocket &pocket,
                            const ComplexTuple &tuple,
                            const NoiseSchedule &schedule, RngState &rng) {
  SCAFFDIFF_CHECK(tuple.rgroup.has_value(),
                  "training_loss: tuple has no ground-truth R-group");
  const int64_t t = 1 + static_cast<int64_t>(rng.uniform_int(
                            static_cast<uint64_t>(schedule.T())));
  auto [repr0, aff] = ipnet_forward(ipnet, tuple.pocket, tuple.scaffold,
                                    *tuple.rgroup);
  (void)aff;
  Tensor eps = gaussian(rng, tuple.rgroup->size(), kStateWidth);
  ad::ParamBank bank(model.params, /*trainable=*/false);
  return training_loss_graph(bank, model, pocket, tuple, repr0, schedule, t,
                             eps)
      .loss.val()
      .value();
}

struct TrainStepLog {
  int64_t step = 0;
  double loss = 0.0;
  int64_t t = 0;
  double grad_norm = 0.0;
};

struct Trainer {
  DiffusionModel model;
  const IpNetModel *ipnet = nullptr;
  NoiseSchedule schedule;
  nn::AdamConfig adam_cfg;
  nn::AdamState adam_state;
  RngState rng;

  // Per-tuple interaction representations are constants of training (the
  // prior is frozen and R_0 fixed), so they are computed once.
  std::vector<InteractionRepr> repr_cache;
  std::vector<AugmentedPocket> pockets;
  const std::vector<ComplexTuple> *dataset = nullptr;

  TrainStepLog step(int64_t step_index) {
    const size_t idx = rng.uniform_int(dataset->size());
    const ComplexTuple &tuple = (*dataset)[idx];
    const int64_t t = 1 + static_cast<int64_t>(rng.uniform_int(
                              static_cast<uint64_t>(schedule.T())));
    Tensor eps = gaussian(rng, tuple.rgroup->size(), kStateWidth);

    ad::ParamBank bank(model.params, /*trainable=*/true);
    auto out = training_loss_graph(bank, model, pockets[idx], tuple,
                                   repr_cache[idx], schedule, t, eps);
    GradMap grads = ad::backward(out.loss, model.params);
    nn::adam_step(model.params, grads, adam_state, adam_cfg);

    TrainStepLog log;
    log.step = step_index;
    log.loss = out.loss.val().value();
    log.t = t;
    log.grad_norm = grad_norm(grads);
    return log;
  }
};

/// Assembles a trainer over a dataset with ground-truth R-groups.
/// `conservation` must hold one augmented pocket per tuple.
inline Trainer make_trainer(const std::vector<ComplexTuple> &dataset,
                            std::vector<AugmentedPocket> pockets,
                            const IpNetModel &ipnet,
                            const DenoiserConfig &den_cfg,
                            const ShiftConfig &shift_cfg,
                            const NoiseSchedule &schedule, uint64_t seed,
                            double lr = 1e-3) {
  SCAFFDIFF_CHECK(!dataset.empty(), "train: empty dataset");
  SCAFFDIFF_CHECK(pockets.size() == dataset.size(),
                  "train: need one augmented pocket per tuple");
  for (const auto &tuple : dataset)
    SCAFFDIFF_CHECK(tuple.rgroup.has_value(),
                    "train: tuple missing ground-truth R-group");
  SCAFFDIFF_CHECK(den_cfg.feature_dim == ipnet.config.feature_dim &&
                      shift_cfg.feature_dim == ipnet.config.feature_dim,
                  "train: feature_dim mismatch between models");

  Trainer trainer;
  trainer.model = init_diffusion_model(den_cfg, shift_cfg, seed);
  trainer.ipnet = &ipnet;
  trainer.schedule = schedule;
  trainer.adam_cfg.lr = lr;
  trainer.rng = RngState(seed);
  trainer.dataset = &dataset;
  trainer.pockets = std::move(pockets);
  for (const auto &tuple : dataset)
    trainer.repr_cache.push_back(
        ipnet_forward(ipnet, tuple.pocket, tuple.scaffold, *tuple.rgroup)
            .first);
  return trainer;
}

}  // namespace scaffdiff

#endif  // SCAFFDIFF_DIFFUSION_HPP_

//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_SAMPLER_HPP_
#define SCAFFDIFF_SAMPLER_HPP_

#include <functional>
#include <thread>
#include <utility>
#include <vector>

#include "scaffdiff/diffusion.hpp"

namespace scaffdiff {

struct SamplerConfig {
  int64_t n_samples = 100;
  int64_t n_atoms = 0;  // 0 = draw from the empirical size pool
  uint64_t seed = 0;
  bool r0_shift_correction = false;
  int threads = 1;
  bool record_trajectory = false;
};

struct TrajectoryStep {
  int64_t t = 0;
  Tensor r_t;
  Tensor r0_hat;
  Tensor shift_t;  // the S_t actually used at this step
};

/// Per-sample diagnostic record; t decreases from T to 1.
struct Trajectory {
  std::vector<TrajectoryStep> steps;
};

/// Injection point for the Gaussian draws (rows, cols) -> Tensor; the
/// default pulls from the sample's RNG stream.
using NoiseFn = std::function<Tensor(int64_t, int64_t)>;

/// One reverse trajectory. Starts from R_T ~ N(0, I) centered at the
/// scaffold anchor with a `none` interaction representation (zero shift);
/// each step denoises, estimates R0_hat, refreshes the interaction
/// representation from it, and draws the posterior. The shift used at
/// step t always comes from the R0_hat of step t+1.
inline RGroup sample_one(const DiffusionModel &model, const IpNetModel &ipnet,
                         const AugmentedPocket &pocket,
                         const Scaffold &scaffold, int64_t n_rgroup,
                         const NoiseSchedule &schedule, RngState rng,
                         bool r0_shift_correction = false,
                         Trajectory *trajectory = nullptr,
                         NoiseFn noise = nullptr) {
  SCAFFDIFF_CHECK(n_rgroup >= 1, "sample_one: n_rgroup must be >= 1");
  SCAFFDIFF_CHECK(schedule.valid_chain(),
                  "sample_one: schedule has negative one-step variances; "
                  "use the cumulative beta interpretation");
  if (!noise)
    noise = [&rng](int64_t r, int64_t c) { return gaussian(rng, r, c); };

  const int64_t T = schedule.T();
  ad::ParamBank bank(model.params, /*trainable=*/false);

  // R_T: coordinates around the anchor atom, types pure noise.
  Tensor state = noise(n_rgroup, kStateWidth);
  for (int64_t i = 0; i < n_rgroup; ++i)
    for (int64_t k = 0; k < 3; ++k)
      state.at(i, k) += scaffold.coords.at(scaffold.anchor_index, k);

  InteractionRepr repr = InteractionRepr::none();
  Tensor shift_cur({n_rgroup, 3});  // S_T = 0 under the none sentinel
  Tensor r0_hat;

  for (int64_t t = T; t >= 1; --t) {
    const Tensor eps_hat =
        denoise_graph(bank, model.denoiser_cfg, ad::constant(state), scaffold,
                      pocket, repr, schedule, t)
            .val();
    r0_hat = estimate_r0(state, eps_hat, schedule, t, r0_shift_correction,
                         &shift_cur);
    if (trajectory)
      trajectory->steps.push_back({t, state, r0_hat, shift_cur});
    if (t == 1) break;  // final step: deterministic mu~ = R0_hat

    InteractionRepr repr_next =
        ipnet_forward(ipnet, pocket.pocket.coords, pocket.pocket.types,
                      scaffold.coords, scaffold.types, state_coords(r0_hat),
                      state_types(r0_hat))
            .first;
    Tensor shift_prev =
        shift_graph(bank, model.shift_cfg, repr_next, schedule, t - 1,
                    n_rgroup)
            .val();

    PosteriorParams post = posterior_params(state, r0_hat, shift_cur,
                                            shift_prev, schedule, t);
    Tensor z = noise(n_rgroup, kStateWidth);
    const double sd = std::sqrt(post.variance);
    state = post.mean;
    for (size_t i = 0; i < state.data().size(); ++i) state[i] += sd * z[i];
    SCAFFDIFF_CHECK(state.all_finite(),
                    "sample_one: non-finite state at step t = ", t - 1);

    repr = std::move(repr_next);
    shift_cur = std::move(shift_prev);
  }

  RGroup out;
  out.coords = state_coords(r0_hat);
  out.types = Tensor({n_rgroup, kAtomTypes});
  const Tensor logits = state_types(r0_hat);
  for (int64_t i = 0; i < n_rgroup; ++i)
    out.types.at(i, element_index(onehot_decode(logits, i))) = 1.0;
  out.residue_id.assign(static_cast<size_t>(n_rgroup), -1);
  SCAFFDIFF_CHECK(out.coords.all_finite(), "sample_one: non-finite output");
  return out;
}

/// n_samples independent draws with per-index forked RNG streams, so the
/// result multiset is identical whether samples run serially or on a pool.
inline std::vector<RGroup> sample_batch(const DiffusionModel &model,
                                        const IpNetModel &ipnet,
                                        const AugmentedPocket &pocket,
                                        const Scaffold &scaffold,
                                        const SamplerConfig &config,
                                        const std::vector<int64_t> &size_pool,
                                        const NoiseSchedule &schedule,
                                        std::vector<Trajectory> *trajectories = nullptr) {
  SCAFFDIFF_CHECK(config.n_samples >= 1, "sample_batch: n_samples must be >= 1");
  SCAFFDIFF_CHECK(config.n_atoms > 0 || !size_pool.empty(),
                  "sample_batch: need --n-atoms or a nonempty R-group size "
                  "pool for the empirical policy");

  RngState root(config.seed);
  std::vector<RGroup> out(static_cast<size_t>(config.n_samples));
  if (trajectories)
    trajectories->assign(static_cast<size_t>(config.n_samples), {});

  auto run_one = [&](int64_t i) {
    RngState rng = root.fork(static_cast<uint64_t>(i));
    const int64_t n_r =
        config.n_atoms > 0
            ? config.n_atoms
            : size_pool[rng.uniform_int(size_pool.size())];
    Trajectory *traj = trajectories ? &(*trajectories)[static_cast<size_t>(i)]
                                    : nullptr;
    try {
      out[static_cast<size_t>(i)] =
          sample_one(model, ipnet, pocket, scaffold, n_r, schedule, rng,
                     config.r0_shift_correction, traj);
    } catch (const Error &e) {
      throw Error("sample " + std::to_string(i) + ": " + e.what());
    }
  };

  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    for (int64_t i = 0; i < config.n_samples; ++i) run_one(i);
    return out;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int64_t i = w; i < config.n_samples; i += threads) run_one(i);
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto &th : pool) th.join();
  for (auto &err : errors)
    if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace scaffdiff

#endif  // SCAFFDIFF_SAMPLER_HPP_

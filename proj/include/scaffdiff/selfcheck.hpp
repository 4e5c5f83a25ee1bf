//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_SELFCHECK_HPP_
#define SCAFFDIFF_SELFCHECK_HPP_

#include <chrono>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "scaffdiff/metrics.hpp"
#include "scaffdiff/sampler.hpp"

namespace scaffdiff::selfcheck {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;   // largest observed error
  double seconds = 0.0;
};

namespace detail {

inline Tensor rotation_z90() {
  return Tensor({3, 3}, {0, -1, 0, 1, 0, 0, 0, 0, 1});
}

inline Tensor rotate(const Tensor &coords, const Tensor &rot) {
  return matmul_nt(coords, rot);
}

inline PointSet random_atoms(RngState &rng, int64_t n, bool pocket) {
  PointSet ps;
  ps.coords = gaussian(rng, n, 3);
  for (auto &v : ps.coords.data()) v *= 2.5;
  ps.types = Tensor({n, kAtomTypes});
  for (int64_t i = 0; i < n; ++i) {
    ps.types.at(i, static_cast<int64_t>(rng.uniform_int(kAtomTypes))) = 1.0;
    ps.residue_id.push_back(pocket ? static_cast<int64_t>(rng.uniform_int(4))
                                   : -1);
  }
  return ps;
}

inline GradMap finite_differences(
    const std::function<double(const ModelParams &)> &loss,
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

inline double rel_error(const GradMap &a, const GradMap &b) {
  double worst = 0.0;
  for (const auto &[name, ga] : a) {
    const Tensor &gb = b.at(name);
    for (size_t i = 0; i < ga.data().size(); ++i) {
      const double denom = std::max({std::fabs(ga[i]), std::fabs(gb[i]), 1e-6});
      worst = std::max(worst, std::fabs(ga[i] - gb[i]) / denom);
    }
  }
  return worst;
}

}  // namespace detail

inline CheckResult check_schedule_identities() {
  CheckResult r{"schedule identities (T=1000, both interpretations)"};
  double worst = 0.0;
  for (BetaInterp interp : {BetaInterp::literal, BetaInterp::cumulative}) {
    NoiseSchedule s = build_cosine_schedule(1000, interp);
    for (int64_t t = 1; t <= 1000; ++t) {
      auto [a, sg] = s.alpha_sigma(t);
      worst = std::max(worst, std::fabs(a * a + sg * sg - 1.0));
      if (t >= 2) {
        auto [ac, s2c] = s.conditional_coeffs(t);
        worst = std::max(worst, std::fabs(ac * s.alpha(t - 1) - s.alpha(t)));
        worst = std::max(
            worst, std::fabs(ac * ac * s.sigma(t - 1) * s.sigma(t - 1) + s2c -
                             s.sigma(t) * s.sigma(t)));
      }
    }
  }
  r.worst = worst;
  r.passed = worst < 1e-12;
  return r;
}

inline CheckResult check_kernel_composition() {
  CheckResult r{"forward kernel composition (noise-free, shifted)"};
  const int64_t T = 64;
  NoiseSchedule s = build_cosine_schedule(T, BetaInterp::cumulative);
  RngState rng(404);
  Tensor r0 = gaussian(rng, 2, kStateWidth);
  std::vector<Tensor> shifts;
  shifts.push_back(Tensor({2, 3}));
  for (int64_t t = 1; t <= T; ++t) {
    Tensor sh = gaussian(rng, 2, 3);
    shifts.push_back(scale(sh, 0.2 * s.k(t)));
  }
  Tensor zero_eps({2, kStateWidth});
  Tensor state = scale(r0, s.alpha(1));
  {
    Tensor sp = pad_shift(shifts[1]);
    for (size_t i = 0; i < state.data().size(); ++i) state[i] += sp[i];
  }
  double worst = 0.0;
  for (int64_t t = 2; t <= T; ++t) {
    state = forward_step(state, shifts[static_cast<size_t>(t - 1)],
                         shifts[static_cast<size_t>(t)], s, t, zero_eps);
    Tensor expected = scale(r0, s.alpha(t));
    Tensor sp = pad_shift(shifts[static_cast<size_t>(t)]);
    for (size_t i = 0; i < expected.data().size(); ++i) expected[i] += sp[i];
    worst = std::max(worst, max_abs_diff(state, expected));
  }
  r.worst = worst;
  r.passed = worst < 1e-10;
  return r;
}

inline CheckResult check_posterior_reduction() {
  CheckResult r{"posterior zero-shift reduction and chain consistency"};
  NoiseSchedule s = build_cosine_schedule(40, BetaInterp::cumulative);
  RngState rng(405);
  double worst = 0.0;
  for (int64_t t : {2, 11, 25, 40}) {
    Tensor rt = gaussian(rng, 2, kStateWidth);
    Tensor r0 = gaussian(rng, 2, kStateWidth);
    Tensor zero({2, 3});
    PosteriorParams post = posterior_params(rt, r0, zero, zero, s, t);
    auto [ac, s2c] = s.conditional_coeffs(t);
    const double s2t = s.sigma(t) * s.sigma(t);
    const double s2p = s.sigma(t - 1) * s.sigma(t - 1);
    for (size_t i = 0; i < rt.data().size(); ++i) {
      const double expect =
          ac * s2p / s2t * rt[i] + s.alpha(t - 1) * s2c / s2t * r0[i];
      worst = std::max(worst, std::fabs(post.mean[i] - expect));
    }
    // Consistency: R_t on the shifted mean maps back onto the t-1 mean.
    Tensor sh_cur = gaussian(rng, 2, 3);
    Tensor sh_prev = gaussian(rng, 2, 3);
    Tensor on_mean = scale(r0, s.alpha(t));
    Tensor spc = pad_shift(sh_cur);
    for (size_t i = 0; i < on_mean.data().size(); ++i) on_mean[i] += spc[i];
    PosteriorParams post2 =
        posterior_params(on_mean, r0, sh_cur, sh_prev, s, t);
    Tensor expected = scale(r0, s.alpha(t - 1));
    Tensor spp = pad_shift(sh_prev);
    for (size_t i = 0; i < expected.data().size(); ++i) expected[i] += spp[i];
    worst = std::max(worst, max_abs_diff(post2.mean, expected));
  }
  r.worst = worst;
  r.passed = worst < 1e-10;
  return r;
}

inline CheckResult check_equivariance() {
  CheckResult r{"EGNN / denoiser / IPNet / shift equivariance"};
  RngState rng(406);
  double worst = 0.0;
  const Tensor rot = detail::rotation_z90();

  // EGNN layer.
  nn::EgnnLayerConfig cfg{5, 5, true, 12.0, "chk"};
  ModelParams params;
  nn::init_egnn_layer(params, cfg, rng);
  Tensor h = gaussian(rng, 6, 5);
  Tensor x = gaussian(rng, 6, 3);
  nn::EdgeList edges = nn::build_edges(x, 12.0);
  ad::ParamBank bank(params, false);
  auto [h1, x1] = nn::egnn_layer(bank, cfg, ad::constant(h), ad::constant(x), edges);
  auto [h2, x2] = nn::egnn_layer(bank, cfg, ad::constant(h),
                                 ad::constant(detail::rotate(x, rot)), edges);
  worst = std::max(worst, max_abs_diff(h1.val(), h2.val()));
  worst = std::max(worst, max_abs_diff(detail::rotate(x1.val(), rot), x2.val()));

  // IPNet invariance + denoiser/shift equivariance on a random complex.
  Pocket pocket = detail::random_atoms(rng, 8, true);
  Scaffold scaffold;
  static_cast<PointSet &>(scaffold) = detail::random_atoms(rng, 3, false);
  scaffold.anchor_index = 0;
  PointSet rgroup = detail::random_atoms(rng, 3, false);

  IpNetConfig icfg;
  icfg.hidden_dim = 8;
  icfg.message_dim = 8;
  icfg.n_layers = 1;
  icfg.feature_dim = 4;
  IpNetModel ipnet = init_ipnet(icfg, 17);
  auto [repr, aff] = ipnet_forward(ipnet, pocket, scaffold, rgroup);

  Pocket pocket_r = pocket;
  pocket_r.coords = detail::rotate(pocket.coords, rot);
  Scaffold scaffold_r = scaffold;
  scaffold_r.coords = detail::rotate(scaffold.coords, rot);
  PointSet rgroup_r = rgroup;
  rgroup_r.coords = detail::rotate(rgroup.coords, rot);
  auto [repr_r, aff_r] = ipnet_forward(ipnet, pocket_r, scaffold_r, rgroup_r);
  worst = std::max(worst, std::fabs(aff - aff_r));
  worst = std::max(worst, max_abs_diff(repr.f_rgroup, repr_r.f_rgroup));

  NoiseSchedule sched = build_cosine_schedule(12, BetaInterp::cumulative);
  ShiftConfig scfg;
  scfg.feature_dim = 4;
  scfg.hidden_dim = 6;
  scfg.time_dim = 4;
  ShiftNetModel shiftnet = init_shiftnet(scfg, 19);
  Tensor s1 = shift(shiftnet, repr, sched, 6, 3);
  Tensor s2 = shift(shiftnet, repr_r, sched, 6, 3);
  worst = std::max(worst, max_abs_diff(detail::rotate(s1, rot), s2));

  DenoiserConfig dcfg;
  dcfg.hidden_dim = 6;
  dcfg.message_dim = 6;
  dcfg.n_layers = 1;
  dcfg.feature_dim = 4;
  dcfg.time_dim = 4;
  DenoiserModel den = init_denoiser(dcfg, 23);
  AugmentedPocket aug = augment_pocket_zero(pocket);
  AugmentedPocket aug_r = augment_pocket_zero(pocket_r);
  Tensor rt = make_state(rgroup.coords, gaussian(rng, 3, kAtomTypes));
  Tensor rt_r = make_state(detail::rotate(rgroup.coords, rot), state_types(rt));
  Tensor e1 = denoise(den, rt, scaffold, aug, InteractionRepr::none(), sched, 6);
  Tensor e2 =
      denoise(den, rt_r, scaffold_r, aug_r, InteractionRepr::none(), sched, 6);
  worst = std::max(
      worst, max_abs_diff(detail::rotate(state_coords(e1), rot), state_coords(e2)));
  worst = std::max(worst, max_abs_diff(state_types(e1), state_types(e2)));

  r.worst = worst;
  r.passed = worst < 1e-6;
  return r;
}

inline CheckResult check_gradients() {
  CheckResult r{"reverse-mode gradients vs central finite differences"};
  RngState rng(407);
  nn::MlpSpec spec{"g", {3, 4, 2}, nn::Act::silu, nn::Act::none};
  ModelParams params;
  nn::init_mlp(params, spec, rng);
  Tensor input = gaussian(rng, 3, 3);
  auto loss = [&](const ModelParams &p) {
    return sum(mul(nn::mlp_forward(p, spec, input),
                   nn::mlp_forward(p, spec, input)));
  };
  GradMap analytic = [&] {
    ad::ParamBank bank(params);
    ad::Var out = nn::mlp_forward(bank, spec, ad::constant(input));
    return ad::backward(ad::sum_squares(out), params);
  }();
  r.worst = detail::rel_error(analytic, detail::finite_differences(loss, params));
  r.passed = r.worst < 1e-4;
  return r;
}

inline CheckResult check_interaction_oracle() {
  CheckResult r{"interaction detector vs exhaustive pair scan"};
  RngState rng(408);
  InteractionConfig cfg;
  bool ok = true;
  for (int trial = 0; trial < 5 && ok; ++trial) {
    Pocket pocket = detail::random_atoms(rng, 20, true);
    RGroup lig = detail::random_atoms(rng, 8, false);
    AugmentedPocket aug = augment_pocket_zero(pocket);
    auto got = detect_interactions(aug, lig, cfg);
    size_t expected = 0;
    const MolGraph lig_g = infer_bonds(lig, cfg.bond_tol);
    const MolGraph poc_g = infer_bonds(pocket, cfg.bond_tol);
    auto carbox = [](const MolGraph &g, int64_t o) {
      if (g.elements[static_cast<size_t>(o)] != "O") return false;
      for (int64_t c : g.adj[static_cast<size_t>(o)]) {
        if (g.elements[static_cast<size_t>(c)] != "C") continue;
        int64_t n_o = 0;
        for (int64_t u : g.adj[static_cast<size_t>(c)])
          if (g.elements[static_cast<size_t>(u)] == "O") ++n_o;
        if (n_o >= 2) return true;
      }
      return false;
    };
    for (int64_t li = 0; li < lig.size(); ++li)
      for (int64_t pi = 0; pi < pocket.size(); ++pi) {
        double d2 = 0;
        for (int64_t k = 0; k < 3; ++k) {
          const double d = lig.coords.at(li, k) - pocket.coords.at(pi, k);
          d2 += d * d;
        }
        const double d = std::sqrt(d2);
        const std::string le = lig.element(li), pe = pocket.element(pi);
        if ((le == "N" || le == "O") && (pe == "N" || pe == "O") &&
            d <= cfg.hbond_max)
          ++expected;
        if (le == "C" && pe == "C" && d <= cfg.hydrophobic_max) ++expected;
        if (d <= cfg.saltbridge_max &&
            ((pe == "N" && carbox(lig_g, li)) || (le == "N" && carbox(poc_g, pi))))
          ++expected;
      }
    ok = got.size() == expected;
  }
  r.worst = ok ? 0.0 : 1.0;
  r.passed = ok;
  return r;
}

inline CheckResult check_rng_determinism() {
  CheckResult r{"seeded RNG bit determinism"};
  RngState a(12345), b(12345);
  Tensor ta = gaussian(a, 16, 4);
  Tensor tb = gaussian(b, 16, 4);
  r.worst = max_abs_diff(ta, tb);
  r.passed = r.worst == 0.0;
  return r;
}

inline std::vector<CheckResult> run_all() {
  std::vector<std::function<CheckResult()>> checks = {
      check_schedule_identities, check_kernel_composition,
      check_posterior_reduction, check_equivariance,
      check_gradients,           check_interaction_oracle,
      check_rng_determinism};
  std::vector<CheckResult> results;
  for (auto &check : checks) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult res = check();
    res.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    results.push_back(res);
  }
  return results;
}

}  // namespace scaffdiff::selfcheck

#endif  // SCAFFDIFF_SELFCHECK_HPP_

//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_SCHEDULE_HPP_
#define SCAFFDIFF_SCHEDULE_HPP_

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "scaffdiff/error.hpp"

namespace scaffdiff {

/// How the SNR parameterization reads beta_t.
///
/// `literal` feeds the per-step beta_t straight into
/// gamma_t = log(1-beta_t) - log(beta_t), which makes alpha_t = sqrt(beta_t).
/// That matches the written formulas but inverts the signal direction and
/// yields negative one-step conditional variances, so the chain cannot be
/// sampled step by step. `cumulative` reads beta_t in the gamma formula as
/// the running product prod(1-beta_s), recovering the standard
/// variance-preserving chain (alpha_t = sqrt(alpha_bar_t)). Both are kept so
/// the discrepancy stays observable.
enum class BetaInterp { literal, cumulative };

inline std::string to_string(BetaInterp interp) {
  return interp == BetaInterp::literal ? "literal" : "cumulative";
}

inline BetaInterp beta_interp_from_string(const std::string &s) {
  if (s == "literal") return BetaInterp::literal;
  if (s == "cumulative") return BetaInterp::cumulative;
  throw ConfigError("beta_interpretation must be 'literal' or 'cumulative', got '" + s + "'");
}

/// All per-timestep coefficients of the variance-preserving schedule.
/// Arrays are indexed 1..T.
class NoiseSchedule {
 public:
  static constexpr double kBetaMin = 1e-5;
  static constexpr double kBetaMax = 0.999;
  static constexpr double kCosineS = 0.008;

  int64_t T() const { return T_; }
  BetaInterp interpretation() const { return interp_; }

  double beta(int64_t t) const { return at(beta_, t); }
  double gamma(int64_t t) const { return at(gamma_, t); }
  double alpha(int64_t t) const { return at(alpha_, t); }
  double sigma(int64_t t) const { return at(sigma_, t); }
  double alpha_bar_prod(int64_t t) const { return at(alpha_bar_, t); }
  double k(int64_t t) const {
    if (t == 0) return 0.0;  // empty product: sqrt(1) * (1 - sqrt(1))
    return at(k_, t);
  }

  std::pair<double, double> alpha_sigma(int64_t t) const {
    return {alpha(t), sigma(t)};
  }

  /// (alpha_{t|t-1}, sigma^2_{t|t-1}); t must have a predecessor.
  std::pair<double, double> conditional_coeffs(int64_t t) const {
    SCAFFDIFF_CHECK(t >= 2, "conditional_coeffs: t = ", t,
                    " has no predecessor");
    check_range(t);
    const double a_cond = alpha(t) / alpha(t - 1);
    double s2_cond = sigma(t) * sigma(t) - a_cond * a_cond * sigma(t - 1) * sigma(t - 1);
    if (s2_cond < 0.0 && s2_cond > -1e-12) s2_cond = 0.0;  // rounding only
    return {a_cond, s2_cond};
  }

  double shift_coeff(int64_t t) const { return k(t); }

  /// True when every one-step conditional variance is nonnegative, i.e. the
  /// schedule describes a samplable Markov chain.
  bool valid_chain() const { return valid_chain_; }

  /// Schedule from explicit per-step rates; betas must lie in (0, 1).
  static NoiseSchedule from_betas(const std::vector<double> &betas,
                                  BetaInterp interp = BetaInterp::literal) {
    const int64_t T = static_cast<int64_t>(betas.size());
    SCAFFDIFF_CHECK(T >= 1, "schedule: need at least one beta");
    NoiseSchedule s;
    s.T_ = T;
    s.interp_ = interp;
    s.beta_ = betas;
    s.gamma_.resize(T);
    s.alpha_.resize(T);
    s.sigma_.resize(T);
    s.alpha_bar_.resize(T);
    s.k_.resize(T);

    double prod = 1.0;
    for (int64_t t = 1; t <= T; ++t) {
      const double beta = betas[static_cast<size_t>(t - 1)];
      SCAFFDIFF_CHECK(beta > 0.0 && beta < 1.0, "schedule: beta_", t, " = ",
                      beta, " outside (0,1)");
      prod *= 1.0 - beta;

      const double sq = std::sqrt(prod);
      const double x = interp == BetaInterp::literal ? beta : prod;
      const double gamma = std::log(1.0 - x) - std::log(x);
      // alpha = sqrt(sigmoid(-gamma)) = sqrt(x), sigma = sqrt(sigmoid(gamma))
      s.alpha_bar_[t - 1] = prod;
      s.k_[t - 1] = sq * (1.0 - sq);
      s.gamma_[t - 1] = gamma;
      s.alpha_[t - 1] = std::sqrt(1.0 / (1.0 + std::exp(gamma)));
      s.sigma_[t - 1] = std::sqrt(1.0 / (1.0 + std::exp(-gamma)));
    }

    s.valid_chain_ = true;
    for (int64_t t = 2; t <= T; ++t)
      if (s.conditional_coeffs(t).second < 0.0) s.valid_chain_ = false;
    return s;
  }

  static NoiseSchedule cosine(int64_t T,
                              BetaInterp interp = BetaInterp::literal) {
    SCAFFDIFF_CHECK(T >= 2, "cosine schedule: T must be >= 2, got ", T);
    auto f = [T](double t) {
      const double u = ((t / static_cast<double>(T)) + kCosineS) /
                       (1.0 + kCosineS) * M_PI / 2.0;
      const double c = std::cos(u);
      return c * c;
    };
    const double f0 = f(0.0);
    std::vector<double> betas;
    betas.reserve(static_cast<size_t>(T));
    double prev_abar = 1.0;
    for (int64_t t = 1; t <= T; ++t) {
      const double abar = f(static_cast<double>(t)) / f0;
      betas.push_back(
          std::min(std::max(1.0 - abar / prev_abar, kBetaMin), kBetaMax));
      prev_abar = abar;
    }
    return from_betas(betas, interp);
  }

  /// One record per t, JSON lines.
  void dump(std::ostream &os) const {
    os.precision(17);
    for (int64_t t = 1; t <= T_; ++t) {
      os << "{\"t\":" << t << ",\"beta\":" << beta(t)
         << ",\"gamma\":" << gamma(t) << ",\"alpha\":" << alpha(t)
         << ",\"sigma\":" << sigma(t)
         << ",\"alpha_bar_prod\":" << alpha_bar_prod(t) << ",\"k\":" << k(t);
      if (t >= 2) {
        auto [ac, s2c] = conditional_coeffs(t);
        os << ",\"alpha_cond\":" << ac << ",\"sigma2_cond\":" << s2c;
      }
      os << "}\n";
    }
  }

 private:
  void check_range(int64_t t) const {
    SCAFFDIFF_CHECK(t >= 1 && t <= T_, "schedule: timestep ", t,
                    " outside [1,", T_, "]");
  }
  double at(const std::vector<double> &v, int64_t t) const {
    check_range(t);
    return v[static_cast<size_t>(t - 1)];
  }

  int64_t T_ = 0;
  BetaInterp interp_ = BetaInterp::literal;
  bool valid_chain_ = false;
  std::vector<double> beta_, gamma_, alpha_, sigma_, alpha_bar_, k_;
};

inline NoiseSchedule build_cosine_schedule(
    int64_t T, BetaInterp interp = BetaInterp::literal) {
  return NoiseSchedule::cosine(T, interp);
}

}  // namespace scaffdiff

#endif  // SCAFFDIFF_SCHEDULE_HPP_

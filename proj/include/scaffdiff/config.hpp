//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_CONFIG_HPP_
#define SCAFFDIFF_CONFIG_HPP_

#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "scaffdiff/diffusion.hpp"
#include "scaffdiff/metrics.hpp"

namespace scaffdiff {

/// All tunables in one place. Config files use the same JSON grammar as the
/// data files; command-line flags override file values.
struct RunConfig {
  int64_t T = 1000;
  int64_t hidden_dim = 64;
  int64_t message_dim = 64;
  int64_t n_layers = 3;
  int64_t feature_dim = 32;
  int64_t time_dim = 8;
  double distance_cutoff = 5.0;

  // The module-level default for standalone schedule math is `literal`
  // (formulas exactly as written); end-to-end training and sampling default
  // to `cumulative` because the literal reading has no samplable reverse
  // chain. See README.
  std::string beta_interpretation = "cumulative";
  std::string shift_head = "equivariant";
  bool r0_shift_correction = false;

  uint64_t seed = 0;
  double lr = 1e-3;
  int threads = 1;
  int64_t n_samples = 100;
  int64_t n_atoms = 0;  // 0 = empirical size distribution

  double conserved_threshold = 0.4;
  double hbond_max = 3.5;
  double hydrophobic_max = 4.0;
  double saltbridge_max = 4.0;
  double bond_tol = 0.4;
  double anchor_min = 0.9;
  double anchor_max = 2.0;
  double clash_dist = 0.8;

  std::string a3m_dir;  // empty = zero conservation

  BetaInterp interp() const {
    return beta_interp_from_string(beta_interpretation);
  }
  IpNetConfig ipnet() const {
    return {hidden_dim, message_dim, n_layers, feature_dim, distance_cutoff};
  }
  DenoiserConfig denoiser() const {
    DenoiserConfig c;
    c.hidden_dim = hidden_dim;
    c.message_dim = message_dim;
    c.n_layers = n_layers;
    c.feature_dim = feature_dim;
    c.time_dim = time_dim;
    c.distance_cutoff = distance_cutoff;
    return c;
  }
  ShiftConfig shift() const {
    ShiftConfig c;
    c.feature_dim = feature_dim;
    c.time_dim = time_dim;
    c.head = shift_head_from_string(shift_head);
    return c;
  }
  InteractionConfig interactions() const {
    return {hbond_max, hydrophobic_max, saltbridge_max, bond_tol,
            conserved_threshold};
  }
  ValidityConfig validity_rules() const {
    return {anchor_min, anchor_max, bond_tol, clash_dist};
  }
};

/// Loads a config file, rejecting unknown keys by name.
inline RunConfig load_run_config(const std::string &path) {
  std::ifstream in(path);
  if (!in.good()) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config '" + path + "' must be a JSON object");

  RunConfig cfg;
  auto take = [&](const char *key, auto &field) {
    if (!j.contains(key)) return;
    try {
      field = j.at(key).get<std::decay_t<decltype(field)>>();
    } catch (const nlohmann::json::exception &) {
      throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
    j.erase(key);
  };
  take("T", cfg.T);
  take("hidden_dim", cfg.hidden_dim);
  take("message_dim", cfg.message_dim);
  take("n_layers", cfg.n_layers);
  take("feature_dim", cfg.feature_dim);
  take("time_dim", cfg.time_dim);
  take("distance_cutoff", cfg.distance_cutoff);
  take("beta_interpretation", cfg.beta_interpretation);
  take("shift_head", cfg.shift_head);
  take("r0_shift_correction", cfg.r0_shift_correction);
  take("seed", cfg.seed);
  take("lr", cfg.lr);
  take("threads", cfg.threads);
  take("n_samples", cfg.n_samples);
  take("n_atoms", cfg.n_atoms);
  take("conserved_threshold", cfg.conserved_threshold);
  take("hbond_max", cfg.hbond_max);
  take("hydrophobic_max", cfg.hydrophobic_max);
  take("saltbridge_max", cfg.saltbridge_max);
  take("bond_tol", cfg.bond_tol);
  take("anchor_min", cfg.anchor_min);
  take("anchor_max", cfg.anchor_max);
  take("clash_dist", cfg.clash_dist);
  take("a3m_dir", cfg.a3m_dir);
  if (!j.empty())
    throw ConfigError("config '" + path + "': unknown key '" +
                      j.begin().key() + "'");

  // Validate the enum-like strings eagerly so a bad file fails at load time.
  beta_interp_from_string(cfg.beta_interpretation);
  shift_head_from_string(cfg.shift_head);
  return cfg;
}

/// Seed resolution: explicit flag > config file > SCAFFDIFF_SEED env > 0.
inline uint64_t resolve_seed(std::optional<uint64_t> flag_seed,
                             const RunConfig &cfg) {
  if (flag_seed) return *flag_seed;
  if (cfg.seed != 0) return cfg.seed;
  if (const char *env = std::getenv("SCAFFDIFF_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw ConfigError("SCAFFDIFF_SEED is not a number: '" +
                        std::string(env) + "'");
    }
  }
  return 0;
}

}  // namespace scaffdiff

#endif  // SCAFFDIFF_CONFIG_HPP_

//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_CHECKPOINT_HPP_
#define SCAFFDIFF_CHECKPOINT_HPP_

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scaffdiff/diffusion.hpp"

namespace scaffdiff {

inline uint64_t fnv1a64(const void *data, size_t len) {
  const auto *p = static_cast<const unsigned char *>(data);
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

// Checkpoint layout: 8-byte magic, u64 manifest length, manifest JSON,
// then the raw float64 payload. The manifest lists (name, shape, offset,
// checksum) per parameter plus a model-kind tag and its configuration.
inline constexpr char kCheckpointMagic[9] = "SDCKPT01";

inline void save_checkpoint(const std::string &path, const std::string &kind,
                            const nlohmann::json &config,
                            const ModelParams &params) {
  nlohmann::json manifest;
  manifest["format"] = 1;
  manifest["kind"] = kind;
  manifest["config"] = config;
  auto entries = nlohmann::json::array();
  uint64_t offset = 0;
  for (const auto &[name, value] : params) {
    const size_t bytes = value.data().size() * sizeof(double);
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(
                      fnv1a64(value.data().data(), bytes)));
    entries.push_back({{"name", name},
                       {"shape", value.shape()},
                       {"offset", offset},
                       {"checksum", std::string(hex)}});
    offset += bytes;
  }
  manifest["params"] = std::move(entries);

  std::ofstream out(path, std::ios::binary);
  SCAFFDIFF_CHECK(out.good(), "cannot write checkpoint '", path, "'");
  out.write(kCheckpointMagic, 8);
  const std::string mtext = manifest.dump();
  const uint64_t mlen = mtext.size();
  out.write(reinterpret_cast<const char *>(&mlen), sizeof(mlen));
  out.write(mtext.data(), static_cast<std::streamsize>(mtext.size()));
  for (const auto &[name, value] : params)
    out.write(reinterpret_cast<const char *>(value.data().data()),
              static_cast<std::streamsize>(value.data().size() *
                                           sizeof(double)));
  SCAFFDIFF_CHECK(out.good(), "short write to checkpoint '", path, "'");
}

struct Checkpoint {
  std::string kind;
  nlohmann::json config;
  ModelParams params;
};

inline Checkpoint load_checkpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  SCAFFDIFF_CHECK(in.good(), "cannot open checkpoint '", path, "'");
  char magic[8];
  in.read(magic, 8);
  SCAFFDIFF_CHECK(in.good() && std::memcmp(magic, kCheckpointMagic, 8) == 0,
                  "'", path, "' is not a checkpoint file");
  uint64_t mlen = 0;
  in.read(reinterpret_cast<char *>(&mlen), sizeof(mlen));
  SCAFFDIFF_CHECK(in.good() && mlen > 0 && mlen < (1ull << 30),
                  "corrupt checkpoint manifest length");
  std::string mtext(mlen, '\0');
  in.read(mtext.data(), static_cast<std::streamsize>(mlen));
  SCAFFDIFF_CHECK(in.good(), "truncated checkpoint manifest");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mtext);
  } catch (const nlohmann::json::exception &e) {
    throw Error(std::string("corrupt checkpoint manifest: ") + e.what());
  }

  Checkpoint ckpt;
  ckpt.kind = manifest.at("kind").get<std::string>();
  ckpt.config = manifest.at("config");
  for (const auto &entry : manifest.at("params")) {
    const std::string name = entry.at("name").get<std::string>();
    const std::vector<int64_t> shape =
        entry.at("shape").get<std::vector<int64_t>>();
    Tensor value(shape);
    in.read(reinterpret_cast<char *>(value.data().data()),
            static_cast<std::streamsize>(value.data().size() *
                                         sizeof(double)));
    SCAFFDIFF_CHECK(in.good(), "truncated checkpoint payload at '", name, "'");
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(
                      value.data().data(),
                      value.data().size() * sizeof(double))));
    SCAFFDIFF_CHECK(entry.at("checksum").get<std::string>() == hex,
                    "checksum mismatch for parameter '", name,
                    "' in '", path, "'");
    SCAFFDIFF_CHECK(value.all_finite(), "non-finite parameter '", name, "'");
    ckpt.params.insert(name, std::move(value));
  }
  return ckpt;
}

// ---------------------------------------------------------------------------
// Typed wrappers

inline nlohmann::json ipnet_config_json(const IpNetConfig &c) {
  return {{"hidden_dim", c.hidden_dim},   {"message_dim", c.message_dim},
          {"n_layers", c.n_layers},       {"feature_dim", c.feature_dim},
          {"distance_cutoff", c.distance_cutoff}};
}

inline IpNetConfig ipnet_config_from_json(const nlohmann::json &j) {
  IpNetConfig c;
  c.hidden_dim = j.at("hidden_dim").get<int64_t>();
  c.message_dim = j.at("message_dim").get<int64_t>();
  c.n_layers = j.at("n_layers").get<int64_t>();
  c.feature_dim = j.at("feature_dim").get<int64_t>();
  c.distance_cutoff = j.at("distance_cutoff").get<double>();
  return c;
}

inline void save_ipnet(const std::string &path, const IpNetModel &model) {
  save_checkpoint(path, "ipnet", ipnet_config_json(model.config),
                  model.params);
}

inline IpNetModel load_ipnet(const std::string &path) {
  Checkpoint ckpt = load_checkpoint(path);
  SCAFFDIFF_CHECK(ckpt.kind == "ipnet", "'", path,
                  "' holds a '", ckpt.kind, "' model, expected 'ipnet'");
  IpNetModel model;
  model.config = ipnet_config_from_json(ckpt.config);
  model.params = std::move(ckpt.params);
  return model;
}

struct DiffusionCheckpoint {
  DiffusionModel model;
  int64_t T = 0;
  BetaInterp interp = BetaInterp::cumulative;
};

inline void save_diffusion(const std::string &path,
                           const DiffusionModel &model, int64_t T,
                           BetaInterp interp) {
  const DenoiserConfig &d = model.denoiser_cfg;
  const ShiftConfig &s = model.shift_cfg;
  nlohmann::json config = {
      {"T", T},
      {"beta_interpretation", to_string(interp)},
      {"denoiser",
       {{"hidden_dim", d.hidden_dim},
        {"message_dim", d.message_dim},
        {"n_layers", d.n_layers},
        {"feature_dim", d.feature_dim},
        {"time_dim", d.time_dim},
        {"distance_cutoff", d.distance_cutoff}}},
      {"shift",
       {{"feature_dim", s.feature_dim},
        {"hidden_dim", s.hidden_dim},
        {"time_dim", s.time_dim},
        {"head", s.head == ShiftHead::equivariant ? "equivariant"
                                                  : "literal"}}}};
  save_checkpoint(path, "diffusion", config, model.params);
}

inline DiffusionCheckpoint load_diffusion(const std::string &path) {
  Checkpoint ckpt = load_checkpoint(path);
  SCAFFDIFF_CHECK(ckpt.kind == "diffusion", "'", path, "' holds a '",
                  ckpt.kind, "' model, expected 'diffusion'");
  DiffusionCheckpoint out;
  const auto &dj = ckpt.config.at("denoiser");
  out.model.denoiser_cfg.hidden_dim = dj.at("hidden_dim").get<int64_t>();
  out.model.denoiser_cfg.message_dim = dj.at("message_dim").get<int64_t>();
  out.model.denoiser_cfg.n_layers = dj.at("n_layers").get<int64_t>();
  out.model.denoiser_cfg.feature_dim = dj.at("feature_dim").get<int64_t>();
  out.model.denoiser_cfg.time_dim = dj.at("time_dim").get<int64_t>();
  out.model.denoiser_cfg.distance_cutoff =
      dj.at("distance_cutoff").get<double>();
  const auto &sj = ckpt.config.at("shift");
  out.model.shift_cfg.feature_dim = sj.at("feature_dim").get<int64_t>();
  out.model.shift_cfg.hidden_dim = sj.at("hidden_dim").get<int64_t>();
  out.model.shift_cfg.time_dim = sj.at("time_dim").get<int64_t>();
  out.model.shift_cfg.head =
      shift_head_from_string(sj.at("head").get<std::string>());
  out.T = ckpt.config.at("T").get<int64_t>();
  out.interp = beta_interp_from_string(
      ckpt.config.at("beta_interpretation").get<std::string>());
  out.model.params = std::move(ckpt.params);
  return out;
}

}  // namespace scaffdiff

#endif  // SCAFFDIFF_CHECKPOINT_HPP_

//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffdiff/checkpoint.hpp"

#include <fstream>

#include <gtest/gtest.h>

namespace scaffdiff {
namespace {

std::string temp_path(const std::string &name) {
  return ::testing::TempDir() + name;
}

TEST(Checkpoint, IpnetRoundTrip) {
  IpNetConfig cfg;
  cfg.hidden_dim = 8;
  cfg.message_dim = 8;
  cfg.n_layers = 1;
  cfg.feature_dim = 4;
  IpNetModel model = init_ipnet(cfg, 3);
  const std::string path = temp_path("ipnet.ckpt");
  save_ipnet(path, model);
  IpNetModel loaded = load_ipnet(path);
  EXPECT_EQ(loaded.config.hidden_dim, 8);
  EXPECT_EQ(loaded.config.feature_dim, 4);
  EXPECT_EQ(loaded.params.size(), model.params.size());
  for (const auto &[name, value] : model.params)
    EXPECT_EQ(max_abs_diff(value, loaded.params.get(name)), 0.0) << name;
}

TEST(Checkpoint, DiffusionRoundTripKeepsScheduleMeta) {
  DenoiserConfig den;
  den.hidden_dim = 6;
  den.message_dim = 6;
  den.n_layers = 1;
  den.feature_dim = 4;
  den.time_dim = 4;
  ShiftConfig sh;
  sh.feature_dim = 4;
  sh.hidden_dim = 6;
  sh.time_dim = 4;
  DiffusionModel model = init_diffusion_model(den, sh, 5);
  const std::string path = temp_path("diffusion.ckpt");
  save_diffusion(path, model, 64, BetaInterp::cumulative);
  DiffusionCheckpoint loaded = load_diffusion(path);
  EXPECT_EQ(loaded.T, 64);
  EXPECT_EQ(loaded.interp, BetaInterp::cumulative);
  EXPECT_EQ(loaded.model.shift_cfg.head, ShiftHead::equivariant);
  for (const auto &[name, value] : model.params)
    EXPECT_EQ(max_abs_diff(value, loaded.model.params.get(name)), 0.0);
}

TEST(Checkpoint, CorruptedPayloadDetected) {
  IpNetConfig cfg;
  cfg.hidden_dim = 4;
  cfg.message_dim = 4;
  cfg.n_layers = 1;
  cfg.feature_dim = 4;
  const std::string path = temp_path("corrupt.ckpt");
  save_ipnet(path, init_ipnet(cfg, 7));

  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(-9, std::ios::end);
  const char junk = 0x5a;
  f.write(&junk, 1);
  f.close();
  try {
    load_ipnet(path);
    FAIL() << "expected checksum failure";
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos);
  }
}

TEST(Checkpoint, WrongMagicRejected) {
  const std::string path = temp_path("notackpt.bin");
  std::ofstream(path) << "this is not a checkpoint";
  EXPECT_THROW(load_checkpoint(path), Error);
  EXPECT_THROW(load_checkpoint(temp_path("missing.ckpt")), Error);
}

TEST(Checkpoint, WrongKindRejected) {
  IpNetConfig cfg;
  cfg.hidden_dim = 4;
  cfg.message_dim = 4;
  cfg.n_layers = 1;
  cfg.feature_dim = 4;
  const std::string path = temp_path("kind.ckpt");
  save_ipnet(path, init_ipnet(cfg, 9));
  EXPECT_THROW(load_diffusion(path), Error);
}

}  // namespace
}  // namespace scaffdiff

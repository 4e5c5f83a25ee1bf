//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffdiff/sampler.hpp"

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "test_util.hpp"

namespace scaffdiff {
namespace {

struct Rig {
  ComplexTuple tuple;
  AugmentedPocket pocket;
  IpNetModel ipnet;
  DiffusionModel model;
  NoiseSchedule schedule;

  explicit Rig(uint64_t seed = 51, int64_t T = 12)
      : tuple(testing::make_tuple(1)),
        pocket(augment_pocket_zero(tuple.pocket)),
        schedule(build_cosine_schedule(T, BetaInterp::cumulative)) {
    IpNetConfig icfg;
    icfg.hidden_dim = 8;
    icfg.message_dim = 8;
    icfg.n_layers = 1;
    icfg.feature_dim = 6;
    ipnet = init_ipnet(icfg, seed);
    DenoiserConfig dcfg;
    dcfg.hidden_dim = 6;
    dcfg.message_dim = 6;
    dcfg.n_layers = 1;
    dcfg.feature_dim = 6;
    dcfg.time_dim = 4;
    ShiftConfig scfg;
    scfg.feature_dim = 6;
    scfg.hidden_dim = 6;
    scfg.time_dim = 4;
    model = init_diffusion_model(dcfg, scfg, seed + 1);
  }
};

TEST(SampleOne, FixedSeedIsBitReproducible) {
  Rig rig;
  RGroup a = sample_one(rig.model, rig.ipnet, rig.pocket, rig.tuple.scaffold,
                        4, rig.schedule, RngState(7));
  RGroup b = sample_one(rig.model, rig.ipnet, rig.pocket, rig.tuple.scaffold,
                        4, rig.schedule, RngState(7));
  EXPECT_EQ(max_abs_diff(a.coords, b.coords), 0.0);
  EXPECT_EQ(max_abs_diff(a.types, b.types), 0.0);
}

TEST(SampleOne, InputsStayUntouched) {
  Rig rig;
  const Tensor scaffold_before = rig.tuple.scaffold.coords;
  const Tensor pocket_before = rig.pocket.pocket.coords;
  sample_one(rig.model, rig.ipnet, rig.pocket, rig.tuple.scaffold, 3,
             rig.schedule, RngState(9));
  EXPECT_EQ(max_abs_diff(scaffold_before, rig.tuple.scaffold.coords), 0.0);
  EXPECT_EQ(max_abs_diff(pocket_before, rig.pocket.pocket.coords), 0.0);
}

TEST(SampleOne, OutputDecodesToOneHotTypes) {
  Rig rig;
  RGroup out = sample_one(rig.model, rig.ipnet, rig.pocket,
                          rig.tuple.scaffold, 5, rig.schedule, RngState(11));
  out.validate("rgroup", false);
  EXPECT_EQ(out.size(), 5);
}

TEST(SampleOne, FirstStepShiftIsExactlyZero) {
  Rig rig;
  Trajectory traj;
  sample_one(rig.model, rig.ipnet, rig.pocket, rig.tuple.scaffold, 4,
             rig.schedule, RngState(13), false, &traj);
  ASSERT_EQ(traj.steps.size(), static_cast<size_t>(rig.schedule.T()));
  EXPECT_EQ(traj.steps.front().t, rig.schedule.T());
  EXPECT_EQ(max_abs(traj.steps.front().shift_t), 0.0);
  EXPECT_EQ(traj.steps.back().t, 1);
  for (size_t i = 1; i < traj.steps.size(); ++i)
    EXPECT_EQ(traj.steps[i].t, traj.steps[i - 1].t - 1);
}

// The shift applied at step t must equal k_t psi(F(R0_hat of step t+1), t),
// never anything computed from the current step.
TEST(SampleOne, BootstrapRecursionUsesPreviousEstimate) {
  Rig rig;
  Trajectory traj;
  sample_one(rig.model, rig.ipnet, rig.pocket, rig.tuple.scaffold, 4,
             rig.schedule, RngState(17), false, &traj);
  ad::ParamBank bank(rig.model.params, false);
  for (size_t i = 1; i < traj.steps.size(); ++i) {
    const TrajectoryStep &prev = traj.steps[i - 1];  // step t+1
    const TrajectoryStep &cur = traj.steps[i];       // step t
    InteractionRepr repr =
        ipnet_forward(rig.ipnet, rig.pocket.pocket.coords,
                      rig.pocket.pocket.types, rig.tuple.scaffold.coords,
                      rig.tuple.scaffold.types, state_coords(prev.r0_hat),
                      state_types(prev.r0_hat))
            .first;
    Tensor expected = shift_graph(bank, rig.model.shift_cfg, repr,
                                  rig.schedule, cur.t, 4)
                          .val();
    EXPECT_LT(max_abs_diff(expected, cur.shift_t), 1e-12) << "t = " << cur.t;
  }
}

TEST(SampleOne, RotatingTheFrameRotatesTheOutput) {
  Rig rig;
  // Record the raw draws, then replay them rotated.
  std::vector<Tensor> draws;
  RngState rec_rng(21);
  NoiseFn recorder = [&](int64_t r, int64_t c) {
    Tensor t = gaussian(rec_rng, r, c);
    draws.push_back(t);
    return t;
  };
  RGroup base = sample_one(rig.model, rig.ipnet, rig.pocket,
                           rig.tuple.scaffold, 4, rig.schedule, RngState(0),
                           false, nullptr, recorder);

  RngState rot_rng(23);
  Tensor rot = testing::random_rotation(rot_rng);
  ComplexTuple turned = rig.tuple;
  turned.scaffold.coords = testing::rigid_motion(rig.tuple.scaffold.coords, rot);
  AugmentedPocket turned_pocket = rig.pocket;
  turned_pocket.pocket.coords =
      testing::rigid_motion(rig.pocket.pocket.coords, rot);

  size_t cursor = 0;
  NoiseFn replay_rotated = [&](int64_t r, int64_t c) {
    Tensor t = draws.at(cursor++);
    SCAFFDIFF_CHECK(t.rows() == r && t.cols() == c, "draw shape mismatch");
    return make_state(testing::rigid_motion(state_coords(t), rot),
                      state_types(t));
  };
  RGroup moved = sample_one(rig.model, rig.ipnet, turned_pocket,
                            turned.scaffold, 4, rig.schedule, RngState(0),
                            false, nullptr, replay_rotated);

  EXPECT_LT(max_abs_diff(testing::rigid_motion(base.coords, rot),
                         moved.coords),
            1e-6);
  EXPECT_EQ(max_abs_diff(base.types, moved.types), 0.0);
}

TEST(SampleOne, LiteralScheduleRefused) {
  Rig rig;
  NoiseSchedule literal = build_cosine_schedule(12, BetaInterp::literal);
  EXPECT_THROW(sample_one(rig.model, rig.ipnet, rig.pocket,
                          rig.tuple.scaffold, 4, literal, RngState(1)),
               Error);
}

TEST(SampleOne, DivergentModelAbortsWithStepIndex) {
  Rig rig;
  rig.model.params.fill(1e160);
  try {
    sample_one(rig.model, rig.ipnet, rig.pocket, rig.tuple.scaffold, 4,
               rig.schedule, RngState(3));
    FAIL() << "expected divergence abort";
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos);
  }
}

// ---------------------------------------------------------------------------
// Batch sampling

TEST(SampleBatch, SingletonMatchesSampleOneWithForkedStream) {
  Rig rig;
  SamplerConfig cfg;
  cfg.n_samples = 1;
  cfg.n_atoms = 4;
  cfg.seed = 31;
  std::vector<RGroup> batch =
      sample_batch(rig.model, rig.ipnet, rig.pocket, rig.tuple.scaffold, cfg,
                   {}, rig.schedule);
  ASSERT_EQ(batch.size(), 1u);
  RGroup direct = sample_one(rig.model, rig.ipnet, rig.pocket,
                             rig.tuple.scaffold, 4, rig.schedule,
                             RngState(31).fork(0));
  EXPECT_EQ(max_abs_diff(batch[0].coords, direct.coords), 0.0);
}

TEST(SampleBatch, SameSeedSameMultiset) {
  Rig rig;
  SamplerConfig cfg;
  cfg.n_samples = 6;
  cfg.n_atoms = 0;
  cfg.seed = 77;
  const std::vector<int64_t> pool = {3, 4, 5};
  auto a = sample_batch(rig.model, rig.ipnet, rig.pocket, rig.tuple.scaffold,
                        cfg, pool, rig.schedule);
  auto b = sample_batch(rig.model, rig.ipnet, rig.pocket, rig.tuple.scaffold,
                        cfg, pool, rig.schedule);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(max_abs_diff(a[i].coords, b[i].coords), 0.0);
    EXPECT_EQ(max_abs_diff(a[i].types, b[i].types), 0.0);
  }
}

TEST(SampleBatch, ParallelEqualsSerial) {
  Rig rig;
  SamplerConfig serial;
  serial.n_samples = 6;
  serial.n_atoms = 3;
  serial.seed = 99;
  serial.threads = 1;
  SamplerConfig parallel = serial;
  parallel.threads = 3;
  auto a = sample_batch(rig.model, rig.ipnet, rig.pocket, rig.tuple.scaffold,
                        serial, {}, rig.schedule);
  auto b = sample_batch(rig.model, rig.ipnet, rig.pocket, rig.tuple.scaffold,
                        parallel, {}, rig.schedule);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(max_abs_diff(a[i].coords, b[i].coords), 0.0);
}

TEST(SampleBatch, EmpiricalSizePolicyDrawsFromPool) {
  Rig rig;
  SamplerConfig cfg;
  cfg.n_samples = 10;
  cfg.n_atoms = 0;
  cfg.seed = 5;
  const std::vector<int64_t> pool = {3, 5};
  auto batch = sample_batch(rig.model, rig.ipnet, rig.pocket,
                            rig.tuple.scaffold, cfg, pool, rig.schedule);
  bool saw3 = false, saw5 = false;
  for (const auto &rg : batch) {
    EXPECT_TRUE(rg.size() == 3 || rg.size() == 5);
    saw3 = saw3 || rg.size() == 3;
    saw5 = saw5 || rg.size() == 5;
  }
  EXPECT_TRUE(saw3 && saw5);
  // No pool and no explicit size is a usage error.
  EXPECT_THROW(sample_batch(rig.model, rig.ipnet, rig.pocket,
                            rig.tuple.scaffold, cfg, {}, rig.schedule),
               Error);
}

TEST(SampleBatch, ErrorsCarrySampleIndex) {
  Rig rig;
  rig.model.params.fill(1e160);
  SamplerConfig cfg;
  cfg.n_samples = 2;
  cfg.n_atoms = 3;
  cfg.seed = 1;
  try {
    sample_batch(rig.model, rig.ipnet, rig.pocket, rig.tuple.scaffold, cfg,
                 {}, rig.schedule);
    FAIL() << "expected abort";
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("sample "), std::string::npos);
  }
}

}  // namespace
}  // namespace scaffdiff

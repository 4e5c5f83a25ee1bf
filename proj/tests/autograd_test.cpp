//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffdiff/autograd.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace scaffdiff {
namespace {

using ad::Var;

TEST(Autograd, ConstantLossGivesZeroGradients) {
  ModelParams params;
  params.insert("p", Tensor::row({1.0, 2.0}));
  ad::ParamBank bank(params);
  Var p = bank("p");
  Var loss = ad::sum_all(ad::scale(p, 0.0));
  GradMap grads = ad::backward(loss, params);
  EXPECT_DOUBLE_EQ(grads.at("p")[0], 0.0);
  EXPECT_DOUBLE_EQ(grads.at("p")[1], 0.0);
}

TEST(Autograd, HalfNormSquaredGradientIsIdentity) {
  ModelParams params;
  params.insert("p", Tensor::row({3.0, -1.5, 0.25}));
  ad::ParamBank bank(params);
  Var p = bank("p");
  Var loss = ad::scale(ad::sum_squares(p), 0.5);
  GradMap grads = ad::backward(loss, params);
  for (size_t i = 0; i < 3; ++i)
    EXPECT_DOUBLE_EQ(grads.at("p")[i], params.get("p")[i]);
}

TEST(Autograd, NonScalarLossRejected) {
  ModelParams params;
  params.insert("p", Tensor::row({1.0, 2.0}));
  ad::ParamBank bank(params);
  EXPECT_THROW(ad::backward(bank("p"), params), Error);
}

TEST(Autograd, UnreachedParameterGetsZeroGradient) {
  ModelParams params;
  params.insert("used", Tensor::scalar(2.0));
  params.insert("unused", Tensor::row({1.0, 1.0}));
  ad::ParamBank bank(params);
  Var loss = ad::sum_squares(bank("used"));
  GradMap grads = ad::backward(loss, params);
  EXPECT_DOUBLE_EQ(grads.at("used")[0], 4.0);
  ASSERT_TRUE(grads.count("unused"));
  EXPECT_DOUBLE_EQ(grads.at("unused")[0], 0.0);
}

// Every op composed into one scalar, checked against central differences.
TEST(Autograd, CompositeGraphMatchesFiniteDifferences) {
  RngState rng(31);
  ModelParams params;
  params.insert("w", init_weight(rng, 4, 3));
  params.insert("b", gaussian(rng, 1, 3));
  params.insert("u", gaussian(rng, 5, 4));
  params.insert("g", gaussian(rng, 5, 1));

  const std::vector<int64_t> gather_idx = {0, 2, 4, 2};
  const std::vector<int64_t> scatter_idx = {1, 0, 1, 2};

  auto loss_fn = [&](const ModelParams &p) {
    ad::ParamBank bank(p);
    Var u = bank("u");
    Var x = ad::add_rowvec(ad::matmul(u, bank("w")), bank("b"));
    x = ad::silu(x);
    x = ad::softmax_rows(x);
    Var y = ad::gather_rows(ad::mul_colvec(u, bank("g")), gather_idx);
    y = ad::scatter_add_rows(y, scatter_idx, 4);
    Var z = ad::concat_cols({x, ad::sigmoid(u)});
    z = ad::concat_rows({ad::slice_rows(z, 0, 3), ad::slice_cols(z, 0, z.cols())});
    Var d = ad::sqrt_eps(ad::sum_cols(ad::mul(y, y)));
    Var inv = ad::recip(ad::add_scalar(d, 1.0));
    Var s = ad::add(ad::sum_all(z), ad::sum_all(ad::mul_colvec(y, inv)));
    Var t = ad::sum_all(ad::matmul_nt(x, x));
    return ad::add(ad::add(s, t), ad::sum_squares(ad::sub(y, y))).val().value();
  };

  auto graph_grads = [&]() {
    ad::ParamBank bank(params);
    Var u = bank("u");
    Var x = ad::add_rowvec(ad::matmul(u, bank("w")), bank("b"));
    x = ad::silu(x);
    x = ad::softmax_rows(x);
    Var y = ad::gather_rows(ad::mul_colvec(u, bank("g")), gather_idx);
    y = ad::scatter_add_rows(y, scatter_idx, 4);
    Var z = ad::concat_cols({x, ad::sigmoid(u)});
    z = ad::concat_rows({ad::slice_rows(z, 0, 3), ad::slice_cols(z, 0, z.cols())});
    Var d = ad::sqrt_eps(ad::sum_cols(ad::mul(y, y)));
    Var inv = ad::recip(ad::add_scalar(d, 1.0));
    Var s = ad::add(ad::sum_all(z), ad::sum_all(ad::mul_colvec(y, inv)));
    Var t = ad::sum_all(ad::matmul_nt(x, x));
    Var loss = ad::add(ad::add(s, t), ad::sum_squares(ad::sub(y, y)));
    return ad::backward(loss, params);
  }();

  GradMap fd = testing::fd_gradients(loss_fn, params);
  EXPECT_LT(testing::max_rel_error(graph_grads, fd), 1e-4);
}

TEST(Autograd, ParamBankReusesLeaves) {
  ModelParams params;
  params.insert("p", Tensor::scalar(3.0));
  ad::ParamBank bank(params);
  Var a = bank("p");
  Var b = bank("p");
  EXPECT_EQ(a.node().get(), b.node().get());
  // loss = p * p through two bank handles: gradient 2p, not split.
  GradMap grads = ad::backward(ad::sum_all(ad::mul(a, b)), params);
  EXPECT_DOUBLE_EQ(grads.at("p")[0], 6.0);
}

TEST(Autograd, FrozenBankProducesNoGradients) {
  ModelParams params;
  params.insert("p", Tensor::scalar(2.0));
  ad::ParamBank frozen(params, /*trainable=*/false);
  Var loss = ad::sum_squares(frozen("p"));
  EXPECT_FALSE(loss.requires_grad());
  GradMap grads = ad::backward(loss, params);
  EXPECT_DOUBLE_EQ(grads.at("p")[0], 0.0);
}

}  // namespace
}  // namespace scaffdiff

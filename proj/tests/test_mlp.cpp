#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/mlp.hpp"
#include "oracles.hpp"

using ginet::Activation;
using ginet::Mlp;

namespace {

oracle::NaiveMlp naive_copy(const Mlp& m) {
  oracle::NaiveMlp n;
  n.sigmoid = m.activation() == Activation::sigmoid;
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    const auto& W = m.weight(l);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(W.rows()), std::vector<double>(static_cast<std::size_t>(W.cols())));
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = W(r, c);
    n.weights.push_back(std::move(rows));
    n.biases.emplace_back(m.bias(l).data(), m.bias(l).data() + m.bias(l).size());
  }
  return n;
}

}  // namespace

TEST(Mlp, ZeroWeightsGiveOutputBias) {
  Mlp m = Mlp::zeros({3, 4, 2}, Activation::sigmoid);
  m.bias(1)(0) = 0.7;
  m.bias(1)(1) = -1.5;
  for (const auto& y : {std::vector<double>{0, 0, 0}, std::vector<double>{5, -3, 2}}) {
    const auto out = m.forward(y);
    EXPECT_EQ(out, (std::vector<double>{0.7, -1.5}));
  }
}

TEST(Mlp, SingleLayerIsAffine) {
  Mlp m = Mlp::zeros({2, 1}, Activation::rectifier);
  m.weight(0)(0, 0) = 2.0;
  m.weight(0)(0, 1) = -3.0;
  m.bias(0)(0) = 0.5;
  EXPECT_EQ(m.forward(std::vector<double>{1.0, 1.0}), std::vector<double>{-0.5});
  EXPECT_EQ(Mlp::identity(3).forward(std::vector<double>{-1, 2, -3}), (std::vector<double>{-1, 2, -3}));
}

TEST(Mlp, AgreesWithPlainLoops) {
  ginet::SplitMix64 rng(21);
  for (int t = 0; t < 20; ++t) {
    const Activation act = t % 2 ? Activation::sigmoid : Activation::rectifier;
    Mlp m = Mlp::random({3, 5, 4, 2}, act, rng);
    for (std::size_t l = 0; l < m.num_layers(); ++l)
      for (Eigen::Index r = 0; r < m.bias(l).size(); ++r) m.bias(l)(r) = rng.uniform(-1, 1);
    const auto ref = naive_copy(m);
    const auto y = oracle::random_vector(3, rng, -2, 2);
    const auto a = m.forward(y), b = ref(y);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(Mlp, ShapeErrors) {
  EXPECT_THROW(Mlp::zeros({3}, Activation::sigmoid), ginet::ShapeError);
  const Mlp m = Mlp::zeros({3, 2}, Activation::sigmoid);
  EXPECT_THROW(m.forward(std::vector<double>{1, 2}), ginet::ShapeError);
  std::vector<double> p(m.num_params() + 1);
  Mlp copy = m;
  EXPECT_THROW(copy.set_params(p), ginet::ShapeError);
}

TEST(Mlp, ParamsRoundTrip) {
  ginet::SplitMix64 rng(22);
  Mlp m = Mlp::random({2, 3, 1}, Activation::sigmoid, rng);
  auto p = m.params();
  EXPECT_EQ(p.size(), m.num_params());
  EXPECT_EQ(p.size(), 2u * 3 + 3 + 3 + 1);
  for (auto& v : p) v += 0.25;
  m.set_params(p);
  EXPECT_EQ(m.params(), p);
}

TEST(ConcatMlps, RunsSideBySide) {
  ginet::SplitMix64 rng(23);
  const Mlp a = Mlp::random({2, 3, 1}, Activation::sigmoid, rng);
  const Mlp b = Mlp::random({1, 4, 2}, Activation::sigmoid, rng);
  const Mlp c = ginet::concat_mlps(a, b);
  const std::vector<double> ya{0.3, -0.2}, yb{0.9};
  const auto oa = a.forward(ya), ob = b.forward(yb), oc = c.forward(std::vector<double>{0.3, -0.2, 0.9});
  ASSERT_EQ(oc.size(), 3u);
  EXPECT_NEAR(oc[0], oa[0], 1e-14);
  EXPECT_NEAR(oc[1], ob[0], 1e-14);
  EXPECT_NEAR(oc[2], ob[1], 1e-14);
  EXPECT_THROW(ginet::concat_mlps(a, Mlp::zeros({1, 1}, Activation::sigmoid)), ginet::ShapeError);
}

TEST(MlpTrain, PerfectNetworkStaysPerfect) {
  ginet::SplitMix64 rng(24);
  const Mlp truth = Mlp::random({2, 4, 1}, Activation::sigmoid, rng);
  Eigen::MatrixXd in(2, 64), tg(1, 64);
  for (int s = 0; s < 64; ++s) {
    in(0, s) = rng.uniform(-1, 1);
    in(1, s) = rng.uniform(-1, 1);
    tg(0, s) = truth.forward(std::vector<double>{in(0, s), in(1, s)})[0];
  }
  ginet::TrainConfig cfg;
  cfg.epochs = 50;
  const auto r = ginet::mlp_train(truth, in, tg, cfg);
  EXPECT_LE(r.max_abs_error, 1e-12);
  EXPECT_EQ(r.epochs_run, 50);
  EXPECT_EQ(r.loss_history.size(), 50u);
}

TEST(MlpTrain, FitsLinearTarget) {
  ginet::SplitMix64 rng(25);
  Eigen::MatrixXd in(2, 100), tg(1, 100);
  for (int s = 0; s < 100; ++s) {
    in(0, s) = rng.uniform(-1, 1);
    in(1, s) = rng.uniform(-1, 1);
    tg(0, s) = 0.5 * in(0, s) - 0.25 * in(1, s) + 0.1;
  }
  ginet::TrainConfig cfg;
  cfg.epochs = 3000;
  cfg.step_size = 0.1;
  const auto r = ginet::mlp_train(Mlp::zeros({2, 1}, Activation::sigmoid), in, tg, cfg);
  EXPECT_LT(r.max_abs_error, 1e-6);
  EXPECT_LT(r.loss_history.back(), r.loss_history.front());
}

TEST(MlpTrain, DivergenceReportsEpoch) {
  Eigen::MatrixXd in(1, 4), tg(1, 4);
  in << 1, 2, 3, 4;
  tg << 10, 20, 30, 40;
  ginet::TrainConfig cfg;
  cfg.epochs = 5000;
  cfg.step_size = 10.0;
  try {
    ginet::mlp_train(Mlp::zeros({1, 1}, Activation::sigmoid), in, tg, cfg);
    FAIL() << "expected divergence";
  } catch (const ginet::TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(MlpTrain, ShapeMismatchThrows) {
  Eigen::MatrixXd in(2, 3), tg(1, 4);
  in.setZero();
  tg.setZero();
  EXPECT_THROW(ginet::mlp_train(Mlp::zeros({2, 1}, Activation::sigmoid), in, tg, {}), ginet::ShapeError);
}

TEST(GradCheck, LinearNetwork) {
  ginet::SplitMix64 rng(26);
  const Mlp m = Mlp::random({3, 2}, Activation::sigmoid, rng);
  const auto r = ginet::grad_check(m, std::vector<double>{0.5, -1.0, 2.0}, std::vector<double>{1.0, -1.0});
  EXPECT_LE(r.max_relative_error, 1e-9);
  EXPECT_EQ(r.checked, m.num_params());
}

TEST(GradCheck, SigmoidNetwork) {
  ginet::SplitMix64 rng(27);
  for (int t = 0; t < 5; ++t) {
    const Mlp m = Mlp::random({3, 6, 5, 2}, Activation::sigmoid, rng);
    const auto r = ginet::grad_check(m, oracle::random_vector(3, rng), oracle::random_vector(2, rng));
    EXPECT_LE(r.max_relative_error, 1e-4);
    EXPECT_FALSE(r.non_smooth);
  }
}

TEST(GradCheck, RectifierAtKinkIsFlagged) {
  ginet::SplitMix64 rng(28);
  const Mlp m = Mlp::random({2, 3, 1}, Activation::rectifier, rng);
  const auto r = ginet::grad_check(m, std::vector<double>{0.0, 0.0}, std::vector<double>{1.0});
  EXPECT_TRUE(r.non_smooth);
  EXPECT_GT(r.skipped, 0u);
  EXPECT_LE(r.max_relative_error, 1e-6);
}

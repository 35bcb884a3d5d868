#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "nnddm/neural.hpp"

using namespace nnddm;

namespace {

Eigen::MatrixXd random_matrix(int r, int c, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = n(gen);
  return m;
}

// Central-difference gradient of the loss with respect to every parameter.
Gradients numeric_gradient(Network net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& T, LossReduction r) {
  Gradients g = Gradients::zeros_like(net);
  const double h = 1e-6;
  auto fd = [&](double& p) {
    const double keep = p;
    p = keep + h;
    const double up = loss(net.forward_batch(X), T, r);
    p = keep - h;
    const double down = loss(net.forward_batch(X), T, r);
    p = keep;
    return (up - down) / (2 * h);
  };
  for (Eigen::Index i = 0; i < net.W1.size(); ++i) g.W1.data()[i] = fd(net.W1.data()[i]);
  for (Eigen::Index i = 0; i < net.b1.size(); ++i) g.b1[i] = fd(net.b1[i]);
  for (Eigen::Index i = 0; i < net.W2.size(); ++i) g.W2.data()[i] = fd(net.W2.data()[i]);
  for (Eigen::Index i = 0; i < net.b2.size(); ++i) g.b2[i] = fd(net.b2[i]);
  return g;
}

double rel_diff(const Gradients& a, const Gradients& b) {
  const double num = (a.W1 - b.W1).squaredNorm() + (a.b1 - b.b1).squaredNorm() + (a.W2 - b.W2).squaredNorm() +
                     (a.b2 - b.b2).squaredNorm();
  const double den = b.W1.squaredNorm() + b.b1.squaredNorm() + b.W2.squaredNorm() + b.b2.squaredNorm();
  return std::sqrt(num / den);
}

}  // namespace

TEST(Activation, Examples) {
  const auto s = activation_eval(Activation::Sigmoid, 0.0);
  EXPECT_DOUBLE_EQ(s.value, 0.5);
  EXPECT_DOUBLE_EQ(s.derivative, 0.25);
  const auto r = activation_eval(Activation::ReLU, -1.5);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.derivative, 0.0);
  EXPECT_EQ(activation_eval(Activation::ReLU, 0.0).derivative, 0.0);
  EXPECT_NEAR(activation_eval(Activation::CELU, -1.0).value, std::exp(-1.0) - 1.0, 1e-15);
  EXPECT_NEAR(activation_eval(Activation::CELU, -1.0).value, -0.63212, 1e-5);
  EXPECT_NEAR(activation_eval(Activation::SELU, 1.0).value, 1.0507009873554805, 1e-15);
  EXPECT_NEAR(activation_eval(Activation::LogSigmoid, 0.0).value, -std::log(2.0), 1e-15);
}

TEST(Activation, NoOverflowAtExtremes) {
  for (auto a : kAllActivations)
    for (double x : {-800.0, -50.0, 50.0, 800.0}) {
      const auto v = activation_eval(a, x);
      EXPECT_TRUE(std::isfinite(v.value)) << to_string(a) << " " << x;
      EXPECT_TRUE(std::isfinite(v.derivative)) << to_string(a) << " " << x;
    }
  EXPECT_DOUBLE_EQ(activation_eval(Activation::Sigmoid, 800.0).value, 1.0);
  EXPECT_DOUBLE_EQ(activation_eval(Activation::Sigmoid, -800.0).value, 0.0);
  EXPECT_DOUBLE_EQ(activation_eval(Activation::LogSigmoid, -800.0).value, -800.0);
}

TEST(Activation, DerivativeMatchesFiniteDifference) {
  for (auto a : kAllActivations)
    for (double x : {-3.1, -0.7, 0.4, 2.2}) {
      const double h = 1e-6;
      const double fd = (activation_eval(a, x + h).value - activation_eval(a, x - h).value) / (2 * h);
      EXPECT_NEAR(activation_eval(a, x).derivative, fd, 1e-8) << to_string(a) << " " << x;
    }
}

TEST(Activation, NamesRoundTrip) {
  for (auto a : kAllActivations) EXPECT_EQ(parse_activation(to_string(a)), a);
  EXPECT_THROW(parse_activation("swish"), std::invalid_argument);
}

TEST(Forward, ZeroNetwork) {
  const Network net = Network::zeros({16, 500, 8, Activation::Sigmoid});
  const auto y = net.forward(Eigen::VectorXd::Ones(16));
  EXPECT_EQ(y.norm(), 0.0);
}

TEST(Forward, HalfOfRowSums) {
  Network net = Network::zeros({3, 4, 2, Activation::Sigmoid});
  net.W2 << 1, 2, 3, 4, -1, 0.5, 0, 0;
  const auto y = net.forward(Eigen::Vector3d(0.3, -2.0, 7.0));
  EXPECT_DOUBLE_EQ(y[0], 0.5 * 10.0);
  EXPECT_DOUBLE_EQ(y[1], 0.5 * -0.5);
}

TEST(Forward, HandComputedTwoThreeOne) {
  Network net = Network::zeros({2, 3, 1, Activation::Tanh});
  net.W1 << 0.5, -1.0, 0.0, 2.0, 1.0, 1.0;
  net.b1 << 0.1, 0.0, -0.2;
  net.W2 << 1.0, -1.0, 0.5;
  net.b2 << 0.3;
  const double x0 = 0.4, x1 = -0.6;
  const double h0 = std::tanh(0.5 * x0 - 1.0 * x1 + 0.1);
  const double h1 = std::tanh(2.0 * x1);
  const double h2 = std::tanh(x0 + x1 - 0.2);
  const auto y = net.forward(Eigen::Vector2d(x0, x1));
  EXPECT_NEAR(y[0], h0 - h1 + 0.5 * h2 + 0.3, 1e-15);
  EXPECT_THROW(net.forward(Eigen::Vector3d(1, 2, 3)), std::invalid_argument);
}

TEST(Loss, Examples) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(8, 1);
  t(0, 0) = 1.0;
  const Eigen::MatrixXd y = Eigen::MatrixXd::Zero(8, 1);
  EXPECT_DOUBLE_EQ(loss(y, t, LossReduction::Mean), 0.125);
  EXPECT_DOUBLE_EQ(loss(y, t, LossReduction::HalfSum), 0.5);
  EXPECT_EQ(loss(t, t), 0.0);
  EXPECT_THROW(loss(Eigen::MatrixXd(8, 0), Eigen::MatrixXd(8, 0)), std::invalid_argument);
  EXPECT_THROW(loss(y, Eigen::MatrixXd::Zero(7, 1)), std::invalid_argument);
}

TEST(Backward, ZeroAtExactFit) {
  std::mt19937_64 gen(1);
  const Network net = init_weights({4, 6, 3, Activation::Sigmoid}, 3);
  const Eigen::MatrixXd X = random_matrix(4, 5, gen);
  const auto g = backward(net, X, net.forward_batch(X));
  EXPECT_EQ(g.loss, 0.0);
  EXPECT_EQ(g.W1.norm() + g.b1.norm() + g.W2.norm() + g.b2.norm(), 0.0);
  EXPECT_THROW(backward(net, Eigen::MatrixXd(4, 0), Eigen::MatrixXd(3, 0)), std::invalid_argument);
  EXPECT_THROW(backward(net, X, Eigen::MatrixXd::Zero(3, 4)), std::invalid_argument);
}

TEST(Backward, GradientCheckAllActivations) {
  for (auto a : kAllActivations)
    for (auto r : {LossReduction::Mean, LossReduction::HalfSum}) {
      std::mt19937_64 gen(17);
      const Network net = init_weights({5, 7, 3, a}, 9);
      const Eigen::MatrixXd X = random_matrix(5, 6, gen), T = random_matrix(3, 6, gen);
      const auto g = backward(net, X, T, r);
      EXPECT_NEAR(g.loss, loss(net.forward_batch(X), T, r), 1e-14);
      EXPECT_LT(rel_diff(g, numeric_gradient(net, X, T, r)), 1e-5) << to_string(a);
    }
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Network net = init_weights({2, 3, 1, Activation::Sigmoid}, 4);
  const Network before = net;
  auto s = AdamState::for_network(net, 1e-3);
  adam_step(s, net, Gradients::zeros_like(net));
  EXPECT_TRUE(net.W1 == before.W1 && net.b1 == before.b1 && net.W2 == before.W2 && net.b2 == before.b2);
}

TEST(Adam, TwoStepScalarOracle) {
  Network net = Network::zeros({1, 1, 1, Activation::Sigmoid});
  net.W1(0, 0) = 1.0;
  auto s = AdamState::for_network(net, 1e-5);
  Gradients g = Gradients::zeros_like(net);

  g.W1(0, 0) = 2.0;
  adam_step(s, net, g);
  EXPECT_NEAR(s.m1.W1(0, 0), 0.2, 1e-15);
  EXPECT_NEAR(s.m2.W1(0, 0), 0.004, 1e-15);
  const double w1 = 1.0 - 1e-5 * (0.2 / 0.1) / std::sqrt(0.004 / 0.001 + 1e-8);
  EXPECT_NEAR(net.W1(0, 0), w1, 1e-12);
  EXPECT_NEAR(net.W1(0, 0), 0.99999, 1e-9);

  g.W1(0, 0) = -1.0;
  adam_step(s, net, g);
  const double m1 = 0.9 * 0.2 + 0.1 * -1.0;
  const double m2 = 0.999 * 0.004 + 0.001 * 1.0;
  const double w2 = w1 - 1e-5 * (m1 / (1 - 0.81)) / std::sqrt(m2 / (1 - 0.998001) + 1e-8);
  EXPECT_NEAR(s.m1.W1(0, 0), m1, 1e-15);
  EXPECT_NEAR(s.m2.W1(0, 0), m2, 1e-15);
  EXPECT_NEAR(net.W1(0, 0), w2, 1e-12);
  EXPECT_EQ(s.step, 2);
}

TEST(Init, DeterministicAndBounded) {
  const NetworkShape shape;
  const Network a = init_weights(shape, 7), b = init_weights(shape, 7), c = init_weights(shape, 8);
  EXPECT_TRUE(a.W1 == b.W1 && a.b1 == b.b1 && a.W2 == b.W2 && a.b2 == b.b2);
  EXPECT_FALSE(a.W1 == c.W1);
  EXPECT_LE(a.W1.cwiseAbs().maxCoeff(), 0.25);
  EXPECT_LE(a.b1.cwiseAbs().maxCoeff(), 0.25);
  EXPECT_LE(a.W2.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(500.0));
  EXPECT_GT(a.W1.cwiseAbs().maxCoeff(), 0.24);
  EXPECT_NEAR(a.W1.mean(), 0.0, 0.01);
}

TEST(Train, OnePairOverfit) {
  std::mt19937_64 gen(2);
  const Eigen::MatrixXd X = random_matrix(16, 1, gen), T = random_matrix(8, 1, gen);
  Network net = init_weights(NetworkShape{}, 5);
  auto adam = AdamState::for_network(net);
  TrainConfig cfg;
  cfg.tol = 1e-8;
  cfg.max_iter = 20000;
  cfg.schedule = {{1e-3, 20000}};
  const auto rep = train(net, adam, X, T, X, T, cfg);
  EXPECT_TRUE(rep.reached_tol);
  EXPECT_LT(loss(net.forward_batch(X), T), 1e-6);
}

TEST(Train, UnreachableToleranceRunsToMaxIter) {
  std::mt19937_64 gen(3);
  const Eigen::MatrixXd X = random_matrix(4, 3, gen), T = random_matrix(2, 3, gen);
  Network net = init_weights({4, 5, 2, Activation::Sigmoid}, 1);
  auto adam = AdamState::for_network(net);
  TrainConfig cfg;
  cfg.tol = -std::numeric_limits<double>::infinity();
  cfg.max_iter = 37;
  cfg.schedule = {{1e-3, 30}, {1e-4, 30}};
  const auto rep = train(net, adam, X, T, X, T, cfg);
  EXPECT_EQ(rep.iterations, 37);
  EXPECT_EQ(rep.train_loss.size(), 37u);
  EXPECT_EQ(adam.lr, 1e-4);
  EXPECT_FALSE(rep.reached_tol);
}

TEST(Train, StopsAtTolerance) {
  std::mt19937_64 gen(3);
  const Eigen::MatrixXd X = random_matrix(4, 3, gen), T = random_matrix(2, 3, gen);
  Network net = init_weights({4, 5, 2, Activation::Sigmoid}, 1);
  auto adam = AdamState::for_network(net);
  TrainConfig cfg;
  cfg.tol = std::numeric_limits<double>::infinity();
  const auto rep = train(net, adam, X, T, X, T, cfg);
  EXPECT_EQ(rep.iterations, 0);
  cfg.tol = 0.5 * loss(net.forward_batch(X), T);
  cfg.max_iter = 100000;
  cfg.schedule = {{1e-2, 100000}};
  const auto rep2 = train(net, adam, X, T, X, T, cfg);
  EXPECT_TRUE(rep2.reached_tol);
  EXPECT_LE(rep2.final_test_loss(), cfg.tol);
  EXPECT_GT(rep2.test_loss[rep2.test_loss.size() - 2], cfg.tol);
}

TEST(Train, ResumingEqualsOneRun) {
  std::mt19937_64 gen(4);
  const Eigen::MatrixXd X = random_matrix(6, 10, gen), T = random_matrix(3, 10, gen);
  TrainConfig cfg;
  cfg.tol = 0.0;
  cfg.max_iter = 40;
  cfg.schedule = {{1e-3, 40}};
  Network a = init_weights({6, 9, 3, Activation::Sigmoid}, 2), b = a;
  auto sa = AdamState::for_network(a), sb = AdamState::for_network(b);
  const auto full = train(a, sa, X, T, X, T, cfg);
  cfg.max_iter = 20;
  cfg.schedule = {{1e-3, 20}};
  train(b, sb, X, T, X, T, cfg);
  const auto second = train(b, sb, X, T, X, T, cfg);
  EXPECT_TRUE(a.W1 == b.W1 && a.W2 == b.W2 && a.b1 == b.b1 && a.b2 == b.b2);
  EXPECT_EQ(second.train_loss.back(), full.train_loss.back());
}

TEST(Train, Deterministic) {
  std::mt19937_64 gen(4);
  const Eigen::MatrixXd X = random_matrix(6, 10, gen), T = random_matrix(3, 10, gen);
  TrainConfig cfg;
  cfg.tol = 0.0;
  cfg.max_iter = 25;
  cfg.schedule = {{1e-3, 25}};
  Network a = init_weights({6, 9, 3, Activation::ReLU}, 2), b = init_weights({6, 9, 3, Activation::ReLU}, 2);
  auto sa = AdamState::for_network(a), sb = AdamState::for_network(b);
  EXPECT_EQ(train(a, sa, X, T, X, T, cfg).test_loss, train(b, sb, X, T, X, T, cfg).test_loss);
}

TEST(Train, NonFiniteLossThrows) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(2, 2), T = Eigen::MatrixXd::Zero(1, 2);
  T(0, 1) = std::numeric_limits<double>::quiet_NaN();
  Network net = init_weights({2, 3, 1, Activation::Sigmoid}, 0);
  auto adam = AdamState::for_network(net);
  try {
    train(net, adam, X, T, X, T, TrainConfig{});
    FAIL() << "expected TrainingDivergedError";
  } catch (const TrainingDivergedError& e) {
    EXPECT_EQ(e.iteration(), 0);
  }
}

TEST(ModelFile, RoundTripIsExact) {
  const Network a = init_weights({16, 50, 8, Activation::CELU}, 11);
  std::stringstream ss;
  save_model(ss, a);
  const Network b = load_model(ss);
  EXPECT_EQ(b.shape, a.shape);
  EXPECT_TRUE(a.W1 == b.W1 && a.b1 == b.b1 && a.W2 == b.W2 && a.b2 == b.b2);
}

TEST(ModelFile, MalformedInputReportsLine) {
  const Network a = init_weights({2, 3, 1, Activation::Sigmoid}, 1);
  std::stringstream ss;
  save_model(ss, a);
  std::string text = ss.str();
  // line 5 is the first row of W1
  std::vector<std::string> lines;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) lines.push_back(l);
  lines[4] = "0.5 oops";
  std::string broken;
  for (const auto& l : lines) broken += l + "\n";
  std::istringstream in(broken);
  try {
    load_model(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5);
  }
  std::istringstream truncated(text.substr(0, text.size() / 2));
  EXPECT_THROW(load_model(truncated), ParseError);
  std::istringstream wrong_version("nnddm-model 2\n");
  EXPECT_THROW(load_model(wrong_version), ParseError);
}

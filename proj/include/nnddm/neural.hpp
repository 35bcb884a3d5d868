#pragma once

// Two-layer feedforward network (affine -> activation -> affine), MSE loss,
// exact backpropagation, Adam, and the full-batch training loop.

#include <Eigen/Dense>

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nnddm/errors.hpp"

namespace nnddm {

enum class Activation { Sigmoid, ReLU, Tanh, LogSigmoid, CELU, SELU };

inline constexpr std::array<Activation, 6> kAllActivations{Activation::Sigmoid, Activation::ReLU,
                                                           Activation::Tanh,    Activation::LogSigmoid,
                                                           Activation::CELU,    Activation::SELU};

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::Sigmoid: return "sigmoid";
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::LogSigmoid: return "logsigmoid";
    case Activation::CELU: return "celu";
    case Activation::SELU: return "selu";
  }
  return "?";
}

inline Activation parse_activation(std::string_view s) {
  for (auto a : kAllActivations)
    if (s == to_string(a)) return a;
  throw std::invalid_argument("unknown activation '" + std::string(s) + "'");
}

struct ActivationValue {
  double value;
  double derivative;
};

inline constexpr double kSeluScale = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

/// Activation value and derivative. ReLU'(0) is taken as 0.
inline ActivationValue activation_eval(Activation kind, double x) {
  switch (kind) {
    case Activation::Sigmoid: {
      // branch on sign so exp never overflows
      const double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      return {s, s * (1.0 - s)};
    }
    case Activation::ReLU: return x > 0 ? ActivationValue{x, 1.0} : ActivationValue{0.0, 0.0};
    case Activation::Tanh: {
      const double t = std::tanh(x);
      return {t, 1.0 - t * t};
    }
    case Activation::LogSigmoid: {
      // log(1/(1+e^-x)) = -softplus(-x); derivative 1 - sigmoid(x)
      const double v = x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
      const double d = x >= 0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
      return {v, d};
    }
    case Activation::CELU:
      return x > 0 ? ActivationValue{x, 1.0} : ActivationValue{std::expm1(x), std::exp(x)};
    case Activation::SELU:
      return x > 0 ? ActivationValue{kSeluScale * x, kSeluScale}
                   : ActivationValue{kSeluScale * kSeluAlpha * std::expm1(x), kSeluScale * kSeluAlpha * std::exp(x)};
  }
  return {0.0, 0.0};
}

struct NetworkShape {
  int d_in = 16;
  int d_hidden = 500;
  int d_out = 8;
  Activation activation = Activation::Sigmoid;

  bool operator==(const NetworkShape&) const = default;
};

struct Network {
  NetworkShape shape;
  Eigen::MatrixXd W1;  // d_hidden x d_in
  Eigen::VectorXd b1;
  Eigen::MatrixXd W2;  // d_out x d_hidden
  Eigen::VectorXd b2;

  static Network zeros(const NetworkShape& s) {
    return {s, Eigen::MatrixXd::Zero(s.d_hidden, s.d_in), Eigen::VectorXd::Zero(s.d_hidden),
            Eigen::MatrixXd::Zero(s.d_out, s.d_hidden), Eigen::VectorXd::Zero(s.d_out)};
  }

  /// Outputs for a batch stored column-wise (d_in x N -> d_out x N).
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& X) const {
    if (X.rows() != shape.d_in)
      throw std::invalid_argument("forward: expected " + std::to_string(shape.d_in) + " inputs, got " +
                                  std::to_string(X.rows()));
    Eigen::MatrixXd Z = W1 * X;
    Z.colwise() += b1;
    const Activation a = shape.activation;
    Z = Z.unaryExpr([a](double z) { return activation_eval(a, z).value; });
    Eigen::MatrixXd Y = W2 * Z;
    Y.colwise() += b2;
    return Y;
  }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const { return forward_batch(x); }

  std::vector<double> predict(std::span<const double> x) const {
    const Eigen::VectorXd y = forward(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
    return {y.data(), y.data() + y.size()};
  }
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias of a
/// layer, drawn from mt19937_64(seed) as u = (draw >> 11) * 2^-53 in the order
/// W1 (row-major), b1, W2 (row-major), b2.
inline Network init_weights(const NetworkShape& shape, std::uint64_t seed) {
  if (shape.d_in < 1 || shape.d_hidden < 1 || shape.d_out < 1)
    throw std::invalid_argument("init_weights: layer sizes must be positive");
  std::mt19937_64 gen(seed);
  auto uniform = [&](double bound) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return bound * (2.0 * u - 1.0);
  };
  Network net = Network::zeros(shape);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(shape.d_in));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(shape.d_hidden));
  for (int r = 0; r < shape.d_hidden; ++r)
    for (int c = 0; c < shape.d_in; ++c) net.W1(r, c) = uniform(bound1);
  for (int r = 0; r < shape.d_hidden; ++r) net.b1[r] = uniform(bound1);
  for (int r = 0; r < shape.d_out; ++r)
    for (int c = 0; c < shape.d_hidden; ++c) net.W2(r, c) = uniform(bound2);
  for (int r = 0; r < shape.d_out; ++r) net.b2[r] = uniform(bound2);
  return net;
}

enum class LossReduction {
  Mean,     // (1 / (N d_out)) sum of squared errors
  HalfSum,  // 1/2 sum_n ||t_n - y_n||^2
};

inline double loss(const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& targets, LossReduction r = LossReduction::Mean) {
  if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols())
    throw std::invalid_argument("loss: output and target shapes differ");
  if (outputs.cols() == 0) throw std::invalid_argument("loss: empty batch");
  const double sq = (outputs - targets).squaredNorm();
  return r == LossReduction::Mean ? sq / static_cast<double>(outputs.size()) : 0.5 * sq;
}

/// Same layout as the network parameters.
struct Gradients {
  Eigen::MatrixXd W1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd W2;
  Eigen::VectorXd b2;
  double loss = 0.0;

  static Gradients zeros_like(const Network& n) {
    return {Eigen::MatrixXd::Zero(n.W1.rows(), n.W1.cols()), Eigen::VectorXd::Zero(n.b1.size()),
            Eigen::MatrixXd::Zero(n.W2.rows(), n.W2.cols()), Eigen::VectorXd::Zero(n.b2.size()), 0.0};
  }
};

/// Exact gradient of the batch loss (samples column-wise). Also fills `loss`.
inline Gradients backward(const Network& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& T,
                          LossReduction r = LossReduction::Mean) {
  if (X.cols() == 0) throw std::invalid_argument("backward: empty batch");
  if (X.rows() != net.shape.d_in || T.rows() != net.shape.d_out || X.cols() != T.cols())
    throw std::invalid_argument("backward: batch shape does not match the network");
  Eigen::MatrixXd Z = net.W1 * X;
  Z.colwise() += net.b1;
  Eigen::MatrixXd H(Z.rows(), Z.cols()), dH(Z.rows(), Z.cols());
  for (Eigen::Index j = 0; j < Z.cols(); ++j)
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
      const auto a = activation_eval(net.shape.activation, Z(i, j));
      H(i, j) = a.value;
      dH(i, j) = a.derivative;
    }
  Eigen::MatrixXd Y = net.W2 * H;
  Y.colwise() += net.b2;
  const Eigen::MatrixXd R = Y - T;
  const double scale = r == LossReduction::Mean ? 2.0 / static_cast<double>(R.size()) : 1.0;
  const Eigen::MatrixXd dY = scale * R;
  Gradients g;
  g.loss = r == LossReduction::Mean ? R.squaredNorm() / static_cast<double>(R.size()) : 0.5 * R.squaredNorm();
  g.W2.noalias() = dY * H.transpose();
  g.b2 = dY.rowwise().sum();
  const Eigen::MatrixXd dZ = (net.W2.transpose() * dY).cwiseProduct(dH);
  g.W1.noalias() = dZ * X.transpose();
  g.b1 = dZ.rowwise().sum();
  return g;
}

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
  double lr = 1e-5;
  Gradients m1;
  Gradients m2;
  long step = 0;

  static AdamState for_network(const Network& net, double lr = 1e-5) {
    AdamState s;
    s.lr = lr;
    s.m1 = Gradients::zeros_like(net);
    s.m2 = Gradients::zeros_like(net);
    return s;
  }
};

/// One Adam update: m1 <- b1 m1 + (1-b1) g, m2 <- b2 m2 + (1-b2) g^2,
/// bias correction with the incremented step count, x <- x - lr m1^ / sqrt(m2^ + eps).
inline void adam_step(AdamState& s, Network& net, const Gradients& g) {
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  auto update = [&](auto& param, auto& m1, auto& m2, const auto& grad) {
    m1 = s.beta1 * m1 + (1.0 - s.beta1) * grad;
    m2 = s.beta2 * m2 + (1.0 - s.beta2) * grad.cwiseProduct(grad);
    param.array() -= s.lr * (m1.array() / c1) / ((m2.array() / c2) + s.eps_hat).sqrt();
  };
  update(net.W1, s.m1.W1, s.m2.W1, g.W1);
  update(net.b1, s.m1.b1, s.m2.b1, g.b1);
  update(net.W2, s.m1.W2, s.m2.W2, g.W2);
  update(net.b2, s.m1.b2, s.m2.b2, g.b2);
}

struct LrStage {
  double lr = 1e-5;
  long budget = 20000;
};

struct TrainConfig {
  double tol = 3e-3;
  long max_iter = 20000;
  std::vector<LrStage> schedule{{1e-5, 20000}};
  std::uint64_t seed = 0;
  LossReduction reduction = LossReduction::Mean;
};

struct TrainReport {
  std::vector<double> train_loss;  // before the step of each iteration
  std::vector<double> test_loss;
  long iterations = 0;
  double wall_seconds = 0.0;
  bool reached_tol = false;

  double final_test_loss() const {
    return test_loss.empty() ? std::numeric_limits<double>::infinity() : test_loss.back();
  }
};

/// Full-batch Adam. Per iteration: train loss and gradient, test loss (both
/// at the current weights), then the step. Stops once iterations reach
/// max_iter, the schedule is exhausted, or a test loss <= tol was seen.
/// The optimizer state is passed in, so training can be resumed.
inline TrainReport train(Network& net, AdamState& adam, const Eigen::MatrixXd& X_train, const Eigen::MatrixXd& T_train,
                         const Eigen::MatrixXd& X_test, const Eigen::MatrixXd& T_test, const TrainConfig& cfg) {
  if (X_train.cols() == 0 || X_test.cols() == 0) throw std::invalid_argument("train: empty data set");
  const auto start = std::chrono::steady_clock::now();
  TrainReport rep;
  double loss_test = std::numeric_limits<double>::infinity();
  long total = 0;
  for (const auto& stage : cfg.schedule) {
    adam.lr = stage.lr;
    for (long it = 0; it < stage.budget && total < cfg.max_iter && loss_test > cfg.tol; ++it, ++total) {
      const Gradients g = backward(net, X_train, T_train, cfg.reduction);
      loss_test = loss(net.forward_batch(X_test), T_test, cfg.reduction);
      if (!std::isfinite(g.loss) || !std::isfinite(loss_test))
        throw TrainingDivergedError("training diverged at iteration " + std::to_string(total), total);
      rep.train_loss.push_back(g.loss);
      rep.test_loss.push_back(loss_test);
      adam_step(adam, net, g);
    }
  }
  rep.iterations = total;
  rep.reached_tol = loss_test <= cfg.tol;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Model file
//
//   nnddm-model 1
//   shape <d_in> <d_hidden> <d_out>
//   activation <name>
//   W1 <rows> <cols>      followed by one line per row
//   b1 <n>                followed by one line
//   W2 <rows> <cols>
//   b2 <n>
//
// Numbers are written with 17 significant digits, so a save/load round trip
// is exact.

namespace detail {

inline void write_row(std::ostream& os, const double* v, Eigen::Index n) {
  char buf[32];
  for (Eigen::Index i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    if (i) os << ' ';
    os << buf;
  }
  os << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  std::vector<std::string> tokens() {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_no_;
      std::istringstream ss(line);
      std::vector<std::string> out;
      for (std::string t; ss >> t;) out.push_back(t);
      if (!out.empty()) return out;
    }
    ++line_no_;
    throw ParseError("unexpected end of file", line_no_);
  }

  long line() const { return line_no_; }

  double number(const std::string& s) const {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError("bad number '" + s + "'", line_no_);
    return v;
  }

  long integer(const std::string& s) const {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError("bad integer '" + s + "'", line_no_);
    return v;
  }

 private:
  std::istream& is_;
  long line_no_ = 0;
};

inline void read_matrix(LineReader& in, const char* name, Eigen::MatrixXd& m, long rows, long cols) {
  auto head = in.tokens();
  if (head.size() != 3 || head[0] != name || in.integer(head[1]) != rows || in.integer(head[2]) != cols)
    throw ParseError(std::string("expected '") + name + " " + std::to_string(rows) + " " + std::to_string(cols) + "'",
                     in.line());
  m.resize(rows, cols);
  for (long r = 0; r < rows; ++r) {
    auto t = in.tokens();
    if (static_cast<long>(t.size()) != cols) throw ParseError(std::string(name) + ": wrong row length", in.line());
    for (long c = 0; c < cols; ++c) m(r, c) = in.number(t[c]);
  }
}

inline void read_vector(LineReader& in, const char* name, Eigen::VectorXd& v, long n) {
  auto head = in.tokens();
  if (head.size() != 2 || head[0] != name || in.integer(head[1]) != n)
    throw ParseError(std::string("expected '") + name + " " + std::to_string(n) + "'", in.line());
  auto t = in.tokens();
  if (static_cast<long>(t.size()) != n) throw ParseError(std::string(name) + ": wrong length", in.line());
  v.resize(n);
  for (long i = 0; i < n; ++i) v[i] = in.number(t[i]);
}

}  // namespace detail

inline void save_model(std::ostream& os, const Network& net) {
  os << "nnddm-model 1\n";
  os << "shape " << net.shape.d_in << ' ' << net.shape.d_hidden << ' ' << net.shape.d_out << '\n';
  os << "activation " << to_string(net.shape.activation) << '\n';
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w1 = net.W1, w2 = net.W2;
  os << "W1 " << w1.rows() << ' ' << w1.cols() << '\n';
  for (Eigen::Index r = 0; r < w1.rows(); ++r) detail::write_row(os, w1.row(r).data(), w1.cols());
  os << "b1 " << net.b1.size() << '\n';
  detail::write_row(os, net.b1.data(), net.b1.size());
  os << "W2 " << w2.rows() << ' ' << w2.cols() << '\n';
  for (Eigen::Index r = 0; r < w2.rows(); ++r) detail::write_row(os, w2.row(r).data(), w2.cols());
  os << "b2 " << net.b2.size() << '\n';
  detail::write_row(os, net.b2.data(), net.b2.size());
}

inline Network load_model(std::istream& is) {
  detail::LineReader in(is);
  auto t = in.tokens();
  if (t.size() != 2 || t[0] != "nnddm-model") throw ParseError("missing 'nnddm-model' header", in.line());
  if (t[1] != "1") throw ParseError("unsupported model version " + t[1], in.line());
  NetworkShape shape;
  t = in.tokens();
  if (t.size() != 4 || t[0] != "shape") throw ParseError("expected 'shape <in> <hidden> <out>'", in.line());
  shape.d_in = static_cast<int>(in.integer(t[1]));
  shape.d_hidden = static_cast<int>(in.integer(t[2]));
  shape.d_out = static_cast<int>(in.integer(t[3]));
  if (shape.d_in < 1 || shape.d_hidden < 1 || shape.d_out < 1) throw ParseError("layer sizes must be positive", in.line());
  t = in.tokens();
  if (t.size() != 2 || t[0] != "activation") throw ParseError("expected 'activation <name>'", in.line());
  try {
    shape.activation = parse_activation(t[1]);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), in.line());
  }
  Network net = Network::zeros(shape);
  detail::read_matrix(in, "W1", net.W1, shape.d_hidden, shape.d_in);
  detail::read_vector(in, "b1", net.b1, shape.d_hidden);
  detail::read_matrix(in, "W2", net.W2, shape.d_out, shape.d_hidden);
  detail::read_vector(in, "b2", net.b2, shape.d_out);
  return net;
}

/// Loss-curve CSV: iteration,train_loss,test_loss.
inline void write_loss_curve(std::ostream& os, const TrainReport& rep) {
  os << "iteration,train_loss,test_loss\n";
  char buf[96];
  for (std::size_t i = 0; i < rep.train_loss.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, rep.train_loss[i], rep.test_loss[i]);
    os << buf;
  }
}

}  // namespace nnddm

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/rng.hpp"

namespace ginet {

enum class Activation { rectifier, sigmoid };

inline std::string to_string(Activation a) { return a == Activation::rectifier ? "rectifier" : "sigmoid"; }

inline Activation parse_activation(const std::string& s) {
  if (s == "rectifier" || s == "relu") return Activation::rectifier;
  if (s == "sigmoid" || s == "logistic") return Activation::sigmoid;
  throw ParseError("unknown activation '" + s + "'", 0);
}

inline double activate(Activation a, double z) {
  return a == Activation::rectifier ? (z > 0.0 ? z : 0.0) : 1.0 / (1.0 + std::exp(-z));
}

/// Fully connected network: affine layers with `activation` between them and
/// none after the last. Weights are (out x in).
class Mlp {
 public:
  Mlp() = default;

  static Mlp zeros(const std::vector<int>& widths, Activation act) {
    if (widths.size() < 2) throw ShapeError("an MLP needs at least input and output widths");
    Mlp m;
    m.activation_ = act;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      if (widths[i] < 0 || widths[i + 1] < 0) throw ShapeError("MLP widths must be nonnegative");
      m.weights_.push_back(Eigen::MatrixXd::Zero(widths[i + 1], widths[i]));
      m.biases_.push_back(Eigen::VectorXd::Zero(widths[i + 1]));
    }
    return m;
  }

  /// Glorot-uniform weights, zero biases.
  static Mlp random(const std::vector<int>& widths, Activation act, SplitMix64& rng) {
    Mlp m = zeros(widths, act);
    for (auto& W : m.weights_) {
      const double limit = std::sqrt(6.0 / static_cast<double>(W.rows() + W.cols()));
      for (Eigen::Index c = 0; c < W.cols(); ++c)
        for (Eigen::Index r = 0; r < W.rows(); ++r) W(r, c) = rng.uniform(-limit, limit);
    }
    return m;
  }

  /// The exact identity map on R^width (a single linear layer).
  static Mlp identity(int width) {
    Mlp m = zeros({width, width}, Activation::rectifier);
    m.weights_[0].setIdentity();
    return m;
  }

  int input_width() const { return weights_.empty() ? 0 : static_cast<int>(weights_.front().cols()); }
  int output_width() const { return weights_.empty() ? 0 : static_cast<int>(weights_.back().rows()); }
  std::size_t num_layers() const noexcept { return weights_.size(); }
  Activation activation() const noexcept { return activation_; }

  std::vector<int> widths() const {
    std::vector<int> w;
    if (weights_.empty()) return w;
    w.push_back(input_width());
    for (const auto& W : weights_) w.push_back(static_cast<int>(W.rows()));
    return w;
  }

  Eigen::MatrixXd& weight(std::size_t layer) { return weights_.at(layer); }
  const Eigen::MatrixXd& weight(std::size_t layer) const { return weights_.at(layer); }
  Eigen::VectorXd& bias(std::size_t layer) { return biases_.at(layer); }
  const Eigen::VectorXd& bias(std::size_t layer) const { return biases_.at(layer); }

  std::size_t num_params() const {
    std::size_t total = 0;
    for (std::size_t i = 0; i < weights_.size(); ++i) total += static_cast<std::size_t>(weights_[i].size() + biases_[i].size());
    return total;
  }

  /// Parameters flattened layer by layer: weights (column-major), then bias.
  std::vector<double> params() const {
    std::vector<double> p;
    p.reserve(num_params());
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      p.insert(p.end(), weights_[i].data(), weights_[i].data() + weights_[i].size());
      p.insert(p.end(), biases_[i].data(), biases_[i].data() + biases_[i].size());
    }
    return p;
  }

  void set_params(std::span<const double> p) {
    if (p.size() != num_params()) throw ShapeError("set_params: wrong parameter count");
    std::size_t at = 0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      std::copy_n(p.data() + at, weights_[i].size(), weights_[i].data());
      at += static_cast<std::size_t>(weights_[i].size());
      std::copy_n(p.data() + at, biases_[i].size(), biases_[i].data());
      at += static_cast<std::size_t>(biases_[i].size());
    }
  }

  bool all_finite() const {
    for (std::size_t i = 0; i < weights_.size(); ++i)
      if (!weights_[i].allFinite() || !biases_[i].allFinite()) return false;
    return true;
  }

  /// Column-batched forward pass: inputs are (input_width x N).
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const {
    if (inputs.rows() != input_width())
      throw ShapeError("MLP forward: input width " + std::to_string(inputs.rows()) + " != " + std::to_string(input_width()));
    Eigen::MatrixXd h = inputs;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      Eigen::MatrixXd z = weights_[i] * h;
      z.colwise() += biases_[i];
      if (i + 1 < weights_.size()) apply_activation(z);
      h = std::move(z);
    }
    return h;
  }

  std::vector<double> forward(std::span<const double> y) const {
    if (static_cast<int>(y.size()) != input_width())
      throw ShapeError("MLP forward: input width " + std::to_string(y.size()) + " != " + std::to_string(input_width()));
    Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      Eigen::VectorXd z = weights_[i] * h + biases_[i];
      if (i + 1 < weights_.size()) apply_activation(z);
      h = std::move(z);
    }
    return {h.data(), h.data() + h.size()};
  }

  /// Gradient of sum_s w * ||m(y_s) - t_s||^2 with respect to params(), for
  /// column batches. Returns the loss value as well.
  double loss_and_gradient(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets, double weight,
                           std::vector<double>& grad) const {
    const std::size_t L = weights_.size();
    std::vector<Eigen::MatrixXd> acts(L + 1);  // acts[0] = input, acts[i] = output of layer i
    acts[0] = inputs;
    for (std::size_t i = 0; i < L; ++i) {
      Eigen::MatrixXd z = weights_[i] * acts[i];
      z.colwise() += biases_[i];
      if (i + 1 < L) apply_activation(z);
      acts[i + 1] = std::move(z);
    }
    Eigen::MatrixXd delta = acts[L] - targets;
    const double loss = weight * delta.squaredNorm();
    delta *= 2.0 * weight;
    grad.assign(num_params(), 0.0);
    std::vector<std::size_t> offsets(L);
    std::size_t at = 0;
    for (std::size_t i = 0; i < L; ++i) {
      offsets[i] = at;
      at += static_cast<std::size_t>(weights_[i].size() + biases_[i].size());
    }
    for (std::size_t i = L; i-- > 0;) {
      Eigen::Map<Eigen::MatrixXd> gW(grad.data() + offsets[i], weights_[i].rows(), weights_[i].cols());
      Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets[i] + weights_[i].size(), biases_[i].size());
      gW.noalias() = delta * acts[i].transpose();
      gb = delta.rowwise().sum();
      if (i == 0) break;
      Eigen::MatrixXd back = weights_[i].transpose() * delta;
      // Derivative of the activation, expressed through its output.
      if (activation_ == Activation::sigmoid)
        back.array() *= acts[i].array() * (1.0 - acts[i].array());
      else
        back.array() *= (acts[i].array() > 0.0).cast<double>();
      delta = std::move(back);
    }
    return loss;
  }

  /// Hidden pre-activations for one input, used to locate rectifier kinks.
  std::vector<double> pre_activations(std::span<const double> y) const {
    std::vector<double> out;
    Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i + 1 < weights_.size(); ++i) {
      Eigen::VectorXd z = weights_[i] * h + biases_[i];
      out.insert(out.end(), z.data(), z.data() + z.size());
      apply_activation(z);
      h = std::move(z);
    }
    return out;
  }

 private:
  template <typename Derived>
  void apply_activation(Eigen::MatrixBase<Derived>& z) const {
    if (activation_ == Activation::rectifier)
      z = z.cwiseMax(0.0);
    else
      z = (1.0 + (-z.array()).exp()).inverse().matrix();
  }

  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  Activation activation_ = Activation::sigmoid;
};

inline std::vector<double> mlp_forward(const Mlp& m, std::span<const double> y) { return m.forward(y); }

/// Block-diagonal MLP running `a` and `b` side by side on (ya || yb). Both
/// must have the same depth and activation.
inline Mlp concat_mlps(const Mlp& a, const Mlp& b) {
  if (a.num_layers() != b.num_layers() || (a.num_layers() > 1 && a.activation() != b.activation()))
    throw ShapeError("concat_mlps: depth or activation mismatch");
  const auto wa = a.widths(), wb = b.widths();
  std::vector<int> w(wa.size());
  for (std::size_t i = 0; i < wa.size(); ++i) w[i] = wa[i] + wb[i];
  Mlp m = Mlp::zeros(w, a.activation());
  for (std::size_t i = 0; i < a.num_layers(); ++i) {
    m.weight(i).topLeftCorner(a.weight(i).rows(), a.weight(i).cols()) = a.weight(i);
    m.weight(i).bottomRightCorner(b.weight(i).rows(), b.weight(i).cols()) = b.weight(i);
    m.bias(i).head(a.bias(i).size()) = a.bias(i);
    m.bias(i).tail(b.bias(i).size()) = b.bias(i);
  }
  return m;
}

struct TrainConfig {
  std::uint64_t seed = 0;
  int samples = 4096;
  int epochs = 20000;
  double step_size = 0.05;
  double momentum = 0.9;
  double box = 1.0;  // c: inputs drawn from [-c, c]^k
  std::vector<int> hidden = {64, 64};
  Activation activation = Activation::sigmoid;
  double target_max_error = 0.02;
  int grid_points = 101;  // per axis, for held-out evaluation (k = 2)
};

struct TrainResult {
  Mlp model;
  std::vector<double> loss_history;  // one entry per epoch
  double max_abs_error = 0.0;        // over the training samples
  int epochs_run = 0;
};

/// Full-batch gradient descent (optionally heavy-ball momentum, constant
/// step) on the mean squared error. Inputs/targets are (width x N) columns.
/// Deterministic: no randomness is consumed here.
inline TrainResult mlp_train(Mlp m, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets, const TrainConfig& cfg) {
  if (inputs.cols() != targets.cols() || inputs.rows() != m.input_width() || targets.rows() != m.output_width())
    throw ShapeError("mlp_train: sample/target shapes do not match the network");
  if (inputs.cols() == 0) throw ShapeError("mlp_train: no samples");
  TrainResult result;
  std::vector<double> params = m.params(), grad, velocity(params.size(), 0.0);
  const double w = 1.0 / static_cast<double>(inputs.cols());
  result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = m.loss_and_gradient(inputs, targets, w, grad);
    if (!std::isfinite(loss)) throw TrainingError("training diverged at epoch " + std::to_string(epoch), INFINITY);
    result.loss_history.push_back(loss);
    for (std::size_t i = 0; i < params.size(); ++i) {
      velocity[i] = cfg.momentum * velocity[i] - cfg.step_size * grad[i];
      params[i] += velocity[i];
    }
    m.set_params(params);
    result.epochs_run = epoch + 1;
  }
  const Eigen::MatrixXd out = m.forward_batch(inputs);
  result.max_abs_error = (out - targets).cwiseAbs().maxCoeff();
  result.model = std::move(m);
  return result;
}

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // parameters whose perturbation crosses a rectifier kink
  bool non_smooth = false;
};

/// Backprop gradient of 0.5 ||m(y) - target||^2 against central finite
/// differences with step h on every parameter. Relative error uses
/// max(|g_bp|, |g_fd|, 1) as denominator, so gradients below 1 in magnitude
/// are compared in absolute terms (finite-difference roundoff is ~1e-11).
inline GradCheckResult grad_check(const Mlp& m, std::span<const double> y, std::span<const double> target, double h = 1e-5) {
  const Eigen::MatrixXd in = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::MatrixXd tg = Eigen::Map<const Eigen::VectorXd>(target.data(), static_cast<Eigen::Index>(target.size()));
  std::vector<double> grad;
  m.loss_and_gradient(in, tg, 0.5, grad);
  GradCheckResult r;
  Mlp probe = m;
  std::vector<double> p = m.params();
  const auto loss_at = [&](const std::vector<double>& q) {
    probe.set_params(q);
    const auto out = probe.forward(y);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += (out[i] - target[i]) * (out[i] - target[i]);
    return 0.5 * s;
  };
  const auto kink_between = [&](const std::vector<double>& q1, const std::vector<double>& q2) {
    if (m.activation() != Activation::rectifier) return false;
    probe.set_params(q1);
    const auto z1 = probe.pre_activations(y);
    probe.set_params(q2);
    const auto z2 = probe.pre_activations(y);
    for (std::size_t i = 0; i < z1.size(); ++i)
      if ((z1[i] > 0.0) != (z2[i] > 0.0) || z1[i] == 0.0 || z2[i] == 0.0) return true;
    return false;
  };
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::vector<double> plus = p, minus = p;
    plus[i] += h;
    minus[i] -= h;
    if (kink_between(plus, minus)) {
      ++r.skipped;
      r.non_smooth = true;
      continue;
    }
    const double fd = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1.0});
    r.max_relative_error = std::max(r.max_relative_error, std::abs(fd - grad[i]) / denom);
    ++r.checked;
  }
  return r;
}

}  // namespace ginet

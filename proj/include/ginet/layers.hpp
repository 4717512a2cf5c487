#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/orbits.hpp"
#include "ginet/perm_group.hpp"
#include "ginet/rng.hpp"
#include "ginet/tensor.hpp"

namespace ginet {

/// All affine G-equivariant maps R^{n^k x a} -> R^{n^l x b} (l = 0: invariant).
///
/// The linear part is a tensor over [n]^{l+k} x a x b (output indices first,
/// then input indices) that is constant on the layer classes of [n]^{l+k};
/// the bias is constant on the layer classes of [n]^l.
class LayerSpace {
 public:
  LayerSpace(std::shared_ptr<const PermGroup> group, int k, int l, int a, int b,
             std::size_t cap = default_tuple_cap())
      : group_(std::move(group)), k_(k), l_(l), a_(a), b_(b) {
    if (!group_) throw ShapeError("layer space needs a group");
    if (k < 0 || l < 0 || a < 0 || b < 0) throw ShapeError("layer orders and widths must be nonnegative");
    linear_ = std::make_shared<const OrbitPartition>(layer_classes(*group_, k + l, cap));
    bias_ = std::make_shared<const OrbitPartition>(layer_classes(*group_, l, cap));
  }

  const PermGroup& group() const noexcept { return *group_; }
  const std::shared_ptr<const PermGroup>& group_ptr() const noexcept { return group_; }
  int n() const noexcept { return group_->degree(); }
  int in_order() const noexcept { return k_; }
  int out_order() const noexcept { return l_; }
  int in_width() const noexcept { return a_; }
  int out_width() const noexcept { return b_; }

  const OrbitPartition& linear_partition() const noexcept { return *linear_; }
  const OrbitPartition& bias_partition() const noexcept { return *bias_; }

  std::size_t linear_dim() const { return linear_->num_classes() * static_cast<std::size_t>(a_) * static_cast<std::size_t>(b_); }
  std::size_t bias_dim() const { return bias_->num_classes() * static_cast<std::size_t>(b_); }

  bool compatible(const LayerSpace& o) const {
    return group_->degree() == o.group_->degree() && k_ == o.k_ && l_ == o.l_ &&
           linear_->same_partition(*o.linear_);
  }

  /// Same partitions, new feature widths.
  LayerSpace with_widths(int a, int b) const {
    LayerSpace s = *this;
    s.a_ = a;
    s.b_ = b;
    return s;
  }

 private:
  std::shared_ptr<const PermGroup> group_;
  int k_, l_, a_, b_;
  std::shared_ptr<const OrbitPartition> linear_;
  std::shared_ptr<const OrbitPartition> bias_;
};

/// One member of a LayerSpace: a coefficient per (class, input feature,
/// output feature) plus one per (bias class, output feature).
class EquivariantLayer {
 public:
  explicit EquivariantLayer(LayerSpace space)
      : space_(std::move(space)), linear_(space_.linear_dim(), 0.0), bias_(space_.bias_dim(), 0.0) {}

  const LayerSpace& space() const noexcept { return space_; }

  double& weight(std::size_t cls, int i, int j) { return linear_[linear_index(cls, i, j)]; }
  double weight(std::size_t cls, int i, int j) const { return linear_[linear_index(cls, i, j)]; }
  double& bias(std::size_t cls, int j) { return bias_[cls * static_cast<std::size_t>(space_.out_width()) + static_cast<std::size_t>(j)]; }
  double bias(std::size_t cls, int j) const { return bias_[cls * static_cast<std::size_t>(space_.out_width()) + static_cast<std::size_t>(j)]; }

  std::span<double> linear_coeffs() noexcept { return linear_; }
  std::span<const double> linear_coeffs() const noexcept { return linear_; }
  std::span<double> bias_coeffs() noexcept { return bias_; }
  std::span<const double> bias_coeffs() const noexcept { return bias_; }

  /// Uniform coefficients in [-scale, scale].
  static EquivariantLayer random(LayerSpace space, SplitMix64& rng, double scale = 1.0, bool with_bias = true) {
    EquivariantLayer L(std::move(space));
    for (auto& w : L.linear_) w = rng.uniform(-scale, scale);
    if (with_bias)
      for (auto& w : L.bias_) w = rng.uniform(-scale, scale);
    return L;
  }

  /// Fill coefficients from a rule on the dense tensor, evaluated at each
  /// class representative: rule(out_tuple, in_tuple, i, j). The rule must
  /// itself be constant on layer classes (i.e. describe an equivariant map).
  template <typename Rule>
  static EquivariantLayer from_rule(LayerSpace space, Rule rule) {
    EquivariantLayer L(std::move(space));
    const auto& P = L.space_.linear_partition();
    const int n = L.space_.n(), k = L.space_.in_order(), l = L.space_.out_order();
    const std::size_t in_tuples = checked_power(n, k);
    for (std::size_t c = 0; c < P.num_classes(); ++c) {
      const std::size_t rep = P.representative_code(c);
      const TupleIndex out = TupleIndex::decode(rep / in_tuples, n, l);
      const TupleIndex in = TupleIndex::decode(rep % in_tuples, n, k);
      for (int i = 0; i < L.space_.in_width(); ++i)
        for (int j = 0; j < L.space_.out_width(); ++j) L.weight(c, i, j) = rule(out, in, i, j);
    }
    return L;
  }

 private:
  std::size_t linear_index(std::size_t cls, int i, int j) const {
    return (cls * static_cast<std::size_t>(space_.in_width()) + static_cast<std::size_t>(i)) *
               static_cast<std::size_t>(space_.out_width()) +
           static_cast<std::size_t>(j);
  }

  LayerSpace space_;
  std::vector<double> linear_;
  std::vector<double> bias_;
};

inline LayerSpace layer_space(std::shared_ptr<const PermGroup> G, int k, int l, int a, int b,
                              std::size_t cap = default_tuple_cap()) {
  return LayerSpace(std::move(G), k, l, a, b, cap);
}

/// Y_{J,j} = sum_{I,i} L_{J,I,i,j} X_{I,i} + B_{J,j}, streamed over [n]^{l+k}
/// with class lookups; the dense tensor is never built.
inline Tensor apply_layer(const EquivariantLayer& L, const Tensor& X) {
  const auto& S = L.space();
  if (X.n != S.n() || X.order != S.in_order() || X.channels != S.in_width())
    throw ShapeError("apply_layer: input shape (n=" + std::to_string(X.n) + ", order=" + std::to_string(X.order) +
                     ", channels=" + std::to_string(X.channels) + ") does not match layer (n=" + std::to_string(S.n()) +
                     ", order=" + std::to_string(S.in_order()) + ", channels=" + std::to_string(S.in_width()) + ")");
  Tensor Y(S.n(), S.out_order(), S.out_width());
  const std::size_t in_tuples = X.num_tuples();
  const std::size_t out_tuples = Y.num_tuples();
  const auto a = static_cast<std::size_t>(S.in_width());
  const auto b = static_cast<std::size_t>(S.out_width());
  const auto& cls = S.linear_partition().class_ids();
  const auto& bcls = S.bias_partition().class_ids();
  const auto W = L.linear_coeffs();
  const auto B = L.bias_coeffs();
  for (std::size_t J = 0; J < out_tuples; ++J) {
    double* y = &Y.data[J * b];
    const std::int32_t* row = &cls[J * in_tuples];
    for (std::size_t I = 0; I < in_tuples; ++I) {
      const double* w = &W[static_cast<std::size_t>(row[I]) * a * b];
      const double* x = &X.data[I * a];
      for (std::size_t i = 0; i < a; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t j = 0; j < b; ++j) y[j] += w[i * b + j] * xi;
      }
    }
    const double* bias = &B[static_cast<std::size_t>(bcls[J]) * b];
    for (std::size_t j = 0; j < b; ++j) y[j] += bias[j];
  }
  return Y;
}

/// L^tau_ell: R^n -> R^{n^k}, output_I = x_{I_ell} on tuples I in tau, 0 elsewhere.
/// `ell` is 1-based.
inline EquivariantLayer l_tau_ell(std::shared_ptr<const PermGroup> G, const OrbitPartition& tau_partition,
                                  std::size_t tau, int ell) {
  const int k = tau_partition.k();
  if (ell < 1 || ell > k) throw ShapeError("l_tau_ell: position " + std::to_string(ell) + " outside [1, " + std::to_string(k) + "]");
  if (tau >= tau_partition.num_classes()) throw ShapeError("l_tau_ell: class out of range");
  const int n = tau_partition.n();
  LayerSpace space(std::move(G), 1, k, 1, 1);
  return EquivariantLayer::from_rule(space, [&](const TupleIndex& out, const TupleIndex& in, int, int) {
    const bool member = static_cast<std::size_t>(tau_partition.class_of_code(out.encode(n))) == tau;
    return member && in.digits[0] == out.digits[static_cast<std::size_t>(ell - 1)] ? 1.0 : 0.0;
  });
}

/// L^tau: R^n -> R^{n^k x k}; channel ell-1 is L^tau_ell.
inline EquivariantLayer l_tau(std::shared_ptr<const PermGroup> G, const OrbitPartition& tau_partition, std::size_t tau) {
  const int k = tau_partition.k();
  if (tau >= tau_partition.num_classes()) throw ShapeError("l_tau: class out of range");
  const int n = tau_partition.n();
  LayerSpace space(std::move(G), 1, k, 1, k);
  return EquivariantLayer::from_rule(space, [&](const TupleIndex& out, const TupleIndex& in, int, int j) {
    const bool member = static_cast<std::size_t>(tau_partition.class_of_code(out.encode(n))) == tau;
    return member && in.digits[0] == out.digits[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
  });
}

/// The summation layer s as an invariant layer R^{n^k x c} -> R^c, each
/// channel summed over all n^k tuples and multiplied by `scale`.
inline EquivariantLayer summation_layer(std::shared_ptr<const PermGroup> G, int k, int channels = 1, double scale = 1.0) {
  LayerSpace space(std::move(G), k, 0, channels, channels);
  return EquivariantLayer::from_rule(space, [&](const TupleIndex&, const TupleIndex&, int i, int j) {
    return i == j ? scale : 0.0;
  });
}

/// s(Z) for a single-channel tensor: the plain sum of all entries.
inline double summation(const Tensor& Z) {
  double s = 0.0;
  for (double v : Z.data) s += v;
  return s;
}

/// Identity map on R^{n^k x c}.
inline EquivariantLayer identity_layer(std::shared_ptr<const PermGroup> G, int k, int channels) {
  LayerSpace space(std::move(G), k, k, channels, channels);
  return EquivariantLayer::from_rule(space, [](const TupleIndex& out, const TupleIndex& in, int i, int j) {
    return i == j && out == in ? 1.0 : 0.0;
  });
}

/// U: R^{n^k x c} -> R^{n^d x c}, U(X)_{i1..id,j} = X_{i1..ik,j}. The input
/// occupies the leading k axes.
inline Tensor lift_U(const Tensor& X, int d) {
  if (X.order > d) throw ShapeError("lift_U: input order " + std::to_string(X.order) + " exceeds target order " + std::to_string(d));
  Tensor Y(X.n, d, X.channels);
  const std::size_t fan = checked_power(X.n, d - X.order);
  const auto c = static_cast<std::size_t>(X.channels);
  const std::size_t tuples = X.num_tuples();
  for (std::size_t I = 0; I < tuples; ++I)
    for (std::size_t r = 0; r < fan; ++r)
      for (std::size_t j = 0; j < c; ++j) Y.data[(I * fan + r) * c + j] = X.data[I * c + j];
  return Y;
}

/// D: R^{n^d x c} -> R^{n^k x c}, averaging the trailing d-k axes
/// (sum times n^{k-d}); D(U(X)) = X.
inline Tensor down_D(const Tensor& Y, int k) {
  if (k > Y.order) throw ShapeError("down_D: target order " + std::to_string(k) + " exceeds input order " + std::to_string(Y.order));
  Tensor X(Y.n, k, Y.channels);
  const std::size_t fan = checked_power(Y.n, Y.order - k);
  const auto c = static_cast<std::size_t>(Y.channels);
  const std::size_t tuples = X.num_tuples();
  const double scale = 1.0 / static_cast<double>(fan);
  for (std::size_t I = 0; I < tuples; ++I)
    for (std::size_t j = 0; j < c; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < fan; ++r) s += Y.data[(I * fan + r) * c + j];
      X.data[I * c + j] = s * scale;
    }
  return X;
}

/// U^b L D^a as a single layer on order-d tensors (order 0 output stays
/// invariant). Coefficients: n^{k-d} L_{J[:l], I[:k]}, bias U(B).
inline EquivariantLayer lift_layer(const EquivariantLayer& L, int d) {
  const auto& S = L.space();
  const int n = S.n(), k = S.in_order(), l = S.out_order();
  if (k > d || l > d) throw ShapeError("lift_layer: layer orders exceed target order " + std::to_string(d));
  const int new_l = l == 0 ? 0 : d;
  LayerSpace lifted(S.group_ptr(), d, new_l, S.in_width(), S.out_width());
  const double scale = 1.0 / static_cast<double>(checked_power(n, d - k));
  const std::size_t old_in = checked_power(n, k);
  const std::size_t new_in = checked_power(n, d);
  const std::size_t in_drop = checked_power(n, d - k);
  const std::size_t out_drop = checked_power(n, new_l - l);
  EquivariantLayer out(lifted);
  const auto& P = lifted.linear_partition();
  for (std::size_t c = 0; c < P.num_classes(); ++c) {
    const std::size_t rep = P.representative_code(c);
    const std::size_t J = rep / new_in / out_drop;  // leading l output digits
    const std::size_t I = rep % new_in / in_drop;   // leading k input digits
    const auto old_cls = static_cast<std::size_t>(S.linear_partition().class_of_code(J * old_in + I));
    for (int i = 0; i < S.in_width(); ++i)
      for (int j = 0; j < S.out_width(); ++j) out.weight(c, i, j) = scale * L.weight(old_cls, i, j);
  }
  const auto& BP = lifted.bias_partition();
  for (std::size_t c = 0; c < BP.num_classes(); ++c) {
    const std::size_t J = BP.representative_code(c) / out_drop;
    const auto old_cls = static_cast<std::size_t>(S.bias_partition().class_of_code(J));
    for (int j = 0; j < S.out_width(); ++j) out.bias(c, j) = L.bias(old_cls, j);
  }
  return out;
}

/// Block-diagonal concatenation in features: (X1 || X2) -> (L1 X1 || L2 X2).
inline EquivariantLayer concat_layers(const EquivariantLayer& L1, const EquivariantLayer& L2) {
  const auto& S1 = L1.space();
  const auto& S2 = L2.space();
  if (!S1.compatible(S2)) throw ShapeError("concat_layers: layers differ in degree, orders or group partition");
  const int a1 = S1.in_width(), b1 = S1.out_width();
  EquivariantLayer out(S1.with_widths(a1 + S2.in_width(), b1 + S2.out_width()));
  for (std::size_t c = 0; c < S1.linear_partition().num_classes(); ++c) {
    for (int i = 0; i < a1; ++i)
      for (int j = 0; j < b1; ++j) out.weight(c, i, j) = L1.weight(c, i, j);
    for (int i = 0; i < S2.in_width(); ++i)
      for (int j = 0; j < S2.out_width(); ++j) out.weight(c, a1 + i, b1 + j) = L2.weight(c, i, j);
  }
  for (std::size_t c = 0; c < S1.bias_partition().num_classes(); ++c) {
    for (int j = 0; j < b1; ++j) out.bias(c, j) = L1.bias(c, j);
    for (int j = 0; j < S2.out_width(); ++j) out.bias(c, b1 + j) = L2.bias(c, j);
  }
  return out;
}

/// Shared-input stacking: X -> (L1 X || L2 X).
inline EquivariantLayer stack_layers(const EquivariantLayer& L1, const EquivariantLayer& L2) {
  const auto& S1 = L1.space();
  const auto& S2 = L2.space();
  if (!S1.compatible(S2) || S1.in_width() != S2.in_width())
    throw ShapeError("stack_layers: layers differ in degree, orders, input width or group partition");
  const int b1 = S1.out_width();
  EquivariantLayer out(S1.with_widths(S1.in_width(), b1 + S2.out_width()));
  for (std::size_t c = 0; c < S1.linear_partition().num_classes(); ++c)
    for (int i = 0; i < S1.in_width(); ++i) {
      for (int j = 0; j < b1; ++j) out.weight(c, i, j) = L1.weight(c, i, j);
      for (int j = 0; j < S2.out_width(); ++j) out.weight(c, i, b1 + j) = L2.weight(c, i, j);
    }
  for (std::size_t c = 0; c < S1.bias_partition().num_classes(); ++c) {
    for (int j = 0; j < b1; ++j) out.bias(c, j) = L1.bias(c, j);
    for (int j = 0; j < S2.out_width(); ++j) out.bias(c, b1 + j) = L2.bias(c, j);
  }
  return out;
}

/// Dense (n^l b) x (n^k a) matrix, row J*b+j, column I*a+i, plus bias.
struct DenseLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> matrix;  // row-major
  std::vector<double> bias;

  std::vector<double> apply(std::span<const double> x) const {
    if (x.size() != cols) throw ShapeError("DenseLayer::apply: input length mismatch");
    std::vector<double> y(bias);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) y[r] += matrix[r * cols + c] * x[c];
    return y;
  }
};

inline constexpr std::size_t kDefaultDenseCap = 50'000'000;

inline DenseLayer materialize_dense(const EquivariantLayer& L, std::size_t cap = kDefaultDenseCap) {
  const auto& S = L.space();
  const std::size_t in_tuples = checked_power(S.n(), S.in_order());
  const std::size_t out_tuples = checked_power(S.n(), S.out_order());
  const auto a = static_cast<std::size_t>(S.in_width());
  const auto b = static_cast<std::size_t>(S.out_width());
  DenseLayer D;
  D.rows = out_tuples * b;
  D.cols = in_tuples * a;
  if (D.cols != 0 && D.rows > cap / D.cols) throw CapExceeded("dense layer too large", cap);
  D.matrix.assign(D.rows * D.cols, 0.0);
  D.bias.assign(D.rows, 0.0);
  for (std::size_t J = 0; J < out_tuples; ++J) {
    for (std::size_t I = 0; I < in_tuples; ++I) {
      const auto c = static_cast<std::size_t>(S.linear_partition().class_of_code(J * in_tuples + I));
      for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j)
          D.matrix[(J * b + j) * D.cols + I * a + i] = L.weight(c, static_cast<int>(i), static_cast<int>(j));
    }
    const auto bc = static_cast<std::size_t>(S.bias_partition().class_of_code(J));
    for (std::size_t j = 0; j < b; ++j) D.bias[J * b + j] = L.bias(bc, static_cast<int>(j));
  }
  return D;
}

/// max over generators g of |L(g.X) - g.L(X)|.
inline double equivariance_defect(const EquivariantLayer& L, const Tensor& X) {
  const Tensor Y = apply_layer(L, X);
  double worst = 0.0;
  for (const auto& g : L.space().group().generators()) {
    const Tensor lhs = apply_layer(L, apply_tensor(g, X));
    const Tensor rhs = apply_tensor(g, Y);
    worst = std::max(worst, max_abs_diff(lhs.data, rhs.data));
  }
  return worst;
}

}  // namespace ginet

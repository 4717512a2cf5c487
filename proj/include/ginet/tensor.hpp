#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/permutation.hpp"

namespace ginet {

inline constexpr std::size_t kDefaultTupleCap = 100'000'000;

/// Tuple-space cap: GINET_CAP_TUPLES overrides the default.
inline std::size_t default_tuple_cap() {
  if (const char* env = std::getenv("GINET_CAP_TUPLES")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultTupleCap;
}

/// n^k, throwing CapExceeded when it passes `cap`.
inline std::size_t checked_power(int n, int k, std::size_t cap = std::numeric_limits<std::size_t>::max()) {
  if (n < 1 || k < 0) throw ShapeError("tuple space needs n >= 1 and k >= 0");
  std::size_t total = 1;
  for (int i = 0; i < k; ++i) {
    if (total > cap / static_cast<std::size_t>(n))
      throw CapExceeded("tuple space " + std::to_string(n) + "^" + std::to_string(k) + " too large", cap);
    total *= static_cast<std::size_t>(n);
  }
  if (total > cap) throw CapExceeded("tuple space " + std::to_string(n) + "^" + std::to_string(k) + " too large", cap);
  return total;
}

/// An index tuple (i_1, ..., i_k) over [n], 0-based. Its code is the base-n
/// number with i_1 most significant.
struct TupleIndex {
  std::vector<int> digits;

  int order() const noexcept { return static_cast<int>(digits.size()); }

  std::size_t encode(int n) const {
    std::size_t code = 0;
    for (int d : digits) {
      if (d < 0 || d >= n) throw ShapeError("tuple digit " + std::to_string(d) + " out of range for n = " + std::to_string(n));
      code = code * static_cast<std::size_t>(n) + static_cast<std::size_t>(d);
    }
    return code;
  }

  static TupleIndex decode(std::size_t code, int n, int k) {
    TupleIndex t;
    t.digits.resize(static_cast<std::size_t>(k));
    for (int pos = k - 1; pos >= 0; --pos) {
      t.digits[static_cast<std::size_t>(pos)] = static_cast<int>(code % static_cast<std::size_t>(n));
      code /= static_cast<std::size_t>(n);
    }
    return t;
  }

  friend bool operator==(const TupleIndex&, const TupleIndex&) = default;
};

/// Precomputed g(i) * n^(k-1-pos) tables so the image of a code under the
/// diagonal action costs k lookups.
class TupleAction {
 public:
  TupleAction(const Permutation& g, int k) : n_(g.size()), k_(k) {
    std::size_t weight = 1;
    weights_.assign(static_cast<std::size_t>(k), 0);
    for (int pos = k - 1; pos >= 0; --pos) {
      weights_[static_cast<std::size_t>(pos)] = weight;
      weight *= static_cast<std::size_t>(n_);
    }
    images_.assign(g.images().begin(), g.images().end());
  }

  std::size_t operator()(std::size_t code) const {
    std::size_t out = 0;
    for (int pos = k_ - 1; pos >= 0; --pos) {
      const std::size_t d = code % static_cast<std::size_t>(n_);
      code /= static_cast<std::size_t>(n_);
      out += static_cast<std::size_t>(images_[d]) * weights_[static_cast<std::size_t>(pos)];
    }
    return out;
  }

 private:
  int n_;
  int k_;
  std::vector<std::size_t> weights_;
  std::vector<int> images_;
};

/// Dense real tensor in R^{n^order x channels}; the feature axis is trailing,
/// so entry (code, j) lives at code * channels + j.
struct Tensor {
  int n = 1;
  int order = 0;
  int channels = 1;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int n_, int order_, int channels_)
      : n(n_), order(order_), channels(channels_),
        data(checked_power(n_, order_) * static_cast<std::size_t>(channels_), 0.0) {}

  static Tensor from_vector(std::span<const double> x) {
    Tensor t(static_cast<int>(x.size()), 1, 1);
    t.data.assign(x.begin(), x.end());
    return t;
  }

  std::size_t num_tuples() const { return checked_power(n, order); }
  double& at(std::size_t code, int j) { return data[code * static_cast<std::size_t>(channels) + static_cast<std::size_t>(j)]; }
  double at(std::size_t code, int j) const { return data[code * static_cast<std::size_t>(channels) + static_cast<std::size_t>(j)]; }

  bool same_shape(const Tensor& o) const { return n == o.n && order == o.order && channels == o.channels; }
};

/// Tensor action (g.X)_{i1..ik,j} = X_{g^-1(i1)..g^-1(ik),j},
/// implemented as result[g(I)] = X[I].
inline Tensor apply_tensor(const Permutation& g, const Tensor& X) {
  if (X.n != g.size())
    throw ShapeError("apply_tensor: tensor axes have size " + std::to_string(X.n) + ", permutation degree " +
                     std::to_string(g.size()));
  Tensor out(X.n, X.order, X.channels);
  const TupleAction act(g, X.order);
  const std::size_t tuples = X.num_tuples();
  const auto ch = static_cast<std::size_t>(X.channels);
  for (std::size_t code = 0; code < tuples; ++code) {
    const std::size_t dst = act(code);
    for (std::size_t j = 0; j < ch; ++j) out.data[dst * ch + j] = X.data[code * ch + j];
  }
  return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("max_abs_diff: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
    if (d > m || d != d) m = d;
  }
  return m;
}

}  // namespace ginet

#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the union-find orbit code, the layer streaming code or the Eigen MLP path.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "ginet/orbits.hpp"
#include "ginet/perm_group.hpp"
#include "ginet/permutation.hpp"
#include "ginet/polynomial.hpp"
#include "ginet/rng.hpp"

namespace oracle {

inline std::vector<int> digits_of(std::size_t code, int n, int k) {
  std::vector<int> d(static_cast<std::size_t>(k));
  for (int p = k - 1; p >= 0; --p) {
    d[static_cast<std::size_t>(p)] = static_cast<int>(code % static_cast<std::size_t>(n));
    code /= static_cast<std::size_t>(n);
  }
  return d;
}

inline std::size_t code_of(const std::vector<int>& d, int n) {
  std::size_t c = 0;
  for (int v : d) c = c * static_cast<std::size_t>(n) + static_cast<std::size_t>(v);
  return c;
}

inline std::size_t power(int n, int k) {
  std::size_t p = 1;
  for (int i = 0; i < k; ++i) p *= static_cast<std::size_t>(n);
  return p;
}

/// Orbit label of every tuple: the smallest code reachable by applying any
/// group element (and, with `sort_positions`, any reordering of positions).
inline std::vector<std::size_t> orbit_labels(const ginet::PermGroup& G, int k, bool sort_positions) {
  const int n = G.degree();
  const std::size_t total = power(n, k);
  std::vector<std::size_t> label(total);
  for (std::size_t code = 0; code < total; ++code) {
    const auto d = digits_of(code, n, k);
    std::size_t best = total;
    for (const auto& g : G.elements()) {
      std::vector<int> img(d.size());
      for (std::size_t p = 0; p < d.size(); ++p) img[p] = g(d[p]);
      if (sort_positions) std::sort(img.begin(), img.end());
      best = std::min(best, code_of(img, n));
    }
    label[code] = best;
  }
  return label;
}

/// True iff the partition and the labels induce the same equivalence relation.
inline bool matches_labels(const ginet::OrbitPartition& P, const std::vector<std::size_t>& labels) {
  if (P.num_tuples() != labels.size()) return false;
  std::map<std::int32_t, std::size_t> fwd;
  std::map<std::size_t, std::int32_t> back;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    const auto cls = P.class_of_code(c);
    auto [it, fresh] = fwd.emplace(cls, labels[c]);
    if (!fresh && it->second != labels[c]) return false;
    auto [jt, fresh2] = back.emplace(labels[c], cls);
    if (!fresh2 && jt->second != cls) return false;
  }
  return true;
}

inline std::size_t distinct_count(const std::vector<std::size_t>& labels) {
  std::vector<std::size_t> s = labels;
  std::sort(s.begin(), s.end());
  return static_cast<std::size_t>(std::unique(s.begin(), s.end()) - s.begin());
}

/// Burnside: a tuple is fixed by g iff every entry is, so |Fix(g)| = fix(g)^k.
inline double burnside_count(const ginet::PermGroup& G, int k) {
  double total = 0.0;
  for (const auto& g : G.elements()) {
    int fixed = 0;
    for (int i = 0; i < G.degree(); ++i) fixed += g(i) == i;
    total += std::pow(static_cast<double>(fixed), k);
  }
  return total / static_cast<double>(G.order());
}

/// Rank by Gaussian elimination with partial pivoting.
inline std::size_t rank(std::vector<std::vector<double>> rows, double tol = 1e-9) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
    std::size_t piv = r;
    for (std::size_t i = r + 1; i < rows.size(); ++i)
      if (std::abs(rows[i][c]) > std::abs(rows[piv][c])) piv = i;
    if (std::abs(rows[piv][c]) <= tol) continue;
    std::swap(rows[piv], rows[r]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r) continue;
      const double f = rows[i][c] / rows[r][c];
      if (f == 0.0) continue;
      for (std::size_t j = c; j < cols; ++j) rows[i][j] -= f * rows[r][j];
    }
    ++r;
  }
  return r;
}

/// Dimension of {T in R^{n^t} : g.T = T for all g}, as the rank of the
/// group averages of all unit tensors.
inline std::size_t reynolds_rank(const ginet::PermGroup& G, int t) {
  const int n = G.degree();
  const std::size_t total = power(n, t);
  std::vector<std::vector<double>> rows;
  for (std::size_t e = 0; e < total; ++e) {
    std::vector<double> avg(total, 0.0);
    const auto d = digits_of(e, n, t);
    for (const auto& g : G.elements()) {
      std::vector<int> img(d.size());
      for (std::size_t p = 0; p < d.size(); ++p) img[p] = g(d[p]);
      avg[code_of(img, n)] += 1.0 / static_cast<double>(G.order());
    }
    rows.push_back(std::move(avg));
  }
  return rank(std::move(rows));
}

/// All exponent vectors of total degree k in n variables.
inline std::vector<ginet::Monomial> monomials(int n, int k) {
  std::vector<ginet::Monomial> out;
  ginet::Monomial m(static_cast<std::size_t>(n), 0);
  const auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == n - 1) {
      m[static_cast<std::size_t>(pos)] = left;
      out.push_back(m);
      return;
    }
    for (int e = left; e >= 0; --e) {
      m[static_cast<std::size_t>(pos)] = e;
      self(self, pos + 1, left - e);
    }
  };
  rec(rec, 0, k);
  return out;
}

/// Dimension of the degree-k invariant polynomials: rank of group averages
/// of all degree-k monomials, in monomial coordinates.
inline std::size_t invariant_poly_dimension(const ginet::PermGroup& G, int k) {
  const int n = G.degree();
  const auto mons = monomials(n, k);
  std::map<ginet::Monomial, std::size_t> index;
  for (std::size_t i = 0; i < mons.size(); ++i) index[mons[i]] = i;
  std::vector<std::vector<double>> rows;
  for (const auto& m : mons) {
    std::vector<double> avg(mons.size(), 0.0);
    for (const auto& g : G.elements()) {
      // x_i -> x_{g(i)} moves exponent i to position g(i).
      ginet::Monomial img(m.size());
      for (std::size_t i = 0; i < m.size(); ++i) img[static_cast<std::size_t>(g(static_cast<int>(i)))] = m[i];
      avg[index.at(img)] += 1.0;
    }
    rows.push_back(std::move(avg));
  }
  return rank(std::move(rows));
}

/// Plain-loop MLP: weights[l][r][c], biases[l][r].
struct NaiveMlp {
  std::vector<std::vector<std::vector<double>>> weights;
  std::vector<std::vector<double>> biases;
  bool sigmoid = true;

  std::vector<double> operator()(std::vector<double> y) const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      std::vector<double> z(weights[l].size());
      for (std::size_t r = 0; r < z.size(); ++r) {
        double s = biases[l][r];
        for (std::size_t c = 0; c < y.size(); ++c) s += weights[l][r][c] * y[c];
        if (l + 1 < weights.size()) s = sigmoid ? 1.0 / (1.0 + std::exp(-s)) : std::max(0.0, s);
        z[r] = s;
      }
      y = std::move(z);
    }
    return y;
  }
};

/// Random permutation by Fisher-Yates.
inline ginet::Permutation random_permutation(int n, ginet::SplitMix64& rng) {
  std::vector<int> im(static_cast<std::size_t>(n));
  std::iota(im.begin(), im.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(im[static_cast<std::size_t>(i)], im[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  return ginet::Permutation::from_images(std::move(im));
}

inline std::vector<double> random_vector(std::size_t size, ginet::SplitMix64& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(size);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

/// Tensor action written from the definition: (g.X)_{g(i1)..g(ik), j} = X_{i1..ik, j}.
inline std::vector<double> act(const ginet::Permutation& g, const std::vector<double>& X, int n, int k, int channels) {
  std::vector<double> out(X.size());
  const std::size_t total = power(n, k);
  for (std::size_t code = 0; code < total; ++code) {
    auto d = digits_of(code, n, k);
    for (auto& v : d) v = g(v);
    const std::size_t to = code_of(d, n);
    for (int j = 0; j < channels; ++j)
      out[to * static_cast<std::size_t>(channels) + static_cast<std::size_t>(j)] = X[code * static_cast<std::size_t>(channels) + static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace oracle

#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/orbits.hpp"
#include "ginet/polynomial.hpp"
#include "ginet/rng.hpp"
#include "ginet/tensor.hpp"

namespace ginet {

/// Dense coefficient tensor W in R^{n^k} of a homogeneous polynomial,
/// p(x) = sum W_{i1..ik} x_i1 ... x_ik.
struct CoeffTensor {
  int n = 1;
  int k = 0;
  std::vector<double> entries;
  bool symmetric = false;

  Tensor as_tensor() const {
    Tensor t(n, k, 1);
    t.data = entries;
    return t;
  }
};

namespace detail {

/// Exponent vector of the monomial x_{i1} ... x_{ik} for a tuple code.
inline Monomial tuple_monomial(std::size_t code, int n, int k) {
  Monomial m(static_cast<std::size_t>(n), 0);
  for (int pos = 0; pos < k; ++pos) {
    ++m[code % static_cast<std::size_t>(n)];
    code /= static_cast<std::size_t>(n);
  }
  return m;
}

/// Number of distinct index orderings producing a monomial: k! / prod e_i!.
inline double ordering_count(const Monomial& m) {
  double count = 1.0;
  int placed = 0;
  for (int e : m)
    for (int j = 1; j <= e; ++j) {
      ++placed;
      count = count * placed / j;
    }
  return std::round(count);
}

}  // namespace detail

/// The unique symmetric coefficient tensor: each monomial's coefficient is
/// split equally among its distinct index orderings.
inline CoeffTensor coeff_tensor(const Polynomial& p_k, int k, std::size_t cap = default_tuple_cap()) {
  if (!p_k.is_homogeneous(k)) throw ShapeError("coeff_tensor: polynomial is not homogeneous of degree " + std::to_string(k));
  const int n = p_k.num_vars();
  CoeffTensor W{n, k, std::vector<double>(checked_power(n, k, cap), 0.0), true};
  for (std::size_t code = 0; code < W.entries.size(); ++code) {
    const Monomial m = detail::tuple_monomial(code, n, k);
    const double c = p_k.coefficient(m);
    if (c != 0.0) W.entries[code] = c / detail::ordering_count(m);
  }
  return W;
}

inline CoeffTensor coeff_tensor(const Polynomial& p_k) { return coeff_tensor(p_k, p_k.degree()); }

/// sum_I W_I x^I as a sparse polynomial.
inline Polynomial polynomial_from_tensor(const CoeffTensor& W) {
  Polynomial p(W.n);
  for (std::size_t code = 0; code < W.entries.size(); ++code)
    if (W.entries[code] != 0.0) p.add_term(detail::tuple_monomial(code, W.n, W.k), W.entries[code]);
  return p;
}

/// g.W == W for every generator, up to `tol` in the max norm.
inline bool check_fixed_point(const CoeffTensor& W, const PermGroup& G, double tol) {
  if (W.n != G.degree()) throw ShapeError("check_fixed_point: tensor side " + std::to_string(W.n) + " != group degree " + std::to_string(G.degree()));
  const Tensor t = W.as_tensor();
  for (const auto& g : G.generators())
    if (max_abs_diff(apply_tensor(g, t).data, t.data) > tol) return false;
  return true;
}

/// Indicator tensor of one k-class (symmetric by construction).
inline CoeffTensor indicator_tensor(const OrbitPartition& P, std::size_t cls) {
  if (cls >= P.num_classes()) throw ShapeError("indicator_tensor: class out of range");
  CoeffTensor W{P.n(), P.k(), std::vector<double>(P.num_tuples(), 0.0), true};
  for (std::size_t code = 0; code < P.num_tuples(); ++code)
    if (static_cast<std::size_t>(P.class_of_code(code)) == cls) W.entries[code] = 1.0;
  return W;
}

/// p^tau(x) = sum over tuples in tau of x_i1 ... x_ik.
inline Polynomial basis_polynomial(const OrbitPartition& P, std::size_t cls) {
  Polynomial p(P.n());
  if (P.k() == 0) return Polynomial::constant(P.n(), 1.0);
  for (std::size_t code = 0; code < P.num_tuples(); ++code)
    if (static_cast<std::size_t>(P.class_of_code(code)) == cls) p.add_term(detail::tuple_monomial(code, P.n(), P.k()), 1.0);
  return p;
}

struct BasisElement {
  std::size_t class_id;
  TupleIndex representative;
  Polynomial polynomial;
};

/// One p^tau per k-class, in class-id order.
inline std::vector<BasisElement> basis_polynomials(const PermGroup& G, int k, std::size_t cap = default_tuple_cap()) {
  const OrbitPartition P = poly_classes(G, k, cap);
  std::vector<BasisElement> out;
  out.reserve(P.num_classes());
  for (std::size_t c = 0; c < P.num_classes(); ++c) out.push_back({c, P.representative(c), basis_polynomial(P, c)});
  return out;
}

inline constexpr int kInvarianceCheckPoints = 100;
inline constexpr double kInvarianceTolerance = 1e-9;

/// Probabilistic invariance test: reynolds(p) and p agree at 100 seeded points
/// of [-1,1]^n (relative tolerance 1e-9).
inline bool is_invariant(const Polynomial& p, const PermGroup& G, std::uint64_t seed = 0) {
  const Polynomial q = reynolds(p, G);
  SplitMix64 rng(seed);
  std::vector<double> x(static_cast<std::size_t>(p.num_vars()));
  for (int t = 0; t < kInvarianceCheckPoints; ++t) {
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    const double a = p.evaluate(x), b = q.evaluate(x);
    if (std::abs(a - b) > kInvarianceTolerance * std::max(1.0, std::abs(a))) return false;
  }
  return true;
}

/// Coefficients alpha_{k,tau} with p = sum alpha_{k,tau} p^tau.
struct Expansion {
  struct Term {
    int degree;
    std::size_t class_id;
    TupleIndex representative;
    double alpha;
  };

  int n = 0;
  std::vector<Term> terms;  // nonzero coefficients only, by (degree, class)
  std::map<int, std::shared_ptr<const OrbitPartition>> partitions;  // k-classes per degree present

  double coefficient(int k, std::size_t cls) const {
    for (const auto& t : terms)
      if (t.degree == k && t.class_id == cls) return t.alpha;
    return 0.0;
  }

  double l1_norm() const {
    double s = 0.0;
    for (const auto& t : terms) s += std::abs(t.alpha);
    return s;
  }

  Polynomial reconstruct() const {
    Polynomial p(n);
    for (const auto& t : terms) p += basis_polynomial(*partitions.at(t.degree), t.class_id) * t.alpha;
    return p;
  }
};

/// Expand an invariant polynomial in the p^tau bases of each degree. The
/// coefficient of tau is the representative monomial's coefficient divided by
/// how many tuples of tau produce that monomial.
inline Expansion expand_in_basis(const Polynomial& p, const PermGroup& G, std::size_t cap = default_tuple_cap()) {
  if (p.num_vars() != G.degree()) throw ShapeError("expand_in_basis: polynomial variables != group degree");
  if (!is_invariant(p, G)) throw NotInvariant("polynomial is not invariant under the group");
  Expansion e;
  e.n = p.num_vars();
  const auto parts = homogeneous_decompose(p);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (parts[k].is_zero()) continue;
    auto P = std::make_shared<const OrbitPartition>(poly_classes(G, static_cast<int>(k), cap));
    for (std::size_t c = 0; c < P->num_classes(); ++c) {
      const Monomial rep = detail::tuple_monomial(P->representative_code(c), e.n, static_cast<int>(k));
      const double coeff = parts[k].coefficient(rep);
      if (coeff != 0.0) e.terms.push_back({static_cast<int>(k), c, P->representative(c), coeff / detail::ordering_count(rep)});
    }
    e.partitions.emplace(static_cast<int>(k), std::move(P));
  }
  return e;
}

}  // namespace ginet

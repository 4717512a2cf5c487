#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/perm_group.hpp"

namespace ginet {

/// Exponent vector of a monomial x_1^e_1 ... x_n^e_n.
using Monomial = std::vector<int>;

inline int monomial_degree(const Monomial& m) { return std::accumulate(m.begin(), m.end(), 0); }

/// Sparse real polynomial in n variables. Zero coefficients are never stored.
class Polynomial {
 public:
  using Terms = std::map<Monomial, double>;

  explicit Polynomial(int n = 0) : n_(n) {}

  static Polynomial constant(int n, double c) {
    Polynomial p(n);
    p.add_term(Monomial(static_cast<std::size_t>(n), 0), c);
    return p;
  }

  /// x_i (0-based i).
  static Polynomial variable(int n, int i) {
    Monomial m(static_cast<std::size_t>(n), 0);
    m.at(static_cast<std::size_t>(i)) = 1;
    Polynomial p(n);
    p.add_term(std::move(m), 1.0);
    return p;
  }

  int num_vars() const noexcept { return n_; }
  const Terms& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  /// Max term degree; 0 for the zero polynomial.
  int degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, monomial_degree(m));
    return d;
  }

  bool is_homogeneous(int k) const {
    for (const auto& [m, c] : terms_)
      if (monomial_degree(m) != k) return false;
    return true;
  }

  double coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }

  void add_term(Monomial m, double c) {
    if (static_cast<int>(m.size()) != n_)
      throw ShapeError("monomial has " + std::to_string(m.size()) + " exponents, polynomial has " + std::to_string(n_) + " variables");
    for (int e : m)
      if (e < 0) throw ShapeError("negative exponent");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(std::move(m), c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  double evaluate(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != n_)
      throw ShapeError("evaluate: point has " + std::to_string(x.size()) + " coordinates, expected " + std::to_string(n_));
    double total = 0.0;
    for (const auto& [m, c] : terms_) {
      double v = c;
      for (std::size_t i = 0; i < m.size(); ++i)
        for (int e = 0; e < m[i]; ++e) v *= x[i];
      total += v;
    }
    return total;
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_vars(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }

  Polynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a += b * -1.0; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_vars(b);
    Polynomial out(a.n_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m(ma.size());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
        out.add_term(std::move(m), ca * cb);
      }
    return out;
  }

  std::size_t num_terms() const noexcept { return terms_.size(); }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void check_vars(const Polynomial& o) const {
    if (o.n_ != n_) throw ShapeError("polynomials in different numbers of variables");
  }

  int n_;
  Terms terms_;
};

inline double evaluate(const Polynomial& p, std::span<const double> x) { return p.evaluate(x); }

/// Bucket terms by degree: result[k] holds exactly the degree-k terms.
inline std::vector<Polynomial> homogeneous_decompose(const Polynomial& p) {
  std::vector<Polynomial> parts(static_cast<std::size_t>(p.degree()) + 1, Polynomial(p.num_vars()));
  for (const auto& [m, c] : p.terms()) parts[static_cast<std::size_t>(monomial_degree(m))].add_term(m, c);
  return parts;
}

/// The polynomial x -> p(g.x). With (g.x)_i = x_{g^-1(i)}, the monomial with
/// exponents e becomes the one with exponents e'_j = e_{g(j)}.
inline Polynomial act_on_polynomial(const Permutation& g, const Polynomial& p) {
  if (g.size() != p.num_vars()) throw ShapeError("permutation degree differs from number of variables");
  Polynomial out(p.num_vars());
  for (const auto& [m, c] : p.terms()) {
    Monomial moved(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) moved[j] = m[static_cast<std::size_t>(g(static_cast<int>(j)))];
    out.add_term(std::move(moved), c);
  }
  return out;
}

/// Group average q(x) = 1/|G| sum_g p(g.x).
inline Polynomial reynolds(const Polynomial& p, const PermGroup& G) {
  Polynomial sum(p.num_vars());
  for (const auto& g : G.elements()) sum += act_on_polynomial(g, p);
  return sum * (1.0 / static_cast<double>(G.order()));
}

inline constexpr int kVandermondeExpansionLimit = 6;

/// prod_{i<j} (x_i - x_j), fully expanded. Beyond n = 6 the expansion is
/// refused; use vandermonde_value instead.
inline Polynomial vandermonde(int n) {
  if (n < 2) throw ShapeError("vandermonde needs n >= 2");
  if (n > kVandermondeExpansionLimit)
    throw CapExceeded("Vandermonde expansion for n = " + std::to_string(n) +
                          " is too large; use evaluation-only mode (vandermonde_value)",
                      static_cast<std::size_t>(kVandermondeExpansionLimit));
  Polynomial v = Polynomial::constant(n, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) v = v * (Polynomial::variable(n, i) - Polynomial::variable(n, j));
  return v;
}

/// Evaluation-only Vandermonde, any n.
inline double vandermonde_value(std::span<const double> x) {
  double v = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) v *= x[i] - x[j];
  return v;
}

/// sum_i x_i^d.
inline Polynomial power_sum(int n, int d) {
  if (d < 0) throw ShapeError("power sum degree must be nonnegative");
  Polynomial p(n);
  for (int i = 0; i < n; ++i) {
    Monomial m(static_cast<std::size_t>(n), 0);
    m[static_cast<std::size_t>(i)] = d;
    p.add_term(std::move(m), 1.0);
  }
  return p;
}

}  // namespace ginet

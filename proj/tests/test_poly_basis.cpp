#include <gtest/gtest.h>

#include <numeric>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/perm_group.hpp"
#include "ginet/poly_basis.hpp"
#include "oracles.hpp"

using ginet::PermGroup;
using ginet::Polynomial;

namespace {

Polynomial monomial(std::vector<int> e, double c = 1.0) {
  Polynomial p(static_cast<int>(e.size()));
  p.add_term(std::move(e), c);
  return p;
}

}  // namespace

TEST(CoeffTensor, SymmetricSplit) {
  const auto W = ginet::coeff_tensor(monomial({1, 1}));
  EXPECT_EQ(W.entries, (std::vector<double>{0.0, 0.5, 0.5, 0.0}));
  EXPECT_TRUE(W.symmetric);
  const auto D = ginet::coeff_tensor(monomial({2, 0}));
  EXPECT_EQ(D.entries, (std::vector<double>{1.0, 0.0, 0.0, 0.0}));
}

TEST(CoeffTensor, RejectsNonHomogeneous) {
  EXPECT_THROW(ginet::coeff_tensor(monomial({2, 0}) + monomial({0, 1}), 2), ginet::ShapeError);
}

TEST(CoeffTensor, RoundTripAndSymmetry) {
  ginet::SplitMix64 rng(21);
  const Polynomial p = monomial({2, 1, 0}, 3.0) + monomial({0, 1, 2}, -1.5) + monomial({1, 1, 1}, 0.25);
  const auto W = ginet::coeff_tensor(p);
  const Polynomial q = ginet::polynomial_from_tensor(W);
  for (int t = 0; t < 100; ++t) {
    const auto x = oracle::random_vector(3, rng);
    EXPECT_NEAR(q.evaluate(x), p.evaluate(x), 1e-12);
  }
  // Exhaustive position-permutation symmetry.
  for (std::size_t code = 0; code < W.entries.size(); ++code) {
    auto d = oracle::digits_of(code, 3, 3);
    std::sort(d.begin(), d.end());
    do {
      EXPECT_EQ(W.entries[oracle::code_of(d, 3)], W.entries[code]);
    } while (std::next_permutation(d.begin(), d.end()));
  }
}

TEST(CheckFixedPoint, Examples) {
  const auto S2 = PermGroup::symmetric(2);
  ginet::CoeffTensor ones{2, 2, std::vector<double>(4, 1.0), true};
  EXPECT_TRUE(ginet::check_fixed_point(ones, S2, 0.0));
  ginet::CoeffTensor single{2, 2, {0.0, 1.0, 0.0, 0.0}, false};
  EXPECT_FALSE(ginet::check_fixed_point(single, S2, 1e-12));
  ginet::CoeffTensor wrong{3, 2, std::vector<double>(9, 1.0), true};
  EXPECT_THROW(ginet::check_fixed_point(wrong, S2, 0.0), ginet::ShapeError);
}

TEST(IndicatorTensor, FixedDisjointAndCounts) {
  for (const auto& G : {PermGroup::cyclic(4), PermGroup::dihedral(4), PermGroup::alternating(4)}) {
    const auto P = ginet::poly_classes(G, 3);
    std::vector<double> cover(P.num_tuples(), 0.0);
    for (std::size_t c = 0; c < P.num_classes(); ++c) {
      const auto W = ginet::indicator_tensor(P, c);
      EXPECT_TRUE(ginet::check_fixed_point(W, G, 0.0));
      EXPECT_EQ(std::accumulate(W.entries.begin(), W.entries.end(), 0.0), static_cast<double>(P.class_size(c)));
      for (std::size_t i = 0; i < cover.size(); ++i) cover[i] += W.entries[i];
    }
    for (double v : cover) EXPECT_EQ(v, 1.0);
  }
}

TEST(BasisPolynomials, SymmetricThreeDegreeTwo) {
  const auto basis = ginet::basis_polynomials(PermGroup::symmetric(3), 2);
  ASSERT_EQ(basis.size(), 2u);
  EXPECT_EQ(basis[0].polynomial, ginet::power_sum(3, 2));
  const std::vector<double> x{1, 2, 3};
  EXPECT_EQ(basis[1].polynomial.evaluate(x), 22.0);
}

TEST(BasisPolynomials, DegreeZeroIsOne) {
  const auto basis = ginet::basis_polynomials(PermGroup::cyclic(4), 0);
  ASSERT_EQ(basis.size(), 1u);
  EXPECT_EQ(basis[0].polynomial, Polynomial::constant(4, 1.0));
}

TEST(BasisPolynomials, InvariantUnderGenerators) {
  ginet::SplitMix64 rng(5);
  for (const auto& G : {PermGroup::cyclic(5), PermGroup::dihedral(4), PermGroup::grid({2, 3})})
    for (int k = 1; k <= 3; ++k)
      for (const auto& b : ginet::basis_polynomials(G, k))
        for (int t = 0; t < 10; ++t) {
          const auto x = oracle::random_vector(static_cast<std::size_t>(G.degree()), rng);
          for (const auto& g : G.generators())
            EXPECT_NEAR(b.polynomial.evaluate(ginet::apply_vector(g, x)), b.polynomial.evaluate(x), 1e-12);
        }
}

TEST(BasisPolynomials, CompleteAgainstInvariantDimension) {
  for (int n = 2; n <= 4; ++n)
    for (const auto& G : {PermGroup::symmetric(n), PermGroup::alternating(n), PermGroup::cyclic(n), PermGroup::dihedral(n), PermGroup::trivial(n)})
      for (int k = 0; k <= 3; ++k)
        EXPECT_EQ(ginet::poly_classes(G, k).num_classes(), oracle::invariant_poly_dimension(G, k))
            << "n=" << n << " |G|=" << G.order() << " k=" << k;
}

TEST(IsInvariant, DetectsInvariance) {
  EXPECT_TRUE(ginet::is_invariant(ginet::power_sum(4, 2), PermGroup::symmetric(4)));
  EXPECT_FALSE(ginet::is_invariant(monomial({1, 0, 0}), PermGroup::cyclic(3)));
  EXPECT_TRUE(ginet::is_invariant(ginet::vandermonde(4), PermGroup::alternating(4)));
  EXPECT_FALSE(ginet::is_invariant(ginet::vandermonde(4), PermGroup::symmetric(4)));
}

TEST(ExpandInBasis, SingleBasisElement) {
  const auto G = PermGroup::cyclic(5);
  const auto P = ginet::poly_classes(G, 2);
  for (std::size_t c = 0; c < P.num_classes(); ++c) {
    const auto e = ginet::expand_in_basis(ginet::basis_polynomial(P, c), G);
    ASSERT_EQ(e.terms.size(), 1u);
    EXPECT_EQ(e.terms[0].class_id, c);
    EXPECT_EQ(e.terms[0].alpha, 1.0);
  }
}

TEST(ExpandInBasis, ConstantPlusSquares) {
  const auto G = PermGroup::symmetric(3);
  const Polynomial p = ginet::power_sum(3, 2) * 3.0 + Polynomial::constant(3, 2.0);
  const auto e = ginet::expand_in_basis(p, G);
  ASSERT_EQ(e.terms.size(), 2u);
  EXPECT_EQ(e.coefficient(0, 0), 2.0);
  EXPECT_EQ(e.coefficient(2, 0), 3.0);
  EXPECT_EQ(e.coefficient(2, 1), 0.0);
  ginet::SplitMix64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto x = oracle::random_vector(3, rng);
    EXPECT_NEAR(e.reconstruct().evaluate(x), p.evaluate(x), 1e-12);
  }
}

TEST(ExpandInBasis, PowerSumCubed) {
  for (int n = 2; n <= 5; ++n) {
    const auto e = ginet::expand_in_basis(ginet::power_sum(n, 3), PermGroup::symmetric(n));
    ASSERT_EQ(e.terms.size(), 1u);
    EXPECT_EQ(e.terms[0].alpha, 1.0);
    EXPECT_EQ(e.l1_norm(), 1.0);
  }
}

TEST(ExpandInBasis, AdjacentProductsOnCycle) {
  Polynomial p(4);
  for (int i = 0; i < 4; ++i) {
    ginet::Monomial m(4, 0);
    m[static_cast<std::size_t>(i)] = 1;
    m[static_cast<std::size_t>((i + 1) % 4)] = 1;
    p.add_term(m, 1.0);
  }
  const auto e = ginet::expand_in_basis(p, PermGroup::cyclic(4));
  ASSERT_EQ(e.terms.size(), 1u);
  EXPECT_EQ(e.terms[0].alpha, 0.5);  // each x_i x_{i+1} appears as two ordered tuples
  EXPECT_EQ(e.terms[0].representative.digits, (std::vector<int>{0, 1}));
}

TEST(ExpandInBasis, RoundTripRandomInvariant) {
  ginet::SplitMix64 rng(77);
  for (const auto& G : {PermGroup::cyclic(4), PermGroup::dihedral(5), PermGroup::alternating(4)}) {
    const int n = G.degree();
    Polynomial raw(n);
    for (int t = 0; t < 6; ++t) {
      ginet::Monomial m(static_cast<std::size_t>(n), 0);
      const int deg = 1 + static_cast<int>(rng.below(3));
      for (int d = 0; d < deg; ++d) ++m[rng.below(static_cast<std::uint64_t>(n))];
      raw.add_term(m, rng.uniform(-2.0, 2.0));
    }
    const Polynomial p = ginet::reynolds(raw, G);
    const auto e = ginet::expand_in_basis(p, G);
    const Polynomial q = e.reconstruct();
    for (int t = 0; t < 100; ++t) {
      const auto x = oracle::random_vector(static_cast<std::size_t>(n), rng);
      EXPECT_NEAR(q.evaluate(x), p.evaluate(x), 1e-9 * std::max(1.0, std::abs(p.evaluate(x))));
    }
  }
}

TEST(ExpandInBasis, RejectsNonInvariant) {
  EXPECT_THROW(ginet::expand_in_basis(monomial({1, 0, 0}), PermGroup::cyclic(3)), ginet::NotInvariant);
  EXPECT_THROW(ginet::expand_in_basis(ginet::vandermonde(4), PermGroup::symmetric(4)), ginet::NotInvariant);
}

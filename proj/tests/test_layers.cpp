#include <gtest/gtest.h>

#include <algorithm>
#include <memory>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/layers.hpp"
#include "ginet/perm_group.hpp"
#include "ginet/poly_basis.hpp"
#include "oracles.hpp"

using ginet::EquivariantLayer;
using ginet::LayerSpace;
using ginet::PermGroup;
using ginet::Tensor;

namespace {

std::shared_ptr<const PermGroup> share(PermGroup G) { return std::make_shared<const PermGroup>(std::move(G)); }

Tensor random_tensor(int n, int k, int c, ginet::SplitMix64& rng) {
  Tensor X(n, k, c);
  X.data = oracle::random_vector(X.data.size(), rng);
  return X;
}

}  // namespace

TEST(LayerSpace, Dimensions) {
  const LayerSpace S(share(PermGroup::symmetric(5)), 1, 1, 1, 1);
  EXPECT_EQ(S.linear_dim(), 2u);
  EXPECT_EQ(S.bias_dim(), 1u);
  const LayerSpace T(share(PermGroup::trivial(3)), 1, 1, 1, 1);
  EXPECT_EQ(T.linear_dim(), 9u);
  EXPECT_EQ(T.bias_dim(), 3u);
  const LayerSpace C(share(PermGroup::cyclic(4)), 1, 1, 1, 1);
  EXPECT_EQ(C.linear_dim(), 4u);
  EXPECT_EQ(C.bias_dim(), 1u);
  const LayerSpace W(share(PermGroup::symmetric(4)), 2, 2, 3, 2);
  EXPECT_EQ(W.linear_dim(), 15u * 6u);
  EXPECT_EQ(W.bias_dim(), 2u * 2u);
}

TEST(LayerSpace, CapExceeded) {
  EXPECT_THROW(LayerSpace(share(PermGroup::cyclic(10)), 3, 3, 1, 1, 1000), ginet::CapExceeded);
}

TEST(LayerSpace, DimensionsMatchReynoldsRank) {
  for (int n = 2; n <= 4; ++n)
    for (const auto& G : {PermGroup::symmetric(n), PermGroup::alternating(n), PermGroup::cyclic(n), PermGroup::dihedral(n)})
      for (int k = 0; k <= 2; ++k)
        for (int l = 0; k + l <= 3; ++l) {
          const LayerSpace S(share(G), k, l, 1, 1);
          EXPECT_EQ(S.linear_dim(), oracle::reynolds_rank(G, k + l));
          EXPECT_EQ(S.bias_dim(), oracle::reynolds_rank(G, l));
        }
}

TEST(ApplyLayer, ZeroLayerGivesZero) {
  ginet::SplitMix64 rng(1);
  const EquivariantLayer L(LayerSpace(share(PermGroup::cyclic(4)), 2, 1, 2, 3));
  const Tensor Y = ginet::apply_layer(L, random_tensor(4, 2, 2, rng));
  for (double v : Y.data) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(Y.order, 1);
  EXPECT_EQ(Y.channels, 3);
}

TEST(ApplyLayer, IdentityMemberOfSymmetricBasis) {
  const auto G = share(PermGroup::symmetric(4));
  EquivariantLayer L(LayerSpace(G, 1, 1, 1, 1));
  // Classes of [4]^2 under S_4: diagonal (representative (0,0)) first, then off-diagonal.
  L.weight(0, 0, 0) = 1.0;
  ginet::SplitMix64 rng(2);
  const Tensor X = random_tensor(4, 1, 1, rng);
  EXPECT_EQ(ginet::apply_layer(L, X).data, X.data);
}

TEST(ApplyLayer, ShapeMismatchThrows) {
  const EquivariantLayer L(LayerSpace(share(PermGroup::cyclic(4)), 1, 1, 2, 1));
  EXPECT_THROW(ginet::apply_layer(L, Tensor(4, 1, 1)), ginet::ShapeError);
  EXPECT_THROW(ginet::apply_layer(L, Tensor(3, 1, 2)), ginet::ShapeError);
  EXPECT_THROW(ginet::apply_layer(L, Tensor(4, 2, 2)), ginet::ShapeError);
}

TEST(ApplyLayer, EquivariantAgainstDefinitionAction) {
  ginet::SplitMix64 rng(3);
  const auto G = share(PermGroup::dihedral(4));
  for (int t = 0; t < 10; ++t) {
    const auto L = EquivariantLayer::random(LayerSpace(G, 2, 2, 2, 2), rng);
    const Tensor X = random_tensor(4, 2, 2, rng);
    const auto& g = G->elements()[rng.below(G->order())];
    Tensor gX(4, 2, 2);
    gX.data = oracle::act(g, X.data, 4, 2, 2);
    const auto lhs = ginet::apply_layer(L, gX).data;
    const auto rhs = oracle::act(g, ginet::apply_layer(L, X).data, 4, 2, 2);
    EXPECT_LE(ginet::max_abs_diff(lhs, rhs), 1e-12);
  }
}

TEST(MaterializeDense, IdentityLayerIsIdentityMatrix) {
  const auto L = ginet::identity_layer(share(PermGroup::cyclic(3)), 2, 2);
  const auto D = ginet::materialize_dense(L);
  ASSERT_EQ(D.rows, 18u);
  ASSERT_EQ(D.cols, 18u);
  for (std::size_t r = 0; r < D.rows; ++r)
    for (std::size_t c = 0; c < D.cols; ++c) EXPECT_EQ(D.matrix[r * D.cols + c], r == c ? 1.0 : 0.0);
}

TEST(MaterializeDense, AgreesWithStreaming) {
  ginet::SplitMix64 rng(4);
  const auto G = share(PermGroup::cyclic(3));
  const auto L = EquivariantLayer::random(LayerSpace(G, 2, 2, 2, 3), rng);
  const auto D = ginet::materialize_dense(L);
  for (int t = 0; t < 50; ++t) {
    const Tensor X = random_tensor(3, 2, 2, rng);
    EXPECT_LE(ginet::max_abs_diff(D.apply(X.data), ginet::apply_layer(L, X).data), 1e-12);
  }
  EXPECT_THROW(ginet::materialize_dense(L, 10), ginet::CapExceeded);
}

TEST(MaterializeDense, ConstantOnLayerClasses) {
  ginet::SplitMix64 rng(5);
  const auto G = share(PermGroup::alternating(4));
  const auto L = EquivariantLayer::random(LayerSpace(G, 1, 2, 1, 1), rng);
  const auto D = ginet::materialize_dense(L);
  const auto& P = L.space().linear_partition();
  for (std::size_t code = 0; code < P.num_tuples(); ++code) {
    const std::size_t J = code / 4, I = code % 4;
    EXPECT_EQ(D.matrix[J * D.cols + I], L.weight(static_cast<std::size_t>(P.class_of_code(code)), 0, 0));
  }
}

TEST(LTau, ChannelsMatchSinglePositionLayers) {
  ginet::SplitMix64 rng(6);
  const auto G = share(PermGroup::cyclic(4));
  const auto P = ginet::poly_classes(*G, 3);
  for (std::size_t tau = 0; tau < P.num_classes(); ++tau) {
    const auto L = ginet::l_tau(G, P, tau);
    const Tensor X = random_tensor(4, 1, 1, rng);
    const Tensor Y = ginet::apply_layer(L, X);
    for (int ell = 1; ell <= 3; ++ell) {
      const Tensor Z = ginet::apply_layer(ginet::l_tau_ell(G, P, tau, ell), X);
      for (std::size_t I = 0; I < Z.num_tuples(); ++I) EXPECT_EQ(Y.at(I, ell - 1), Z.at(I, 0));
    }
  }
}

TEST(LTau, PicksDigitsOnClassAndZeroElsewhere) {
  const auto G = share(PermGroup::symmetric(3));
  const auto P = ginet::poly_classes(*G, 2);
  const std::vector<double> x{1.5, -2.0, 4.0};
  const Tensor X = Tensor::from_vector(x);
  for (std::size_t tau = 0; tau < P.num_classes(); ++tau) {
    const Tensor Y = ginet::apply_layer(ginet::l_tau(G, P, tau), X);
    for (std::size_t I = 0; I < 9; ++I) {
      const auto d = oracle::digits_of(I, 3, 2);
      const bool in = static_cast<std::size_t>(P.class_of_code(I)) == tau;
      for (int ell = 0; ell < 2; ++ell) EXPECT_EQ(Y.at(I, ell), in ? x[static_cast<std::size_t>(d[static_cast<std::size_t>(ell)])] : 0.0);
    }
  }
  EXPECT_THROW(ginet::l_tau_ell(G, P, 0, 0), ginet::ShapeError);
  EXPECT_THROW(ginet::l_tau_ell(G, P, 0, 3), ginet::ShapeError);
  EXPECT_THROW(ginet::l_tau(G, P, 5), ginet::ShapeError);
}

TEST(LTau, EquivariantExhaustive) {
  ginet::SplitMix64 rng(7);
  for (const auto& Gv : {PermGroup::cyclic(4), PermGroup::alternating(4), PermGroup::dihedral(3)}) {
    const auto G = share(Gv);
    for (int k = 1; k <= 3; ++k) {
      const auto P = ginet::poly_classes(*G, k);
      for (std::size_t tau = 0; tau < P.num_classes(); ++tau)
        for (int ell = 1; ell <= k; ++ell) {
          const auto L = ginet::l_tau_ell(G, P, tau, ell);
          EXPECT_LE(ginet::equivariance_defect(L, random_tensor(G->degree(), 1, 1, rng)), 0.0);
        }
    }
  }
}

TEST(Summation, Examples) {
  const auto G = share(PermGroup::cyclic(3));
  Tensor ones(3, 2, 1);
  std::fill(ones.data.begin(), ones.data.end(), 1.0);
  EXPECT_EQ(ginet::summation(ones), 9.0);
  EXPECT_EQ(ginet::apply_layer(ginet::summation_layer(G, 2), ones).data, std::vector<double>{9.0});
  ginet::SplitMix64 rng(8);
  const Tensor Z = random_tensor(3, 2, 1, rng);
  const auto g = oracle::random_permutation(3, rng);
  EXPECT_NEAR(ginet::summation(ginet::apply_tensor(g, Z)), ginet::summation(Z), 1e-12);
  const auto P = ginet::poly_classes(*G, 2);
  for (std::size_t tau = 0; tau < P.num_classes(); ++tau)
    EXPECT_EQ(ginet::summation(ginet::indicator_tensor(P, tau).as_tensor()), static_cast<double>(P.class_size(tau)));
}

TEST(LiftDown, DownInvertsLift) {
  ginet::SplitMix64 rng(9);
  const Tensor X = random_tensor(3, 1, 2, rng);
  EXPECT_LE(ginet::max_abs_diff(ginet::down_D(ginet::lift_U(X, 3), 1).data, X.data), 1e-15);
  EXPECT_THROW(ginet::lift_U(random_tensor(3, 2, 1, rng), 1), ginet::ShapeError);
  EXPECT_THROW(ginet::down_D(X, 2), ginet::ShapeError);
}

TEST(LiftDown, LiftPutsInputOnLeadingAxis) {
  const std::vector<double> x{1, 2, 3};
  const Tensor U = ginet::lift_U(Tensor::from_vector(x), 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(U.at(static_cast<std::size_t>(i * 3 + j), 0), x[static_cast<std::size_t>(i)]);
}

TEST(LiftDown, ActivationCommutes) {
  ginet::SplitMix64 rng(10);
  const Tensor X = random_tensor(4, 1, 3, rng);
  Tensor U = ginet::lift_U(X, 3);
  for (auto& v : U.data) v = std::max(0.0, v);
  const Tensor back = ginet::down_D(U, 1);
  for (std::size_t i = 0; i < X.data.size(); ++i) EXPECT_NEAR(back.data[i], std::max(0.0, X.data[i]), 1e-12);
}

TEST(LiftDown, Equivariant) {
  ginet::SplitMix64 rng(11);
  const Tensor X = random_tensor(4, 1, 2, rng);
  const Tensor Y = random_tensor(4, 3, 2, rng);
  for (int t = 0; t < 5; ++t) {
    const auto g = oracle::random_permutation(4, rng);
    EXPECT_LE(ginet::max_abs_diff(ginet::lift_U(ginet::apply_tensor(g, X), 3).data, ginet::apply_tensor(g, ginet::lift_U(X, 3)).data), 0.0);
    EXPECT_LE(ginet::max_abs_diff(ginet::down_D(ginet::apply_tensor(g, Y), 1).data, ginet::apply_tensor(g, ginet::down_D(Y, 1)).data), 1e-12);
  }
}

TEST(LiftLayer, EqualsUpLayerDown) {
  ginet::SplitMix64 rng(12);
  const auto G = share(PermGroup::cyclic(3));
  for (int k = 0; k <= 2; ++k)
    for (int l = 0; l <= 2; ++l) {
      const auto L = EquivariantLayer::random(LayerSpace(G, k, l, 2, 2), rng);
      const auto lifted = ginet::lift_layer(L, 3);
      const Tensor X = random_tensor(3, 3, 2, rng);
      Tensor expect = ginet::apply_layer(L, ginet::down_D(X, k));
      if (l > 0) expect = ginet::lift_U(expect, 3);
      EXPECT_LE(ginet::max_abs_diff(ginet::apply_layer(lifted, X).data, expect.data), 1e-12) << "k=" << k << " l=" << l;
    }
}

TEST(ConcatLayers, BlockDiagonal) {
  ginet::SplitMix64 rng(13);
  const auto G = share(PermGroup::dihedral(4));
  const auto L1 = EquivariantLayer::random(LayerSpace(G, 1, 2, 2, 1), rng);
  const auto L2 = EquivariantLayer::random(LayerSpace(G, 1, 2, 1, 3), rng);
  const auto C = ginet::concat_layers(L1, L2);
  EXPECT_EQ(C.space().in_width(), 3);
  EXPECT_EQ(C.space().out_width(), 4);
  EXPECT_EQ(C.space().linear_dim(), C.space().linear_partition().num_classes() * 12);
  EXPECT_GE(C.space().linear_dim(), L1.space().linear_dim() + L2.space().linear_dim());
  const Tensor X1 = random_tensor(4, 1, 2, rng), X2 = random_tensor(4, 1, 1, rng);
  Tensor X(4, 1, 3);
  for (std::size_t I = 0; I < 4; ++I) {
    X.at(I, 0) = X1.at(I, 0);
    X.at(I, 1) = X1.at(I, 1);
    X.at(I, 2) = X2.at(I, 0);
  }
  const Tensor Y = ginet::apply_layer(C, X), Y1 = ginet::apply_layer(L1, X1), Y2 = ginet::apply_layer(L2, X2);
  for (std::size_t J = 0; J < 16; ++J) {
    EXPECT_NEAR(Y.at(J, 0), Y1.at(J, 0), 1e-12);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(Y.at(J, 1 + j), Y2.at(J, j), 1e-12);
  }
  EXPECT_LE(ginet::equivariance_defect(C, X), 1e-12);
  const auto L3 = EquivariantLayer::random(LayerSpace(G, 1, 1, 1, 1), rng);
  EXPECT_THROW(ginet::concat_layers(L1, L3), ginet::ShapeError);
}

TEST(StackLayers, SharedInput) {
  ginet::SplitMix64 rng(14);
  const auto G = share(PermGroup::cyclic(4));
  const auto L1 = EquivariantLayer::random(LayerSpace(G, 1, 2, 1, 2), rng);
  const auto L2 = EquivariantLayer::random(LayerSpace(G, 1, 2, 1, 1), rng);
  const auto S = ginet::stack_layers(L1, L2);
  const Tensor X = random_tensor(4, 1, 1, rng);
  const Tensor Y = ginet::apply_layer(S, X), Y1 = ginet::apply_layer(L1, X), Y2 = ginet::apply_layer(L2, X);
  for (std::size_t J = 0; J < 16; ++J) {
    EXPECT_NEAR(Y.at(J, 0), Y1.at(J, 0), 1e-12);
    EXPECT_NEAR(Y.at(J, 1), Y1.at(J, 1), 1e-12);
    EXPECT_NEAR(Y.at(J, 2), Y2.at(J, 0), 1e-12);
  }
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/layers.hpp"
#include "ginet/mlp.hpp"
#include "ginet/network.hpp"
#include "ginet/orbits.hpp"
#include "ginet/perm_group.hpp"
#include "ginet/polynomial.hpp"
#include "ginet/rng.hpp"

namespace ginet {

struct AnSnRow {
  int total_order = 0;
  std::size_t alternating_classes = 0;
  std::size_t symmetric_classes = 0;
  bool identical = false;
  bool must_coincide = false;  // total_order <= n - 2
};

struct AnSnReport {
  int n = 0;
  std::vector<AnSnRow> rows;
  bool holds = true;  // identical on every row that must coincide
};

/// Layer classes of [n]^t under A_n and S_n for t = 0..max_total_order.
inline AnSnReport an_sn_layer_equality(int n, int max_total_order, std::size_t cap = default_tuple_cap()) {
  if (n < 3) throw ShapeError("an_sn_layer_equality: n must be >= 3");
  if (max_total_order < 0) throw ShapeError("an_sn_layer_equality: negative order");
  for (int t = 0; t <= max_total_order; ++t) checked_power(n, t, cap);
  const PermGroup A = PermGroup::alternating(n), S = PermGroup::symmetric(n);
  AnSnReport rep;
  rep.n = n;
  for (int t = 0; t <= max_total_order; ++t) {
    const OrbitPartition pa = layer_classes(A, t, cap), ps = layer_classes(S, t, cap);
    AnSnRow row{t, pa.num_classes(), ps.num_classes(), pa.same_partition(ps), t <= n - 2};
    if (row.must_coincide && !row.identical) rep.holds = false;
    rep.rows.push_back(row);
  }
  return rep;
}

/// Transitive on k-tuples of distinct points: all of them form one layer class.
inline bool is_k_transitive(const PermGroup& G, int k, std::size_t cap = default_tuple_cap()) {
  const int n = G.degree();
  if (k < 0 || k > n) throw ShapeError("is_k_transitive: k must lie in [0, n]");
  const OrbitPartition P = layer_classes(G, k, cap);
  std::optional<std::int32_t> cls;
  std::vector<bool> seen(static_cast<std::size_t>(n));
  for (std::size_t code = 0; code < P.num_tuples(); ++code) {
    const TupleIndex t = TupleIndex::decode(code, n, k);
    std::fill(seen.begin(), seen.end(), false);
    bool distinct = true;
    for (int d : t.digits) {
      if (seen[static_cast<std::size_t>(d)]) distinct = false;
      seen[static_cast<std::size_t>(d)] = true;
    }
    if (!distinct) continue;
    if (!cls) cls = P.class_of_code(code);
    else if (*cls != P.class_of_code(code)) return false;
  }
  return true;
}

struct VandermondeReport {
  int n = 0;
  int max_order = 0;
  int trials = 0;
  std::vector<double> x0;
  double max_difference = 0.0;  // max |F(x0) - F((1 2) x0)| over trials
  bool all_equal = true;        // every difference within kVandermondeTolerance
  bool assertion_applies = false;
  double gap = 0.0;             // |V(x0)|
  bool holds = true;
};

inline constexpr double kVandermondeTolerance = 1e-9;

/// A random network over G: R^n -> order d (width h) -> sigma -> d -> sigma
/// -> invariant (width h) -> MLP head to R.
inline GInvariantNetwork random_invariant_network(std::shared_ptr<const PermGroup> G, int order, int hidden, SplitMix64& rng) {
  std::vector<Stage> stages;
  stages.push_back(EquivariantStage{EquivariantLayer::random(LayerSpace(G, 1, order, 1, hidden), rng, 0.5)});
  stages.push_back(ActivationStage{Activation::sigmoid});
  stages.push_back(EquivariantStage{EquivariantLayer::random(LayerSpace(G, order, order, hidden, hidden), rng, 0.5)});
  stages.push_back(ActivationStage{Activation::sigmoid});
  stages.push_back(InvariantStage{EquivariantLayer::random(LayerSpace(G, order, 0, hidden, hidden), rng, 0.5)});
  stages.push_back(HeadStage{Mlp::random({hidden, hidden, 1}, Activation::sigmoid, rng)});
  return GInvariantNetwork(std::move(G), 1, std::move(stages));
}

/// Random A_n-invariant networks of tensor order <= max_order evaluated at
/// x0 = (1, ..., n) and at (1 2).x0. When 2 max_order <= n - 2 the layers
/// coincide with S_n layers, so the two values must agree, while the
/// Vandermonde polynomial separates the points by |V(x0)|.
inline VandermondeReport vandermonde_obstruction(int n, int max_order, std::uint64_t seed, int trials) {
  if (n < 2) throw ShapeError("vandermonde_obstruction: n must be >= 2");
  if (max_order < 1) throw ShapeError("vandermonde_obstruction: max_order must be >= 1");
  if (trials < 1) throw ShapeError("vandermonde_obstruction: trials must be >= 1");
  VandermondeReport rep;
  rep.n = n;
  rep.max_order = max_order;
  rep.trials = trials;
  rep.x0.resize(static_cast<std::size_t>(n));
  std::iota(rep.x0.begin(), rep.x0.end(), 1.0);
  rep.assertion_applies = 2 * max_order <= n - 2;
  rep.gap = std::abs(vandermonde_value(rep.x0));
  const auto A = std::make_shared<const PermGroup>(PermGroup::alternating(n));
  const auto swapped = apply_vector(Permutation::from_cycles(n, {{0, 1}}), rep.x0);
  SplitMix64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    const int order = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_order)));
    const GInvariantNetwork F = random_invariant_network(A, order, 3, rng);
    rep.max_difference = std::max(rep.max_difference, std::abs(F(rep.x0) - F(swapped)));
  }
  rep.all_equal = rep.max_difference <= kVandermondeTolerance;
  rep.holds = !rep.assertion_applies || rep.all_equal;
  return rep;
}

inline constexpr int kMaxClosureDegree = 8;
inline constexpr int kMaxSupergroupDegree = 7;

namespace detail {

/// Every permutation of {0..n-1} in lexicographic image order.
template <class Visit>
void for_each_permutation(int n, Visit visit) {
  std::vector<int> images(static_cast<std::size_t>(n));
  std::iota(images.begin(), images.end(), 0);
  do {
    visit(Permutation::from_images(images));
  } while (std::next_permutation(images.begin(), images.end()));
}

}  // namespace detail

/// { h in S_n : h maps every orbit of G on [n]^2 to itself }.
inline PermGroup two_closure(const PermGroup& G, int max_degree = kMaxClosureDegree) {
  const int n = G.degree();
  if (n > max_degree)
    throw CapExceeded("two_closure scans all of S_" + std::to_string(n) + "; degree above limit " + std::to_string(max_degree),
                      static_cast<std::size_t>(max_degree));
  const OrbitPartition P = layer_classes(G, 2);
  std::vector<Permutation> keep;
  detail::for_each_permutation(n, [&](const Permutation& h) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (P.class_of_code(static_cast<std::size_t>(i * n + j)) != P.class_of_code(static_cast<std::size_t>(h(i) * n + h(j))))
          return;
    keep.push_back(h);
  });
  // Start from G's own generators so the result's generating set extends them.
  std::vector<Permutation> gens = G.generators();
  PermGroup current = PermGroup::generate(n, gens);
  for (const auto& h : keep) {
    if (current.contains(h)) continue;
    gens.push_back(h);
    current = PermGroup::generate(n, gens);
  }
  if (current.order() != keep.size()) throw Error("two_closure: filtered set is not a group");
  return current;
}

inline constexpr std::size_t kMaxClosureWitnesses = 10;

struct ClosureReport {
  std::size_t group_order = 0;
  std::size_t closure_order = 0;
  bool is_two_closed = false;
  std::size_t orbit_count = 0;  // |[n]^2 / G|
  std::vector<Permutation> witnesses;  // elements of closure \ G, lexicographically first
};

inline ClosureReport is_two_closed(const PermGroup& G, int max_degree = kMaxClosureDegree) {
  const PermGroup C = two_closure(G, max_degree);
  ClosureReport rep;
  rep.group_order = G.order();
  rep.closure_order = C.order();
  rep.is_two_closed = C.order() == G.order();
  rep.orbit_count = orbit_count_squared(G);
  std::vector<Permutation> extra;
  for (const auto& h : C.elements())
    if (!G.contains(h)) extra.push_back(h);
  std::sort(extra.begin(), extra.end());
  if (extra.size() > kMaxClosureWitnesses) extra.resize(kMaxClosureWitnesses);
  rep.witnesses = std::move(extra);
  return rep;
}

/// All distinct groups <G, g> for g outside G, in order of the
/// lexicographically first g producing each.
inline std::vector<PermGroup> enumerate_supergroups(const PermGroup& G, int max_degree = kMaxSupergroupDegree) {
  const int n = G.degree();
  if (n > max_degree)
    throw CapExceeded("supergroup enumeration over S_" + std::to_string(n) + " is above the degree limit " + std::to_string(max_degree) +
                          "; pass the supergroups explicitly",
                      static_cast<std::size_t>(max_degree));
  std::vector<PermGroup> out;
  std::set<std::vector<Permutation>> seen;
  // <G, g> = <G, x g y> for x, y in G; skip g already covered by such a coset.
  std::unordered_set<Permutation, PermutationHash> covered;
  detail::for_each_permutation(n, [&](const Permutation& g) {
    if (G.contains(g) || covered.contains(g)) return;
    for (const auto& x : G.elements()) {
      covered.insert(compose(x, g));
      covered.insert(compose(g, x));
    }
    std::vector<Permutation> gens = G.generators();
    gens.push_back(g);
    PermGroup H = PermGroup::generate(n, std::move(gens));
    std::vector<Permutation> key = H.elements();
    std::sort(key.begin(), key.end());
    if (seen.insert(std::move(key)).second) out.push_back(std::move(H));
  });
  return out;
}

struct SupergroupVerdict {
  std::size_t order = 0;
  std::size_t orbit_count = 0;
  bool strictly_fewer = false;  // |[n]^2/H| < |[n]^2/G|
  std::vector<Permutation> generators;
};

struct NecessaryConditionReport {
  std::size_t group_order = 0;
  std::size_t orbit_count = 0;
  std::size_t orbits_on_points = 0;  // |[n]/G|
  bool enumerated = false;           // supergroups came from enumeration
  std::vector<SupergroupVerdict> supergroups;
  bool holds = true;  // every listed H has strictly fewer orbits on [n]^2
  std::optional<bool> is_two_closed;  // when n is within the closure limit
  bool cross_check_ok = true;
};

/// Strict inequality |[n]^2/H| < |[n]^2/G| for every strict supergroup H,
/// either the ones given or all single extensions <G, g>. The verdict is
/// compared with the 2-closure test: with enumeration the two must agree;
/// with an explicit list a violation still implies G is not 2-closed.
inline NecessaryConditionReport necessary_condition_check(const PermGroup& G,
                                                          const std::optional<std::vector<PermGroup>>& supergroups = std::nullopt) {
  NecessaryConditionReport rep;
  rep.group_order = G.order();
  rep.orbit_count = orbit_count_squared(G);
  rep.orbits_on_points = layer_classes(G, 1).num_classes();
  std::vector<PermGroup> list;
  if (supergroups) {
    for (const auto& H : *supergroups) {
      if (H.degree() != G.degree()) throw ShapeError("necessary_condition_check: supergroup degree differs");
      if (!is_subgroup(G, H) || H.order() == G.order())
        throw ShapeError("necessary_condition_check: listed group of order " + std::to_string(H.order()) + " is not a strict supergroup");
    }
    list = *supergroups;
  } else {
    list = enumerate_supergroups(G);
    rep.enumerated = true;
  }
  for (const auto& H : list) {
    SupergroupVerdict v{H.order(), orbit_count_squared(H), false, H.generators()};
    v.strictly_fewer = v.orbit_count < rep.orbit_count;
    if (!v.strictly_fewer) rep.holds = false;
    rep.supergroups.push_back(std::move(v));
  }
  if (G.degree() <= kMaxClosureDegree) {
    rep.is_two_closed = is_two_closed(G).is_two_closed;
    rep.cross_check_ok = rep.enumerated ? rep.holds == *rep.is_two_closed : rep.holds || !*rep.is_two_closed;
  }
  return rep;
}

/// f(x) = sum_{g in G} bump(|g.x - x0| / r): G-invariant, 1 at x0 and 0 on
/// the points of H.x0 outside G.x0.
class SeparatingFunction {
 public:
  double operator()(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != G_->degree()) throw ShapeError("separating function: input length mismatch");
    double f = 0.0;
    for (const auto& g : G_->elements()) {
      const auto gx = apply_vector(g, x);
      double d2 = 0.0;
      for (std::size_t i = 0; i < gx.size(); ++i) d2 += (gx[i] - x0_[i]) * (gx[i] - x0_[i]);
      f += bump(std::sqrt(d2) / radius_);
    }
    return f;
  }

  double radius() const noexcept { return radius_; }
  const std::vector<double>& center() const noexcept { return x0_; }
  std::size_t g_orbit_size() const noexcept { return g_orbit_; }
  std::size_t h_orbit_size() const noexcept { return h_orbit_; }
  const Permutation& witness() const noexcept { return witness_; }

  /// Cubic smoothstep falloff: 1 at s = 0, 0 for s >= 1.
  static double bump(double s) {
    if (s >= 1.0) return 0.0;
    return 1.0 - s * s * (3.0 - 2.0 * s);
  }

 private:
  friend SeparatingFunction separating_function(std::shared_ptr<const PermGroup>, const PermGroup&, std::vector<double>);
  std::shared_ptr<const PermGroup> G_;
  std::vector<double> x0_;
  double radius_ = 1.0;
  std::size_t g_orbit_ = 0;
  std::size_t h_orbit_ = 0;
  Permutation witness_ = Permutation::identity(1);
};

inline SeparatingFunction separating_function(std::shared_ptr<const PermGroup> G, const PermGroup& H, std::vector<double> x0) {
  if (!G || G->degree() != H.degree() || static_cast<int>(x0.size()) != H.degree())
    throw ShapeError("separating_function: degrees of G, H and x0 must agree");
  if (!is_subgroup(*G, H) || G->order() == H.order()) throw ShapeError("separating_function: G must be a strict subgroup of H");
  {
    auto sorted = x0;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ShapeError("separating_function: x0 must have pairwise distinct coordinates");
  }
  std::vector<std::vector<double>> h_orbit;
  for (const auto& h : H.elements()) h_orbit.push_back(apply_vector(h, x0));
  std::vector<std::vector<double>> unique = h_orbit;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  double min_d = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < unique.size(); ++a)
    for (std::size_t b = a + 1; b < unique.size(); ++b) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < x0.size(); ++i) d2 += (unique[a][i] - unique[b][i]) * (unique[a][i] - unique[b][i]);
      min_d = std::min(min_d, std::sqrt(d2));
    }
  std::set<std::vector<double>> g_orbit;
  for (const auto& g : G->elements()) g_orbit.insert(apply_vector(g, x0));
  if (g_orbit.size() != G->order() || unique.size() != H.order())
    throw Error("separating_function: orbit of x0 is smaller than the acting group");

  SeparatingFunction f;
  f.G_ = std::move(G);
  f.x0_ = std::move(x0);
  f.radius_ = min_d / 3.0;
  f.g_orbit_ = g_orbit.size();
  f.h_orbit_ = unique.size();
  std::vector<Permutation> outside;
  for (const auto& h : H.elements())
    if (!f.G_->contains(h)) outside.push_back(h);
  f.witness_ = *std::min_element(outside.begin(), outside.end());
  return f;
}

}  // namespace ginet

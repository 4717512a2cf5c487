#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/permutation.hpp"

namespace ginet {

inline constexpr std::size_t kDefaultGroupCap = 1'000'000;

/// A finite permutation group on {0..n-1}, fully materialized. Immutable once
/// built; element order is first-discovery order of the generating BFS.
class PermGroup {
 public:
  int degree() const noexcept { return n_; }
  std::size_t order() const noexcept { return elements_.size(); }
  const std::vector<Permutation>& generators() const noexcept { return generators_; }
  const std::vector<Permutation>& elements() const noexcept { return elements_; }

  bool contains(const Permutation& p) const { return index_.contains(p); }

  /// Closure of `generators` under composition. BFS from the identity, each
  /// element left-multiplied by every generator.
  static PermGroup generate(int n, std::vector<Permutation> generators,
                            std::size_t cap = kDefaultGroupCap) {
    if (n < 1) throw ShapeError("group degree must be positive");
    if (cap < 1) throw ShapeError("group cap must be >= 1");
    for (const auto& g : generators)
      if (g.size() != n)
        throw ShapeError("generator " + g.to_cycle_string() + " has degree " + std::to_string(g.size()) +
                         ", expected " + std::to_string(n));
    PermGroup G;
    G.n_ = n;
    G.generators_ = std::move(generators);
    G.insert(Permutation::identity(n));
    for (std::size_t head = 0; head < G.elements_.size(); ++head) {
      for (const auto& s : G.generators_) {
        Permutation next = compose(s, G.elements_[head]);
        if (G.contains(next)) continue;
        if (G.elements_.size() >= cap) throw CapExceeded("group too large", cap);
        G.insert(std::move(next));
      }
    }
    return G;
  }

  /// Wraps an element list that is already known to be a group (e.g. the
  /// output of a filter over S_n). A small generating set is extracted
  /// greedily so orbit computations stay generator-driven.
  static PermGroup from_elements(int n, const std::vector<Permutation>& elements,
                                 std::size_t cap = kDefaultGroupCap) {
    std::vector<Permutation> gens;
    PermGroup current = generate(n, {}, cap);
    for (const auto& e : elements) {
      if (current.contains(e)) continue;
      gens.push_back(e);
      current = generate(n, gens, cap);
    }
    if (current.order() != elements.size())
      throw Error("from_elements: element list is not closed under composition");
    return current;
  }

  static PermGroup trivial(int n) { return generate(n, {}); }

  static PermGroup symmetric(int n, std::size_t cap = kDefaultGroupCap) {
    std::vector<Permutation> gens;
    if (n >= 2) {
      gens.push_back(Permutation::from_cycles(n, {{0, 1}}));
      if (n >= 3) gens.push_back(long_cycle(n));
    }
    return generate(n, std::move(gens), cap);
  }

  /// Generated by the 3-cycles (1 2 i), i = 3..n.
  static PermGroup alternating(int n, std::size_t cap = kDefaultGroupCap) {
    std::vector<Permutation> gens;
    for (int i = 2; i < n; ++i) gens.push_back(Permutation::from_cycles(n, {{0, 1, i}}));
    return generate(n, std::move(gens), cap);
  }

  static PermGroup cyclic(int n, std::size_t cap = kDefaultGroupCap) {
    std::vector<Permutation> gens;
    if (n >= 2) gens.push_back(long_cycle(n));
    return generate(n, std::move(gens), cap);
  }

  /// Rotation (1 2 ... n) and the reflection i -> n+1-i.
  static PermGroup dihedral(int n, std::size_t cap = kDefaultGroupCap) {
    std::vector<Permutation> gens;
    if (n >= 2) {
      gens.push_back(long_cycle(n));
      std::vector<int> refl(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) refl[static_cast<std::size_t>(i)] = n - 1 - i;
      gens.push_back(Permutation::from_images(std::move(refl)));
    }
    return generate(n, std::move(gens), cap);
  }

  /// Independent cyclic shifts along each axis of an n1 x ... x nk grid,
  /// flattened row-major (last axis fastest).
  static PermGroup grid(const std::vector<int>& dims, std::size_t cap = kDefaultGroupCap) {
    if (dims.empty()) throw ShapeError("grid needs at least one dimension");
    int n = 1;
    for (int d : dims) {
      if (d < 1) throw ShapeError("grid dimensions must be positive");
      n *= d;
    }
    std::vector<Permutation> gens;
    for (std::size_t axis = 0; axis < dims.size(); ++axis) {
      if (dims[axis] < 2) continue;
      std::vector<int> images(static_cast<std::size_t>(n));
      for (int flat = 0; flat < n; ++flat) {
        // Decode, shift the chosen axis by one, re-encode.
        std::vector<int> coord(dims.size());
        int rest = flat;
        for (std::size_t a = dims.size(); a-- > 0;) {
          coord[a] = rest % dims[a];
          rest /= dims[a];
        }
        coord[axis] = (coord[axis] + 1) % dims[axis];
        int out = 0;
        for (std::size_t a = 0; a < dims.size(); ++a) out = out * dims[a] + coord[a];
        images[static_cast<std::size_t>(flat)] = out;
      }
      gens.push_back(Permutation::from_images(std::move(images)));
    }
    return generate(n, std::move(gens), cap);
  }

 private:
  static Permutation long_cycle(int n) {
    std::vector<int> c(static_cast<std::size_t>(n));
    std::iota(c.begin(), c.end(), 0);
    return Permutation::from_cycles(n, {c});
  }

  void insert(Permutation p) {
    index_.emplace(p, elements_.size());
    elements_.push_back(std::move(p));
  }

  int n_ = 0;
  std::vector<Permutation> generators_;
  std::vector<Permutation> elements_;
  std::unordered_map<Permutation, std::size_t, PermutationHash> index_;
};

/// True iff every element of G lies in H.
inline bool is_subgroup(const PermGroup& G, const PermGroup& H) {
  if (G.degree() != H.degree()) throw ShapeError("is_subgroup: degree mismatch");
  if (G.order() > H.order() || H.order() % G.order() != 0) return false;
  // Generators suffice: H is closed, so <gens(G)> is inside H iff gens are.
  return std::all_of(G.generators().begin(), G.generators().end(),
                     [&](const Permutation& g) { return H.contains(g); });
}

/// Same element set (orders compared first).
inline bool same_group(const PermGroup& G, const PermGroup& H) {
  return G.degree() == H.degree() && G.order() == H.order() && is_subgroup(G, H);
}

}  // namespace ginet

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/perm_group.hpp"
#include "ginet/tensor.hpp"

namespace ginet {

enum class OrbitKind { layer, polynomial, equality_pattern };

inline std::string to_string(OrbitKind k) {
  switch (k) {
    case OrbitKind::layer: return "layer";
    case OrbitKind::polynomial: return "poly";
    case OrbitKind::equality_pattern: return "equality_pattern";
  }
  return "?";
}

/// Partition of the tuple space [n]^k. Class ids are 0..num_classes-1,
/// ordered by the code of each class's smallest member (its representative).
class OrbitPartition {
 public:
  int n() const noexcept { return n_; }
  int k() const noexcept { return k_; }
  OrbitKind kind() const noexcept { return kind_; }
  std::size_t num_classes() const noexcept { return representatives_.size(); }
  std::size_t num_tuples() const noexcept { return class_id_.size(); }

  const std::vector<std::int32_t>& class_ids() const noexcept { return class_id_; }
  std::int32_t class_of_code(std::size_t code) const { return class_id_[code]; }

  std::int32_t class_of(const TupleIndex& t) const {
    if (t.order() != k_) throw ShapeError("class_of: tuple order " + std::to_string(t.order()) + " != " + std::to_string(k_));
    for (int d : t.digits)
      if (d < 0 || d >= n_) throw ShapeError("class_of: tuple entry " + std::to_string(d) + " outside [0, " + std::to_string(n_) + ")");
    return class_id_[t.encode(n_)];
  }

  std::size_t representative_code(std::size_t cls) const { return representatives_.at(cls); }
  TupleIndex representative(std::size_t cls) const { return TupleIndex::decode(representative_code(cls), n_, k_); }
  std::size_t class_size(std::size_t cls) const { return sizes_.at(cls); }

  /// Member codes of one class, ascending.
  std::vector<std::size_t> members(std::size_t cls) const {
    std::vector<std::size_t> out;
    out.reserve(sizes_.at(cls));
    for (std::size_t c = 0; c < class_id_.size(); ++c)
      if (static_cast<std::size_t>(class_id_[c]) == cls) out.push_back(c);
    return out;
  }

  /// Every class of `this` lies inside a class of `coarser`.
  bool refines(const OrbitPartition& coarser) const {
    if (coarser.n_ != n_ || coarser.k_ != k_) return false;
    std::vector<std::int32_t> image(num_classes(), -1);
    for (std::size_t c = 0; c < class_id_.size(); ++c) {
      auto& slot = image[static_cast<std::size_t>(class_id_[c])];
      if (slot < 0) slot = coarser.class_id_[c];
      else if (slot != coarser.class_id_[c]) return false;
    }
    return true;
  }

  bool same_partition(const OrbitPartition& other) const {
    return n_ == other.n_ && k_ == other.k_ && class_id_ == other.class_id_;
  }

  /// Canonical relabeling of an arbitrary root/label array over [n]^k.
  template <typename LabelFn>
  static OrbitPartition from_labels(int n, int k, OrbitKind kind, std::size_t tuples, LabelFn label_of,
                                    std::size_t label_space) {
    OrbitPartition P;
    P.n_ = n;
    P.k_ = k;
    P.kind_ = kind;
    P.class_id_.resize(tuples);
    std::vector<std::int32_t> relabel(label_space, -1);
    for (std::size_t c = 0; c < tuples; ++c) {
      const std::size_t lbl = label_of(c);
      if (relabel[lbl] < 0) {
        relabel[lbl] = static_cast<std::int32_t>(P.representatives_.size());
        P.representatives_.push_back(c);
        P.sizes_.push_back(0);
      }
      P.class_id_[c] = relabel[lbl];
      ++P.sizes_[static_cast<std::size_t>(relabel[lbl])];
    }
    return P;
  }

 private:
  int n_ = 1;
  int k_ = 0;
  OrbitKind kind_ = OrbitKind::layer;
  std::vector<std::int32_t> class_id_;
  std::vector<std::size_t> representatives_;
  std::vector<std::size_t> sizes_;
};

namespace detail {

/// Union-find over flat codes, path halving + union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t size) : parent_(size), size_(size, 1) {
    std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

inline std::size_t swap_positions(std::size_t code, int n, int k, int pos) {
  // Swap digits pos and pos+1 (pos counted from the most significant digit).
  std::size_t lo = 1;  // weight of digit pos+1
  for (int i = 0; i < k - pos - 2; ++i) lo *= static_cast<std::size_t>(n);
  const std::size_t up = lo * static_cast<std::size_t>(n);  // weight of digit pos
  const std::size_t a = (code / up) % static_cast<std::size_t>(n);
  const std::size_t b = (code / lo) % static_cast<std::size_t>(n);
  return code - a * up - b * lo + b * up + a * lo;
}

inline OrbitPartition union_find_orbits(const PermGroup& G, int k, bool position_swaps, OrbitKind kind,
                                        std::size_t cap) {
  const int n = G.degree();
  const std::size_t tuples = checked_power(n, k, cap);
  if (tuples > std::numeric_limits<std::uint32_t>::max()) throw CapExceeded("tuple space exceeds 32-bit codes", cap);
  UnionFind uf(tuples);
  for (const auto& g : G.generators()) {
    const TupleAction act(g, k);
    for (std::size_t c = 0; c < tuples; ++c) uf.unite(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(act(c)));
  }
  if (position_swaps)
    for (int pos = 0; pos + 1 < k; ++pos)
      for (std::size_t c = 0; c < tuples; ++c)
        uf.unite(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(swap_positions(c, n, k, pos)));
  return OrbitPartition::from_labels(
      n, k, kind, tuples, [&](std::size_t c) { return static_cast<std::size_t>(uf.find(static_cast<std::uint32_t>(c))); },
      tuples);
}

}  // namespace detail

/// Orbits of G acting diagonally on [n]^k; the tensors solving the layer
/// fixed-point equation are exactly those constant on these classes.
inline OrbitPartition layer_classes(const PermGroup& G, int k, std::size_t cap = default_tuple_cap()) {
  return detail::union_find_orbits(G, k, false, OrbitKind::layer, cap);
}

/// k-classes: (i_1..i_k) ~ (j_1..j_k) iff j_l = g(i_sigma(l)) for some g in G
/// and sigma in S_k. S_k enters through its adjacent transpositions.
inline OrbitPartition poly_classes(const PermGroup& G, int k, std::size_t cap = default_tuple_cap()) {
  return detail::union_find_orbits(G, k, true, OrbitKind::polynomial, cap);
}

inline std::int32_t class_of(const OrbitPartition& P, const TupleIndex& t) { return P.class_of(t); }

/// |[n]^2 / G|.
inline std::size_t orbit_count_squared(const PermGroup& G) { return layer_classes(G, 2).num_classes(); }

/// Partition of [n]^k by equality pattern: tuples agree iff i_a = i_b <=> j_a = j_b.
/// Computed directly from restricted-growth strings, with no group at all.
inline OrbitPartition equality_pattern_partition(int n, int k, std::size_t cap = default_tuple_cap()) {
  const std::size_t tuples = checked_power(n, k, cap);
  std::map<std::vector<int>, std::size_t> pattern_label;
  std::vector<std::size_t> labels(tuples);
  std::vector<int> digits(static_cast<std::size_t>(k)), pattern(static_cast<std::size_t>(k));
  for (std::size_t c = 0; c < tuples; ++c) {
    std::size_t rest = c;
    for (int pos = k - 1; pos >= 0; --pos) {
      digits[static_cast<std::size_t>(pos)] = static_cast<int>(rest % static_cast<std::size_t>(n));
      rest /= static_cast<std::size_t>(n);
    }
    std::vector<int> first_seen;
    for (std::size_t pos = 0; pos < digits.size(); ++pos) {
      std::size_t block = 0;
      while (block < first_seen.size() && first_seen[block] != digits[pos]) ++block;
      if (block == first_seen.size()) first_seen.push_back(digits[pos]);
      pattern[pos] = static_cast<int>(block);
    }
    auto [it, inserted] = pattern_label.try_emplace(pattern, pattern_label.size());
    labels[c] = it->second;
  }
  return OrbitPartition::from_labels(n, k, OrbitKind::equality_pattern, tuples,
                                     [&](std::size_t c) { return labels[c]; }, pattern_label.size());
}

}  // namespace ginet

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ginet/error.hpp"

namespace ginet {

/// A bijection of {0, ..., n-1}. Stored as its image sequence; I/O is 1-based
/// cycle notation.
class Permutation {
 public:
  Permutation() = default;

  static Permutation identity(int n) {
    Permutation p;
    p.images_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p.images_[static_cast<std::size_t>(i)] = i;
    return p;
  }

  static Permutation from_images(std::vector<int> images) {
    const int n = static_cast<int>(images.size());
    std::vector<char> seen(images.size(), 0);
    for (int v : images) {
      if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)])
        throw ShapeError("image sequence is not a bijection of {0..n-1}");
      seen[static_cast<std::size_t>(v)] = 1;
    }
    Permutation p;
    p.images_ = std::move(images);
    return p;
  }

  /// Product of disjoint-or-not cycles given with 0-based points. Cycles are
  /// applied right to left, the usual convention for cycle products.
  static Permutation from_cycles(int n, const std::vector<std::vector<int>>& cycles) {
    Permutation result = identity(n);
    for (auto it = cycles.rbegin(); it != cycles.rend(); ++it) {
      const auto& cyc = *it;
      std::vector<int> seen;
      for (int v : cyc) {
        if (v < 0 || v >= n) throw ShapeError("cycle point " + std::to_string(v + 1) + " outside [1," + std::to_string(n) + "]");
        if (std::find(seen.begin(), seen.end(), v) != seen.end())
          throw ShapeError("cycle repeats point " + std::to_string(v + 1));
        seen.push_back(v);
      }
      Permutation c = identity(n);
      for (std::size_t i = 0; i < cyc.size(); ++i)
        c.images_[static_cast<std::size_t>(cyc[i])] = cyc[(i + 1) % cyc.size()];
      result = compose(c, result);
    }
    return result;
  }

  /// Convenience: 1-based cycle, e.g. cycle(3, {1, 2}) is the transposition (1 2).
  static Permutation cycle(int n, std::initializer_list<int> one_based) {
    std::vector<int> c;
    for (int v : one_based) c.push_back(v - 1);
    return from_cycles(n, {c});
  }

  /// Apply q first, then p.
  friend Permutation compose(const Permutation& p, const Permutation& q) {
    if (p.size() != q.size())
      throw ShapeError("compose: size mismatch " + std::to_string(p.size()) + " vs " + std::to_string(q.size()));
    Permutation r;
    r.images_.resize(q.images_.size());
    for (std::size_t i = 0; i < q.images_.size(); ++i)
      r.images_[i] = p.images_[static_cast<std::size_t>(q.images_[i])];
    return r;
  }

  Permutation inverse() const {
    Permutation r;
    r.images_.resize(images_.size());
    for (std::size_t i = 0; i < images_.size(); ++i)
      r.images_[static_cast<std::size_t>(images_[i])] = static_cast<int>(i);
    return r;
  }

  int operator()(int i) const { return images_[static_cast<std::size_t>(i)]; }
  int size() const noexcept { return static_cast<int>(images_.size()); }
  std::span<const int> images() const noexcept { return images_; }

  bool is_identity() const {
    for (std::size_t i = 0; i < images_.size(); ++i)
      if (images_[i] != static_cast<int>(i)) return false;
    return true;
  }

  int num_cycles() const {
    std::vector<char> seen(images_.size(), 0);
    int cycles = 0;
    for (std::size_t i = 0; i < images_.size(); ++i) {
      if (seen[i]) continue;
      ++cycles;
      for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(images_[j])) seen[j] = 1;
    }
    return cycles;
  }

  /// Parity via cycle structure: (n - #cycles) mod 2 transpositions.
  bool is_even() const { return (size() - num_cycles()) % 2 == 0; }

  /// 1-based cycle notation without fixed points; the identity prints as "()".
  std::string to_cycle_string() const {
    std::string out;
    std::vector<char> seen(images_.size(), 0);
    for (std::size_t i = 0; i < images_.size(); ++i) {
      if (seen[i] || images_[i] == static_cast<int>(i)) continue;
      out += '(';
      bool first = true;
      for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(images_[j])) {
        seen[j] = 1;
        if (!first) out += ' ';
        out += std::to_string(j + 1);
        first = false;
      }
      out += ')';
    }
    return out.empty() ? "()" : out;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation& a, const Permutation& b) { return a.images_ <=> b.images_; }

 private:
  std::vector<int> images_;
};

inline bool is_even(const Permutation& g) { return g.is_even(); }

struct PermutationHash {
  std::size_t operator()(const Permutation& p) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int v : p.images()) {
      h ^= static_cast<std::uint64_t>(v) + 1;
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

/// Action on a vector: result_i = x_{g^{-1}(i)}, computed as
/// result[g(i)] = x[i].
inline std::vector<double> apply_vector(const Permutation& g, std::span<const double> x) {
  if (static_cast<int>(x.size()) != g.size())
    throw ShapeError("apply_vector: vector length " + std::to_string(x.size()) + " != n = " + std::to_string(g.size()));
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[static_cast<std::size_t>(g(static_cast<int>(i)))] = x[i];
  return out;
}

}  // namespace ginet

template <>
struct std::hash<ginet::Permutation> : ginet::PermutationHash {};

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/network.hpp"
#include "ginet/poly_basis.hpp"
#include "ginet/product_gadget.hpp"
#include "ginet/rng.hpp"

namespace ginet {

inline constexpr int kApproxCheckSamples = 10'000;

struct ApproxOptions {
  double epsilon = 0.05;
  double lo = -1.0;
  double hi = 1.0;
  bool exact_mul = false;
  int check_samples = kApproxCheckSamples;
  TrainConfig train;
};

struct ApproxTerm {
  int degree = 0;
  std::size_t class_id = 0;
  TupleIndex representative;
  std::size_t class_size = 0;
  double alpha = 0.0;
  double gadget_target = 0.0;
  double gadget_error = 0.0;  // max error of the shared m^k for this degree
  double budget = 0.0;        // |alpha| * |tau| * gadget_error
};

struct ApproxReport {
  int n = 0;
  double epsilon = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double c = 0.0;
  bool exact_mul = false;
  double alpha_l1 = 0.0;
  std::vector<ApproxTerm> terms;
  std::map<int, ProductReport> gadgets;  // by degree
  double error_budget = 0.0;             // sum of term budgets
  double achieved_max_error = 0.0;
  int sample_count = 0;
  int max_order = 0;
};

struct Approximation {
  GInvariantNetwork network;
  ApproxReport report;
};

/// Seeded uniform sample of the box [lo, hi]^n, one point per row.
inline std::vector<std::vector<double>> sample_box(int n, double lo, double hi, int count, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::vector<double>> pts(static_cast<std::size_t>(count), std::vector<double>(static_cast<std::size_t>(n)));
  for (auto& p : pts)
    for (auto& v : p) v = rng.uniform(lo, hi);
  return pts;
}

/// Build a G-invariant network approximating the invariant polynomial p on
/// [lo, hi]^n: one F^tau per nonzero coefficient alpha_{k,tau}, one m^k per
/// degree trained to n^{-k} eps / ||alpha||_1 on [-c, c]^k, all combined into
/// a single network. The report's achieved error is measured on a seeded
/// sample of the box.
inline Approximation approximate_polynomial(std::shared_ptr<const PermGroup> G, const Polynomial& p, const ApproxOptions& opt,
                                            std::size_t cap = default_tuple_cap()) {
  if (!(opt.epsilon > 0.0)) throw ShapeError("approximate_polynomial: epsilon must be positive");
  if (!(opt.hi > opt.lo)) throw ShapeError("approximate_polynomial: empty box");
  if (opt.check_samples < 1) throw ShapeError("approximate_polynomial: need at least one check sample");
  const Expansion e = expand_in_basis(p, *G, cap);
  const int n = G->degree();

  ApproxReport rep;
  rep.n = n;
  rep.epsilon = opt.epsilon;
  rep.lo = opt.lo;
  rep.hi = opt.hi;
  rep.c = std::max(std::abs(opt.lo), std::abs(opt.hi));
  rep.exact_mul = opt.exact_mul;
  rep.alpha_l1 = e.l1_norm();

  std::map<int, FeatureBlock> gadgets;
  for (const auto& t : e.terms) {
    if (t.degree == 0 || gadgets.contains(t.degree)) continue;
    const double target = opt.epsilon / (std::pow(static_cast<double>(n), t.degree) * rep.alpha_l1);
    if (opt.exact_mul) {
      gadgets.emplace(t.degree, FeatureBlock{ExactProduct{t.degree}});
      ProductReport pr;
      pr.arity = t.degree;
      pr.box = rep.c;
      pr.target = target;
      pr.method = "exact";
      rep.gadgets.emplace(t.degree, pr);
      continue;
    }
    TrainConfig cfg = opt.train;
    cfg.box = rep.c;
    cfg.seed = SplitMix64::derive(opt.train.seed, static_cast<std::uint64_t>(t.degree)).next();
    ProductGadget g = train_product_mlp(t.degree, rep.c, target, cfg);
    rep.gadgets.emplace(t.degree, g.report);
    gadgets.emplace(t.degree, FeatureBlock{std::move(g)});
  }

  std::vector<std::pair<double, GInvariantNetwork>> nets;
  for (const auto& t : e.terms) {
    const OrbitPartition& P = *e.partitions.at(t.degree);
    ApproxTerm at;
    at.degree = t.degree;
    at.class_id = t.class_id;
    at.representative = t.representative;
    at.class_size = P.class_size(t.class_id);
    at.alpha = t.alpha;
    if (t.degree > 0) {
      const ProductReport& pr = rep.gadgets.at(t.degree);
      at.gadget_target = pr.target;
      at.gadget_error = pr.method == "tree" ? std::max(pr.grid_max_error, pr.error_bound) : pr.grid_max_error;
      at.budget = std::abs(t.alpha) * static_cast<double>(at.class_size) * at.gadget_error;
      nets.emplace_back(t.alpha, build_ftau(G, P, t.class_id, gadgets.at(t.degree)));
    } else {
      nets.emplace_back(t.alpha, build_ftau(G, P, t.class_id, FeatureBlock{IdentityMap{1}}));
    }
    rep.error_budget += at.budget;
    rep.terms.push_back(at);
  }
  if (nets.empty()) {
    // p = 0: a single constant term with coefficient 0.
    const OrbitPartition P0 = poly_classes(*G, 0, cap);
    nets.emplace_back(0.0, build_ftau(G, P0, 0, FeatureBlock{IdentityMap{1}}));
  }

  GInvariantNetwork F = build_unified(nets);
  rep.max_order = F.max_order();
  const auto pts = sample_box(n, opt.lo, opt.hi, opt.check_samples, SplitMix64::derive(opt.train.seed, 0xc4ec).next());
  for (const auto& x : pts) rep.achieved_max_error = std::max(rep.achieved_max_error, std::abs(F(x) - p.evaluate(x)));
  rep.sample_count = opt.check_samples;
  return {std::move(F), std::move(rep)};
}

}  // namespace ginet

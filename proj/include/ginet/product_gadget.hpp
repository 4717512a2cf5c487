#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/mlp.hpp"
#include "ginet/rng.hpp"

namespace ginet {

/// y_1 * ... * y_k, computed exactly. Stands in for a trained m^k when the
/// network structure is tested independently of optimization.
struct ExactProduct {
  int arity = 1;
  double operator()(std::span<const double> y) const {
    double p = 1.0;
    for (double v : y) p *= v;
    return p;
  }
};

/// A balanced binary tree of trained two-input product MLPs, one gadget per
/// level (each level sees a wider input range than the one below it).
struct ProductTree {
  int arity = 1;
  std::vector<Mlp> levels;

  double operator()(std::span<const double> y) const {
    std::vector<double> cur(y.begin(), y.end()), next;
    for (const auto& m : levels) {
      next.clear();
      for (std::size_t i = 0; i + 1 < cur.size(); i += 2) {
        const double pair[2] = {cur[i], cur[i + 1]};
        next.push_back(m.forward(pair)[0]);
      }
      if (cur.size() % 2) next.push_back(cur.back());
      cur.swap(next);
    }
    return cur.at(0);
  }
};

/// What a trained multiplication approximator achieved.
struct ProductReport {
  int arity = 1;
  double box = 1.0;
  double target = 0.0;
  double grid_max_error = 0.0;  // held-out grid over [-c, c]^k
  double error_bound = 0.0;     // for trees: propagated bound from per-level errors
  std::string method;           // "identity", "mlp", "tree"
  int epochs = 0;
  int readout_solves = 0;
  std::vector<double> level_errors;
  std::vector<int> widths;  // layer widths of the final network (input first)
};

namespace detail {

inline int grid_points_per_axis(int k, int total) {
  int per = 2;
  while (std::pow(per + 1, k) <= total) ++per;
  return per;
}

/// Regular grid over [-c, c]^k, one point per column.
inline Eigen::MatrixXd product_grid(int k, double c, int per_axis) {
  std::size_t total = 1;
  for (int i = 0; i < k; ++i) total *= static_cast<std::size_t>(per_axis);
  Eigen::MatrixXd G(k, static_cast<Eigen::Index>(total));
  for (std::size_t s = 0; s < total; ++s) {
    std::size_t rest = s;
    for (int a = k - 1; a >= 0; --a) {
      const auto idx = static_cast<int>(rest % static_cast<std::size_t>(per_axis));
      rest /= static_cast<std::size_t>(per_axis);
      G(a, static_cast<Eigen::Index>(s)) = -c + 2.0 * c * idx / (per_axis - 1);
    }
  }
  return G;
}

inline Eigen::MatrixXd column_products(const Eigen::MatrixXd& X) { return X.colwise().prod(); }

/// Hidden representation feeding the last affine layer.
inline Eigen::MatrixXd last_hidden(const Mlp& m, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd h = X;
  for (std::size_t i = 0; i + 1 < m.num_layers(); ++i) {
    Eigen::MatrixXd z = m.weight(i) * h;
    z.colwise() += m.bias(i);
    if (m.activation() == Activation::sigmoid)
      h = (1.0 + (-z.array()).exp()).inverse().matrix();
    else
      h = z.cwiseMax(0.0);
  }
  return h;
}

/// Least-squares solve for the last affine layer with the hidden layers fixed.
inline void solve_readout(Mlp& m, const Eigen::MatrixXd& X, const Eigen::MatrixXd& T) {
  const Eigen::MatrixXd h = last_hidden(m, X);
  Eigen::MatrixXd A(h.cols(), h.rows() + 1);
  A.leftCols(h.rows()) = h.transpose();
  A.col(h.rows()).setOnes();
  const Eigen::MatrixXd sol = A.colPivHouseholderQr().solve(T.transpose());
  const std::size_t last = m.num_layers() - 1;
  m.weight(last) = sol.topRows(h.rows()).transpose();
  m.bias(last) = sol.row(h.rows()).transpose();
}

/// Shift the output bias so m(0) = 0 exactly where it matters: the zero
/// channels produced off the k-class must contribute nothing to the sum.
inline void center_at_origin(Mlp& m) {
  const std::vector<double> zero(static_cast<std::size_t>(m.input_width()), 0.0);
  const double at_zero = m.forward(zero)[0];
  m.bias(m.num_layers() - 1)(0) -= at_zero;
}

/// Fold an input scale s and an output scale t into the network:
/// m'(y) = t * m(y / s).
inline void rescale(Mlp& m, double in_scale, double out_scale) {
  m.weight(0) /= in_scale;
  const std::size_t last = m.num_layers() - 1;
  m.weight(last) *= out_scale;
  m.bias(last) *= out_scale;
}

inline double grid_error(const Mlp& m, const Eigen::MatrixXd& grid, const Eigen::MatrixXd& truth) {
  return (m.forward_batch(grid) - truth).cwiseAbs().maxCoeff();
}

/// Train m on [-1,1]^k to the product. Hidden layers start in their
/// nonlinear range and the readout is solved exactly. If that misses
/// `target`, the last hidden layer is doubled (up to kMaxWidening times)
/// and the readout solved again; only then do rounds of full-batch gradient
/// descent alternate with readout solves, stopping early once a round
/// improves the grid error by less than 1%. Returns the best network seen.
inline constexpr int kMaxWidening = 3;
inline constexpr int kDescentRound = 100;

inline Mlp fit_unit_product(int k, double target, const TrainConfig& cfg, ProductReport& rep) {
  SplitMix64 rng = SplitMix64::derive(cfg.seed, static_cast<std::uint64_t>(k));
  Eigen::MatrixXd X(k, cfg.samples);
  for (Eigen::Index s = 0; s < X.cols(); ++s)
    for (int a = 0; a < k; ++a) X(a, s) = rng.uniform(-1.0, 1.0);
  const Eigen::MatrixXd T = column_products(X);
  const Eigen::MatrixXd grid = product_grid(k, 1.0, grid_points_per_axis(k, 10'201));
  const Eigen::MatrixXd truth = column_products(grid);

  constexpr double kFirstLayerSpread = 3.0;
  std::vector<int> widths{k};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(1);
  Mlp best;
  double best_err = INFINITY;
  for (int widen = 0; widen <= kMaxWidening && best_err > target; ++widen) {
    if (widen > 0 && widths.size() > 2) widths[widths.size() - 2] *= 2;
    Mlp m = Mlp::random(widths, cfg.activation, rng);
    for (Eigen::Index r = 0; r < m.weight(0).rows(); ++r) {
      for (Eigen::Index c = 0; c < m.weight(0).cols(); ++c) m.weight(0)(r, c) = rng.uniform(-kFirstLayerSpread, kFirstLayerSpread);
      m.bias(0)(r) = rng.uniform(-kFirstLayerSpread, kFirstLayerSpread);
    }
    solve_readout(m, X, T);
    ++rep.readout_solves;
    const double err = grid_error(m, grid, truth);
    if (err < best_err) {
      best_err = err;
      best = std::move(m);
    }
    if (widths.size() <= 2) break;
  }

  TrainConfig round_cfg = cfg;
  round_cfg.epochs = kDescentRound;
  Mlp m = best;
  for (int done = 0; best_err > target && done < cfg.epochs; done += kDescentRound) {
    m = mlp_train(m, X, T, round_cfg).model;
    rep.epochs += kDescentRound;
    solve_readout(m, X, T);
    ++rep.readout_solves;
    const double err = grid_error(m, grid, truth);
    const bool stalled = err > 0.99 * best_err;
    if (err < best_err) {
      best_err = err;
      best = m;
    }
    if (stalled) break;
  }
  rep.widths = best.widths();
  return best;
}

}  // namespace detail

/// A trained (or exact) approximator of prod y_i on [-c, c]^k with m(0) = 0.
struct ProductGadget {
  std::variant<Mlp, ProductTree> impl;
  ProductReport report;

  double operator()(std::span<const double> y) const {
    return std::visit(
        [&](const auto& g) {
          if constexpr (std::is_same_v<std::decay_t<decltype(g)>, Mlp>)
            return g.forward(y)[0];
          else
            return g(y);
        },
        impl);
  }
};

/// m^k: an MLP approximating the k-ary product on [-c, c]^k to `target`
/// max error on a held-out grid. k = 1 is the exact identity; k <= 3 is one
/// network; larger k composes two-input gadgets in a balanced tree whose
/// per-level targets are chosen so the propagated bound stays within
/// `target`. Throws TrainingError carrying the best error when the budget
/// runs out.
inline ProductGadget train_product_mlp(int k, double c, double target, const TrainConfig& cfg) {
  if (k < 1) throw ShapeError("train_product_mlp: arity must be >= 1");
  if (!(c > 0.0)) throw ShapeError("train_product_mlp: box half-width must be positive");
  if (!(target > 0.0)) throw ShapeError("train_product_mlp: target must be positive");
  ProductGadget out;
  out.report.arity = k;
  out.report.box = c;
  out.report.target = target;
  if (k == 1) {
    out.impl = Mlp::identity(1);
    out.report.method = "identity";
    out.report.widths = {1, 1};
    return out;
  }
  if (k <= 3) {
    const double scale = std::pow(c, k);
    Mlp m = detail::fit_unit_product(k, target / scale, cfg, out.report);
    detail::rescale(m, c, scale);
    detail::center_at_origin(m);
    const Eigen::MatrixXd grid = detail::product_grid(k, c, detail::grid_points_per_axis(k, 10'201));
    const double err = detail::grid_error(m, grid, detail::column_products(grid));
    out.report.method = "mlp";
    out.report.grid_max_error = err;
    out.report.error_bound = err;
    if (err > target)
      throw TrainingError("product MLP for k = " + std::to_string(k) + " reached max error " + std::to_string(err) +
                              ", target " + std::to_string(target),
                          err);
    out.impl = std::move(m);
    return out;
  }

  // Tree: level l multiplies values bounded by bound[l]. An error e_l at
  // level l is amplified by prod over higher levels of 2 * bound.
  int levels = 0;
  std::vector<double> bound{c};
  for (int width = k; width > 1; width = (width + 1) / 2) {
    ++levels;
    const double b = bound.back();
    bound.push_back(std::max(b * b, b) * (1.0 + 1e-3) + target);
  }
  std::vector<double> amplification(static_cast<std::size_t>(levels), 1.0);
  for (int l = levels - 2; l >= 0; --l)
    amplification[static_cast<std::size_t>(l)] = amplification[static_cast<std::size_t>(l) + 1] * 2.0 * bound[static_cast<std::size_t>(l) + 1];
  ProductTree tree;
  tree.arity = k;
  double predicted = 0.0;
  for (int l = 0; l < levels; ++l) {
    const double level_target = target / (levels * amplification[static_cast<std::size_t>(l)]);
    TrainConfig level_cfg = cfg;
    level_cfg.seed = cfg.seed + static_cast<std::uint64_t>(l) * 7919;
    ProductGadget g = train_product_mlp(2, bound[static_cast<std::size_t>(l)], level_target, level_cfg);
    out.report.level_errors.push_back(g.report.grid_max_error);
    if (g.report.widths.size() > out.report.widths.size() ||
        (g.report.widths.size() == out.report.widths.size() && g.report.widths > out.report.widths))
      out.report.widths = g.report.widths;
    out.report.epochs += g.report.epochs;
    out.report.readout_solves += g.report.readout_solves;
    predicted += amplification[static_cast<std::size_t>(l)] * g.report.grid_max_error;
    tree.levels.push_back(std::get<Mlp>(std::move(g.impl)));
  }
  // Held-out check on seeded random points (a full grid is too large here).
  SplitMix64 rng = SplitMix64::derive(cfg.seed, 0x7ee);
  std::vector<double> y(static_cast<std::size_t>(k));
  double worst = 0.0;
  for (int s = 0; s < 4096; ++s) {
    for (auto& v : y) v = rng.uniform(-c, c);
    worst = std::max(worst, std::abs(tree(y) - ExactProduct{k}(y)));
  }
  out.impl = std::move(tree);
  out.report.method = "tree";
  out.report.error_bound = predicted;
  out.report.grid_max_error = worst;
  return out;
}

}  // namespace ginet

#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/layers.hpp"
#include "ginet/mlp.hpp"
#include "ginet/poly_basis.hpp"
#include "ginet/product_gadget.hpp"

namespace ginet {

/// Identity on `width` channels (used to pad unified networks).
struct IdentityMap {
  int width = 1;
};

/// Entrywise activation on `width` channels.
struct ActivationMap {
  Activation activation = Activation::rectifier;
  int width = 1;
};

/// A function applied to the feature vector of every tuple independently.
/// Any such map is equivariant for every G <= S_n.
struct FeatureBlock {
  std::variant<Mlp, ExactProduct, ProductGadget, IdentityMap, ActivationMap> fn;

  int in_width() const {
    return std::visit(
        [](const auto& f) -> int {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Mlp>) return f.input_width();
          else if constexpr (std::is_same_v<T, ExactProduct>) return f.arity;
          else if constexpr (std::is_same_v<T, ProductGadget>) return f.report.arity;
          else return f.width;
        },
        fn);
  }

  int out_width() const {
    return std::visit(
        [](const auto& f) -> int {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Mlp>) return f.output_width();
          else if constexpr (std::is_same_v<T, ExactProduct> || std::is_same_v<T, ProductGadget>) return 1;
          else return f.width;
        },
        fn);
  }

  void apply(std::span<const double> in, std::span<double> out) const {
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Mlp>) {
            const auto y = f.forward(in);
            std::copy(y.begin(), y.end(), out.begin());
          } else if constexpr (std::is_same_v<T, ExactProduct> || std::is_same_v<T, ProductGadget>) {
            out[0] = f(in);
          } else if constexpr (std::is_same_v<T, IdentityMap>) {
            std::copy(in.begin(), in.end(), out.begin());
          } else {
            for (std::size_t i = 0; i < in.size(); ++i) out[i] = activate(f.activation, in[i]);
          }
        },
        fn);
  }

  std::string describe() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Mlp>) return "mlp";
          else if constexpr (std::is_same_v<T, ExactProduct>) return "exact_product";
          else if constexpr (std::is_same_v<T, ProductGadget>) return "product_" + f.report.method;
          else if constexpr (std::is_same_v<T, IdentityMap>) return "identity";
          else return to_string(f.activation);
        },
        fn);
  }
};

/// Network stages. The pre-invariant part acts on tensors R^{n^k x a}; the
/// invariant stage maps to R^b; head stages are ordinary MLPs.
struct EquivariantStage {
  EquivariantLayer layer;
};
struct ActivationStage {
  Activation activation;
};
/// Block-diagonal feature map: blocks consume consecutive channel ranges.
struct FeatureMapStage {
  std::vector<FeatureBlock> blocks;
};
struct LiftStage {
  int order;
};
struct DownStage {
  int order;
};
struct InvariantStage {
  EquivariantLayer layer;  // out_order == 0
};
struct HeadStage {
  Mlp mlp;
};

using Stage = std::variant<EquivariantStage, ActivationStage, FeatureMapStage, LiftStage, DownStage, InvariantStage, HeadStage>;

/// F = m o h o L_d o sigma o ... o sigma o L_1 over a permutation group.
class GInvariantNetwork {
 public:
  GInvariantNetwork(std::shared_ptr<const PermGroup> group, int input_channels, std::vector<Stage> stages)
      : group_(std::move(group)), input_channels_(input_channels), stages_(std::move(stages)) {
    validate();
  }

  const PermGroup& group() const { return *group_; }
  const std::shared_ptr<const PermGroup>& group_ptr() const { return group_; }
  int input_channels() const noexcept { return input_channels_; }
  const std::vector<Stage>& stages() const noexcept { return stages_; }
  int max_order() const noexcept { return max_order_; }
  int output_width() const noexcept { return output_width_; }

  /// x is n x input_channels, feature index fastest.
  std::vector<double> forward(std::span<const double> x) const {
    const int n = group_->degree();
    if (static_cast<int>(x.size()) != n * input_channels_)
      throw ShapeError("network input has " + std::to_string(x.size()) + " entries, expected " + std::to_string(n * input_channels_));
    Tensor t(n, 1, input_channels_);
    t.data.assign(x.begin(), x.end());
    std::vector<double> v;
    bool invariant = false;
    for (const auto& stage : stages_) {
      std::visit(
          [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, EquivariantStage>) {
              t = apply_layer(s.layer, t);
            } else if constexpr (std::is_same_v<T, ActivationStage>) {
              for (auto& e : t.data) e = activate(s.activation, e);
            } else if constexpr (std::is_same_v<T, FeatureMapStage>) {
              t = apply_feature_map(s, t);
            } else if constexpr (std::is_same_v<T, LiftStage>) {
              t = lift_U(t, s.order);
            } else if constexpr (std::is_same_v<T, DownStage>) {
              t = down_D(t, s.order);
            } else if constexpr (std::is_same_v<T, InvariantStage>) {
              const Tensor out = apply_layer(s.layer, t);
              v = out.data;
              invariant = true;
            } else {
              v = s.mlp.forward(v);
            }
          },
          stage);
    }
    if (!invariant) throw Error("network has no invariant stage");
    return v;
  }

  double operator()(std::span<const double> x) const { return forward(x).at(0); }

  static Tensor apply_feature_map(const FeatureMapStage& s, const Tensor& t) {
    int out_ch = 0;
    for (const auto& b : s.blocks) out_ch += b.out_width();
    Tensor out(t.n, t.order, out_ch);
    const std::size_t tuples = t.num_tuples();
    for (std::size_t I = 0; I < tuples; ++I) {
      std::span<const double> in(&t.data[I * static_cast<std::size_t>(t.channels)], static_cast<std::size_t>(t.channels));
      std::span<double> dst(&out.data[I * static_cast<std::size_t>(out_ch)], static_cast<std::size_t>(out_ch));
      std::size_t ip = 0, op = 0;
      for (const auto& b : s.blocks) {
        const auto iw = static_cast<std::size_t>(b.in_width()), ow = static_cast<std::size_t>(b.out_width());
        b.apply(in.subspan(ip, iw), dst.subspan(op, ow));
        ip += iw;
        op += ow;
      }
    }
    return out;
  }

 private:
  /// Stage shapes chain; exactly one invariant stage, followed only by heads.
  void validate() {
    if (!group_) throw ShapeError("network needs a group");
    const int n = group_->degree();
    int order = 1, channels = input_channels_, width = -1;
    max_order_ = 1;
    bool seen_invariant = false;
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      const std::string where = "stage " + std::to_string(i) + ": ";
      std::visit(
          [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, HeadStage>) {
              if (!seen_invariant) throw ShapeError(where + "MLP head before the invariant stage");
              if (s.mlp.input_width() != width) throw ShapeError(where + "head input width mismatch");
              width = s.mlp.output_width();
              return;
            } else {
              if (seen_invariant) throw ShapeError(where + "tensor stage after the invariant stage");
            }
            if constexpr (std::is_same_v<T, EquivariantStage> || std::is_same_v<T, InvariantStage>) {
              const auto& S = s.layer.space();
              if (S.n() != n) throw ShapeError(where + "layer degree differs from network group");
              if (S.in_order() != order || S.in_width() != channels)
                throw ShapeError(where + "layer expects order " + std::to_string(S.in_order()) + " x " + std::to_string(S.in_width()) +
                                 ", got " + std::to_string(order) + " x " + std::to_string(channels));
              if (!same_group(S.group(), *group_)) throw ShapeError(where + "layer built for a different group");
              if constexpr (std::is_same_v<T, InvariantStage>) {
                if (S.out_order() != 0) throw ShapeError(where + "invariant stage must have output order 0");
                seen_invariant = true;
                width = S.out_width();
              } else {
                order = S.out_order();
                channels = S.out_width();
              }
            } else if constexpr (std::is_same_v<T, FeatureMapStage>) {
              int in = 0, out = 0;
              for (const auto& b : s.blocks) {
                in += b.in_width();
                out += b.out_width();
              }
              if (in != channels) throw ShapeError(where + "feature map consumes " + std::to_string(in) + " channels, got " + std::to_string(channels));
              channels = out;
            } else if constexpr (std::is_same_v<T, LiftStage>) {
              if (s.order < order) throw ShapeError(where + "lift to lower order");
              order = s.order;
            } else if constexpr (std::is_same_v<T, DownStage>) {
              if (s.order > order) throw ShapeError(where + "down to higher order");
              order = s.order;
            }
            max_order_ = std::max(max_order_, order);
          },
          stages_[i]);
    }
    if (!seen_invariant) throw ShapeError("network has no invariant stage");
    output_width_ = width;
  }

  std::shared_ptr<const PermGroup> group_;
  int input_channels_;
  std::vector<Stage> stages_;
  int max_order_ = 1;
  int output_width_ = 0;
};

/// Largest |F(g.x) - F(x)| over the generators.
inline double invariance_defect(const GInvariantNetwork& F, std::span<const double> x) {
  const double base = F(x);
  double worst = 0.0;
  const int a = F.input_channels();
  for (const auto& g : F.group().generators()) {
    Tensor t(F.group().degree(), 1, a);
    t.data.assign(x.begin(), x.end());
    worst = std::max(worst, std::abs(F(apply_tensor(g, t).data) - base));
  }
  return worst;
}

/// F^tau = s o M^k o L^tau. For k = 0 (p^tau = 1) the network is the
/// constant invariant layer with bias 1. `gadget` must take k inputs.
inline GInvariantNetwork build_ftau(std::shared_ptr<const PermGroup> G, const OrbitPartition& tau_partition,
                                    std::size_t tau, FeatureBlock gadget) {
  const int k = tau_partition.k();
  if (tau_partition.n() != G->degree()) throw ShapeError("build_ftau: k-class partition built for a different degree");
  if (k == 0) {
    EquivariantLayer constant(LayerSpace(G, 1, 0, 1, 1));
    constant.bias(0, 0) = 1.0;
    return GInvariantNetwork(G, 1, {InvariantStage{std::move(constant)}});
  }
  if (gadget.in_width() != k || gadget.out_width() != 1)
    throw ShapeError("build_ftau: gadget must map " + std::to_string(k) + " inputs to 1 output, got " +
                     std::to_string(gadget.in_width()) + " -> " + std::to_string(gadget.out_width()));
  std::vector<Stage> stages;
  stages.push_back(EquivariantStage{l_tau(G, tau_partition, tau)});
  stages.push_back(FeatureMapStage{{std::move(gadget)}});
  stages.push_back(InvariantStage{summation_layer(G, k, 1)});
  return GInvariantNetwork(std::move(G), 1, std::move(stages));
}

namespace detail {

enum class StageClass { linear, featurewise };

struct TermPlan {
  std::vector<Stage> tensor_stages;  // before the invariant stage
  std::optional<EquivariantLayer> invariant;
  std::vector<Mlp> heads;
};

inline TermPlan plan_term(const GInvariantNetwork& F) {
  TermPlan plan;
  for (const auto& st : F.stages()) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, LiftStage> || std::is_same_v<T, DownStage>)
            throw ShapeError("build_unified: terms must not contain lift/down stages");
          else if constexpr (std::is_same_v<T, InvariantStage>) {
            plan.invariant = s.layer;
          } else if constexpr (std::is_same_v<T, HeadStage>)
            plan.heads.push_back(s.mlp);
          else
            plan.tensor_stages.push_back(s);
        },
        st);
  }
  if (!plan.invariant) throw ShapeError("build_unified: term without invariant stage");
  return plan;
}

inline StageClass classify(const Stage& s) {
  return std::holds_alternative<EquivariantStage>(s) ? StageClass::linear : StageClass::featurewise;
}

inline FeatureBlock as_feature_block(const Stage& s, int channels) {
  if (const auto* a = std::get_if<ActivationStage>(&s)) return FeatureBlock{ActivationMap{a->activation, channels}};
  throw ShapeError("not a feature-wise stage");
}

}  // namespace detail

/// sum_t alpha_t F_t realized as one G-invariant network: every term is
/// lifted to the common max order d (each linear stage wrapped as U L D),
/// the terms run side by side in concatenated features, and a linear head
/// with weights alpha sums them.
inline GInvariantNetwork build_unified(const std::vector<std::pair<double, GInvariantNetwork>>& terms) {
  if (terms.empty()) throw ShapeError("build_unified: no terms");
  const auto G = terms.front().second.group_ptr();
  const int a = terms.front().second.input_channels();
  int d = 1;
  for (const auto& [alpha, F] : terms) {
    if (!same_group(F.group(), *G)) throw ShapeError("build_unified: terms use different groups");
    if (F.input_channels() != a) throw ShapeError("build_unified: terms differ in input channels");
    if (F.output_width() != 1) throw ShapeError("build_unified: terms must be scalar-valued");
    d = std::max(d, F.max_order());
  }

  std::vector<detail::TermPlan> plans;
  for (const auto& [alpha, F] : terms) plans.push_back(detail::plan_term(F));

  // Every term starts with a linear stage so the shared input can be stacked.
  for (auto& p : plans) {
    if (p.tensor_stages.empty() || detail::classify(p.tensor_stages.front()) != detail::StageClass::linear)
      p.tensor_stages.insert(p.tensor_stages.begin(), EquivariantStage{identity_layer(G, 1, a)});
  }
  std::size_t depth = 0;
  for (const auto& p : plans) depth = std::max(depth, p.tensor_stages.size());

  // Track each term's (order, channels) as it flows through its own stages.
  std::vector<int> order(plans.size(), 1), channels(plans.size(), a);

  std::vector<Stage> stages;
  if (d > 1) stages.push_back(LiftStage{d});
  for (std::size_t idx = 0; idx < depth; ++idx) {
    bool any_linear = false, any_feature = false;
    for (const auto& p : plans) {
      if (idx >= p.tensor_stages.size()) continue;
      (detail::classify(p.tensor_stages[idx]) == detail::StageClass::linear ? any_linear : any_feature) = true;
    }
    if (any_linear && any_feature)
      throw ShapeError("build_unified: terms disagree on stage kind at position " + std::to_string(idx));
    if (any_linear) {
      std::optional<EquivariantLayer> combined;
      for (std::size_t t = 0; t < plans.size(); ++t) {
        EquivariantLayer L = idx < plans[t].tensor_stages.size()
                                 ? std::get<EquivariantStage>(plans[t].tensor_stages[idx]).layer
                                 : identity_layer(G, order[t], channels[t]);
        order[t] = L.space().out_order();
        channels[t] = L.space().out_width();
        EquivariantLayer lifted = lift_layer(L, d);
        if (!combined) combined = std::move(lifted);
        else combined = idx == 0 ? stack_layers(*combined, lifted) : concat_layers(*combined, lifted);
      }
      stages.push_back(EquivariantStage{std::move(*combined)});
    } else {
      FeatureMapStage fm;
      for (std::size_t t = 0; t < plans.size(); ++t) {
        if (idx >= plans[t].tensor_stages.size()) {
          fm.blocks.push_back(FeatureBlock{IdentityMap{channels[t]}});
          continue;
        }
        const Stage& s = plans[t].tensor_stages[idx];
        if (const auto* f = std::get_if<FeatureMapStage>(&s)) {
          int out = 0;
          for (const auto& b : f->blocks) {
            fm.blocks.push_back(b);
            out += b.out_width();
          }
          channels[t] = out;
        } else {
          fm.blocks.push_back(detail::as_feature_block(s, channels[t]));
        }
      }
      stages.push_back(std::move(fm));
    }
  }

  // Invariant stage: block-diagonal lifted invariant layers.
  std::optional<EquivariantLayer> inv;
  for (std::size_t t = 0; t < plans.size(); ++t) {
    const EquivariantLayer& h = *plans[t].invariant;
    if (h.space().in_order() != order[t] || h.space().in_width() != channels[t])
      throw ShapeError("build_unified: term " + std::to_string(t) + " invariant stage does not match its tensor stages");
    EquivariantLayer lifted = lift_layer(h, d);
    inv = inv ? concat_layers(*inv, lifted) : std::move(lifted);
  }
  stages.push_back(InvariantStage{std::move(*inv)});

  // Term heads side by side (all terms must agree on head depth).
  const std::size_t head_depth = plans.front().heads.size();
  for (const auto& p : plans)
    if (p.heads.size() != head_depth) throw ShapeError("build_unified: terms differ in head depth");
  for (std::size_t h = 0; h < head_depth; ++h) {
    Mlp m = plans.front().heads[h];
    for (std::size_t t = 1; t < plans.size(); ++t) m = concat_mlps(m, plans[t].heads[h]);
    stages.push_back(HeadStage{std::move(m)});
  }

  Mlp sum = Mlp::zeros({static_cast<int>(terms.size()), 1}, Activation::rectifier);
  for (std::size_t t = 0; t < terms.size(); ++t) sum.weight(0)(0, static_cast<Eigen::Index>(t)) = terms[t].first;
  stages.push_back(HeadStage{std::move(sum)});
  return GInvariantNetwork(G, a, std::move(stages));
}

}  // namespace ginet

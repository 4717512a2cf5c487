#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ginet/analysis.hpp"
#include "ginet/approx.hpp"
#include "ginet/error.hpp"
#include "ginet/io.hpp"
#include "ginet/layers.hpp"
#include "ginet/orbits.hpp"
#include "ginet/perm_group.hpp"

namespace ginet::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kUsageError = 2 };

using Json = nlohmann::ordered_json;

struct RunConfig {
  std::string command;
  std::string group_path;
  std::string poly_path;
  int k = 1;
  std::string kind = "layer";
  std::string dump_path;
  std::vector<int> order{1, 1};
  std::vector<int> features{1, 1};
  std::string dense_path;
  double epsilon = 0.05;
  std::vector<double> box{-1.0, 1.0};
  std::uint64_t seed = 0;
  bool exact_mul = false;
  int epochs = TrainConfig{}.epochs;
  int samples = TrainConfig{}.samples;
  std::vector<int> hidden = TrainConfig{}.hidden;
  std::string activation = to_string(TrainConfig{}.activation);
  int n = 4;
  int max_order = 1;
  int trials = 100;
  std::vector<std::string> supergroup_paths;
  std::string report_path;
  std::optional<std::size_t> cap;
  bool timings = false;
};

namespace detail {

inline Json permutation_json(const Permutation& p) { return p.to_cycle_string(); }

inline Json group_json(const PermGroup& G) {
  Json gens = Json::array();
  for (const auto& g : G.generators()) gens.push_back(g.to_cycle_string());
  return Json{{"degree", G.degree()}, {"order", G.order()}, {"generators", gens}};
}

inline Json tuple_json(const TupleIndex& t) {
  Json a = Json::array();
  for (int d : t.digits) a.push_back(d + 1);
  return a;
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write '" + path + "'", 0);
  out << text;
}

inline Json config_json(const RunConfig& c, std::size_t cap) {
  Json j{{"command", c.command}};
  const auto& cmd = c.command;
  if (!c.group_path.empty()) j["group"] = c.group_path;
  if (cmd == "orbits") {
    j["k"] = c.k;
    j["kind"] = c.kind;
  } else if (cmd == "basis") {
    j["order"] = c.order;
    j["features"] = c.features;
  } else if (cmd == "approx") {
    j["poly"] = c.poly_path;
    j["epsilon"] = c.epsilon;
    j["box"] = c.box;
    j["seed"] = c.seed;
    j["exact_mul"] = c.exact_mul;
    j["train"] = Json{{"epochs", c.epochs}, {"samples", c.samples}, {"hidden", c.hidden}, {"activation", c.activation},
                      {"step_size", TrainConfig{}.step_size}, {"momentum", TrainConfig{}.momentum}};
  } else if (cmd == "verify an-sn") {
    j["n"] = c.n;
    j["max_order"] = c.max_order;
  } else if (cmd == "verify vandermonde") {
    j["n"] = c.n;
    j["max_order"] = c.max_order;
    j["seed"] = c.seed;
    j["trials"] = c.trials;
  } else if (cmd == "verify necessary") {
    j["supergroups"] = c.supergroup_paths;
  }
  j["tuple_cap"] = cap;
  return j;
}

struct Outcome {
  Json results;
  int code = kOk;
};

inline Outcome run_orbits(const RunConfig& c, std::size_t cap, std::ostream& out) {
  if (c.kind != "layer" && c.kind != "poly") throw ShapeError("--kind must be 'layer' or 'poly'");
  const PermGroup G = parse_group_file(c.group_path);
  if (c.k < 0) throw ShapeError("--k must be >= 0");
  const OrbitPartition P = c.kind == "layer" ? layer_classes(G, c.k, cap) : poly_classes(G, c.k, cap);
  out << "n: " << G.degree() << "\nk: " << c.k << "\nkind: " << c.kind << "\nnum_classes: " << P.num_classes() << "\n";
  if (!c.dump_path.empty()) {
    std::string csv = "code,class_id\n";
    for (std::size_t code = 0; code < P.num_tuples(); ++code)
      csv += std::to_string(code) + "," + std::to_string(P.class_of_code(code)) + "\n";
    write_text(c.dump_path, csv);
  }
  Json classes = Json::array();
  for (std::size_t cls = 0; cls < P.num_classes(); ++cls)
    classes.push_back(Json{{"class_id", cls}, {"representative", tuple_json(P.representative(cls))}, {"size", P.class_size(cls)}});
  return {Json{{"group", group_json(G)}, {"k", c.k}, {"kind", c.kind}, {"num_classes", P.num_classes()}, {"classes", classes}}};
}

inline Outcome run_basis(const RunConfig& c, std::size_t cap, std::ostream& out) {
  if (c.order.size() != 2 || c.features.size() != 2) throw ShapeError("--order and --features take two values");
  const auto G = std::make_shared<const PermGroup>(parse_group_file(c.group_path));
  const int k = c.order[0], l = c.order[1], a = c.features[0], b = c.features[1];
  const LayerSpace S(G, k, l, a, b, cap);
  out << "n: " << S.n() << "\nin_order: " << k << "\nout_order: " << l << "\nin_width: " << a << "\nout_width: " << b
      << "\nlinear_classes: " << S.linear_partition().num_classes() << "\nbias_classes: " << S.bias_partition().num_classes()
      << "\nlinear_dim: " << S.linear_dim() << "\nbias_dim: " << S.bias_dim() << "\n";
  if (!c.dense_path.empty()) {
    // One basis element per (class, i, j); rows J*b+j, columns I*a+i.
    const auto& P = S.linear_partition();
    const std::size_t in_tuples = checked_power(S.n(), k, cap);
    std::vector<std::vector<std::size_t>> members(P.num_classes());
    for (std::size_t code = 0; code < P.num_tuples(); ++code) members[static_cast<std::size_t>(P.class_of_code(code))].push_back(code);
    std::string csv = "basis,kind,class,in_feature,out_feature,row,col,value\n";
    std::size_t index = 0;
    for (std::size_t cls = 0; cls < P.num_classes(); ++cls)
      for (int i = 0; i < a; ++i)
        for (int j = 0; j < b; ++j, ++index)
          for (std::size_t code : members[cls]) {
            const std::size_t row = code / in_tuples * static_cast<std::size_t>(b) + static_cast<std::size_t>(j);
            const std::size_t col = code % in_tuples * static_cast<std::size_t>(a) + static_cast<std::size_t>(i);
            csv += std::to_string(index) + ",linear," + std::to_string(cls) + "," + std::to_string(i) + "," + std::to_string(j) + "," +
                   std::to_string(row) + "," + std::to_string(col) + ",1\n";
          }
    const auto& B = S.bias_partition();
    for (std::size_t cls = 0; cls < B.num_classes(); ++cls)
      for (int j = 0; j < b; ++j, ++index)
        for (std::size_t code = 0; code < B.num_tuples(); ++code)
          if (static_cast<std::size_t>(B.class_of_code(code)) == cls)
            csv += std::to_string(index) + ",bias," + std::to_string(cls) + ",," + std::to_string(j) + "," +
                   std::to_string(code * static_cast<std::size_t>(b) + static_cast<std::size_t>(j)) + ",,1\n";
    write_text(c.dense_path, csv);
  }
  return {Json{{"group", group_json(*G)},
               {"in_order", k},
               {"out_order", l},
               {"in_width", a},
               {"out_width", b},
               {"linear_classes", S.linear_partition().num_classes()},
               {"bias_classes", S.bias_partition().num_classes()},
               {"linear_dim", S.linear_dim()},
               {"bias_dim", S.bias_dim()}}};
}

inline Json product_report_json(const ProductReport& r) {
  return Json{{"arity", r.arity},         {"box", r.box},
              {"target", r.target},       {"method", r.method},
              {"max_error", r.grid_max_error}, {"error_bound", r.error_bound},
              {"epochs", r.epochs},       {"readout_solves", r.readout_solves},
              {"level_errors", r.level_errors}, {"widths", r.widths}};
}

inline Outcome run_approx(const RunConfig& c, std::size_t cap, std::ostream& out) {
  if (c.box.size() != 2) throw ShapeError("--box takes two values");
  const auto G = std::make_shared<const PermGroup>(parse_group_file(c.group_path));
  const Polynomial p = parse_poly_file(c.poly_path, G->degree());
  ApproxOptions opt;
  opt.epsilon = c.epsilon;
  opt.lo = c.box[0];
  opt.hi = c.box[1];
  opt.exact_mul = c.exact_mul;
  opt.train.seed = c.seed;
  opt.train.epochs = c.epochs;
  opt.train.samples = c.samples;
  opt.train.hidden = c.hidden;
  opt.train.activation = parse_activation(c.activation);
  const auto [F, rep] = approximate_polynomial(G, p, opt, cap);

  out << "terms: " << rep.terms.size() << "\n";
  for (const auto& t : rep.terms) {
    std::string rep_str;
    for (int d : t.representative.digits) rep_str += (rep_str.empty() ? "" : " ") + std::to_string(d + 1);
    out << "  degree " << t.degree << " class " << t.class_id << " (" << rep_str << ") size " << t.class_size << " alpha " << fmt(t.alpha)
        << " gadget_error " << fmt(t.gadget_error) << "\n";
  }
  out << "alpha_l1: " << fmt(rep.alpha_l1) << "\nerror_budget: " << fmt(rep.error_budget) << "\nmax_order: " << rep.max_order
      << "\nsample_count: " << rep.sample_count << "\nachieved_max_error: " << fmt(rep.achieved_max_error) << "\nepsilon: " << fmt(rep.epsilon)
      << "\n";

  Json terms = Json::array();
  for (const auto& t : rep.terms)
    terms.push_back(Json{{"degree", t.degree},
                         {"class_id", t.class_id},
                         {"representative", tuple_json(t.representative)},
                         {"class_size", t.class_size},
                         {"alpha", t.alpha},
                         {"gadget_target", t.gadget_target},
                         {"training_error", t.gadget_error},
                         {"budget", t.budget}});
  Json gadgets = Json::object();
  for (const auto& [k, g] : rep.gadgets) gadgets[std::to_string(k)] = product_report_json(g);
  const bool ok = rep.achieved_max_error <= rep.epsilon;
  return {Json{{"group", group_json(*G)},
               {"polynomial_terms", p.num_terms()},
               {"expansion", terms},
               {"alpha_l1", rep.alpha_l1},
               {"box_radius", rep.c},
               {"gadgets", gadgets},
               {"error_budget", rep.error_budget},
               {"max_order", rep.max_order},
               {"sample_count", rep.sample_count},
               {"achieved_max_error", rep.achieved_max_error},
               {"within_epsilon", ok}},
          ok ? kOk : kVerificationFailed};
}

inline Outcome run_an_sn(const RunConfig& c, std::size_t cap, std::ostream& out) {
  const AnSnReport rep = an_sn_layer_equality(c.n, c.max_order, cap);
  out << "t  A_n  S_n  identical  required\n";
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    out << r.total_order << "  " << r.alternating_classes << "  " << r.symmetric_classes << "  " << (r.identical ? "yes" : "no") << "  "
        << (r.must_coincide ? "yes" : "no") << "\n";
    rows.push_back(Json{{"t", r.total_order},
                        {"alternating_classes", r.alternating_classes},
                        {"symmetric_classes", r.symmetric_classes},
                        {"identical", r.identical},
                        {"must_coincide", r.must_coincide}});
  }
  out << "holds: " << (rep.holds ? "true" : "false") << "\n";
  return {Json{{"n", rep.n}, {"rows", rows}, {"holds", rep.holds}}, rep.holds ? kOk : kVerificationFailed};
}

inline Outcome run_vandermonde(const RunConfig& c, std::ostream& out) {
  const VandermondeReport rep = vandermonde_obstruction(c.n, c.max_order, c.seed, c.trials);
  out << "n: " << rep.n << "\nmax_order: " << rep.max_order << "\ntrials: " << rep.trials
      << "\nmax_difference: " << fmt(rep.max_difference) << "\nall_equal: " << (rep.all_equal ? "true" : "false")
      << "\nassertion_applies: " << (rep.assertion_applies ? "true" : "false") << "\ngap: " << fmt(rep.gap)
      << "\nholds: " << (rep.holds ? "true" : "false") << "\n";
  return {Json{{"n", rep.n},
               {"max_order", rep.max_order},
               {"trials", rep.trials},
               {"x0", rep.x0},
               {"max_difference", rep.max_difference},
               {"all_equal", rep.all_equal},
               {"assertion_applies", rep.assertion_applies},
               {"gap", rep.gap},
               {"holds", rep.holds}},
          rep.holds ? kOk : kVerificationFailed};
}

inline Outcome run_necessary(const RunConfig& c, std::ostream& out) {
  const PermGroup G = parse_group_file(c.group_path);
  std::optional<std::vector<PermGroup>> explicit_list;
  if (!c.supergroup_paths.empty()) {
    explicit_list.emplace();
    for (const auto& path : c.supergroup_paths) explicit_list->push_back(parse_group_file(path));
  }
  const NecessaryConditionReport rep = necessary_condition_check(G, explicit_list);
  out << "group_order: " << rep.group_order << "\norbit_count: " << rep.orbit_count << "\nsupergroups: " << rep.supergroups.size() << "\n";
  Json list = Json::array();
  for (const auto& h : rep.supergroups) {
    out << "  order " << h.order << " orbit_count " << h.orbit_count << " " << (h.strictly_fewer ? "satisfies" : "violates") << "\n";
    Json gens = Json::array();
    for (const auto& g : h.generators) gens.push_back(g.to_cycle_string());
    list.push_back(Json{{"order", h.order}, {"orbit_count", h.orbit_count}, {"strictly_fewer", h.strictly_fewer}, {"generators", gens}});
  }
  out << "condition_holds: " << (rep.holds ? "true" : "false") << "\n";
  if (rep.is_two_closed) out << "is_two_closed: " << (*rep.is_two_closed ? "true" : "false") << "\n";
  out << "cross_check: " << (rep.cross_check_ok ? "consistent" : "INCONSISTENT") << "\n";
  Json r{{"group", group_json(G)},
         {"orbit_count", rep.orbit_count},
         {"orbits_on_points", rep.orbits_on_points},
         {"enumerated", rep.enumerated},
         {"supergroups", list},
         {"condition_holds", rep.holds}};
  r["is_two_closed"] = rep.is_two_closed ? Json(*rep.is_two_closed) : Json(nullptr);
  r["cross_check_ok"] = rep.cross_check_ok;
  return {r, rep.cross_check_ok ? kOk : kVerificationFailed};
}

inline Outcome run_closure(const RunConfig& c, std::ostream& out) {
  const PermGroup G = parse_group_file(c.group_path);
  const ClosureReport rep = is_two_closed(G);
  out << "group_order: " << rep.group_order << "\nclosure_order: " << rep.closure_order << "\norbit_count: " << rep.orbit_count
      << "\nis_two_closed: " << (rep.is_two_closed ? "true" : "false") << "\n";
  Json witnesses = Json::array();
  for (const auto& w : rep.witnesses) {
    out << "witness: " << w.to_cycle_string() << "\n";
    witnesses.push_back(w.to_cycle_string());
  }
  return {Json{{"group", group_json(G)},
               {"group_order", rep.group_order},
               {"closure_order", rep.closure_order},
               {"orbit_count", rep.orbit_count},
               {"is_two_closed", rep.is_two_closed},
               {"witnesses", witnesses}}};
}

}  // namespace detail

/// Runs one ginet command. `args` excludes the program name. Human-readable
/// output goes to `out`; the JSON report goes to --report when given.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  std::size_t cap_flag = 0;
  CLI::App app{"G-invariant networks over permutation groups", "ginet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--report", c.report_path, "write the JSON report to this file");
    sub->add_option("--cap", cap_flag, "cap on n^k tuple materializations (default: $GINET_CAP_TUPLES or 1e8)");
    sub->add_flag("--timings", c.timings, "include wall time in the report");
  };

  auto* orbits = app.add_subcommand("orbits", "orbit partition of [n]^k");
  orbits->add_option("--group", c.group_path, "group file")->required();
  orbits->add_option("--k", c.k, "tuple length")->required();
  orbits->add_option("--kind", c.kind, "layer | poly");
  orbits->add_option("--dump", c.dump_path, "write CSV code,class_id to this file");
  common(orbits);

  auto* basis = app.add_subcommand("basis", "dimensions of an equivariant layer space");
  basis->add_option("--group", c.group_path, "group file")->required();
  basis->add_option("--order", c.order, "input and output tensor order K L")->expected(2)->required();
  basis->add_option("--features", c.features, "input and output widths A B")->expected(2);
  basis->add_option("--dump-dense", c.dense_path, "write the dense basis as CSV to this file");
  common(basis);

  auto* approx = app.add_subcommand("approx", "approximate an invariant polynomial by a G-invariant network");
  approx->add_option("--group", c.group_path, "group file")->required();
  approx->add_option("--poly", c.poly_path, "polynomial file")->required();
  approx->add_option("--epsilon", c.epsilon, "target accuracy");
  approx->add_option("--box", c.box, "domain box LO HI (per coordinate)")->expected(2)->allow_extra_args(false);
  approx->add_option("--seed", c.seed, "random seed");
  approx->add_flag("--exact-mul", c.exact_mul, "use exact multiplication instead of trained product MLPs");
  approx->add_option("--epochs", c.epochs, "gradient descent budget per product MLP");
  approx->add_option("--samples", c.samples, "training samples per product MLP");
  approx->add_option("--hidden", c.hidden, "hidden widths of product MLPs");
  approx->add_option("--activation", c.activation, "sigmoid | rectifier");
  common(approx);

  auto* verify = app.add_subcommand("verify", "checks of the A_n/S_n, Vandermonde and 2-closure results");
  verify->require_subcommand(1);
  auto* an_sn = verify->add_subcommand("an-sn", "A_n and S_n layer partitions coincide for k + l <= n - 2");
  an_sn->add_option("--n", c.n, "degree")->required();
  an_sn->add_option("--max-order", c.max_order, "largest total order k + l")->required();
  common(an_sn);
  auto* vdm = verify->add_subcommand("vandermonde", "low-order A_n networks cannot separate x0 from (1 2).x0");
  vdm->add_option("--n", c.n, "degree")->required();
  vdm->add_option("--max-order", c.max_order, "largest hidden tensor order")->required();
  vdm->add_option("--seed", c.seed, "random seed");
  vdm->add_option("--trials", c.trials, "number of random networks");
  common(vdm);
  auto* nec = verify->add_subcommand("necessary", "strict orbit-count drop on [n]^2 for every strict supergroup");
  nec->add_option("--group", c.group_path, "group file")->required();
  nec->add_option("--supergroup", c.supergroup_paths, "explicit supergroup file (repeatable)");
  common(nec);

  auto* closure = app.add_subcommand("closure", "2-closure of a group");
  closure->add_option("--group", c.group_path, "group file")->required();
  common(closure);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "ginet: " << e.what() << "\n";
    return kUsageError;
  }

  if (*orbits) c.command = "orbits";
  else if (*basis) c.command = "basis";
  else if (*approx) c.command = "approx";
  else if (*an_sn) c.command = "verify an-sn";
  else if (*vdm) c.command = "verify vandermonde";
  else if (*nec) c.command = "verify necessary";
  else c.command = "closure";
  const std::size_t cap = cap_flag ? cap_flag : default_tuple_cap();

  const auto start = std::chrono::steady_clock::now();
  detail::Outcome outcome;
  try {
    if (c.command == "orbits") outcome = detail::run_orbits(c, cap, out);
    else if (c.command == "basis") outcome = detail::run_basis(c, cap, out);
    else if (c.command == "approx") outcome = detail::run_approx(c, cap, out);
    else if (c.command == "verify an-sn") outcome = detail::run_an_sn(c, cap, out);
    else if (c.command == "verify vandermonde") outcome = detail::run_vandermonde(c, out);
    else if (c.command == "verify necessary") outcome = detail::run_necessary(c, out);
    else outcome = detail::run_closure(c, out);
  } catch (const TrainingError& e) {
    err << "ginet: " << e.what() << " (best error " << e.best_error() << ")\n";
    return kVerificationFailed;
  } catch (const Error& e) {
    err << "ginet: " << e.what() << "\n";
    return kUsageError;
  }
  const double wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  if (!c.report_path.empty()) {
    Json report{{"version", kVersion}, {"config", detail::config_json(c, cap)}, {"results", outcome.results}, {"timings", Json::object()}};
    if (c.timings) report["timings"]["wall_ms"] = wall_ms;
    try {
      detail::write_text(c.report_path, report.dump(2) + "\n");
    } catch (const Error& e) {
      err << "ginet: " << e.what() << "\n";
      return kUsageError;
    }
  }
  return outcome.code;
}

}  // namespace ginet::cli

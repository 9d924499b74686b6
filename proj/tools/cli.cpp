#include "cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lipfree/io.hpp"
#include "lipfree/lipfree.hpp"
#include "lipfree/random_fixtures.hpp"

namespace lipfree::cli {
namespace {

using io::json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::InvariantFailure, "sha256 digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

struct Common {
  std::string out;
  std::optional<double> tol;

  double rel_tol() const { return tol.value_or(kMetricTolerance); }
};

/// Accumulates one report; inputs come from the loader plus builtin fixtures.
struct Report {
  std::string command;
  io::Loader loader;
  json builtins = json::array();
  json tolerances = json::object();
  json results = json::object();

  Report(std::string cmd, double rel_tol) : command(std::move(cmd)), loader(rel_tol) {
    tolerances["metric_relative"] = rel_tol;
  }

  json finish(double seconds) const {
    json inputs = json::array();
    for (const auto& f : loader.files())
      inputs.push_back({{"role", f.role}, {"path", f.path}, {"sha256", sha256_hex(f.bytes)}});
    for (const auto& b : builtins) inputs.push_back(b);
    return {{"command", command},        {"version", kVersion}, {"inputs", std::move(inputs)},
            {"tolerances", tolerances}, {"results", results},  {"timing", {{"wall_seconds", seconds}}}};
  }
};

void emit(const json& doc, const Common& common, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (common.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(common.out, std::ios::binary);
  if (!f) throw Error(ErrorCode::MalformedInput, "cannot write " + common.out);
  f << text;
}

json error_json(const Error& e) {
  json out{{"code", to_string(e.code())}, {"message", e.what()}, {"witness", e.witness()}};
  if (!e.json_path().empty()) out["path"] = e.json_path();
  return out;
}

void write_csv(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::MalformedInput, "cannot write " + path);
  f << text;
}

bool is_metric_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::MalformedInput:
    case ErrorCode::AsymmetricDistance:
    case ErrorCode::NegativeDistance:
    case ErrorCode::ZeroDistanceDistinctPoints:
    case ErrorCode::TriangleViolation:
    case ErrorCode::BadBaseIndex:
    case ErrorCode::DisconnectedGraph:
    case ErrorCode::NotAnIntervalNet:
    case ErrorCode::NotStraightPath: return true;
    default: return false;
  }
}

// ---- commands; each fills report.results and returns the exit code ----

int cmd_validate(Report& r, const std::string& path) {
  const json doc = r.loader.read(path, "space");
  try {
    auto g = r.loader.geodesic_from(doc, "");
    const auto& s = *g.space();
    r.results = {{"valid", true},
                 {"points", s.size()},
                 {"base", s.base()},
                 {"diameter", s.diameter()},
                 {"interval", s.interval().has_value()},
                 {"paths", g.paths().size()}};
    return 0;
  } catch (const Error& e) {
    if (!is_metric_error(e.code())) throw;
    r.results = {{"valid", false}, {"error", error_json(e)}};
    return 2;
  }
}

int cmd_norm(Report& r, const std::string& path, std::optional<double> scale) {
  const auto f = r.loader.function_file(path);
  r.results["norm"] = io::to_json(lipschitz_norm(f));
  if (scale) {
    json pts = json::array();
    for (std::size_t x = 0; x < f.size(); ++x) pts.push_back(pointwise_lip_at_scale(f, x, *scale));
    r.results["pointwise"] = {{"r", *scale}, {"values", std::move(pts)}};
  }
  return 0;
}

int cmd_freenorm(Report& r, const std::string& path, const std::string& method) {
  const auto mu = r.loader.free_vector_file(path);
  r.tolerances["lp_feasibility"] = kLpFeasibilityTolerance;
  std::optional<double> flow, lp;
  if (method == "flow" || method == "both") {
    const auto p = free_norm_primal(mu);
    flow = p.value;
    r.results["flow"] = io::to_json(p);
  }
  if (method == "lp" || method == "both") {
    const auto d = free_norm_dual(mu);
    lp = d.value;
    r.results["lp"] = io::to_json(d);
  }
  if (flow && lp) {
    const double gap = std::abs(*flow - *lp);
    const double allowed = 1e-8 * std::max(1.0, *flow);
    r.tolerances["primal_dual"] = allowed;
    r.results["gap"] = gap;
    r.results["agree"] = gap <= allowed;
    if (gap > allowed) throw Error(ErrorCode::PrimalDualDisagreement, "flow and LP free norms differ");
  }
  return 0;
}

int cmd_extremes(Report& r, const std::string& path) {
  const auto space = r.loader.space_file(path);
  r.tolerances["lp_feasibility"] = kLpFeasibilityTolerance;
  const auto ext = extreme_molecules(*space);
  std::vector<PointPair> predicted;
  for (auto p : all_pairs(*space))
    if (intermediate_points(*space, p).empty()) predicted.push_back(p);
  r.results = {{"extremes", io::to_json(ext)},
               {"count", ext.size()},
               {"metric_predictor", io::to_json(predicted)},
               {"predictor_agrees", predicted == ext}};
  return 0;
}

int cmd_norming(Report& r, const std::string& path, const std::string& pairs) {
  const auto space = r.loader.space_file(path);
  r.tolerances["lp_feasibility"] = kLpFeasibilityTolerance;
  const auto a = pairs.empty() ? all_pairs(*space) : io::parse_pair_list(pairs);
  const auto res = is_norming(*space, a);
  r.results = {{"pairs", io::to_json(a)}, {"norming", res.norming}};
  if (res.failing_vertex) r.results["failing_vertex"] = io::to_json(*res.failing_vertex);
  return 0;
}

MethodChoice parse_method(const std::string& m) {
  if (m == "dual") return MethodChoice::dual;
  if (m == "primal") return MethodChoice::primal;
  if (m == "both") return MethodChoice::both;
  throw Error(ErrorCode::MalformedInput, "method must be dual, primal or both");
}

int cmd_isometry(Report& r, const std::string& domain, const std::string& codomain, const std::string& map,
                 const std::string& method, const std::string& pairs) {
  SpacePtr n = domain.empty() ? nullptr : r.loader.space_file(domain, "domain");
  SpacePtr m = codomain.empty() ? nullptr : r.loader.space_file(codomain, "codomain");
  const auto phi = r.loader.map_file(map, n, m);
  CertifyOptions options;
  if (!pairs.empty()) options.norming_set = io::parse_pair_list(pairs);
  r.tolerances["lp_feasibility"] = options.vertex_feasibility;
  r.tolerances["certify_feasibility"] = options.primal_feasibility;
  r.results["operator_norm"] = io::to_json(phi.norm());
  r.results["isometry"] = io::to_json(certify_isometry(phi, parse_method(method), options));
  return 0;
}

int cmd_extend(Report& r, const std::string& path, const std::string& subset_text, const std::string& floor_path) {
  const auto f = r.loader.function_file(path);
  const auto subset = io::parse_index_list(subset_text, "subset");
  std::vector<double> f_sub;
  for (std::size_t i : subset) {
    if (i >= f.size()) throw Error(ErrorCode::InvalidArgument, "subset index out of range", {i});
    f_sub.push_back(f(i));
  }
  std::optional<LipschitzFunction> floor;
  if (!floor_path.empty()) {
    floor = r.loader.function_file(floor_path, "floor");
    if (!same_space(*floor->space(), *f.space())) throw Error(ErrorCode::SpaceMismatch, "floor is on another space");
  }
  const auto ext = mcshane_extend(f.space(), subset, f_sub, floor);
  const double gap = lipschitz_norm(ext).value;
  bool restricts = true;
  for (std::size_t k = 0; k < subset.size(); ++k) restricts = restricts && ext(subset[k]) == f_sub[k];
  r.results = {{"subset", subset}, {"values", ext.values()}, {"lipschitz", gap}, {"restricts_exactly", restricts}};
  if (floor) {
    double worst = 0.0;
    for (std::size_t x = 0; x < ext.size(); ++x) worst = std::max(worst, (*floor)(x) - ext(x));
    r.results["floor_excess"] = worst;
  }
  return 0;
}

struct ExperimentFlags {
  std::optional<double> r_loc;
  std::optional<double> eps;
  std::string csv;
};

ScaleThresholds thresholds(const ExperimentFlags& f) { return {f.r_loc, f.eps}; }

LipschitzMap retolerance(const LipschitzMap& phi, double rel) {
  if (rel == kMetricTolerance) return phi;
  return LipschitzMap(phi.domain()->with_tolerance(rel), phi.codomain()->with_tolerance(rel), phi.image());
}

int cmd_experiment_interval(Report& r, std::size_t mesh, const std::string& map, const ExperimentFlags& flags) {
  std::optional<LipschitzMap> phi;
  if (map.rfind("builtin:", 0) == 0) {
    const auto which = parse_builtin_map(map.substr(8));
    if (!which) throw Error(ErrorCode::MalformedInput, "unknown builtin map " + map);
    phi = retolerance(builtin_interval_map(*which, mesh), r.loader.relative_tolerance());
    r.builtins.push_back({{"role", "map"}, {"builtin", std::string(to_string(*which))}, {"mesh", mesh}});
  } else {
    const std::string path = map.rfind("file:", 0) == 0 ? map.substr(5) : map;
    phi = r.loader.map_file(path);
  }
  const auto necessary = check_interval_necessary(*phi, std::nullopt, thresholds(flags));
  const auto sufficient = check_interval_sufficient(*phi, thresholds(flags));
  CertifyOptions options;
  const auto iso = certify_isometry(*phi, MethodChoice::both, options);
  const bool isometric = iso.verdict == Verdict::isometric;
  r.tolerances["r_loc"] = necessary.r_loc;
  r.tolerances["eps"] = necessary.eps;
  r.tolerances["lp_feasibility"] = options.vertex_feasibility;
  r.tolerances["certify_feasibility"] = options.primal_feasibility;
  r.results = {{"mesh", necessary.mesh},
               {"operator_norm", io::to_json(phi->norm())},
               {"necessary", io::to_json(necessary)},
               {"sufficient", io::to_json(sufficient)},
               {"isometry", io::to_json(iso)},
               {"checks",
                {{"sufficient_implies_isometric", !sufficient.passes || isometric},
                 {"isometric_implies_necessary", !isometric || necessary.holds},
                 // necessary profile passes but the map is not isometric: a mesh-scale
                 // candidate against the converse, heuristic only
                 {"converse_candidate_heuristic", necessary.holds && !isometric}}}};
  if (!flags.csv.empty()) write_csv(flags.csv, io::profile_csv(necessary));
  return 0;
}

DiscretizedGeodesicSpace geodesic_space(Report& r, const std::string& spec) {
  if (spec.rfind("builtin:", 0) == 0) {
    const std::string rest = spec.substr(8);
    const auto colon = rest.find(':');
    const std::string kind = rest.substr(0, colon);
    std::size_t k = 0;
    if (colon != std::string::npos) k = io::parse_index_list(rest.substr(colon + 1), "builtin size").at(0);
    r.builtins.push_back({{"role", "space"}, {"builtin", kind}, {"size", k}});
    if (kind == "interval") return geodesic_interval(k ? k : 16);
    if (kind == "circle") return geodesic_circle(k ? k : 16);
    if (kind == "tripod") return geodesic_tripod(k ? k : 1);
    throw Error(ErrorCode::MalformedInput, "unknown builtin space " + spec);
  }
  return r.loader.geodesic_file(spec);
}

int cmd_experiment_geodesic(Report& r, const std::string& space, const std::string& map, const std::string& pair,
                            const ExperimentFlags& flags) {
  auto g = geodesic_space(r, space);
  if (r.loader.relative_tolerance() != kMetricTolerance) {
    std::vector<std::vector<std::size_t>> paths;
    for (const auto& p : g.paths()) paths.push_back(p.points);
    g = DiscretizedGeodesicSpace(g.space()->with_tolerance(r.loader.relative_tolerance()), paths);
  }
  std::optional<LipschitzMap> phi;
  if (map.empty() || map == "builtin:identity") {
    phi = LipschitzMap::identity(g.space());
    r.builtins.push_back({{"role", "map"}, {"builtin", "identity"}});
  } else {
    phi = r.loader.map_file(map.rfind("file:", 0) == 0 ? map.substr(5) : map, nullptr, g.space());
  }
  if (g.paths().empty()) throw Error(ErrorCode::NoStoredPath, "geodesic space stores no paths");
  std::vector<PointPair> pairs;
  if (!pair.empty()) {
    pairs = io::parse_pair_list(pair);
  } else {
    for (const auto& p : g.paths()) pairs.push_back(p.pair);
  }

  json per_path = json::array();
  std::optional<DefectProfile> first;
  for (auto p : pairs) {
    const auto proj = inverse_projection(g, p);
    const auto profile = check_geodesic_necessary(*phi, g, p, std::nullopt, thresholds(flags));
    if (!first) first = profile;
    per_path.push_back({{"pair", io::to_json(p)},
                        {"inverse_projection",
                         {{"lipschitz", proj.lipschitz}, {"length", proj.path.length()}, {"values", proj.values}}},
                        {"necessary", io::to_json(profile)}});
  }
  r.tolerances["r_loc"] = first->r_loc;
  r.tolerances["eps"] = first->eps;
  json sufficient;
  try {
    sufficient = io::to_json(check_geodesic_sufficient(*phi, g, thresholds(flags)));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::RangeNotDense) throw;
    // a computed negative, not an input error
    sufficient = {{"passes", false}, {"range_not_dense", {{"worst_point", e.witness().at(0)}}}};
  }
  CertifyOptions options;
  r.tolerances["lp_feasibility"] = options.vertex_feasibility;
  r.tolerances["certify_feasibility"] = options.primal_feasibility;
  const auto iso = certify_isometry(*phi, MethodChoice::both, options);
  const bool isometric = iso.verdict == Verdict::isometric;
  bool necessary_holds = true;
  for (const auto& p : per_path) necessary_holds = necessary_holds && p["necessary"]["holds"].get<bool>();
  const bool sufficient_passes = sufficient["passes"].get<bool>();
  r.results = {{"mesh", g.mesh()},
               {"operator_norm", io::to_json(phi->norm())},
               {"paths", std::move(per_path)},
               {"sufficient", std::move(sufficient)},
               {"isometry", io::to_json(iso)},
               {"checks",
                {{"sufficient_implies_isometric", !sufficient_passes || isometric},
                 {"isometric_implies_necessary", !isometric || necessary_holds}}}};
  if (!flags.csv.empty()) write_csv(flags.csv, io::profile_csv(*first));
  return 0;
}

int cmd_experiment_random(Report& r, std::uint64_t seed, std::size_t count, std::size_t max_domain,
                          std::size_t max_codomain) {
  if (max_domain < 2 || max_codomain < 2) throw Error(ErrorCode::InvalidArgument, "spaces need at least 2 points");
  fixtures::Rng rng(seed);
  std::size_t isometric = 0, shortcut = 0;
  json disagreements = json::array();
  CertifyOptions options;
  r.tolerances["lp_feasibility"] = options.vertex_feasibility;
  r.tolerances["certify_feasibility"] = options.primal_feasibility;
  r.builtins.push_back({{"role", "random"}, {"seed", seed}, {"count", count},
                        {"max_domain", max_domain}, {"max_codomain", max_codomain}});
  for (std::size_t k = 0; k < count; ++k) {
    const auto phi = fixtures::random_one_lipschitz_map(rng, max_domain, max_codomain);
    try {
      const auto rep = certify_isometry(phi, MethodChoice::both, options);
      isometric += rep.verdict == Verdict::isometric;
      shortcut += rep.primal->norm_shortcut;
    } catch (const MethodDisagreementError& e) {
      disagreements.push_back({{"sample", k},
                               {"map", io::map_to_json(phi)},
                               {"dual", io::to_json(e.dual())},
                               {"primal", io::to_json(e.primal())}});
    }
  }
  r.results = {{"samples", count},
               {"isometric", isometric},
               {"not_isometric", count - isometric - disagreements.size()},
               {"norm_shortcut", shortcut},
               {"disagreements", disagreements.size()},
               {"disagreement_details", disagreements}};
  return disagreements.empty() ? 0 : 3;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lipschitz-free space and composition-operator toolkit", "lipfree"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "write the JSON report to this file");
    sub->add_option("--tol", common.tol, "relative metric tolerance (default 1e-9)")->check(CLI::PositiveNumber);
  };

  std::string file, method = "both", pairs, subset, floor, domain, codomain, map, space, pair;
  std::optional<double> scale;
  ExperimentFlags flags;
  std::size_t mesh = 64, count = 300, max_domain = 8, max_codomain = 6;
  std::uint64_t seed = 1;

  auto* validate = app.add_subcommand("validate", "check a space file");
  validate->add_option("file", file)->required();
  auto* norm = app.add_subcommand("norm", "Lipschitz norm of a function file");
  norm->add_option("file", file)->required();
  norm->add_option("--scale", scale, "also report pointwise constants at this scale")->check(CLI::PositiveNumber);
  auto* freenorm = app.add_subcommand("freenorm", "free norm of a vector file");
  freenorm->add_option("file", file)->required();
  freenorm->add_option("--method", method, "flow, lp or both")->check(CLI::IsMember({"flow", "lp", "both"}));
  auto* extremes = app.add_subcommand("extremes", "extreme molecules of a space");
  extremes->add_option("file", file)->required();
  auto* norming = app.add_subcommand("norming", "is a pair set norming");
  norming->add_option("file", file)->required();
  norming->add_option("--pairs", pairs, "pairs like 0-1,1-2 (default all pairs)");
  auto* isometry = app.add_subcommand("isometry", "certify that C_phi is an isometry");
  isometry->add_option("--map", map, "map file")->required();
  isometry->add_option("--domain", domain, "domain space file (overrides the map file)");
  isometry->add_option("--codomain", codomain, "codomain space file (overrides the map file)");
  isometry->add_option("--method", method, "dual, primal or both")->check(CLI::IsMember({"dual", "primal", "both"}));
  isometry->add_option("--pairs", pairs, "norming set for the dual method");
  auto* extend = app.add_subcommand("extend", "floor-constrained McShane extension");
  extend->add_option("file", file, "function file; values outside the subset are ignored")->required();
  extend->add_option("--subset", subset, "indices like 0,1,5")->required();
  extend->add_option("--floor", floor, "function file for the floor");
  auto* experiment = app.add_subcommand("experiment", "mesh-scale experiments");
  experiment->require_subcommand(1);
  auto add_scale = [&](CLI::App* sub) {
    sub->add_option("--r-loc", flags.r_loc, "localization radius / scale")->check(CLI::PositiveNumber);
    sub->add_option("--eps", flags.eps, "defect threshold")->check(CLI::NonNegativeNumber);
    sub->add_option("--csv", flags.csv, "write the defect profile as CSV");
  };
  auto* ex_interval = experiment->add_subcommand("interval", "maps into interval nets");
  ex_interval->add_option("--mesh", mesh, "subdivisions of the codomain net")->check(CLI::PositiveNumber);
  ex_interval->add_option("--map", map, "builtin:NAME or file:PATH")->required();
  add_scale(ex_interval);
  auto* ex_geodesic = experiment->add_subcommand("geodesic", "maps into discretized geodesic spaces");
  ex_geodesic->add_option("--space", space, "geodesic space file or builtin:interval|circle|tripod[:k]")->required();
  ex_geodesic->add_option("--map", map, "map file (default identity)");
  ex_geodesic->add_option("--pair", pair, "stored path(s) to profile, like 0-8");
  add_scale(ex_geodesic);
  auto* ex_random = experiment->add_subcommand("random", "dual/primal agreement on random maps");
  ex_random->add_option("--seed", seed);
  ex_random->add_option("--count", count);
  ex_random->add_option("--max-domain", max_domain);
  ex_random->add_option("--max-codomain", max_codomain);
  for (auto* sub : {validate, norm, freenorm, extremes, norming, isometry, extend, ex_interval, ex_geodesic, ex_random})
    add_common(sub);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << to_string(ErrorCode::UnknownCommand) << ": " << e.what() << "\n";
    return 2;
  }

  std::string name;
  for (auto* sub : app.get_subcommands()) {
    name = sub->get_name();
    for (auto* inner : sub->get_subcommands()) name += " " + inner->get_name();
  }
  Report report(name, common.rel_tol());
  const auto start = std::chrono::steady_clock::now();
  auto seconds = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  int code = 0;
  try {
    if (validate->parsed()) code = cmd_validate(report, file);
    else if (norm->parsed()) code = cmd_norm(report, file, scale);
    else if (freenorm->parsed()) code = cmd_freenorm(report, file, method);
    else if (extremes->parsed()) code = cmd_extremes(report, file);
    else if (norming->parsed()) code = cmd_norming(report, file, pairs);
    else if (isometry->parsed()) code = cmd_isometry(report, domain, codomain, map, method, pairs);
    else if (extend->parsed()) code = cmd_extend(report, file, subset, floor);
    else if (ex_interval->parsed()) code = cmd_experiment_interval(report, mesh, map, flags);
    else if (ex_geodesic->parsed()) code = cmd_experiment_geodesic(report, space, map, pair, flags);
    else if (ex_random->parsed()) code = cmd_experiment_random(report, seed, count, max_domain, max_codomain);
    emit(report.finish(seconds()), common, out);
    return code;
  } catch (const MethodDisagreementError& e) {
    report.results["error"] = error_json(e);
    report.results["dual"] = io::to_json(e.dual());
    report.results["primal"] = io::to_json(e.primal());
    code = 3;
    err << e.what() << "\n";
  } catch (const Error& e) {
    report.results["error"] = error_json(e);
    code = is_internal(e.code()) ? 3 : 2;
    err << e.what() << "\n";
  } catch (const std::exception& e) {
    report.results["error"] = {{"code", "InvariantFailure"}, {"message", e.what()}};
    code = 3;
    err << "InvariantFailure: " << e.what() << "\n";
  }
  try {
    emit(report.finish(seconds()), common, out);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
  }
  return code;
}

}  // namespace lipfree::cli

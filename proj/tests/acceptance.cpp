// Acceptance gate: one pass/fail line per criterion.
//
//   acceptance                 run criteria 1-11
//   acceptance --criterion 5   run one criterion (repeatable)
//   acceptance --json PATH     also write the per-criterion reports

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lipfree/builtin_maps.hpp"
#include "lipfree/io.hpp"
#include "lipfree/lipfree.hpp"
#include "lipfree/random_fixtures.hpp"

using namespace lipfree;
using json = nlohmann::ordered_json;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
  json report = json::object();
};

json pair_json(PointPair p) { return json::array({p.x, p.y}); }

// ---- 1: flow and LP free norms agree ----

Outcome free_norm_agreement() {
  fixtures::Rng rng(1001);
  std::size_t failures = 0;
  double worst = 0.0;
  json first_failure;
  for (int k = 0; k < 500; ++k) {
    const auto space = fixtures::random_space(rng, 2, 12);
    const auto mu = fixtures::random_free_vector(rng, space);
    const double flow = free_norm_primal(mu).value;
    const double lp = free_norm_dual(mu).value;
    const double gap = std::abs(flow - lp) / std::max(1.0, flow);
    worst = std::max(worst, gap);
    if (gap > 1e-8) {
      if (!failures) first_failure = {{"sample", k}, {"flow", flow}, {"lp", lp}};
      ++failures;
    }
  }
  Outcome out;
  out.pass = failures == 0;
  out.report = {{"vectors", 500}, {"failures", failures}, {"worst_relative_gap", worst}};
  if (failures) out.report["first_failure"] = first_failure;
  char buf[160];
  std::snprintf(buf, sizeof buf, "500 vectors, %zu over 1e-8, worst relative gap %.3g", failures, worst);
  out.summary = buf;
  return out;
}

// ---- 2: molecules have norm one ----

Outcome molecule_norms() {
  std::vector<std::pair<std::string, SpacePtr>> spaces;
  for (std::size_t n = 1; n <= 64; ++n) spaces.emplace_back("interval_net(" + std::to_string(n) + ")", interval_net(n));
  for (std::size_t n = 3; n <= 32; ++n) spaces.emplace_back("circle_net(" + std::to_string(n) + ")", circle_net(n));
  spaces.emplace_back("tripod", tripod());
  fixtures::Rng rng(1002);
  for (int k = 0; k < 40; ++k) spaces.emplace_back("random#" + std::to_string(k), fixtures::random_space(rng, 2, 10));

  std::size_t pairs = 0, failures = 0;
  double worst = 0.0;
  json first_failure;
  for (const auto& [name, space] : spaces) {
    const auto list = all_pairs(*space);
    std::vector<double> err(list.size());
    parallel_for(list.size(), [&](std::size_t k) {
      err[k] = std::abs(free_norm_primal(Molecule(space, list[k]).vector()).value - 1.0);
    });
    for (std::size_t k = 0; k < list.size(); ++k) {
      ++pairs;
      worst = std::max(worst, err[k]);
      if (err[k] > 1e-9) {
        if (!failures) first_failure = {{"space", name}, {"pair", pair_json(list[k])}, {"error", err[k]}};
        ++failures;
      }
    }
  }
  Outcome out;
  out.pass = failures == 0;
  out.report = {{"spaces", spaces.size()}, {"pairs", pairs}, {"failures", failures}, {"worst_error", worst}};
  if (failures) out.report["first_failure"] = first_failure;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu pairs on %zu spaces, %zu off by more than 1e-9, worst %.3g", pairs, spaces.size(),
                failures, worst);
  out.summary = buf;
  return out;
}

// ---- 3: LP vertex test matches the metric predictor, exhaustively ----

// Upper-triangle distance vectors in row order; entry index of (i, j), i < j.
struct PairIndex {
  std::size_t n;
  std::vector<std::size_t> at;
  explicit PairIndex(std::size_t n_) : n(n_), at(n_ * n_, 0) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) at[i * n + j] = at[j * n + i] = k++;
  }
  std::size_t operator()(std::size_t i, std::size_t j) const { return at[i * n + j]; }
};

bool triangle_ok(const std::vector<int>& d, const PairIndex& idx) {
  const std::size_t n = idx.n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (i != j && j != k && i != k && d[idx(i, k)] > d[idx(i, j)] + d[idx(j, k)]) return false;
  return true;
}

// Smallest vector among all relabelings; keeps one space per isomorphism class.
bool is_canonical(const std::vector<int>& d, const PairIndex& idx, const std::vector<std::vector<std::size_t>>& perms) {
  const std::size_t n = idx.n;
  std::vector<int> relabeled(d.size());
  for (const auto& p : perms) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) relabeled[k++] = d[idx(p[i], p[j])];
    if (relabeled < d) return false;
  }
  return true;
}

Outcome extremality_exhaustive() {
  json classes = json::object();
  std::size_t spaces = 0, pairs = 0, disagreements = 0, extremes = 0;
  json first_disagreement;
  for (std::size_t n = 2; n <= 5; ++n) {
    const PairIndex idx(n);
    const std::size_t m = n * (n - 1) / 2;
    std::vector<std::vector<std::size_t>> perms;
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));

    std::vector<std::vector<int>> candidates;
    std::vector<int> d(m, 1);
    for (;;) {
      if (triangle_ok(d, idx) && is_canonical(d, idx, perms)) candidates.push_back(d);
      std::size_t k = 0;
      while (k < m && d[k] == 4) d[k++] = 1;
      if (k == m) break;
      ++d[k];
    }

    std::vector<json> found(candidates.size());
    std::vector<std::size_t> disagree(candidates.size(), 0), extreme_count(candidates.size(), 0);
    parallel_for(candidates.size(), [&](std::size_t c) {
      std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j) rows[i][j] = candidates[c][idx(i, j)];
      const auto space = validate_space(rows, 0);
      json bad = json::array();
      for (auto pair : all_pairs(*space)) {
        const bool lp = is_extreme_molecule(*space, pair).extreme;
        const bool metric = intermediate_points(*space, pair).empty();
        extreme_count[c] += lp;
        if (lp != metric) {
          ++disagree[c];
          bad.push_back({{"pair", pair_json(pair)}, {"lp_vertex", lp}, {"no_intermediate_point", metric}});
        }
      }
      if (!bad.empty()) found[c] = {{"distances", candidates[c]}, {"pairs", bad}};
    });
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      ++spaces;
      pairs += m;
      extremes += extreme_count[c];
      disagreements += disagree[c];
      if (disagree[c] && first_disagreement.is_null()) first_disagreement = found[c];
    }
    classes[std::to_string(n)] = candidates.size();
  }
  // class counts from tests/oracles/metric_classes.py
  const json expected_classes{{"2", 4}, {"3", 17}, {"4", 158}, {"5", 2727}};
  const bool exhaustive = classes == expected_classes;
  Outcome out;
  out.pass = disagreements == 0 && exhaustive;
  out.report = {{"classes_by_size", classes},
                {"class_counts_match_oracle", exhaustive},
                {"spaces", spaces},
                {"pairs", pairs},
                {"extreme_pairs", extremes},
                {"disagreements", disagreements}};
  if (disagreements) out.report["first_disagreement"] = first_disagreement;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu spaces up to relabeling (%s oracle count), %zu pairs, %zu disagreements",
                spaces, exhaustive ? "matches" : "differs from", pairs, disagreements);
  out.summary = buf;
  return out;
}

// ---- 4: dual and primal certification agree ----

Outcome certification_agreement() {
  fixtures::Rng rng(1004);
  std::size_t isometric = 0, shortcut = 0, disagreements = 0;
  json first_disagreement;
  for (int k = 0; k < 300; ++k) {
    const auto phi = fixtures::random_one_lipschitz_map(rng, 8, 6);
    CertifyOptions options;
    options.extremes = extreme_molecules(*phi.codomain());
    const auto dual = certify_isometry_dual(phi, options);
    const auto primal = certify_isometry_primal(phi, options);
    isometric += primal.verdict == Verdict::isometric;
    shortcut += primal.norm_shortcut;
    if (dual.verdict != primal.verdict) {
      if (!disagreements) first_disagreement = {{"sample", k}, {"map", io::map_to_json(phi)}};
      ++disagreements;
    }
  }
  Outcome out;
  out.pass = disagreements == 0;
  out.report = {{"maps", 300}, {"isometric", isometric}, {"norm_shortcut", shortcut}, {"disagreements", disagreements}};
  if (disagreements) out.report["first_disagreement"] = first_disagreement;
  char buf[160];
  std::snprintf(buf, sizeof buf, "300 maps (%zu isometric, %zu by norm shortcut), %zu disagreements", isometric, shortcut,
                disagreements);
  out.summary = buf;
  return out;
}

// ---- 5: lower bound on distances between molecules ----

Outcome molecule_separation() {
  std::vector<std::pair<std::string, SpacePtr>> spaces;
  for (std::size_t n = 1; n <= 7; ++n) spaces.emplace_back("interval_net(" + std::to_string(n) + ")", interval_net(n));
  for (std::size_t n = 3; n <= 8; ++n) spaces.emplace_back("circle_net(" + std::to_string(n) + ")", circle_net(n));
  spaces.emplace_back("tripod(1)", tripod(1));
  spaces.emplace_back("tripod(2)", tripod(2));
  spaces.emplace_back("snowflake(interval_net(4), 0.5)", snowflake(*interval_net(4), 0.5));
  fixtures::Rng rng(1005);
  for (int k = 0; k < 20; ++k) spaces.emplace_back("random#" + std::to_string(k), fixtures::random_space(rng, 2, 8));

  std::size_t checked = 0, violations = 0, capped_violations = 0, near_checked = 0, near_violations = 0;
  double worst = 0.0;
  json first_violation;
  for (const auto& [name, space] : spaces) {
    std::vector<PointPair> ordered;
    for (std::size_t a = 0; a < space->size(); ++a)
      for (std::size_t b = 0; b < space->size(); ++b)
        if (a != b) ordered.push_back({a, b});
    const std::size_t q = ordered.size();
    std::vector<double> dist(q * q, 0.0);
    parallel_for(q * q, [&](std::size_t k) {
      const auto uv = ordered[k / q], xy = ordered[k % q];
      if (!(uv == xy)) dist[k] = molecule_distance(Molecule(space, uv), Molecule(space, xy));
    });
    for (std::size_t k = 0; k < q * q; ++k) {
      const auto uv = ordered[k / q], xy = ordered[k % q];
      if (uv == xy) continue;
      ++checked;
      const double bound = std::max(space->dist(uv.x, xy.x), space->dist(uv.y, xy.y)) / space->dist(xy.x, xy.y);
      const double excess = bound - 1e-8 - dist[k];
      if (excess > 0) {
        if (!violations)
          first_violation = {{"space", name}, {"uv", pair_json(uv)}, {"xy", pair_json(xy)},
                             {"molecule_distance", dist[k]}, {"bound", bound}};
        ++violations;
        worst = std::max(worst, excess);
      }
      if (std::min(1.0, bound) - 1e-8 > dist[k]) ++capped_violations;
      if (dist[k] < 1.0) {
        ++near_checked;
        if (bound - 1e-8 > dist[k]) ++near_violations;
      }
    }
  }
  Outcome out;
  out.pass = violations == 0;
  out.report = {{"spaces", spaces.size()},
                {"molecule_pairs", checked},
                {"violations", violations},
                {"worst_excess", worst},
                {"informational",
                 {{"bound_capped_at_one_violations", capped_violations},
                  {"pairs_closer_than_one", near_checked},
                  {"violations_among_pairs_closer_than_one", near_violations}}}};
  if (violations) out.report["first_violation"] = first_violation;
  char buf[240];
  std::snprintf(buf, sizeof buf, "%zu molecule pairs on %zu spaces, %zu violations (worst excess %.3g)", checked,
                spaces.size(), violations, worst);
  out.summary = buf;
  if (violations) {
    const auto& v = first_violation;
    char more[240];
    std::snprintf(more, sizeof more, "; e.g. %s, m(%zu,%zu) vs m(%zu,%zu): distance %.6g < bound %.6g",
                  v["space"].get<std::string>().c_str(), v["uv"][0].get<std::size_t>(), v["uv"][1].get<std::size_t>(),
                  v["xy"][0].get<std::size_t>(), v["xy"][1].get<std::size_t>(), v["molecule_distance"].get<double>(),
                  v["bound"].get<double>());
    out.summary += more;
  }
  return out;
}

// ---- 6: floor-constrained extension is exact ----

Outcome extension_exactness() {
  fixtures::Rng rng(1006);
  std::size_t failures = 0;
  json first_failure;
  double worst_norm = 0.0, worst_floor = 0.0;
  for (int k = 0; k < 200; ++k) {
    const auto space = fixtures::random_space(rng, 2, 12);
    const std::size_t n = space->size();
    std::vector<std::size_t> subset{space->base()};
    for (std::size_t x = 0; x < n; ++x)
      if (x != space->base() && fixtures::uniform_index(rng, 2) == 0) subset.push_back(x);
    const auto f = fixtures::random_function(rng, space);
    std::vector<double> f_sub;
    for (std::size_t x : subset) f_sub.push_back(f(x));
    double lip = 0.0;
    for (std::size_t a = 0; a < subset.size(); ++a)
      for (std::size_t b = 0; b < subset.size(); ++b)
        if (a != b) lip = std::max(lip, std::abs(f_sub[a] - f_sub[b]) / space->dist(subset[a], subset[b]));

    // floor = min(lower extension, random function of smaller constant); both vanish at the base
    const auto g = fixtures::random_function(rng, space);
    const double g_norm = lipschitz_norm(g).value;
    const double g_scale = g_norm > 0.0 ? lip * fixtures::uniform_unit(rng) / g_norm : 0.0;
    std::vector<double> floor(n);
    for (std::size_t x = 0; x < n; ++x) {
      double lower = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < subset.size(); ++a) lower = std::max(lower, f_sub[a] - lip * space->dist(subset[a], x));
      floor[x] = std::min(lower, g_scale * g(x));
    }
    const LipschitzFunction floor_fn(space, floor);

    const auto ext = mcshane_extend(space, subset, f_sub, floor_fn);
    bool restricts = true;
    for (std::size_t a = 0; a < subset.size(); ++a) restricts = restricts && ext(subset[a]) == f_sub[a];
    const double norm_error = std::abs(lipschitz_norm(ext).value - lip);
    double floor_gap = 0.0;
    for (std::size_t x = 0; x < n; ++x) floor_gap = std::max(floor_gap, floor_fn(x) - ext(x));
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::vector<double> ext_sub;
    for (std::size_t x : subset) ext_sub.push_back(ext(x));
    const bool idempotent = mcshane_extend(space, all, ext.values(), floor_fn).values() == ext.values() &&
                            mcshane_extend(space, subset, ext_sub, floor_fn).values() == ext.values();
    worst_norm = std::max(worst_norm, norm_error);
    worst_floor = std::max(worst_floor, floor_gap);
    const bool ok = restricts && norm_error <= 1e-9 && floor_gap <= 1e-9 && idempotent;
    if (!ok) {
      if (!failures)
        first_failure = {{"sample", k}, {"restricts", restricts}, {"norm_error", norm_error},
                         {"floor_gap", floor_gap}, {"idempotent", idempotent}};
      ++failures;
    }
  }
  Outcome out;
  out.pass = failures == 0;
  out.report = {{"instances", 200}, {"failures", failures}, {"worst_norm_error", worst_norm},
                {"worst_floor_gap", worst_floor}};
  if (failures) out.report["first_failure"] = first_failure;
  char buf[200];
  std::snprintf(buf, sizeof buf, "200 instances, %zu failures, worst norm error %.3g, worst floor gap %.3g", failures,
                worst_norm, worst_floor);
  out.summary = buf;
  return out;
}

// ---- 7, 8: mesh-scale conditions for interval nets ----

constexpr std::array<std::size_t, 4> kMeshes{8, 16, 32, 64};

// extreme molecules of each codomain net, computed once per criterion run
class NetExtremes {
 public:
  // maps of norm below one are settled without extremes
  IsometryReport certify(const LipschitzMap& phi) {
    CertifyOptions options;
    if (phi.norm().value == 1.0) {
      const std::size_t n = phi.codomain()->interval()->subdivisions;
      auto it = cache_.find(n);
      if (it == cache_.end()) it = cache_.emplace(n, extreme_molecules(*interval_net(n))).first;
      options.extremes = it->second;
    }
    return certify_isometry(phi, MethodChoice::both, options);
  }

 private:
  std::map<std::size_t, std::vector<PointPair>> cache_;
};

Outcome interval_necessary() {
  NetExtremes nets;
  json rows = json::array();
  std::size_t failures = 0;
  std::string first;
  for (std::size_t n : kMeshes) {
    for (auto which : {BuiltinMap::identity, BuiltinMap::fold, BuiltinMap::halving}) {
      const auto phi = builtin_interval_map(which, n);
      const bool iso = nets.certify(phi).verdict == Verdict::isometric;
      json row{{"map", std::string(to_string(which))}, {"n", n}, {"isometric", iso}};
      bool ok;
      if (which == BuiltinMap::halving) {
        const double norm = phi.norm().value;
        row["operator_norm"] = norm;
        ok = !iso && std::abs(norm - 0.5) <= 1e-12;
      } else {
        const double defect = check_interval_necessary(phi).max_defect;
        row["max_defect"] = defect;
        ok = iso && defect <= 4.0 / static_cast<double>(n);
      }
      row["pass"] = ok;
      if (!ok && first.empty()) first = std::string(to_string(which)) + " at n=" + std::to_string(n);
      failures += !ok;
      rows.push_back(std::move(row));
    }
  }
  Outcome out;
  out.pass = failures == 0;
  out.report = {{"cases", rows}, {"failures", failures}};
  out.summary = "identity, fold, halving at n in {8,16,32,64}: " + std::to_string(failures) + " failures";
  if (!first.empty()) out.summary += " (first: " + first + ")";
  return out;
}

Outcome interval_sufficient() {
  NetExtremes nets;
  json rows = json::array();
  std::size_t passing = 0, violations = 0;
  for (std::size_t n : kMeshes) {
    const double h = 1.0 / static_cast<double>(n);
    for (auto which : kBuiltinMaps) {
      const auto phi = builtin_interval_map(which, n);
      const auto suff = check_interval_sufficient(phi, {4 * h, 4 * h});
      json row{{"map", std::string(to_string(which))}, {"n", n}, {"sufficient_passes", suff.passes}};
      if (suff.passes) {
        ++passing;
        const bool iso = nets.certify(phi).verdict == Verdict::isometric;
        row["isometric"] = iso;
        violations += !iso;
      }
      rows.push_back(std::move(row));
    }
  }
  Outcome out;
  out.pass = violations == 0;
  out.report = {{"cases", rows}, {"sufficient_passes", passing}, {"violations", violations}};
  out.summary = std::to_string(rows.size()) + " map/mesh cases, " + std::to_string(passing) +
                " pass the sufficient check, " + std::to_string(violations) + " of those not isometric";
  return out;
}

// ---- 9: inverse projections ----

Outcome inverse_projections() {
  std::vector<std::pair<std::string, DiscretizedGeodesicSpace>> spaces;
  for (std::size_t n : {4u, 8u, 16u, 32u, 64u})
    spaces.emplace_back("geodesic_interval(" + std::to_string(n) + ")", geodesic_interval(n));
  for (std::size_t n : {4u, 8u, 16u, 32u})
    spaces.emplace_back("geodesic_circle(" + std::to_string(n) + ")", geodesic_circle(n));
  for (std::size_t k : {1u, 2u, 4u, 8u})
    spaces.emplace_back("geodesic_tripod(" + std::to_string(k) + ")", geodesic_tripod(k));

  std::size_t projections = 0, grid_points = 0, failures = 0;
  double worst_norm = 0.0, worst_defect_ratio = 0.0;
  std::string first;
  for (const auto& [name, g] : spaces) {
    const auto id = LipschitzMap::identity(g.space());
    for (const auto& path : g.paths()) {
      for (auto pair : {path.pair, path.pair.reversed()}) {
        ++projections;
        const auto p = inverse_projection(g, pair);
        const double norm_error = std::abs(lipschitz_constant(*g.space(), p.values).value - 1.0);
        worst_norm = std::max(worst_norm, norm_error);
        const auto stored = g.path(pair);
        bool left_inverse = true;
        for (std::size_t i = 0; i < stored.points.size(); ++i)
          left_inverse = left_inverse && p(stored.points[i]) == stored.cumulative[i];
        const auto profile = check_geodesic_necessary(id, g, pair);
        bool defects_ok = true;
        for (const auto& d : profile.points) {
          ++grid_points;
          defects_ok = defects_ok && d.defect <= 4.0 * g.mesh();
          worst_defect_ratio = std::max(worst_defect_ratio, d.defect / g.mesh());
        }
        const bool ok = norm_error <= 1e-9 && left_inverse && defects_ok;
        if (!ok && first.empty()) first = name + " path " + std::to_string(pair.x) + "-" + std::to_string(pair.y);
        failures += !ok;
      }
    }
  }
  Outcome out;
  out.pass = failures == 0;
  out.report = {{"spaces", spaces.size()},
                {"projections", projections},
                {"grid_points", grid_points},
                {"failures", failures},
                {"worst_norm_error", worst_norm},
                {"worst_defect_over_mesh", worst_defect_ratio}};
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu projections on %zu spaces, %zu failures, worst defect %.3g mesh", projections,
                spaces.size(), failures, worst_defect_ratio);
  out.summary = buf;
  if (!first.empty()) out.summary += " (first: " + first + ")";
  return out;
}

// ---- 10: peak function is steepest next to its anchor ----

Outcome peak_localization() {
  const std::size_t n = 64;
  const double h = 1.0 / static_cast<double>(n);
  const auto net = interval_net(n);
  const auto& info = *net->interval();
  const double x = 0.5;
  const auto g = peak_function(net, x);
  const double norm = lipschitz_norm(g).value;
  const bool norm_ok = std::abs(norm - (1.0 - h / 2)) <= 1e-12;

  // a pair lies in the two adjacent cells when both ends are in [x - h, x + h]
  auto within = [&](std::size_t a, std::size_t b, double radius) {
    const double ta = info.coordinate(a), tb = info.coordinate(b);
    return std::abs(ta - x) <= radius + net->tol() && std::abs(tb - x) <= radius + net->tol();
  };
  std::size_t steep = 0, outside = 0, outside_two_cells = 0, maximizers_outside = 0;
  json first_outside;
  double best_outside = 0.0;
  for (std::size_t a = 0; a <= n; ++a)
    for (std::size_t b = a + 1; b <= n; ++b) {
      const double ratio = std::abs(g(b) - g(a)) / net->dist(a, b);
      if (ratio >= norm - 1e-12 && !within(a, b, h)) ++maximizers_outside;
      if (ratio <= 1.0 - h) continue;
      ++steep;
      if (!within(a, b, 2 * h)) ++outside_two_cells;
      if (!within(a, b, h)) {
        if (!outside || ratio > best_outside) {
          best_outside = ratio;
          first_outside = {{"pair", json::array({a, b})},
                           {"t", json::array({info.coordinate(a), info.coordinate(b)})},
                           {"ratio", ratio}};
        }
        ++outside;
      }
    }
  Outcome out;
  out.pass = norm_ok && outside == 0;
  out.report = {{"n", n},
                {"anchor", x},
                {"norm", norm},
                {"expected_norm", 1.0 - h / 2},
                {"norm_ok", norm_ok},
                {"pairs_above_one_minus_h", steep},
                {"outside_adjacent_cells", outside},
                {"informational",
                 {{"maximizers_outside_adjacent_cells", maximizers_outside},
                  {"pairs_above_one_minus_h_beyond_two_cells", outside_two_cells}}}};
  if (outside) out.report["steepest_outside"] = first_outside;
  char buf[280];
  std::snprintf(buf, sizeof buf, "norm %s; %zu pairs above 1-h, %zu outside the adjacent cells", norm_ok ? "ok" : "off",
                steep, outside);
  out.summary = buf;
  if (outside) {
    char more[200];
    std::snprintf(more, sizeof more, " (steepest: [%g, %g], ratio 1 - %.4g h)",
                  first_outside["t"][0].get<double>(), first_outside["t"][1].get<double>(),
                  (1.0 - best_outside) / h);
    out.summary += more;
  }
  return out;
}

// ---- 11: reports do not depend on the thread count ----

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& base_criteria() {
  static const std::vector<Criterion> list{
      {1, "free norm: flow and LP agree", free_norm_agreement},
      {2, "molecules have norm one", molecule_norms},
      {3, "vertex test matches the metric predictor", extremality_exhaustive},
      {4, "dual and primal certification agree", certification_agreement},
      {5, "molecule separation lower bound", molecule_separation},
      {6, "floor-constrained extension is exact", extension_exactness},
      {7, "interval necessary condition at mesh scale", interval_necessary},
      {8, "interval sufficient condition at mesh scale", interval_sufficient},
      {9, "inverse projections", inverse_projections},
      {10, "peak function localization", peak_localization},
  };
  return list;
}

void set_threads_env(const char* value) {
  ::setenv("LIPFREE_THREADS", value, 1);
  set_thread_limit(0);
}

Outcome thread_determinism() {
  const char* saved = std::getenv("LIPFREE_THREADS");
  const std::optional<std::string> restore = saved ? std::optional<std::string>(saved) : std::nullopt;
  std::vector<std::string> dumps[2];
  const char* settings[2] = {"1", "4"};
  for (int s = 0; s < 2; ++s) {
    set_threads_env(settings[s]);
    for (const auto& c : base_criteria()) {
      const auto o = c.run();
      dumps[s].push_back(json{{"pass", o.pass}, {"report", o.report}}.dump());
    }
  }
  if (restore) set_threads_env(restore->c_str());
  else {
    ::unsetenv("LIPFREE_THREADS");
    set_thread_limit(0);
  }
  json differing = json::array();
  for (std::size_t k = 0; k < dumps[0].size(); ++k)
    if (dumps[0][k] != dumps[1][k]) differing.push_back(base_criteria()[k].id);
  Outcome out;
  out.pass = differing.empty();
  out.report = {{"thread_settings", json::array({1, 4})}, {"criteria", base_criteria().size()},
                {"differing", differing}};
  out.summary = "criteria 1-10 at LIPFREE_THREADS=1 and 4: " + std::to_string(differing.size()) + " reports differ";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance gate"};
  std::vector<int> selected;
  std::string json_path;
  app.add_option("--criterion", selected, "criterion number (repeatable)")->check(CLI::Range(1, 11));
  app.add_option("--json", json_path, "write per-criterion reports to this file");
  CLI11_PARSE(app, argc, argv);

  std::vector<Criterion> all = base_criteria();
  all.push_back({11, "reports independent of thread count", thread_determinism});
  if (selected.empty())
    for (const auto& c : all) selected.push_back(c.id);

  json reports = json::array();
  bool all_pass = true;
  for (int id : selected) {
    const auto& c = all[static_cast<std::size_t>(id - 1)];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("raised ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d: %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.summary.c_str(),
                seconds);
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
    reports.push_back({{"criterion", c.id}, {"title", c.title}, {"pass", o.pass}, {"summary", o.summary},
                       {"report", o.report}, {"timing", {{"wall_seconds", seconds}}}});
  }
  if (!json_path.empty()) std::ofstream(json_path) << reports.dump(2) << "\n";
  return all_pass ? 0 : 1;
}

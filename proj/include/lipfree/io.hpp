#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lipfree/composition.hpp"
#include "lipfree/error.hpp"
#include "lipfree/free_space.hpp"
#include "lipfree/geodesic.hpp"
#include "lipfree/lipschitz.hpp"
#include "lipfree/metric_space.hpp"

/// JSON file formats (see docs/formats.md) and JSON projections of results.
namespace lipfree::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Every file read through a Loader, with its raw bytes, in read order.
struct InputFile {
  std::string role;
  std::string path;
  std::string bytes;
};

class Loader {
 public:
  explicit Loader(double relative_tolerance = kMetricTolerance) : rel_tol_(relative_tolerance) {}

  double relative_tolerance() const { return rel_tol_; }
  const std::vector<InputFile>& files() const { return files_; }

  json read(const fs::path& path, const std::string& role) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MalformedInput, "cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    files_.push_back({role, path.string(), buffer.str()});
    try {
      return json::parse(files_.back().bytes);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::MalformedInput, path.string() + " is not valid JSON (" + e.what() + ")", {}, "");
    }
  }

  /// A space given inline or as a path relative to `dir`.
  SpacePtr space(const json& value, const fs::path& dir, const std::string& ptr, const std::string& role) {
    if (value.is_string()) return space_file(dir / value.get<std::string>(), role);
    return space_from(value, ptr);
  }

  SpacePtr space_file(const fs::path& path, const std::string& role = "space") {
    return space_from(read(path, role), "");
  }

  DiscretizedGeodesicSpace geodesic_file(const fs::path& path, const std::string& role = "space") {
    const json doc = read(path, role);
    return geodesic_from(doc, "");
  }

  LipschitzFunction function_file(const fs::path& path, const std::string& role = "function") {
    const json doc = read(path, role);
    const auto dir = path.parent_path();
    auto space = this->space(field(doc, "space", ""), dir, "/space", role + ".space");
    return LipschitzFunction(space, doubles(field(doc, "values", ""), "/values", space->size()));
  }

  FreeVector free_vector_file(const fs::path& path, const std::string& role = "vector") {
    const json doc = read(path, role);
    const auto dir = path.parent_path();
    auto space = this->space(field(doc, "space", ""), dir, "/space", role + ".space");
    auto c = doubles(field(doc, "coeffs", ""), "/coeffs", space->size());
    try {
      return FreeVector(space, std::move(c));
    } catch (const Error& e) {
      throw Error(e.code(), "coefficients must sum to zero", e.witness(), "/coeffs");
    }
  }

  /// Map file; domain and codomain from the file unless given by the caller.
  LipschitzMap map_file(const fs::path& path, SpacePtr domain = nullptr, SpacePtr codomain = nullptr) {
    const json doc = read(path, "map");
    const auto dir = path.parent_path();
    if (!domain) domain = space(field(doc, "domain", ""), dir, "/domain", "map.domain");
    if (!codomain) codomain = space(field(doc, "codomain", ""), dir, "/codomain", "map.codomain");
    return LipschitzMap(domain, codomain, indices(field(doc, "image", ""), "/image", domain->size(), codomain->size()));
  }

  SpacePtr space_from(const json& doc, const std::string& ptr) {
    if (!doc.is_object()) throw Error(ErrorCode::MalformedInput, "space must be an object", {}, ptr_or_root(ptr));
    std::size_t base = 0;
    if (doc.contains("base")) base = index(doc["base"], ptr + "/base");
    std::vector<std::string> labels;
    if (doc.contains("labels")) labels = strings(doc["labels"], ptr + "/labels");
    const json& metric = field(doc, "metric", ptr);
    const std::string type = string(field(metric, "type", ptr + "/metric"), ptr + "/metric/type");
    SpacePtr space;
    try {
      if (type == "matrix") {
        const json& d = field(metric, "d", ptr + "/metric");
        if (!d.is_array()) throw Error(ErrorCode::MalformedInput, "distance matrix must be an array", {}, ptr + "/metric/d");
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < d.size(); ++i)
          rows.push_back(doubles(d[i], ptr + "/metric/d/" + std::to_string(i), d.size()));
        space = PointedMetricSpace::create(rows, base, labels, rel_tol_);
      } else if (type == "graph") {
        const std::size_t n = index(field(metric, "n", ptr + "/metric"), ptr + "/metric/n");
        const json& e = field(metric, "edges", ptr + "/metric");
        if (!e.is_array()) throw Error(ErrorCode::MalformedInput, "edges must be an array", {}, ptr + "/metric/edges");
        std::vector<WeightedEdge> edges;
        for (std::size_t k = 0; k < e.size(); ++k) {
          const std::string at = ptr + "/metric/edges/" + std::to_string(k);
          if (!e[k].is_array() || e[k].size() != 3)
            throw Error(ErrorCode::MalformedInput, "edge must be [i, j, w]", {}, at);
          const std::size_t i = index(e[k][0], at + "/0");
          const std::size_t j = index(e[k][1], at + "/1");
          const double w = number(e[k][2], at + "/2");
          if (i >= n || j >= n) throw Error(ErrorCode::MalformedInput, "edge endpoint out of range", {}, at);
          if (!(w > 0.0)) throw Error(ErrorCode::MalformedInput, "edge weight must be positive", {}, at + "/2");
          edges.push_back({i, j, w});
        }
        space = from_weighted_graph(n, edges, base, labels, rel_tol_);
      } else {
        throw Error(ErrorCode::MalformedInput, "metric type must be matrix or graph", {}, ptr + "/metric/type");
      }
    } catch (const Error& e) {
      if (!e.json_path().empty()) throw;
      const std::string where = e.code() == ErrorCode::BadBaseIndex ? ptr + "/base" : ptr + "/metric";
      throw Error(e.code(), strip_code(e), e.witness(), where);
    }
    if (doc.contains("interval")) {
      const json& iv = doc["interval"];
      const std::string at = ptr + "/interval";
      IntervalInfo info{index(field(iv, "subdivisions", at), at + "/subdivisions"),
                        iv.contains("length") ? number(iv["length"], at + "/length") : 1.0};
      try {
        space = space->with_interval(info);
      } catch (const Error& e) {
        throw Error(e.code(), strip_code(e), e.witness(), at);
      }
    }
    return space;
  }

  DiscretizedGeodesicSpace geodesic_from(const json& doc, const std::string& ptr) {
    auto space = space_from(doc, ptr);
    std::vector<std::vector<std::size_t>> paths;
    if (doc.contains("paths")) {
      const json& ps = doc["paths"];
      if (!ps.is_array()) throw Error(ErrorCode::MalformedInput, "paths must be an array", {}, ptr + "/paths");
      for (std::size_t k = 0; k < ps.size(); ++k) {
        const std::string at = ptr + "/paths/" + std::to_string(k);
        auto pts = indices(field(ps[k], "points", at), at + "/points", 0, space->size());
        if (ps[k].contains("pair")) {
          auto pair = indices(ps[k]["pair"], at + "/pair", 2, space->size());
          if (pts.empty() || pair[0] != pts.front() || pair[1] != pts.back())
            throw Error(ErrorCode::MalformedInput, "pair does not match the path endpoints", {}, at + "/pair");
        }
        paths.push_back(std::move(pts));
      }
    }
    try {
      return DiscretizedGeodesicSpace(space, paths);
    } catch (const Error& e) {
      throw Error(e.code(), strip_code(e), e.witness(), ptr + "/paths");
    }
  }

  // ---- field helpers; every failure names the JSON pointer of the field ----

  static const json& field(const json& obj, const char* key, const std::string& ptr) {
    if (!obj.is_object()) throw Error(ErrorCode::MalformedInput, "expected an object", {}, ptr_or_root(ptr));
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(ErrorCode::MalformedInput, std::string("missing field ") + key, {}, ptr + "/" + key);
    return *it;
  }

  static double number(const json& v, const std::string& ptr) {
    if (!v.is_number()) throw Error(ErrorCode::MalformedInput, "expected a number", {}, ptr);
    return v.get<double>();
  }

  static std::size_t index(const json& v, const std::string& ptr) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw Error(ErrorCode::MalformedInput, "expected a nonnegative integer", {}, ptr);
    return v.get<std::size_t>();
  }

  static std::string string(const json& v, const std::string& ptr) {
    if (!v.is_string()) throw Error(ErrorCode::MalformedInput, "expected a string", {}, ptr);
    return v.get<std::string>();
  }

  /// Number array; `expected` = 0 accepts any length.
  static std::vector<double> doubles(const json& v, const std::string& ptr, std::size_t expected) {
    if (!v.is_array()) throw Error(ErrorCode::MalformedInput, "expected an array", {}, ptr);
    if (expected && v.size() != expected)
      throw Error(ErrorCode::MalformedInput, "expected " + std::to_string(expected) + " entries", {}, ptr);
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], ptr + "/" + std::to_string(i)));
    return out;
  }

  /// Index array with entries below `bound`; `expected` = 0 accepts any length.
  static std::vector<std::size_t> indices(const json& v, const std::string& ptr, std::size_t expected,
                                          std::size_t bound) {
    if (!v.is_array()) throw Error(ErrorCode::MalformedInput, "expected an array", {}, ptr);
    if (expected && v.size() != expected)
      throw Error(ErrorCode::MalformedInput, "expected " + std::to_string(expected) + " entries", {}, ptr);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto k = index(v[i], ptr + "/" + std::to_string(i));
      if (k >= bound) throw Error(ErrorCode::MalformedInput, "index out of range", {}, ptr + "/" + std::to_string(i));
      out.push_back(k);
    }
    return out;
  }

  static std::vector<std::string> strings(const json& v, const std::string& ptr) {
    if (!v.is_array()) throw Error(ErrorCode::MalformedInput, "expected an array", {}, ptr);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(string(v[i], ptr + "/" + std::to_string(i)));
    return out;
  }

 private:
  static std::string ptr_or_root(const std::string& ptr) { return ptr.empty() ? "/" : ptr; }

  static std::string strip_code(const Error& e) {
    std::string msg = e.what();
    const auto colon = msg.find(": ");
    return colon == std::string::npos ? msg : msg.substr(colon + 2);
  }

  double rel_tol_;
  std::vector<InputFile> files_;
};

/// Parses "0,1,5" into indices.
inline std::vector<std::size_t> parse_index_list(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
      throw Error(ErrorCode::MalformedInput, what + " must be a comma-separated index list");
    out.push_back(std::stoul(item));
  }
  if (out.empty()) throw Error(ErrorCode::MalformedInput, what + " is empty");
  return out;
}

/// Parses "0-1,2-3" (or "0:1,...") into pairs.
inline std::vector<PointPair> parse_pair_list(const std::string& text) {
  std::vector<PointPair> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto sep = item.find_first_of("-:");
    if (sep == std::string::npos) throw Error(ErrorCode::MalformedInput, "pairs must look like 0-1,2-3");
    const auto a = parse_index_list(item.substr(0, sep), "pair");
    const auto b = parse_index_list(item.substr(sep + 1), "pair");
    if (a.size() != 1 || b.size() != 1) throw Error(ErrorCode::MalformedInput, "pairs must look like 0-1,2-3");
    out.push_back({a[0], b[0]});
  }
  if (out.empty()) throw Error(ErrorCode::MalformedInput, "pair list is empty");
  return out;
}

// ---- projections of values and results ----

inline json to_json(PointPair p) { return json::array({p.x, p.y}); }

inline json to_json(std::span<const PointPair> pairs) {
  json out = json::array();
  for (auto p : pairs) out.push_back(to_json(p));
  return out;
}

inline json space_to_json(const PointedMetricSpace& space) {
  json d = json::array();
  for (std::size_t i = 0; i < space.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < space.size(); ++j) row.push_back(space.dist(i, j));
    d.push_back(std::move(row));
  }
  json out{{"labels", space.labels()}, {"base", space.base()}, {"metric", {{"type", "matrix"}, {"d", std::move(d)}}}};
  if (space.interval())
    out["interval"] = {{"subdivisions", space.interval()->subdivisions}, {"length", space.interval()->length}};
  return out;
}

inline json geodesic_to_json(const DiscretizedGeodesicSpace& g) {
  json out = space_to_json(*g.space());
  json paths = json::array();
  for (const auto& p : g.paths()) paths.push_back({{"pair", to_json(p.pair)}, {"points", p.points}});
  out["paths"] = std::move(paths);
  return out;
}

inline json map_to_json(const LipschitzMap& phi) {
  return {{"domain", space_to_json(*phi.domain())},
          {"codomain", space_to_json(*phi.codomain())},
          {"image", phi.image()}};
}

inline json to_json(const LipschitzNorm& n) { return {{"value", n.value}, {"witness", to_json(n.witness)}}; }

inline json to_json(const PrimalNorm& n) {
  json plan = json::array();
  for (const auto& a : n.plan) plan.push_back({{"from", a.from}, {"to", a.to}, {"amount", a.amount}});
  return {{"value", n.value}, {"plan", std::move(plan)}};
}

inline json to_json(const DualNorm& n) { return {{"value", n.value}, {"maximizer", n.maximizer.values()}}; }

inline json to_json(std::span<const CombinationTerm> terms) {
  json out = json::array();
  for (const auto& t : terms) out.push_back({{"pair", to_json(t.molecule)}, {"weight", t.weight}});
  return out;
}

inline json to_json(const IsometryCertificate& c) {
  json out{{"verdict", to_string(c.verdict)},
           {"method", to_string(c.method)},
           {"conclusive", c.conclusive},
           {"norming_set", c.caller_norming_set ? "caller" : "extreme_molecules"},
           {"map_norm", to_json(c.map_norm)},
           {"norm_shortcut", c.norm_shortcut},
           {"checked_pairs", to_json(c.checked_pairs)}};
  if (c.failing_pair) out["failing_pair"] = to_json(*c.failing_pair);
  if (c.method == CertifyMethod::dual_preimage) {
    json w = json::array();
    for (const auto& p : c.preimages) w.push_back({{"pair", to_json(p.target)}, {"preimage", to_json(p.preimage)}});
    out["witnesses"] = std::move(w);
  } else {
    json w = json::array();
    for (const auto& r : c.representations)
      w.push_back({{"pair", to_json(r.target)}, {"combination", to_json(r.combination)}});
    out["witnesses"] = std::move(w);
  }
  out["tolerances"] = {{"distance", c.distance_tolerance}, {"ratio", c.ratio_tolerance}, {"lp_feasibility", c.lp_tolerance}};
  return out;
}

inline json to_json(const IsometryReport& r) {
  json out{{"verdict", to_string(r.verdict)}};
  json certs = json::object();
  if (r.dual) certs["dual_preimage"] = to_json(*r.dual);
  if (r.primal) certs["primal_polytope"] = to_json(*r.primal);
  out["certificates"] = std::move(certs);
  if (r.dual && r.primal) out["methods_compared"] = r.compared;
  return out;
}

inline json to_json(const DefectProfile& p) {
  json pts = json::array();
  for (const auto& d : p.points) {
    json e{{"t", d.t}, {"best_ratio", d.best_ratio}, {"defect", d.defect}};
    if (d.witness) e["witness"] = to_json(*d.witness);
    pts.push_back(std::move(e));
  }
  return {{"r_loc", p.r_loc}, {"eps", p.eps},           {"mesh", p.mesh},
          {"max_defect", p.max_defect}, {"holds", p.holds}, {"profile", std::move(pts)}};
}

inline json to_json(std::span<const AttainedValue> values) {
  json out = json::array();
  for (const auto& v : values)
    out.push_back({{"t", v.t}, {"point", v.point}, {"pointwise_lip", v.pointwise_lip}, {"margin", v.margin}});
  return out;
}

inline json to_json(const IntervalSufficientReport& r) {
  return {{"r", r.r},
          {"eps", r.eps},
          {"mesh", r.mesh},
          {"max_gap", r.max_gap},
          {"gap_start", r.gap_start},
          {"dense", r.dense},
          {"worst_margin", r.worst_margin},
          {"lipschitz_ok", r.lipschitz_ok},
          {"passes", r.passes},
          {"values", to_json(r.values)}};
}

inline json to_json(const GeodesicSufficientReport& r) {
  json paths = json::array();
  for (const auto& p : r.paths)
    paths.push_back({{"pair", to_json(p.pair)},
                     {"worst_margin", p.worst_margin},
                     {"passes", p.passes},
                     {"values", to_json(p.values)}});
  return {{"r", r.r},
          {"eps", r.eps},
          {"mesh", r.mesh},
          {"coverage_radius", r.coverage_radius},
          {"passes", r.passes},
          {"paths", std::move(paths)}};
}

inline json to_json(const InverseProjection& p) {
  return {{"pair", to_json(p.path.pair)},
          {"path", p.path.points},
          {"length", p.path.length()},
          {"lipschitz", p.lipschitz},
          {"values", p.values}};
}

/// Flat CSV projection of a defect profile: t,best_ratio,defect.
inline std::string profile_csv(const DefectProfile& p) {
  std::ostringstream out;
  out.precision(17);
  out << "t,best_ratio,defect\n";
  for (const auto& d : p.points) out << d.t << ',' << d.best_ratio << ',' << d.defect << '\n';
  return out.str();
}

}  // namespace lipfree::io

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lipfree/composition.hpp"
#include "lipfree/error.hpp"
#include "lipfree/lipschitz.hpp"
#include "lipfree/metric_space.hpp"
#include "lipfree/parallel.hpp"

namespace lipfree {

struct StraightnessCheck {
  bool straight = false;
  /// max over i < j of |d(p_i, p_j) - |c_i - c_j||.
  double defect = 0.0;
  std::vector<double> cumulative;
};

/// Is the point sequence a discrete isometric copy of [0, length]?
inline StraightnessCheck straight_path_check(const PointedMetricSpace& space, std::span<const std::size_t> points) {
  if (points.size() < 2) throw Error(ErrorCode::InvalidArgument, "a path needs at least two points");
  for (std::size_t p : points)
    if (p >= space.size()) throw Error(ErrorCode::InvalidArgument, "path point out of range", {p});
  StraightnessCheck out;
  out.cumulative.assign(points.size(), 0.0);
  for (std::size_t i = 1; i < points.size(); ++i)
    out.cumulative[i] = out.cumulative[i - 1] + space.dist(points[i - 1], points[i]);
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      out.defect = std::max(
          out.defect, std::abs(space.dist(points[i], points[j]) - (out.cumulative[j] - out.cumulative[i])));
  out.straight = out.defect <= space.tol();
  return out;
}

struct GeodesicPath {
  PointPair pair;
  std::vector<std::size_t> points;
  std::vector<double> cumulative;

  double length() const { return cumulative.back(); }
};

/// Shortest-path space with explicitly stored straight paths.
class DiscretizedGeodesicSpace {
 public:
  DiscretizedGeodesicSpace(SpacePtr space, const std::vector<std::vector<std::size_t>>& paths)
      : space_(std::move(space)) {
    if (!space_) throw Error(ErrorCode::InvalidArgument, "geodesic space needs a metric space");
    for (const auto& pts : paths) {
      std::vector<std::size_t> sorted = pts;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw Error(ErrorCode::NotStraightPath, "path visits a point twice");
      auto check = straight_path_check(*space_, pts);
      if (!check.straight)
        throw Error(ErrorCode::NotStraightPath, "stored path is not metrically straight", {pts.front(), pts.back()});
      const PointPair pair{pts.front(), pts.back()};
      for (const auto& existing : paths_)
        if (existing.pair == pair) throw Error(ErrorCode::MalformedInput, "two paths stored for one pair", {pair.x, pair.y});
      for (std::size_t i = 1; i < pts.size(); ++i) mesh_ = std::max(mesh_, space_->dist(pts[i - 1], pts[i]));
      paths_.push_back({pair, pts, std::move(check.cumulative)});
    }
  }

  const SpacePtr& space() const { return space_; }
  const std::vector<GeodesicPath>& paths() const { return paths_; }
  /// Largest step along any stored path; 0 without paths.
  double mesh() const { return mesh_; }

  /// The path stored for (x, y); a path stored for (y, x) is returned reversed.
  GeodesicPath path(PointPair pair) const {
    for (const auto& p : paths_)
      if (p.pair == pair) return p;
    for (const auto& p : paths_)
      if (p.pair == pair.reversed()) {
        GeodesicPath r{pair, {p.points.rbegin(), p.points.rend()}, {}};
        r.cumulative.resize(p.cumulative.size());
        for (std::size_t i = 0; i < r.cumulative.size(); ++i)
          r.cumulative[i] = p.length() - p.cumulative[p.cumulative.size() - 1 - i];
        r.cumulative.front() = 0.0;
        return r;
      }
    throw Error(ErrorCode::NoStoredPath, "no path stored for the pair", {pair.x, pair.y});
  }

 private:
  SpacePtr space_;
  std::vector<GeodesicPath> paths_;
  double mesh_ = 0.0;
};

/// Norm-one P with P(p_i) = cumulative(i) on the path and 0 <= P <= length.
/// Values are raw (P need not vanish at the base point).
struct InverseProjection {
  GeodesicPath path;
  std::vector<double> values;
  double lipschitz = 0.0;

  double operator()(std::size_t x) const { return values[x]; }
};

/// Inf-convolution extension of the arclength parameter with floor 0, then
/// clamped into [0, length].
inline InverseProjection inverse_projection(const DiscretizedGeodesicSpace& gspace, const GeodesicPath& path) {
  const auto& space = *gspace.space();
  const auto check = straight_path_check(space, path.points);
  if (!check.straight) throw Error(ErrorCode::NotStraightPath, "path is not metrically straight");
  const double length = path.length();
  const std::vector<double> zero(space.size(), 0.0);
  auto ext = extend_values(space, path.points, path.cumulative, std::span<const double>(zero));

  InverseProjection out{path, std::move(ext.values), 0.0};
  for (double& v : out.values) v = std::clamp(v, 0.0, length);
  out.lipschitz = lipschitz_constant(space, out.values).value;

  const double rel = std::max(space.relative_tolerance(), kMetricTolerance);
  if (std::abs(out.lipschitz - 1.0) > rel)
    throw Error(ErrorCode::InvariantFailure, "inverse projection does not have norm one");
  for (std::size_t i = 0; i < path.points.size(); ++i)
    if (out.values[path.points[i]] != path.cumulative[i])
      throw Error(ErrorCode::InvariantFailure, "inverse projection is not a left inverse on the path", {path.points[i]});
  return out;
}

inline InverseProjection inverse_projection(const DiscretizedGeodesicSpace& gspace, PointPair pair) {
  return inverse_projection(gspace, gspace.path(pair));
}

struct DefectPoint {
  double t = 0.0;
  double best_ratio = 0.0;
  double defect = 1.0;
  /// Ordered domain pair attaining best_ratio; absent when fewer than two
  /// domain points are localized near t.
  std::optional<PointPair> witness;
};

struct DefectProfile {
  double r_loc = 0.0;
  double eps = 0.0;
  double mesh = 0.0;
  std::vector<DefectPoint> points;
  double max_defect = 0.0;
  bool holds = false;
};

struct ScaleThresholds {
  std::optional<double> r_loc;
  std::optional<double> eps;
};

namespace detail {

/// For each t: max of (s(a) - s(b)) / d(a, b) over domain pairs with both
/// |s(a) - t| and |s(b) - t| at most r_loc.
inline DefectProfile defect_profile(const PointedMetricSpace& domain, std::span<const double> s,
                                    std::span<const double> grid, double r_loc, double eps, double mesh) {
  if (!(r_loc > 0.0)) throw Error(ErrorCode::InvalidArgument, "localization radius must be positive");
  std::vector<std::size_t> order(s.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });

  DefectProfile out{r_loc, eps, mesh, std::vector<DefectPoint>(grid.size()), 0.0, false};
  parallel_for(grid.size(), [&](std::size_t g) {
    const double t = grid[g];
    const auto lo = std::lower_bound(order.begin(), order.end(), t - r_loc,
                                     [&](std::size_t i, double v) { return s[i] < v; });
    const auto hi = std::upper_bound(order.begin(), order.end(), t + r_loc,
                                     [&](double v, std::size_t i) { return v < s[i]; });
    std::vector<std::size_t> local(lo, hi);
    std::sort(local.begin(), local.end());
    DefectPoint point{t, 0.0, 1.0, std::nullopt};
    for (std::size_t a : local)
      for (std::size_t b : local) {
        if (a == b) continue;
        const double q = (s[a] - s[b]) / domain.dist(a, b);
        if (!point.witness || q > point.best_ratio) {
          point.best_ratio = q;
          point.witness = PointPair{a, b};
        }
      }
    point.defect = 1.0 - point.best_ratio;
    out.points[g] = point;
  });
  for (const auto& p : out.points) out.max_defect = std::max(out.max_defect, p.defect);
  out.holds = out.max_defect <= eps;
  return out;
}

inline const IntervalInfo& interval_codomain(const LipschitzMap& phi) {
  const auto& info = phi.codomain()->interval();
  if (!info) throw Error(ErrorCode::CodomainNotInterval, "codomain is not an interval net");
  return *info;
}

inline std::vector<double> interval_scalar(const LipschitzMap& phi) {
  const auto& info = interval_codomain(phi);
  std::vector<double> s(phi.image().size());
  for (std::size_t x = 0; x < s.size(); ++x) s[x] = info.coordinate(phi(x));
  return s;
}

inline void check_codomain(const LipschitzMap& phi, const DiscretizedGeodesicSpace& gspace) {
  if (!same_space(*phi.codomain(), *gspace.space()))
    throw Error(ErrorCode::SpaceMismatch, "map codomain is not the geodesic space");
}

}  // namespace detail

/// Localized best-ratio profile of a map into an interval net. Defaults:
/// grid = net coordinates, r_loc = eps = 4h.
inline DefectProfile check_interval_necessary(const LipschitzMap& phi,
                                              std::optional<std::vector<double>> grid = std::nullopt,
                                              const ScaleThresholds& thresholds = {}) {
  const auto& info = detail::interval_codomain(phi);
  const double h = info.mesh();
  if (!grid) {
    grid.emplace(info.subdivisions + 1);
    for (std::size_t k = 0; k <= info.subdivisions; ++k) (*grid)[k] = info.coordinate(k);
  }
  const auto s = detail::interval_scalar(phi);
  return detail::defect_profile(*phi.domain(), s, *grid, thresholds.r_loc.value_or(4.0 * h),
                                thresholds.eps.value_or(4.0 * h), h);
}

struct AttainedValue {
  double t = 0.0;
  /// Domain point attaining the best scale-r pointwise constant among the fibre.
  std::size_t point = 0;
  double pointwise_lip = 0.0;
  double margin = 0.0;
};

struct IntervalSufficientReport {
  double r = 0.0;
  double eps = 0.0;
  double mesh = 0.0;
  /// Largest gap of the image inside [0, length], endpoints included.
  double max_gap = 0.0;
  double gap_start = 0.0;
  bool dense = false;
  std::vector<AttainedValue> values;
  /// min over attained t of (best pointwise constant - 1).
  double worst_margin = 0.0;
  bool lipschitz_ok = false;
  bool passes = false;
};

/// (a) the image leaves no gap wider than 2h; (b) every attained value has a
/// preimage where the scale-r pointwise Lipschitz constant is at least 1 - eps.
/// Defaults: r = eps = 4h.
inline IntervalSufficientReport check_interval_sufficient(const LipschitzMap& phi, const ScaleThresholds& thresholds = {}) {
  const auto& info = detail::interval_codomain(phi);
  const double h = info.mesh();
  IntervalSufficientReport out;
  out.mesh = h;
  out.r = thresholds.r_loc.value_or(4.0 * h);
  out.eps = thresholds.eps.value_or(4.0 * h);
  if (!(out.r > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  const auto s = detail::interval_scalar(phi);

  std::vector<std::size_t> attained = phi.image();
  std::sort(attained.begin(), attained.end());
  attained.erase(std::unique(attained.begin(), attained.end()), attained.end());
  double prev = 0.0;
  for (std::size_t k : attained) {
    const double t = info.coordinate(k);
    if (t - prev > out.max_gap) {
      out.max_gap = t - prev;
      out.gap_start = prev;
    }
    prev = t;
  }
  if (info.length - prev > out.max_gap) {
    out.max_gap = info.length - prev;
    out.gap_start = prev;
  }
  out.dense = out.max_gap <= 2.0 * h + phi.codomain()->tol();

  out.values.resize(attained.size());
  const auto& n = *phi.domain();
  parallel_for(attained.size(), [&](std::size_t i) {
    AttainedValue v{info.coordinate(attained[i]), 0, -1.0, 0.0};
    for (std::size_t x = 0; x < n.size(); ++x) {
      if (phi(x) != attained[i]) continue;
      const double lip = pointwise_lip_at_scale(n, s, x, out.r);
      if (lip > v.pointwise_lip) {
        v.pointwise_lip = lip;
        v.point = x;
      }
    }
    v.margin = v.pointwise_lip - 1.0;
    out.values[i] = v;
  });
  out.worst_margin = 0.0;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    if (i == 0 || out.values[i].margin < out.worst_margin) out.worst_margin = out.values[i].margin;
  out.lipschitz_ok = out.worst_margin >= -out.eps;
  out.passes = out.dense && out.lipschitz_ok;
  return out;
}

/// Defect profile of P o phi along the stored path for `pair`, P its inverse
/// projection. Defaults: grid = path arclength values, r_loc = eps = 4 mesh.
inline DefectProfile check_geodesic_necessary(const LipschitzMap& phi, const DiscretizedGeodesicSpace& gspace,
                                              PointPair pair, std::optional<std::vector<double>> grid = std::nullopt,
                                              const ScaleThresholds& thresholds = {}) {
  detail::check_codomain(phi, gspace);
  const auto path = gspace.path(pair);
  const auto proj = inverse_projection(gspace, path);
  if (!grid) grid = path.cumulative;
  std::vector<double> s(phi.image().size());
  for (std::size_t x = 0; x < s.size(); ++x) s[x] = proj(phi(x));
  const double mesh = gspace.mesh();
  return detail::defect_profile(*phi.domain(), s, *grid, thresholds.r_loc.value_or(4.0 * mesh),
                                thresholds.eps.value_or(4.0 * mesh), mesh);
}

struct PathSufficiency {
  PointPair pair;
  std::vector<AttainedValue> values;
  double worst_margin = 0.0;
  bool passes = false;
};

struct GeodesicSufficientReport {
  double r = 0.0;
  double eps = 0.0;
  double mesh = 0.0;
  /// max over codomain points of the distance to the image.
  double coverage_radius = 0.0;
  std::vector<PathSufficiency> paths;
  bool passes = false;
};

/// (a) every codomain point lies within 2 mesh of the image, else RangeNotDense
/// naming the worst point; (b) for every stored path and every mesh-snapped
/// value z of P o phi, some x with |P(phi x) - z| <= mesh has scale-r
/// pointwise constant of P o phi at least 1 - eps. Defaults: r = eps = 4 mesh.
inline GeodesicSufficientReport check_geodesic_sufficient(const LipschitzMap& phi,
                                                          const DiscretizedGeodesicSpace& gspace,
                                                          const ScaleThresholds& thresholds = {}) {
  detail::check_codomain(phi, gspace);
  if (gspace.paths().empty()) throw Error(ErrorCode::NoStoredPath, "geodesic space stores no paths");
  const auto& m = *gspace.space();
  const auto& n = *phi.domain();
  GeodesicSufficientReport out;
  out.mesh = gspace.mesh();
  out.r = thresholds.r_loc.value_or(4.0 * out.mesh);
  out.eps = thresholds.eps.value_or(4.0 * out.mesh);
  if (!(out.r > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");

  std::size_t worst = 0;
  for (std::size_t z = 0; z < m.size(); ++z) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < n.size(); ++x) nearest = std::min(nearest, m.dist(z, phi(x)));
    if (nearest > out.coverage_radius) {
      out.coverage_radius = nearest;
      worst = z;
    }
  }
  if (out.coverage_radius > 2.0 * out.mesh + m.tol())
    throw Error(ErrorCode::RangeNotDense, "codomain point far from the image", {worst});

  for (const auto& path : gspace.paths()) {
    const auto proj = inverse_projection(gspace, path);
    std::vector<double> s(n.size());
    for (std::size_t x = 0; x < n.size(); ++x) s[x] = proj(phi(x));
    std::vector<double> snapped;
    for (double v : s) snapped.push_back(std::round(v / out.mesh) * out.mesh);
    std::sort(snapped.begin(), snapped.end());
    snapped.erase(std::unique(snapped.begin(), snapped.end()), snapped.end());

    PathSufficiency ps{path.pair, std::vector<AttainedValue>(snapped.size()), 0.0, false};
    parallel_for(snapped.size(), [&](std::size_t i) {
      AttainedValue v{snapped[i], 0, -1.0, 0.0};
      for (std::size_t x = 0; x < n.size(); ++x) {
        if (std::abs(s[x] - snapped[i]) > out.mesh + m.tol()) continue;
        const double lip = pointwise_lip_at_scale(n, s, x, out.r);
        if (lip > v.pointwise_lip) {
          v.pointwise_lip = lip;
          v.point = x;
        }
      }
      v.margin = v.pointwise_lip - 1.0;
      ps.values[i] = v;
    });
    for (std::size_t i = 0; i < ps.values.size(); ++i)
      if (i == 0 || ps.values[i].margin < ps.worst_margin) ps.worst_margin = ps.values[i].margin;
    ps.passes = ps.worst_margin >= -out.eps;
    out.paths.push_back(std::move(ps));
  }
  out.passes = std::all_of(out.paths.begin(), out.paths.end(), [](const PathSufficiency& p) { return p.passes; });
  return out;
}

/// Interval net with the full path from 0 to 1 stored.
inline DiscretizedGeodesicSpace geodesic_interval(std::size_t n) {
  auto net = interval_net(n);
  std::vector<std::size_t> path(n + 1);
  for (std::size_t k = 0; k <= n; ++k) path[k] = k;
  return DiscretizedGeodesicSpace(net, {path});
}

/// Unit circle with its arclength metric (cycle graph, edges 2 pi / n), with
/// both half circles from point 0 to the antipode stored. n must be even.
inline DiscretizedGeodesicSpace geodesic_circle(std::size_t n) {
  if (n < 4 || n % 2 != 0) throw Error(ErrorCode::InvalidArgument, "geodesic circle needs an even point count >= 4");
  const double w = 2.0 * std::numbers::pi / static_cast<double>(n);
  std::vector<WeightedEdge> edges;
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < n; ++k) {
    edges.push_back({k, (k + 1) % n, w});
    labels.push_back("c" + std::to_string(k));
  }
  auto space = from_weighted_graph(n, edges, 0, std::move(labels));
  std::vector<std::size_t> upper, lower;
  for (std::size_t k = 0; k <= n / 2; ++k) upper.push_back(k);
  for (std::size_t k = n / 2; k <= n; ++k) lower.push_back(k % n);
  return DiscretizedGeodesicSpace(space, {upper, lower});
}

/// Tripod with legs of `segments` steps and the three leaf-to-leaf paths.
inline DiscretizedGeodesicSpace geodesic_tripod(std::size_t segments = 1) {
  auto space = tripod(segments);
  std::vector<std::vector<std::size_t>> paths;
  for (std::size_t a = 0; a < 3; ++a) {
    const std::size_t b = (a + 1) % 3;
    std::vector<std::size_t> p;
    for (std::size_t s = segments; s > 0; --s) p.push_back(Tripod::leg_point(a, s, segments));
    p.push_back(0);
    for (std::size_t s = 1; s <= segments; ++s) p.push_back(Tripod::leg_point(b, s, segments));
    paths.push_back(std::move(p));
  }
  return DiscretizedGeodesicSpace(space, paths);
}

}  // namespace lipfree

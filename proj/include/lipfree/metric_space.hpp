#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lipfree/error.hpp"

namespace lipfree {

/// Relative metric tolerance; absolute comparisons use this times the diameter.
inline constexpr double kMetricTolerance = 1e-9;

struct PointPair {
  std::size_t x = 0;
  std::size_t y = 0;

  PointPair reversed() const { return {y, x}; }
  /// Same pair with the smaller index first.
  PointPair unordered() const { return x < y ? *this : reversed(); }

  friend auto operator<=>(const PointPair&, const PointPair&) = default;
};

/// Marks a space as the uniform net {k * length / subdivisions} of [0, length].
struct IntervalInfo {
  std::size_t subdivisions = 1;
  double length = 1.0;

  double mesh() const { return length / static_cast<double>(subdivisions); }
  double coordinate(std::size_t k) const {
    return length * static_cast<double>(k) / static_cast<double>(subdivisions);
  }
};

class PointedMetricSpace;
using SpacePtr = std::shared_ptr<const PointedMetricSpace>;

/// Finite metric space with a distinguished base point. Instances only exist
/// in validated form; every factory goes through the same checks.
class PointedMetricSpace {
 public:
  std::size_t size() const { return n_; }
  std::size_t base() const { return base_; }
  double dist(std::size_t i, std::size_t j) const { return dist_[i * n_ + j]; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  double diameter() const { return diameter_; }
  double relative_tolerance() const { return rel_tol_; }
  /// Absolute metric tolerance: relative tolerance scaled by the diameter.
  double tol() const { return rel_tol_ * diameter_; }
  const std::optional<IntervalInfo>& interval() const { return interval_; }

  std::vector<std::vector<double>> matrix() const {
    std::vector<std::vector<double>> rows(n_, std::vector<double>(n_));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) rows[i][j] = dist(i, j);
    return rows;
  }

  bool contains(PointPair p) const { return p.x < n_ && p.y < n_ && p.x != p.y; }

  /// Validates a candidate distance matrix. Symmetry and the triangle
  /// inequality are checked up to rel_tol times the largest entry; the stored
  /// matrix is the symmetrized input.
  static SpacePtr create(const std::vector<std::vector<double>>& d, std::size_t base,
                         std::vector<std::string> labels = {},
                         double rel_tol = kMetricTolerance) {
    const std::size_t n = d.size();
    if (n < 2) throw Error(ErrorCode::MalformedInput, "a pointed metric space needs at least 2 points");
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i].size() != n)
        throw Error(ErrorCode::MalformedInput, "distance matrix is not square", {i});
      for (std::size_t j = 0; j < n; ++j)
        if (!std::isfinite(d[i][j]))
          throw Error(ErrorCode::MalformedInput, "non-finite distance", {i, j});
    }
    if (base >= n) throw Error(ErrorCode::BadBaseIndex, "base index out of range", {base});
    if (!(rel_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be nonnegative");
    if (!labels.empty() && labels.size() != n)
      throw Error(ErrorCode::MalformedInput, "label count does not match point count");

    double max_entry = 0.0;
    for (const auto& row : d)
      for (double v : row) max_entry = std::max(max_entry, std::abs(v));
    const double tol = rel_tol * max_entry;

    auto space = std::shared_ptr<PointedMetricSpace>(new PointedMetricSpace());
    space->n_ = n;
    space->base_ = base;
    space->rel_tol_ = rel_tol;
    space->dist_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (d[i][j] < 0.0) throw Error(ErrorCode::NegativeDistance, "negative distance", {i, j});
      }
      if (d[i][i] != 0.0) throw Error(ErrorCode::MalformedInput, "nonzero diagonal entry", {i});
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (std::abs(d[i][j] - d[j][i]) > tol)
          throw Error(ErrorCode::AsymmetricDistance, "d(i,j) != d(j,i)", {i, j});
        if (d[i][j] <= 0.0 || d[j][i] <= 0.0)
          throw Error(ErrorCode::ZeroDistanceDistinctPoints, "distinct points at distance 0", {i, j});
        const double v = d[i][j] == d[j][i] ? d[i][j] : 0.5 * (d[i][j] + d[j][i]);
        space->dist_[i * n + j] = v;
        space->dist_[j * n + i] = v;
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i || j == k || i == k) continue;
          if (space->dist(i, k) > space->dist(i, j) + space->dist(j, k) + tol)
            throw Error(ErrorCode::TriangleViolation, "d(i,k) > d(i,j) + d(j,k)", {i, j, k});
        }
    space->diameter_ = *std::max_element(space->dist_.begin(), space->dist_.end());
    if (labels.empty()) {
      labels.reserve(n);
      for (std::size_t i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
    }
    space->labels_ = std::move(labels);
    return space;
  }

  /// Copy of this space carrying a different relative tolerance.
  SpacePtr with_tolerance(double rel_tol) const {
    auto copy = create(matrix(), base_, labels_, rel_tol);
    if (interval_) return copy->with_interval(*interval_);
    return copy;
  }

  /// Copy of this space tagged as an interval net, after checking that the
  /// distances really are |i - j| * mesh with the base at coordinate 0.
  SpacePtr with_interval(const IntervalInfo& info) const {
    if (info.subdivisions + 1 != n_ || base_ != 0 || !(info.length > 0.0))
      throw Error(ErrorCode::NotAnIntervalNet, "point count or base does not match the interval net");
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (std::abs(dist(i, j) - std::abs(info.coordinate(i) - info.coordinate(j))) > tol())
          throw Error(ErrorCode::NotAnIntervalNet, "distances are not those of a uniform line net", {i, j});
    auto copy = std::shared_ptr<PointedMetricSpace>(new PointedMetricSpace(*this));
    copy->interval_ = info;
    return copy;
  }

 private:
  PointedMetricSpace() = default;

  std::size_t n_ = 0;
  std::size_t base_ = 0;
  double rel_tol_ = kMetricTolerance;
  double diameter_ = 0.0;
  std::vector<double> dist_;
  std::vector<std::string> labels_;
  std::optional<IntervalInfo> interval_;
};

/// Structural equality (same points, base, and bit-identical distances).
inline bool same_space(const PointedMetricSpace& a, const PointedMetricSpace& b) {
  if (&a == &b) return true;
  if (a.size() != b.size() || a.base() != b.base()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (a.dist(i, j) != b.dist(i, j)) return false;
  return true;
}

inline SpacePtr validate_space(const std::vector<std::vector<double>>& d, std::size_t base,
                               std::vector<std::string> labels = {},
                               double rel_tol = kMetricTolerance) {
  return PointedMetricSpace::create(d, base, std::move(labels), rel_tol);
}

struct WeightedEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 0.0;
};

/// Shortest-path metric of a connected graph with positive weights.
///
/// Dijkstra from every source, then min-symmetrization and closure sweeps
/// until d(i,k) <= d(i,j) + d(j,k) holds in floating point, so the result
/// validates with zero tolerance.
inline SpacePtr from_weighted_graph(std::size_t n, std::span<const WeightedEdge> edges,
                                    std::size_t base, std::vector<std::string> labels = {},
                                    double rel_tol = kMetricTolerance) {
  if (n < 2) throw Error(ErrorCode::MalformedInput, "graph needs at least 2 vertices");
  if (base >= n) throw Error(ErrorCode::BadBaseIndex, "base index out of range", {base});
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (const auto& e : edges) {
    if (e.i >= n || e.j >= n) throw Error(ErrorCode::MalformedInput, "edge endpoint out of range", {e.i, e.j});
    if (!(e.w > 0.0) || !std::isfinite(e.w))
      throw Error(ErrorCode::MalformedInput, "edge weights must be positive and finite", {e.i, e.j});
    if (e.i == e.j) continue;
    adj[e.i].emplace_back(e.j, e.w);
    adj[e.j].emplace_back(e.i, e.w);
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  using Item = std::pair<double, std::size_t>;
  for (std::size_t s = 0; s < n; ++s) {
    auto& ds = d[s];
    ds[s] = 0.0;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
      auto [du, u] = heap.top();
      heap.pop();
      if (du > ds[u]) continue;
      for (auto [v, w] : adj[u]) {
        if (du + w < ds[v]) {
          ds[v] = du + w;
          heap.emplace(ds[v], v);
        }
      }
    }
    for (std::size_t t = 0; t < n; ++t)
      if (ds[t] == inf) throw Error(ErrorCode::DisconnectedGraph, "graph is not connected", {s, t});
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = std::min(d[i][j], d[j][i]);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k) {
          const double via = d[i][j] + d[j][k];
          if (via < d[i][k]) {
            d[i][k] = d[k][i] = via;
            changed = true;
          }
        }
  }
  return PointedMetricSpace::create(d, base, std::move(labels), rel_tol);
}

/// Uniform net of [0, length] with the given number of subdivisions, base at 0.
inline SpacePtr line_net(std::size_t subdivisions, double length) {
  if (subdivisions < 1) throw Error(ErrorCode::InvalidArgument, "line net needs at least one subdivision");
  if (!(length > 0.0) || !std::isfinite(length))
    throw Error(ErrorCode::InvalidArgument, "line net length must be positive");
  const IntervalInfo info{subdivisions, length};
  const std::size_t n = subdivisions + 1;
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d[i][j] = std::abs(info.coordinate(i) - info.coordinate(j));
    labels.push_back(length == 1.0 ? std::to_string(i) + "/" + std::to_string(subdivisions)
                                   : "t" + std::to_string(i));
  }
  return PointedMetricSpace::create(d, 0, std::move(labels))->with_interval(info);
}

/// The points {k/n : 0 <= k <= n} of [0,1] with the line metric.
inline SpacePtr interval_net(std::size_t n) { return line_net(n, 1.0); }

/// n equally spaced points on the unit circle in the plane, chordal distance.
inline SpacePtr circle_net(std::size_t n) {
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "circle net needs at least 3 points");
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::size_t steps = i > j ? i - j : j - i;
      d[i][j] = 2.0 * std::sin(std::numbers::pi * static_cast<double>(steps) / static_cast<double>(n));
    }
    labels.push_back("c" + std::to_string(i));
  }
  return PointedMetricSpace::create(d, 0, std::move(labels));
}

/// Snowflake transform d -> d^theta for 0 < theta < 1.
inline SpacePtr snowflake(const PointedMetricSpace& space, double theta) {
  if (!(theta > 0.0 && theta < 1.0))
    throw Error(ErrorCode::InvalidArgument, "snowflake exponent must lie in (0,1)");
  auto d = space.matrix();
  for (auto& row : d)
    for (double& v : row) v = v == 0.0 ? 0.0 : std::pow(v, theta);
  return PointedMetricSpace::create(d, space.base(), space.labels(), space.relative_tolerance());
}

/// Tripod: a center (index 0, the base) and three legs of length 1, each
/// subdivided into `segments` edges. Leaf of leg l is leaf_index(l).
struct Tripod {
  static std::size_t leaf_index(std::size_t leg, std::size_t segments) { return 1 + leg * segments + segments - 1; }
  static std::size_t leg_point(std::size_t leg, std::size_t step, std::size_t segments) {
    return step == 0 ? 0 : 1 + leg * segments + step - 1;
  }
};

inline SpacePtr tripod(std::size_t segments = 1) {
  if (segments < 1) throw Error(ErrorCode::InvalidArgument, "tripod legs need at least one segment");
  const std::size_t n = 1 + 3 * segments;
  const double w = 1.0 / static_cast<double>(segments);
  std::vector<WeightedEdge> edges;
  std::vector<std::string> labels{"center"};
  for (std::size_t leg = 0; leg < 3; ++leg) {
    for (std::size_t s = 1; s <= segments; ++s) {
      edges.push_back({Tripod::leg_point(leg, s - 1, segments), Tripod::leg_point(leg, s, segments), w});
      labels.push_back("leg" + std::to_string(leg) + ":" + std::to_string(s) + "/" + std::to_string(segments));
    }
  }
  return from_weighted_graph(n, edges, 0, std::move(labels));
}

/// All z outside {x, y} with d(x,z) + d(z,y) <= d(x,y) + tol, i.e. the points
/// where the triangle inequality is tight for the pair.
inline std::vector<std::size_t> intermediate_points(const PointedMetricSpace& space, PointPair pair) {
  if (!space.contains(pair)) throw Error(ErrorCode::InvalidArgument, "invalid point pair", {pair.x, pair.y});
  std::vector<std::size_t> out;
  const double limit = space.dist(pair.x, pair.y) + space.tol();
  for (std::size_t z = 0; z < space.size(); ++z) {
    if (z == pair.x || z == pair.y) continue;
    if (space.dist(pair.x, z) + space.dist(z, pair.y) <= limit) out.push_back(z);
  }
  return out;
}

/// Unordered pairs (x < y) in lexicographic order.
inline std::vector<PointPair> all_pairs(const PointedMetricSpace& space) {
  std::vector<PointPair> pairs;
  pairs.reserve(space.size() * (space.size() - 1) / 2);
  for (std::size_t x = 0; x < space.size(); ++x)
    for (std::size_t y = x + 1; y < space.size(); ++y) pairs.push_back({x, y});
  return pairs;
}

}  // namespace lipfree

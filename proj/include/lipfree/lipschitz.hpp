#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lipfree/error.hpp"
#include "lipfree/metric_space.hpp"

namespace lipfree {

/// Element of Lip_0(M): one real value per point, vanishing at the base.
class LipschitzFunction {
 public:
  /// Subtracts values[base] so the result vanishes at the base point.
  LipschitzFunction(SpacePtr space, std::vector<double> values)
      : space_(std::move(space)), values_(std::move(values)) {
    if (!space_) throw Error(ErrorCode::InvalidArgument, "function needs a space");
    if (values_.size() != space_->size())
      throw Error(ErrorCode::MalformedInput, "value count does not match point count");
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!std::isfinite(values_[i])) throw Error(ErrorCode::NonFiniteValue, "non-finite function value", {i});
    const double at_base = values_[space_->base()];
    if (at_base != 0.0)
      for (double& v : values_) v -= at_base;
  }

  static LipschitzFunction zero(SpacePtr space) {
    const std::size_t n = space->size();
    return LipschitzFunction(std::move(space), std::vector<double>(n, 0.0));
  }

  /// f = d(., base).
  static LipschitzFunction distance_to_base(SpacePtr space) {
    std::vector<double> v(space->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = space->dist(i, space->base());
    return LipschitzFunction(std::move(space), std::move(v));
  }

  const SpacePtr& space() const { return space_; }
  const std::vector<double>& values() const { return values_; }
  double operator()(std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

 private:
  SpacePtr space_;
  std::vector<double> values_;
};

struct LipschitzNorm {
  double value = 0.0;
  /// Ordered pair (x, y) with (f(x) - f(y)) / d(x, y) = value.
  PointPair witness;
};

/// Best Lipschitz constant of arbitrary values on the space; the values need
/// not vanish at the base. The witness is the lexicographically first ordered
/// pair attaining the maximum.
inline LipschitzNorm lipschitz_constant(const PointedMetricSpace& space, std::span<const double> values) {
  const std::size_t n = space.size();
  LipschitzNorm best{-std::numeric_limits<double>::infinity(), {0, 1}};
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      if (x == y) continue;
      const double q = (values[x] - values[y]) / space.dist(x, y);
      if (q > best.value) best = {q, {x, y}};
    }
  return best;
}

inline LipschitzNorm lipschitz_norm(const LipschitzFunction& f) {
  return lipschitz_constant(*f.space(), f.values());
}

/// max over y with 0 < d(y, x) <= r of |f(y) - f(x)| / d(y, x); 0 when the
/// ball of radius r around x holds no other point. The radius is compared
/// with the space tolerance.
inline double pointwise_lip_at_scale(const PointedMetricSpace& space, std::span<const double> values,
                                     std::size_t x, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  if (x >= space.size()) throw Error(ErrorCode::InvalidArgument, "point out of range", {x});
  double best = 0.0;
  const double limit = r + space.tol();
  for (std::size_t y = 0; y < space.size(); ++y) {
    if (y == x) continue;
    const double d = space.dist(x, y);
    if (d <= limit) best = std::max(best, std::abs(values[y] - values[x]) / d);
  }
  return best;
}

inline double pointwise_lip_at_scale(const LipschitzFunction& f, std::size_t x, double r) {
  return pointwise_lip_at_scale(*f.space(), f.values(), x, r);
}

struct Extension {
  std::vector<double> values;
  /// Lipschitz constant of the data on the subset.
  double lipschitz = 0.0;
};

/// Inf-convolution extension F(x0) = min_{x in subset} f_sub(x) + L d(x, x0)
/// of arbitrary values on a subset, optionally constrained to dominate a floor.
///
/// The floor must satisfy ||floor|| <= L and floor <= f_sub on the subset (up
/// to the space tolerance); then floor <= F holds everywhere. No base-point
/// condition is imposed here, see mcshane_extend for the Lip_0 version.
inline Extension extend_values(const PointedMetricSpace& space, std::span<const std::size_t> subset,
                               std::span<const double> f_sub,
                               std::optional<std::span<const double>> floor = std::nullopt) {
  const std::size_t n = space.size();
  if (subset.empty()) throw Error(ErrorCode::InvalidArgument, "extension subset is empty");
  if (subset.size() != f_sub.size())
    throw Error(ErrorCode::MalformedInput, "subset and value list differ in length");
  std::vector<int> slot(n, -1);
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (subset[k] >= n) throw Error(ErrorCode::InvalidArgument, "subset index out of range", {subset[k]});
    if (slot[subset[k]] >= 0) throw Error(ErrorCode::InvalidArgument, "duplicate subset index", {subset[k]});
    if (!std::isfinite(f_sub[k])) throw Error(ErrorCode::NonFiniteValue, "non-finite subset value", {subset[k]});
    slot[subset[k]] = static_cast<int>(k);
  }

  double lip = 0.0;
  for (std::size_t a = 0; a < subset.size(); ++a)
    for (std::size_t b = 0; b < subset.size(); ++b)
      if (a != b) lip = std::max(lip, (f_sub[a] - f_sub[b]) / space.dist(subset[a], subset[b]));

  const double tol = space.tol();
  if (floor) {
    if (floor->size() != n) throw Error(ErrorCode::MalformedInput, "floor has wrong length");
    const auto floor_norm = lipschitz_constant(space, *floor);
    if (floor_norm.value > lip + tol)
      throw Error(ErrorCode::FloorNormTooLarge, "floor is steeper than the data",
                  {floor_norm.witness.x, floor_norm.witness.y});
    for (std::size_t k = 0; k < subset.size(); ++k)
      if ((*floor)[subset[k]] > f_sub[k] + tol)
        throw Error(ErrorCode::FloorExceedsFunction, "floor exceeds the data on the subset", {subset[k]});
  }

  Extension ext{std::vector<double>(n), lip};
  for (std::size_t x0 = 0; x0 < n; ++x0) {
    if (slot[x0] >= 0) {
      ext.values[x0] = f_sub[static_cast<std::size_t>(slot[x0])];
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < subset.size(); ++k)
      best = std::min(best, f_sub[k] + lip * space.dist(subset[k], x0));
    ext.values[x0] = best;
  }
  return ext;
}

/// Norm-preserving extension of f_sub (given on a subset containing the base,
/// vanishing there) that dominates the optional floor.
inline LipschitzFunction mcshane_extend(SpacePtr space, std::span<const std::size_t> subset,
                                        std::span<const double> f_sub,
                                        const std::optional<LipschitzFunction>& floor = std::nullopt) {
  const auto base_pos = std::find(subset.begin(), subset.end(), space->base());
  if (base_pos == subset.end()) throw Error(ErrorCode::InvalidArgument, "subset must contain the base point");
  if (subset.size() == f_sub.size() && f_sub[static_cast<std::size_t>(base_pos - subset.begin())] != 0.0)
    throw Error(ErrorCode::InvalidArgument, "data must vanish at the base point");
  std::optional<std::span<const double>> floor_values;
  if (floor) {
    if (!same_space(*floor->space(), *space)) throw Error(ErrorCode::SpaceMismatch, "floor lives on another space");
    floor_values = std::span<const double>(floor->values());
  }
  auto ext = extend_values(*space, subset, f_sub, floor_values);
  return LipschitzFunction(std::move(space), std::move(ext.values));
}

/// g(t) = integral from x to t of (1 - |x - s|) ds, evaluated in closed form
/// on the points of an interval net and shifted to vanish at 0.
inline LipschitzFunction peak_function(SpacePtr net, double anchor) {
  const auto& info = net->interval();
  if (!info || info->length != 1.0) throw Error(ErrorCode::NotAnIntervalNet, "peak function needs an interval net");
  std::optional<std::size_t> anchor_index;
  for (std::size_t k = 0; k < net->size(); ++k)
    if (std::abs(info->coordinate(k) - anchor) <= net->tol()) anchor_index = k;
  if (!anchor_index) throw Error(ErrorCode::AnchorNotOnNet, "anchor is not a net point");
  const double x = info->coordinate(*anchor_index);
  std::vector<double> g(net->size());
  for (std::size_t k = 0; k < net->size(); ++k) {
    const double t = info->coordinate(k);
    const double u = std::abs(t - x);
    const double magnitude = u - 0.5 * u * u;
    g[k] = t >= x ? magnitude : -magnitude;
  }
  return LipschitzFunction(std::move(net), std::move(g));
}

/// Clamp to [0, 1]; 1-Lipschitz on the reals.
constexpr double clamp_unit(double value) { return std::min(std::max(value, 0.0), 1.0); }

/// Pointwise operations used by tests and generators.
inline LipschitzFunction scaled(const LipschitzFunction& f, double a) {
  std::vector<double> v = f.values();
  for (double& x : v) x *= a;
  return LipschitzFunction(f.space(), std::move(v));
}

inline LipschitzFunction sum(const LipschitzFunction& f, const LipschitzFunction& g) {
  if (!same_space(*f.space(), *g.space())) throw Error(ErrorCode::SpaceMismatch, "functions on different spaces");
  std::vector<double> v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += g(i);
  return LipschitzFunction(f.space(), std::move(v));
}

}  // namespace lipfree

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lipfree/error.hpp"
#include "lipfree/lipschitz.hpp"
#include "lipfree/metric_space.hpp"
#include "lipfree/min_cost_flow.hpp"
#include "lipfree/parallel.hpp"
#include "lipfree/simplex.hpp"

namespace lipfree {

/// Feasibility tolerance of the ball-geometry LPs.
inline constexpr double kLpFeasibilityTolerance = 1e-9;

/// Zero-sum signed measure on the points of a space: an element of F(M).
class FreeVector {
 public:
  /// Rejects coefficient vectors whose sum exceeds 1e-12 * sum |c|.
  FreeVector(SpacePtr space, std::vector<double> coeffs) : space_(std::move(space)), coeffs_(std::move(coeffs)) {
    check_shape();
    double total = 0.0;
    double mass = 0.0;
    for (double c : coeffs_) {
      total += c;
      mass += std::abs(c);
    }
    if (std::abs(total) > 1e-12 * mass) throw Error(ErrorCode::NotZeroSum, "coefficients do not sum to zero");
  }

  /// Any span of point evaluations, made zero-sum by moving the balancing mass
  /// onto the base point (harmless because f(base) = 0 for every f in Lip_0).
  static FreeVector balanced(SpacePtr space, std::vector<double> coeffs) {
    FreeVector v(std::move(space), std::move(coeffs), Unchecked{});
    v.check_shape();
    v.rebalance();
    return v;
  }

  static FreeVector zero(SpacePtr space) {
    const std::size_t n = space->size();
    return FreeVector(std::move(space), std::vector<double>(n, 0.0), Unchecked{});
  }

  /// delta_x - delta_y.
  static FreeVector delta_difference(SpacePtr space, std::size_t x, std::size_t y) {
    std::vector<double> c(space->size(), 0.0);
    c.at(x) += 1.0;
    c.at(y) -= 1.0;
    return FreeVector(std::move(space), std::move(c), Unchecked{});
  }

  const SpacePtr& space() const { return space_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double operator()(std::size_t i) const { return coeffs_[i]; }
  std::size_t size() const { return coeffs_.size(); }

  bool is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return c == 0.0; });
  }

  /// <f, mu> = sum_x f(x) mu(x).
  double pair(const LipschitzFunction& f) const {
    if (!same_space(*f.space(), *space_)) throw Error(ErrorCode::SpaceMismatch, "pairing across spaces");
    double s = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) s += f(i) * coeffs_[i];
    return s;
  }

  friend FreeVector operator+(const FreeVector& a, const FreeVector& b) { return combine(a, 1.0, b, 1.0); }
  friend FreeVector operator-(const FreeVector& a, const FreeVector& b) { return combine(a, 1.0, b, -1.0); }
  friend FreeVector operator*(double s, const FreeVector& a) {
    FreeVector out = a;
    for (double& c : out.coeffs_) c *= s;
    out.rebalance();
    return out;
  }

 private:
  struct Unchecked {};
  FreeVector(SpacePtr space, std::vector<double> coeffs, Unchecked)
      : space_(std::move(space)), coeffs_(std::move(coeffs)) {}

  void check_shape() const {
    if (!space_) throw Error(ErrorCode::InvalidArgument, "free vector needs a space");
    if (coeffs_.size() != space_->size())
      throw Error(ErrorCode::MalformedInput, "coefficient count does not match point count");
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      if (!std::isfinite(coeffs_[i])) throw Error(ErrorCode::NonFiniteValue, "non-finite coefficient", {i});
  }

  void rebalance() {
    double off_base = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      if (i != space_->base()) off_base += coeffs_[i];
    coeffs_[space_->base()] = -off_base;
  }

  static FreeVector combine(const FreeVector& a, double sa, const FreeVector& b, double sb) {
    if (!same_space(*a.space(), *b.space())) throw Error(ErrorCode::SpaceMismatch, "free vectors on different spaces");
    std::vector<double> c(a.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = sa * a(i) + sb * b(i);
    FreeVector out(a.space(), std::move(c), Unchecked{});
    out.rebalance();
    return out;
  }

  SpacePtr space_;
  std::vector<double> coeffs_;
};

/// m_{x,y} = (delta_x - delta_y) / d(x, y).
struct Molecule {
  SpacePtr space;
  PointPair pair;

  Molecule(SpacePtr s, PointPair p) : space(std::move(s)), pair(p) {
    if (!space || !space->contains(pair)) throw Error(ErrorCode::InvalidArgument, "invalid molecule pair", {p.x, p.y});
  }

  FreeVector vector() const {
    const double w = 1.0 / space->dist(pair.x, pair.y);
    std::vector<double> c(space->size(), 0.0);
    c[pair.x] = w;
    c[pair.y] = -w;
    return FreeVector(space, std::move(c));
  }
};

struct TransportArc {
  std::size_t from = 0;
  std::size_t to = 0;
  double amount = 0.0;
};

struct PrimalNorm {
  double value = 0.0;
  std::vector<TransportArc> plan;
};

/// Kantorovich-Rubinstein norm: cheapest transport of the positive part of mu
/// onto its negative part with cost d, solved as a min-cost flow.
inline PrimalNorm free_norm_primal(const FreeVector& mu) {
  const auto& space = *mu.space();
  std::vector<std::size_t> supply, demand;
  double out_mass = 0.0, in_mass = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu(i) > 0.0) {
      supply.push_back(i);
      out_mass += mu(i);
    } else if (mu(i) < 0.0) {
      demand.push_back(i);
      in_mass -= mu(i);
    }
  }
  PrimalNorm result;
  if (supply.empty() || demand.empty()) return result;

  const std::size_t source = 0;
  const std::size_t sink = 1 + supply.size() + demand.size();
  MinCostFlow flow(sink + 1);
  for (std::size_t a = 0; a < supply.size(); ++a) flow.add_arc(source, 1 + a, mu(supply[a]), 0.0);
  for (std::size_t b = 0; b < demand.size(); ++b)
    flow.add_arc(1 + supply.size() + b, sink, -mu(demand[b]), 0.0);
  std::vector<std::pair<std::size_t, TransportArc>> arcs;
  for (std::size_t a = 0; a < supply.size(); ++a)
    for (std::size_t b = 0; b < demand.size(); ++b) {
      const auto id = flow.add_arc(1 + a, 1 + supply.size() + b, MinCostFlow::kUnbounded,
                                   space.dist(supply[a], demand[b]));
      arcs.push_back({id, {supply[a], demand[b], 0.0}});
    }
  result.value = flow.solve(source, sink, std::min(out_mass, in_mass)).cost;
  for (auto& [id, arc] : arcs) {
    arc.amount = flow.flow(id);
    if (arc.amount > 0.0) result.plan.push_back(arc);
  }
  return result;
}

struct DualNorm {
  double value = 0.0;
  LipschitzFunction maximizer;
};

/// max <f, mu> over f with f(i) - f(j) <= d(i, j), solved by the simplex method.
///
/// Substituting g = f + d(., base) makes every variable nonnegative, and the
/// triangle inequality makes each slack column a feasible starting basis.
inline DualNorm free_norm_dual(const FreeVector& mu, const lp::Options& options = {}) {
  const auto& space_ptr = mu.space();
  const auto& space = *space_ptr;
  const std::size_t n = space.size();
  const std::size_t base = space.base();
  std::vector<std::size_t> var(n, n);
  std::size_t vars = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (i != base) var[i] = vars++;

  // Rows are indexed by ordered pairs; columns are the g variables then slacks.
  const std::size_t rows = n * (n - 1);
  lp::Problem problem(rows);
  std::vector<lp::Column> g_columns(vars);
  std::size_t row = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (i != base) g_columns[var[i]].push_back({row, 1.0});
      if (j != base) g_columns[var[j]].push_back({row, -1.0});
      problem.set_rhs(row, space.dist(i, j) + space.dist(i, base) - space.dist(j, base));
      ++row;
    }
  for (std::size_t i = 0; i < n; ++i)
    if (i != base) problem.add_column(g_columns[var[i]], -mu(i));
  for (std::size_t r = 0; r < rows; ++r) problem.add_column({{r, 1.0}}, 0.0);

  const auto sol = lp::solve(problem, options);
  if (sol.status != lp::Status::optimal)
    throw Error(ErrorCode::SolverFailure, "dual free-norm LP did not reach an optimum");
  std::vector<double> f(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (i != base) f[i] = sol.x[var[i]] - space.dist(i, base);
  DualNorm out{0.0, LipschitzFunction(space_ptr, std::move(f))};
  out.value = mu.pair(out.maximizer);
  return out;
}

inline double molecule_distance(const Molecule& a, const Molecule& b) {
  if (!same_space(*a.space, *b.space)) throw Error(ErrorCode::SpaceMismatch, "molecules on different spaces");
  return free_norm_primal(a.vector() - b.vector()).value;
}

/// Term of a convex combination of signed molecules; the ordered pair carries
/// the sign (m_{y,x} = -m_{x,y}).
struct CombinationTerm {
  PointPair molecule;
  double weight = 0.0;
};

struct HullMembership {
  bool member = false;
  std::vector<double> weights;
  double residual = 0.0;
};

using SparseVector = std::vector<std::pair<std::size_t, double>>;

namespace detail {

/// Rows: one per non-base point, then the convex-weight row.
template <class EmitColumns>
HullMembership hull_lp(const PointedMetricSpace& space, std::span<const double> target, std::size_t columns,
                       double feasibility_tol, EmitColumns&& emit) {
  const std::size_t n = space.size();
  const std::size_t base = space.base();
  std::vector<std::size_t> row_of(n, n);
  std::size_t rows = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (i != base) row_of[i] = rows++;
  const std::size_t sum_row = rows++;

  lp::Problem problem(rows);
  for (std::size_t i = 0; i < n; ++i)
    if (i != base) problem.set_rhs(row_of[i], target[i]);
  problem.set_rhs(sum_row, 1.0);
  problem.reserve(columns, 3 * columns);
  lp::Column col;
  emit([&](std::span<const std::pair<std::size_t, double>> g) {
    col.clear();
    for (auto [i, v] : g)
      if (i != base && v != 0.0) col.push_back({row_of[i], v});
    col.push_back({sum_row, 1.0});
    problem.add_column(col);
  });
  lp::Options options;
  options.feasibility_tol = feasibility_tol;
  const auto sol = lp::solve(problem, options);
  HullMembership out;
  out.residual = sol.infeasibility;
  out.member = sol.status == lp::Status::optimal;
  if (out.member) out.weights = sol.x;
  return out;
}

inline HullMembership molecule_hull(const PointedMetricSpace& space, std::span<const double> target,
                                    std::span<const PointPair> generators, double feasibility_tol) {
  return hull_lp(space, target, generators.size(), feasibility_tol, [&](auto&& add) {
    for (auto p : generators) {
      const double w = 1.0 / space.dist(p.x, p.y);
      const std::pair<std::size_t, double> g[2] = {{p.x, w}, {p.y, -w}};
      add(std::span<const std::pair<std::size_t, double>>(g, 2));
    }
  });
}

}  // namespace detail

/// Is `target` a convex combination of the generators? One LP over the
/// weights: equality on every non-base coordinate (the base coordinate is
/// implied by zero-sum) plus sum of weights = 1.
inline HullMembership hull_membership(const PointedMetricSpace& space, std::span<const double> target,
                                      std::span<const SparseVector> generators,
                                      double feasibility_tol = kLpFeasibilityTolerance) {
  if (target.size() != space.size()) throw Error(ErrorCode::MalformedInput, "target has wrong length");
  return detail::hull_lp(space, target, generators.size(), feasibility_tol, [&](auto&& add) {
    for (const auto& g : generators) {
      for (auto [i, v] : g)
        if (i >= space.size()) throw Error(ErrorCode::InvalidArgument, "generator index out of range", {i});
      add(std::span<const std::pair<std::size_t, double>>(g));
    }
  });
}

inline SparseVector molecule_entries(const PointedMetricSpace& space, PointPair p) {
  const double w = 1.0 / space.dist(p.x, p.y);
  return {{p.x, w}, {p.y, -w}};
}

struct Extremality {
  bool extreme = false;
  /// When not extreme: m_{x,y} written as a convex combination of other signed molecules.
  std::vector<CombinationTerm> certificate;
};

/// Vertex test for m_{x,y} in the polytope conv{+-m_{u,v}}: the molecule is a
/// vertex exactly when it is not a convex combination of the other generators.
inline Extremality is_extreme_molecule(const PointedMetricSpace& space, PointPair pair,
                                       double feasibility_tol = kLpFeasibilityTolerance) {
  if (!space.contains(pair)) throw Error(ErrorCode::InvalidArgument, "invalid point pair", {pair.x, pair.y});
  std::vector<PointPair> others;
  others.reserve(space.size() * space.size());
  for (std::size_t u = 0; u < space.size(); ++u)
    for (std::size_t v = 0; v < space.size(); ++v)
      if (u != v && !(PointPair{u, v} == pair)) others.push_back({u, v});
  std::vector<double> target(space.size(), 0.0);
  for (auto [i, w] : molecule_entries(space, pair)) target[i] = w;
  const auto hull = detail::molecule_hull(space, target, others, feasibility_tol);
  Extremality out;
  out.extreme = !hull.member;
  if (hull.member)
    for (std::size_t k = 0; k < others.size(); ++k)
      if (hull.weights[k] > 0.0) out.certificate.push_back({others[k], hull.weights[k]});
  return out;
}

/// Unordered pairs (x < y) whose molecule is a vertex of the free ball, in
/// lexicographic order. Per-pair LPs run in parallel.
inline std::vector<PointPair> extreme_molecules(const PointedMetricSpace& space,
                                                double feasibility_tol = kLpFeasibilityTolerance) {
  const auto pairs = all_pairs(space);
  std::vector<char> extreme(pairs.size(), 0);
  parallel_for(pairs.size(), [&](std::size_t k) {
    extreme[k] = is_extreme_molecule(space, pairs[k], feasibility_tol).extreme ? 1 : 0;
  });
  std::vector<PointPair> out;
  for (std::size_t k = 0; k < pairs.size(); ++k)
    if (extreme[k]) out.push_back(pairs[k]);
  if (out.empty()) throw Error(ErrorCode::InvariantFailure, "free ball reported without vertices");
  return out;
}

struct NormingResult {
  bool norming = false;
  /// First extreme molecule (unordered pair) outside conv{+-m_a : a in A}.
  std::optional<PointPair> failing_vertex;
};

/// A is norming iff conv{+-m_a : a in A} contains every vertex of the free ball.
inline NormingResult is_norming(const PointedMetricSpace& space, std::span<const PointPair> pairs,
                                std::span<const PointPair> extremes,
                                double feasibility_tol = kLpFeasibilityTolerance) {
  if (pairs.empty()) throw Error(ErrorCode::InvalidArgument, "norming set must be nonempty");
  std::vector<PointPair> unordered;
  std::vector<PointPair> generators;
  for (auto p : pairs) {
    if (!space.contains(p)) throw Error(ErrorCode::InvalidArgument, "invalid pair in norming set", {p.x, p.y});
    unordered.push_back(p.unordered());
    generators.push_back(p);
    generators.push_back(p.reversed());
  }
  std::sort(unordered.begin(), unordered.end());
  std::vector<char> inside(extremes.size(), 0);
  parallel_for(extremes.size(), [&](std::size_t k) {
    const PointPair e = extremes[k].unordered();
    if (std::binary_search(unordered.begin(), unordered.end(), e)) {
      inside[k] = 1;
      return;
    }
    std::vector<double> target(space.size(), 0.0);
    for (auto [i, w] : molecule_entries(space, e)) target[i] = w;
    inside[k] = detail::molecule_hull(space, target, generators, feasibility_tol).member ? 1 : 0;
  });
  NormingResult out{true, std::nullopt};
  for (std::size_t k = 0; k < extremes.size(); ++k)
    if (!inside[k]) {
      out = {false, extremes[k].unordered()};
      break;
    }
  return out;
}

inline NormingResult is_norming(const PointedMetricSpace& space, std::span<const PointPair> pairs,
                                double feasibility_tol = kLpFeasibilityTolerance) {
  const auto extremes = extreme_molecules(space, feasibility_tol);
  return is_norming(space, pairs, extremes, feasibility_tol);
}

}  // namespace lipfree

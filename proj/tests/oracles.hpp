#pragma once

// Independent brute-force references used by the unit tests. Nothing here
// calls into the solvers under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "lipfree/metric_space.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix floyd_warshall(std::size_t n, const std::vector<lipfree::WeightedEdge>& edges) {
  const double inf = std::numeric_limits<double>::infinity();
  Matrix d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& e : edges) {
    d[e.i][e.j] = std::min(d[e.i][e.j], e.w);
    d[e.j][e.i] = std::min(d[e.j][e.i], e.w);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

// Optimal transport of an integer zero-sum vector: split it into unit masses
// and minimize over all assignments of sources to sinks.
inline double integer_transport(const lipfree::PointedMetricSpace& space, const std::vector<int>& mu) {
  std::vector<std::size_t> sources, sinks;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (int k = 0; k < mu[i]; ++k) sources.push_back(i);
    for (int k = 0; k < -mu[i]; ++k) sinks.push_back(i);
  }
  if (sources.empty()) return 0.0;
  std::vector<std::size_t> perm(sinks.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t k = 0; k < sources.size(); ++k) cost += space.dist(sources[k], sinks[perm[k]]);
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// max |f(x) - f(y)| / d(x, y) by direct scan.
inline double lipschitz(const lipfree::PointedMetricSpace& space, const std::vector<double>& f) {
  double best = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x)
    for (std::size_t y = 0; y < space.size(); ++y)
      if (x != y) best = std::max(best, std::abs(f[x] - f[y]) / space.dist(x, y));
  return best;
}

}  // namespace oracle

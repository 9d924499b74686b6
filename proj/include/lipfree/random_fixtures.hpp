#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lipfree/composition.hpp"
#include "lipfree/free_space.hpp"
#include "lipfree/lipschitz.hpp"
#include "lipfree/metric_space.hpp"

/// Seeded generators for property tests and the `experiment random` runner.
/// Only the raw mt19937_64 stream is used (its output is fixed by the
/// standard), so fixtures are identical across standard libraries.
namespace lipfree::fixtures {

using Rng = std::mt19937_64;

inline std::size_t uniform_index(Rng& rng, std::size_t bound) { return static_cast<std::size_t>(rng() % bound); }

inline std::size_t uniform_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + uniform_index(rng, hi - lo + 1);
}

/// Uniform in [0, 1).
inline double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform_unit(rng); }

enum class SpaceKind { integer_graph, planar, snowflaked_graph };

/// Shortest-path metric of a random connected graph with integer weights 1..4.
inline SpacePtr random_graph_space(Rng& rng, std::size_t n) {
  std::vector<WeightedEdge> edges;
  for (std::size_t v = 1; v < n; ++v)
    edges.push_back({uniform_index(rng, v), v, static_cast<double>(uniform_between(rng, 1, 4))});
  const std::size_t extra = uniform_index(rng, n * (n - 1) / 2 + 1);
  for (std::size_t e = 0; e < extra; ++e) {
    const std::size_t a = uniform_index(rng, n);
    const std::size_t b = uniform_index(rng, n);
    if (a != b) edges.push_back({a, b, static_cast<double>(uniform_between(rng, 1, 4))});
  }
  return from_weighted_graph(n, edges, 0);
}

/// Euclidean distances of random points in the unit square, kept apart by 0.05.
inline SpacePtr random_planar_space(Rng& rng, std::size_t n) {
  std::vector<std::pair<double, double>> pts;
  while (pts.size() < n) {
    const std::pair<double, double> p{uniform_unit(rng), uniform_unit(rng)};
    bool apart = true;
    for (const auto& q : pts) apart = apart && std::hypot(p.first - q.first, p.second - q.second) > 0.05;
    if (apart) pts.push_back(p);
  }
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) d[i][j] = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
  return PointedMetricSpace::create(d, 0);
}

inline SpacePtr random_space(Rng& rng, std::size_t n, SpaceKind kind) {
  switch (kind) {
    case SpaceKind::integer_graph: return random_graph_space(rng, n);
    case SpaceKind::planar: return random_planar_space(rng, n);
    case SpaceKind::snowflaked_graph: return snowflake(*random_graph_space(rng, n), uniform_real(rng, 0.3, 0.9));
  }
  return random_graph_space(rng, n);
}

/// Space of a random kind with between lo and hi points.
inline SpacePtr random_space(Rng& rng, std::size_t lo, std::size_t hi) {
  const std::size_t n = uniform_between(rng, lo, hi);
  return random_space(rng, n, static_cast<SpaceKind>(uniform_index(rng, 3)));
}

/// Zero-sum vector with random support; coefficients in [-1, 1], balanced at the base.
inline FreeVector random_free_vector(Rng& rng, const SpacePtr& space) {
  std::vector<double> c(space->size(), 0.0);
  for (double& v : c)
    if (uniform_index(rng, 3) != 0) v = uniform_real(rng, -1.0, 1.0);
  return FreeVector::balanced(space, std::move(c));
}

/// Random Lipschitz function: values drawn in [-diameter, diameter].
inline LipschitzFunction random_function(Rng& rng, const SpacePtr& space) {
  std::vector<double> v(space->size());
  for (double& x : v) x = uniform_real(rng, -space->diameter(), space->diameter());
  return LipschitzFunction(space, std::move(v));
}

enum class MapRecipe { sum_height, max_height, rescaled };

/// Random base-preserving 1-Lipschitz map N -> M for a given codomain M.
///
/// The image table is random (surjective with probability 1/2 when possible).
/// The domain metric is built so that phi is 1-Lipschitz:
///  - sum_height: d_N(a, b) = d_M(phi a, phi b) + c |h(a) - h(b)|,
///  - max_height: d_N(a, b) = max(d_M(phi a, phi b), c |h(a) - h(b)|),
///  - rescaled: a random space scaled by the map's Lipschitz constant.
/// Integer heights h (0..3, more levels for large fibres) are redrawn until
/// (phi, h) is injective.
inline LipschitzMap random_one_lipschitz_map(Rng& rng, const SpacePtr& codomain, std::size_t domain_size,
                                             MapRecipe recipe) {
  const std::size_t n = domain_size;
  const std::size_t mbase = codomain->base();
  std::vector<std::size_t> image(n, mbase);
  const bool onto = n >= codomain->size() && uniform_index(rng, 2) == 0;
  std::vector<std::size_t> rest;
  for (std::size_t z = 0; z < codomain->size(); ++z)
    if (z != mbase) rest.push_back(z);
  for (std::size_t x = 1; x < n; ++x) {
    if (onto && x <= rest.size()) {
      image[x] = rest[x - 1];
    } else {
      image[x] = uniform_index(rng, codomain->size());
    }
  }
  // shuffle the non-base points of the domain so surjective tables are not sorted
  for (std::size_t x = n - 1; x > 1; --x) std::swap(image[x], image[1 + uniform_index(rng, x)]);

  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  if (recipe == MapRecipe::rescaled) {
    const auto raw = random_space(rng, n, static_cast<SpaceKind>(uniform_index(rng, 3)));
    double scale = 0.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (a != b) scale = std::max(scale, codomain->dist(image[a], image[b]) / raw->dist(a, b));
    if (scale == 0.0) scale = 1.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) d[a][b] = a == b ? 0.0 : scale * raw->dist(a, b);
  } else {
    std::vector<int> h(n, 0);
    std::vector<std::size_t> fibre(codomain->size(), 0);
    for (std::size_t z : image) ++fibre[z];
    const std::size_t levels = std::max<std::size_t>(4, *std::max_element(fibre.begin(), fibre.end()));
    for (;;) {
      std::set<std::pair<std::size_t, int>> seen;
      bool injective = true;
      for (std::size_t x = 0; x < n && injective; ++x) {
        injective = seen.emplace(image[x], h[x]).second;
      }
      if (injective) break;
      for (std::size_t x = 1; x < n; ++x) h[x] = static_cast<int>(uniform_index(rng, levels));
    }
    const double c = uniform_index(rng, 2) == 0 ? 0.5 : 1.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b) continue;
        const double dm = codomain->dist(image[a], image[b]);
        const double dh = c * std::abs(h[a] - h[b]);
        d[a][b] = recipe == MapRecipe::sum_height ? dm + dh : std::max(dm, dh);
      }
  }
  return LipschitzMap(PointedMetricSpace::create(d, 0), codomain, std::move(image));
}

inline LipschitzMap random_one_lipschitz_map(Rng& rng, std::size_t max_domain, std::size_t max_codomain) {
  const auto codomain = random_space(rng, 2, max_codomain);
  const std::size_t n = uniform_between(rng, 2, max_domain);
  return random_one_lipschitz_map(rng, codomain, n, static_cast<MapRecipe>(uniform_index(rng, 3)));
}

}  // namespace lipfree::fixtures

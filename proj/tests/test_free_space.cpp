#include <cmath>
#include <vector>

#include "doctest.h"
#include "lipfree/free_space.hpp"
#include "lipfree/random_fixtures.hpp"
#include "oracles.hpp"

using namespace lipfree;

namespace {

SpacePtr path3() { return validate_space({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}, 0); }
SpacePtr triangle() { return validate_space({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}, 0); }

double both_norms_agree(const FreeVector& mu) {
  const double primal = free_norm_primal(mu).value;
  const double dual = free_norm_dual(mu).value;
  CHECK(std::abs(primal - dual) <= 1e-8 * std::max(1.0, primal));
  return primal;
}

// Exhaustive reference for small integer vectors.
std::vector<int> random_integer_vector(fixtures::Rng& rng, std::size_t n) {
  std::vector<int> mu(n, 0);
  for (int unit = 0; unit < 4; ++unit) {
    mu[fixtures::uniform_index(rng, n)] += 1;
    mu[fixtures::uniform_index(rng, n)] -= 1;
  }
  return mu;
}

}  // namespace

TEST_CASE("free vectors must sum to zero") {
  CHECK_THROWS_AS(FreeVector(path3(), {1.0, 0.0, 0.0}), Error);
  CHECK_THROWS_AS(FreeVector(path3(), {1.0, -1.0}), Error);
  const auto b = FreeVector::balanced(path3(), {0.0, 2.0, 1.0});
  CHECK(b(0) == -3.0);
  CHECK(FreeVector::zero(path3()).is_zero());
}

TEST_CASE("norm of delta differences is the distance") {
  const auto s = path3();
  CHECK(both_norms_agree(FreeVector::delta_difference(s, 0, 2)) == doctest::Approx(2.0));
  CHECK(both_norms_agree(FreeVector::delta_difference(s, 2, 1)) == doctest::Approx(1.0));
}

TEST_CASE("molecule and zero") {
  const auto s = path3();
  CHECK(both_norms_agree(Molecule(s, {0, 2}).vector()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(free_norm_primal(FreeVector::zero(s)).value == 0.0);
  CHECK(free_norm_dual(FreeVector::zero(s)).value == doctest::Approx(0.0));
  const auto sum = Molecule(s, {0, 2}).vector() + Molecule(s, {2, 0}).vector();
  CHECK(sum.is_zero());
}

TEST_CASE("dual maximizer is feasible and attains the value") {
  fixtures::Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto s = fixtures::random_space(rng, 2, 9);
    const auto mu = fixtures::random_free_vector(rng, s);
    const auto d = free_norm_dual(mu);
    CHECK(oracle::lipschitz(*s, d.maximizer.values()) <= 1.0 + 1e-9);
    CHECK(d.maximizer(s->base()) == 0.0);
    CHECK(mu.pair(d.maximizer) == doctest::Approx(d.value).epsilon(1e-12));
  }
}

TEST_CASE("transport plan moves exactly the positive part") {
  fixtures::Rng rng(32);
  for (int trial = 0; trial < 40; ++trial) {
    const auto s = fixtures::random_space(rng, 2, 9);
    const auto mu = fixtures::random_free_vector(rng, s);
    const auto p = free_norm_primal(mu);
    std::vector<double> out(s->size(), 0.0);
    double cost = 0.0;
    for (const auto& a : p.plan) {
      out[a.from] += a.amount;
      out[a.to] -= a.amount;
      cost += a.amount * s->dist(a.from, a.to);
    }
    for (std::size_t i = 0; i < s->size(); ++i) CHECK(out[i] == doctest::Approx(mu(i)).epsilon(1e-9));
    CHECK(cost == doctest::Approx(p.value).epsilon(1e-12));
  }
}

TEST_CASE("integer measures match exhaustive assignment") {
  fixtures::Rng rng(33);
  for (int trial = 0; trial < 80; ++trial) {
    const auto s = fixtures::random_space(rng, 2, 7);
    const auto ints = random_integer_vector(rng, s->size());
    const FreeVector mu(s, std::vector<double>(ints.begin(), ints.end()));
    const double expect = oracle::integer_transport(*s, ints);
    CHECK(free_norm_primal(mu).value == doctest::Approx(expect).epsilon(1e-12));
    CHECK(free_norm_dual(mu).value == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("frozen transport costs") {
  // values from tests/oracles/free_norm_reference.py
  SUBCASE("circle of five") {
    const FreeVector mu(circle_net(5), {0.7, -0.2, 0.5, -1.1, 0.1});
    CHECK(both_norms_agree(mu) == doctest::Approx(1.8915129199631107).epsilon(1e-9));
  }
  SUBCASE("snowflaked path") {
    std::vector<std::vector<double>> d(5, std::vector<double>(5, 0.0));
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) d[i][j] = std::sqrt(std::abs(i - j));
    const FreeVector mu(validate_space(d, 0), {1.0, -2.0, 0.0, 3.0, -2.0});
    CHECK(both_norms_agree(mu) == doctest::Approx(4.4142135623730949).epsilon(1e-9));
  }
  SUBCASE("planar points") {
    const std::vector<std::pair<double, double>> pts{{0, 0}, {1, 0}, {0, 2}, {3, 1}, {1, 1}, {2, 3}};
    std::vector<std::vector<double>> d(6, std::vector<double>(6, 0.0));
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j)
        d[i][j] = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
    const FreeVector mu(validate_space(d, 0), {0.25, -0.5, 0.75, -1.0, 1.5, -1.0});
    CHECK(both_norms_agree(mu) == doctest::Approx(4.7360679774997898).epsilon(1e-9));
  }
}

TEST_CASE("free norm is a norm") {
  fixtures::Rng rng(34);
  for (int trial = 0; trial < 60; ++trial) {
    const auto s = fixtures::random_space(rng, 2, 10);
    const auto mu = fixtures::random_free_vector(rng, s);
    const auto nu = fixtures::random_free_vector(rng, s);
    const double a = fixtures::uniform_real(rng, -4.0, 4.0);
    const double n_mu = free_norm_primal(mu).value;
    CHECK(free_norm_primal(a * mu).value == doctest::Approx(std::abs(a) * n_mu).epsilon(1e-10));
    CHECK(free_norm_primal(mu + nu).value <= n_mu + free_norm_primal(nu).value + 1e-8);
  }
}

TEST_CASE("pairing is bounded by the product of norms") {
  fixtures::Rng rng(35);
  for (int trial = 0; trial < 60; ++trial) {
    const auto s = fixtures::random_space(rng, 2, 10);
    const auto mu = fixtures::random_free_vector(rng, s);
    const auto f = fixtures::random_function(rng, s);
    CHECK(std::abs(mu.pair(f)) <= oracle::lipschitz(*s, f.values()) * free_norm_primal(mu).value + 1e-8);
  }
}

TEST_CASE("molecules have norm one") {
  fixtures::Rng rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = fixtures::random_space(rng, 2, 8);
    for (auto p : all_pairs(*s)) CHECK(both_norms_agree(Molecule(s, p).vector()) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("molecule distance") {
  const auto s = path3();
  CHECK(molecule_distance(Molecule(s, {0, 1}), Molecule(s, {0, 1})) == 0.0);
  CHECK(molecule_distance(Molecule(s, {0, 1}), Molecule(s, {1, 0})) == doctest::Approx(2.0));
  // m01 - m02 = delta0 / 2 - delta1 + delta2 / 2: half a unit each way, cost 1
  CHECK(molecule_distance(Molecule(s, {0, 1}), Molecule(s, {0, 2})) == doctest::Approx(1.0));
  CHECK_THROWS_AS(molecule_distance(Molecule(s, {0, 1}), Molecule(triangle(), {0, 1})), Error);
  CHECK_THROWS_AS(Molecule(s, {1, 1}), Error);
}

TEST_CASE("vertex test") {
  CHECK(is_extreme_molecule(*validate_space({{0, 1}, {1, 0}}, 0), {0, 1}).extreme);
  for (auto p : all_pairs(*triangle())) CHECK(is_extreme_molecule(*triangle(), p).extreme);

  const auto s = path3();
  const auto mid = is_extreme_molecule(*s, {0, 2});
  CHECK_FALSE(mid.extreme);
  // the certificate rebuilds m02 as a convex combination
  std::vector<double> rebuilt(3, 0.0);
  double total = 0.0;
  for (const auto& t : mid.certificate) {
    CHECK(t.weight > 0.0);
    total += t.weight;
    const double w = t.weight / s->dist(t.molecule.x, t.molecule.y);
    rebuilt[t.molecule.x] += w;
    rebuilt[t.molecule.y] -= w;
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(rebuilt[0] == doctest::Approx(0.5));
  CHECK(rebuilt[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(rebuilt[2] == doctest::Approx(-0.5));
}

TEST_CASE("extreme molecules of fixture spaces") {
  for (std::size_t n : {1u, 2u, 5u, 8u}) {
    std::vector<PointPair> adjacent;
    for (std::size_t k = 0; k < n; ++k) adjacent.push_back({k, k + 1});
    CHECK(extreme_molecules(*interval_net(n)) == adjacent);
  }
  CHECK(extreme_molecules(*circle_net(4)).size() == 6);
  CHECK(extreme_molecules(*triangle()).size() == 3);
  // tripod: center-leaf legs only
  CHECK(extreme_molecules(*tripod()) == std::vector<PointPair>{{0, 1}, {0, 2}, {0, 3}});
}

TEST_CASE("vertex test agrees with the metric predictor on random spaces") {
  fixtures::Rng rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = fixtures::random_space(rng, 2, 7);
    for (auto p : all_pairs(*s)) CHECK(is_extreme_molecule(*s, p).extreme == intermediate_points(*s, p).empty());
  }
}

TEST_CASE("norming sets") {
  const auto net = interval_net(2);
  const auto all = all_pairs(*net);
  CHECK(is_norming(*net, all).norming);
  const std::vector<PointPair> ends{{0, 2}};
  const auto r = is_norming(*net, ends);
  CHECK_FALSE(r.norming);
  REQUIRE(r.failing_vertex);
  CHECK(*r.failing_vertex == PointPair{0, 1});
  const auto ext = extreme_molecules(*net);
  CHECK(is_norming(*net, ext).norming);
  const std::vector<PointPair> reversed{{1, 0}, {2, 1}};
  CHECK(is_norming(*net, reversed).norming);
  CHECK_THROWS_AS(is_norming(*net, std::vector<PointPair>{}), Error);
}

TEST_CASE("generic hull membership") {
  const auto s = path3();
  // delta1 - delta0 and delta2 - delta0; their midpoint is in the hull, a doubled vector is not
  const std::vector<SparseVector> gens{{{1, 1.0}, {0, -1.0}}, {{2, 1.0}, {0, -1.0}}};
  const std::vector<double> mid{-1.0, 0.5, 0.5};
  const auto in = hull_membership(*s, mid, gens);
  CHECK(in.member);
  CHECK(in.weights[0] == doctest::Approx(0.5));
  const std::vector<double> far{-2.0, 2.0, 0.0};
  CHECK_FALSE(hull_membership(*s, far, gens).member);
  const std::vector<SparseVector> bad{{{5, 1.0}}};
  CHECK_THROWS_AS(hull_membership(*s, mid, bad), Error);
}

TEST_CASE("extreme molecules do not depend on the thread count") {
  const auto c = circle_net(9);
  set_thread_limit(1);
  const auto one = extreme_molecules(*c);
  set_thread_limit(4);
  const auto four = extreme_molecules(*c);
  set_thread_limit(0);
  CHECK(one == four);
}

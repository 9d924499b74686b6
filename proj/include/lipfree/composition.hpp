#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lipfree/error.hpp"
#include "lipfree/free_space.hpp"
#include "lipfree/lipschitz.hpp"
#include "lipfree/metric_space.hpp"
#include "lipfree/parallel.hpp"

namespace lipfree {

/// Feasibility tolerance of the primal certification LPs.
inline constexpr double kCertifyFeasibilityTolerance = 1e-8;

/// Base-point-preserving map phi: N -> M given by its image table.
class LipschitzMap {
 public:
  LipschitzMap(SpacePtr domain, SpacePtr codomain, std::vector<std::size_t> image)
      : domain_(std::move(domain)), codomain_(std::move(codomain)), image_(std::move(image)) {
    if (!domain_ || !codomain_) throw Error(ErrorCode::InvalidArgument, "map needs a domain and a codomain");
    if (image_.size() != domain_->size())
      throw Error(ErrorCode::MalformedInput, "image table length does not match the domain");
    for (std::size_t i = 0; i < image_.size(); ++i)
      if (image_[i] >= codomain_->size()) throw Error(ErrorCode::MalformedInput, "image index out of range", {i});
    if (image_[domain_->base()] != codomain_->base())
      throw Error(ErrorCode::MalformedInput, "map must send the base point to the base point", {domain_->base()});
    norm_ = compute_norm();
  }

  static LipschitzMap identity(const SpacePtr& space) {
    std::vector<std::size_t> image(space->size());
    for (std::size_t i = 0; i < image.size(); ++i) image[i] = i;
    return LipschitzMap(space, space, std::move(image));
  }

  /// Every point goes to the base point of the codomain.
  static LipschitzMap collapse(const SpacePtr& domain, const SpacePtr& codomain) {
    return LipschitzMap(domain, codomain, std::vector<std::size_t>(domain->size(), codomain->base()));
  }

  const SpacePtr& domain() const { return domain_; }
  const SpacePtr& codomain() const { return codomain_; }
  const std::vector<std::size_t>& image() const { return image_; }
  std::size_t operator()(std::size_t x) const { return image_[x]; }

  /// max over x != y of d(phi x, phi y) / d(x, y), with the lexicographically
  /// first ordered pair attaining it.
  const LipschitzNorm& norm() const { return norm_; }

 private:
  LipschitzNorm compute_norm() const {
    LipschitzNorm best{-1.0, {0, 1}};
    for (std::size_t x = 0; x < image_.size(); ++x)
      for (std::size_t y = 0; y < image_.size(); ++y) {
        if (x == y) continue;
        const double q = codomain_->dist(image_[x], image_[y]) / domain_->dist(x, y);
        if (q > best.value) best = {q, {x, y}};
      }
    return best;
  }

  SpacePtr domain_;
  SpacePtr codomain_;
  std::vector<std::size_t> image_;
  LipschitzNorm norm_;
};

/// phi o psi.
inline LipschitzMap compose_maps(const LipschitzMap& phi, const LipschitzMap& psi) {
  if (!same_space(*psi.codomain(), *phi.domain()))
    throw Error(ErrorCode::SpaceMismatch, "inner map does not land in the outer domain");
  std::vector<std::size_t> image(psi.image().size());
  for (std::size_t i = 0; i < image.size(); ++i) image[i] = phi(psi(i));
  return LipschitzMap(psi.domain(), phi.codomain(), std::move(image));
}

/// Linearization: delta_p goes to delta_{phi p}.
inline FreeVector push_forward(const LipschitzMap& phi, const FreeVector& mu) {
  if (!same_space(*mu.space(), *phi.domain())) throw Error(ErrorCode::SpaceMismatch, "vector is not over the domain");
  std::vector<double> c(phi.codomain()->size(), 0.0);
  for (std::size_t x = 0; x < mu.size(); ++x) c[phi(x)] += mu(x);
  return FreeVector(phi.codomain(), std::move(c));
}

/// C_phi f = f o phi.
inline LipschitzFunction compose(const LipschitzMap& phi, const LipschitzFunction& f) {
  if (!same_space(*f.space(), *phi.codomain()))
    throw Error(ErrorCode::SpaceMismatch, "function is not over the codomain");
  std::vector<double> v(phi.domain()->size());
  for (std::size_t x = 0; x < v.size(); ++x) v[x] = f(phi(x));
  return LipschitzFunction(phi.domain(), std::move(v));
}

/// ||C_phi|| = ||phi||.
inline double operator_norm(const LipschitzMap& phi) { return phi.norm().value; }

enum class Verdict { isometric, not_isometric };
enum class CertifyMethod { dual_preimage, primal_polytope };

constexpr const char* to_string(Verdict v) { return v == Verdict::isometric ? "isometric" : "not_isometric"; }
constexpr const char* to_string(CertifyMethod m) {
  return m == CertifyMethod::dual_preimage ? "dual_preimage" : "primal_polytope";
}

/// Pair (x, y) of the codomain together with x', y' in the domain such that
/// phi x' = x, phi y' = y and d(x', y') = d(x, y).
struct PreimageWitness {
  PointPair target;
  PointPair preimage;
};

/// Extreme molecule of the codomain written as a convex combination of
/// pushed-forward signed molecules of the domain (pairs refer to the domain).
struct PolytopeWitness {
  PointPair target;
  std::vector<CombinationTerm> combination;
};

struct IsometryCertificate {
  Verdict verdict = Verdict::not_isometric;
  CertifyMethod method = CertifyMethod::dual_preimage;
  /// False when a caller-supplied norming set makes a negative answer only
  /// a failure of the sufficient condition.
  bool conclusive = true;
  bool caller_norming_set = false;
  /// Pairs of the codomain that were checked, sorted.
  std::vector<PointPair> checked_pairs;
  std::vector<PreimageWitness> preimages;
  std::vector<PolytopeWitness> representations;
  std::optional<PointPair> failing_pair;
  /// Set when the verdict came from ||phi|| < 1 without per-pair work.
  bool norm_shortcut = false;
  LipschitzNorm map_norm;
  double distance_tolerance = 0.0;
  double ratio_tolerance = 0.0;
  double lp_tolerance = 0.0;
};

struct CertifyOptions {
  /// Caller-supplied norming set A for the dual method; default extreme molecules.
  std::optional<std::vector<PointPair>> norming_set;
  /// Precomputed extreme_molecules(codomain), reused across calls.
  std::optional<std::vector<PointPair>> extremes;
  double primal_feasibility = kCertifyFeasibilityTolerance;
  double vertex_feasibility = kLpFeasibilityTolerance;
};

namespace detail {

inline double ratio_tolerance(const LipschitzMap& phi) {
  return std::max(phi.domain()->relative_tolerance(), phi.codomain()->relative_tolerance());
}

inline double distance_tolerance(const LipschitzMap& phi) {
  return std::max(phi.domain()->tol(), phi.codomain()->tol());
}

/// Sets the norm fields, throws on ||phi|| > 1 and fills the ||phi|| < 1
/// shortcut. Returns true when the certificate is already final.
inline bool start_certificate(const LipschitzMap& phi, IsometryCertificate& cert) {
  cert.map_norm = phi.norm();
  cert.ratio_tolerance = ratio_tolerance(phi);
  cert.distance_tolerance = distance_tolerance(phi);
  const double norm = phi.norm().value;
  if (norm > 1.0 + cert.ratio_tolerance)
    throw Error(ErrorCode::MapNormExceedsOne, "map is not 1-Lipschitz", {phi.norm().witness.x, phi.norm().witness.y});
  if (norm >= 1.0 - cert.ratio_tolerance) return false;
  // ||C_phi|| = ||phi|| < 1. The pair (base, nearest point to the base) has no
  // intermediate points, so it is an extreme pair, and it has no exact preimage.
  const auto& m = *phi.codomain();
  std::size_t nearest = m.base() == 0 ? 1 : 0;
  for (std::size_t z = 0; z < m.size(); ++z)
    if (z != m.base() && m.dist(m.base(), z) < m.dist(m.base(), nearest)) nearest = z;
  cert.verdict = Verdict::not_isometric;
  cert.norm_shortcut = true;
  cert.failing_pair = PointPair{m.base(), nearest}.unordered();
  return true;
}

inline std::vector<PointPair> sorted_unordered(std::span<const PointPair> pairs) {
  std::vector<PointPair> out;
  out.reserve(pairs.size());
  for (auto p : pairs) out.push_back(p.unordered());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Closest pair (x', y') with phi x' = x, phi y' = y and d(x', y') <= d(x, y) + tol;
/// ties go to the lexicographically first pair.
inline std::optional<PointPair> exact_preimage(const LipschitzMap& phi, PointPair target,
                                               const std::vector<std::vector<std::size_t>>& fibres, double tol) {
  const auto& n = *phi.domain();
  const double bound = phi.codomain()->dist(target.x, target.y) + tol;
  std::optional<PointPair> best;
  double best_d = 0.0;
  for (std::size_t a : fibres[target.x])
    for (std::size_t b : fibres[target.y]) {
      const double d = n.dist(a, b);
      if (d > bound) continue;
      if (!best || d < best_d || (d == best_d && PointPair{a, b} < *best)) {
        best = PointPair{a, b};
        best_d = d;
      }
    }
  return best;
}

inline std::vector<PointPair> codomain_extremes(const LipschitzMap& phi, const CertifyOptions& options) {
  if (options.extremes) return sorted_unordered(*options.extremes);
  return extreme_molecules(*phi.codomain(), options.vertex_feasibility);
}

}  // namespace detail

/// For every pair in A, look for an exact preimage pair. With the default A
/// (extreme molecules of the codomain) this decides isometry of C_phi.
inline IsometryCertificate certify_isometry_dual(const LipschitzMap& phi, const CertifyOptions& options = {}) {
  IsometryCertificate cert;
  cert.method = CertifyMethod::dual_preimage;
  cert.lp_tolerance = options.vertex_feasibility;
  cert.caller_norming_set = options.norming_set.has_value();
  if (detail::start_certificate(phi, cert)) return cert;

  const auto& m = *phi.codomain();
  std::vector<PointPair> extremes;
  if (options.norming_set) {
    if (options.norming_set->empty()) throw Error(ErrorCode::InvalidArgument, "norming set must be nonempty");
    for (auto p : *options.norming_set)
      if (!m.contains(p)) throw Error(ErrorCode::InvalidArgument, "invalid pair in norming set", {p.x, p.y});
    extremes = detail::codomain_extremes(phi, options);
    cert.checked_pairs = detail::sorted_unordered(*options.norming_set);
    const auto norming = is_norming(m, cert.checked_pairs, extremes, options.vertex_feasibility);
    if (!norming.norming)
      throw Error(ErrorCode::NotNorming, "supplied pair set is not norming",
                  {norming.failing_vertex->x, norming.failing_vertex->y});
  } else {
    extremes = detail::codomain_extremes(phi, options);
    cert.checked_pairs = extremes;
  }

  std::vector<std::vector<std::size_t>> fibres(m.size());
  for (std::size_t x = 0; x < phi.image().size(); ++x) fibres[phi(x)].push_back(x);

  std::optional<PointPair> first_failure;
  std::optional<PointPair> first_extreme_failure;
  for (auto p : cert.checked_pairs) {
    if (auto w = detail::exact_preimage(phi, p, fibres, cert.distance_tolerance)) {
      cert.preimages.push_back({p, *w});
      continue;
    }
    if (!first_failure) first_failure = p;
    if (!first_extreme_failure && std::binary_search(extremes.begin(), extremes.end(), p)) first_extreme_failure = p;
  }
  if (!first_failure) {
    cert.verdict = Verdict::isometric;
    return cert;
  }
  cert.verdict = Verdict::not_isometric;
  cert.preimages.clear();
  cert.failing_pair = first_extreme_failure ? first_extreme_failure : first_failure;
  cert.conclusive = !cert.caller_norming_set || first_extreme_failure.has_value();
  return cert;
}

/// Decides B_F(M) within phi-hat(B_F(N)) vertex by vertex: one LP per extreme
/// molecule of the codomain over the pushed-forward signed molecules of the domain.
inline IsometryCertificate certify_isometry_primal(const LipschitzMap& phi, const CertifyOptions& options = {}) {
  IsometryCertificate cert;
  cert.method = CertifyMethod::primal_polytope;
  cert.lp_tolerance = options.primal_feasibility;
  if (detail::start_certificate(phi, cert)) return cert;

  const auto& n = *phi.domain();
  const auto& m = *phi.codomain();
  cert.checked_pairs = detail::codomain_extremes(phi, options);

  // Distinct pushed-forward generators; exact duplicates add nothing to the hull.
  std::vector<PointPair> representative;
  std::vector<std::tuple<std::size_t, std::size_t, double>> keys;
  {
    std::map<std::tuple<std::size_t, std::size_t, double>, std::size_t> seen;
    for (std::size_t u = 0; u < n.size(); ++u)
      for (std::size_t v = 0; v < n.size(); ++v) {
        if (u == v) continue;
        std::tuple<std::size_t, std::size_t, double> key{phi(u), phi(v), n.dist(u, v)};
        if (phi(u) == phi(v)) key = {0, 0, 0.0};
        if (seen.emplace(key, keys.size()).second) {
          keys.push_back(key);
          representative.push_back({u, v});
        }
      }
  }

  std::vector<std::optional<std::vector<CombinationTerm>>> found(cert.checked_pairs.size());
  parallel_for(cert.checked_pairs.size(), [&](std::size_t k) {
    const PointPair target = cert.checked_pairs[k];
    std::vector<double> t(m.size(), 0.0);
    for (auto [i, w] : molecule_entries(m, target)) t[i] = w;
    const auto hull = detail::hull_lp(m, t, keys.size(), options.primal_feasibility, [&](auto&& add) {
      for (const auto& [a, b, d] : keys) {
        if (a == b) {
          add(std::span<const std::pair<std::size_t, double>>());
          continue;
        }
        const std::pair<std::size_t, double> g[2] = {{a, 1.0 / d}, {b, -1.0 / d}};
        add(std::span<const std::pair<std::size_t, double>>(g, 2));
      }
    });
    if (!hull.member) return;
    std::vector<CombinationTerm> terms;
    for (std::size_t j = 0; j < keys.size(); ++j)
      if (hull.weights[j] > 0.0) terms.push_back({representative[j], hull.weights[j]});
    found[k] = std::move(terms);
  });

  for (std::size_t k = 0; k < found.size(); ++k) {
    if (!found[k]) {
      cert.verdict = Verdict::not_isometric;
      cert.failing_pair = cert.checked_pairs[k];
      cert.representations.clear();
      return cert;
    }
    cert.representations.push_back({cert.checked_pairs[k], std::move(*found[k])});
  }
  cert.verdict = Verdict::isometric;
  return cert;
}

enum class MethodChoice { dual, primal, both };

struct IsometryReport {
  Verdict verdict = Verdict::not_isometric;
  std::optional<IsometryCertificate> dual;
  std::optional<IsometryCertificate> primal;
  /// With both methods: whether the verdicts were compared. A dual result that
  /// is inconclusive (caller norming set) is not compared.
  bool compared = false;
};

/// Raised when the two certification methods disagree; carries both certificates.
class MethodDisagreementError : public Error {
 public:
  MethodDisagreementError(IsometryCertificate dual, IsometryCertificate primal)
      : Error(ErrorCode::MethodDisagreement, "dual and primal certification disagree"),
        dual_(std::move(dual)),
        primal_(std::move(primal)) {}
  const IsometryCertificate& dual() const { return dual_; }
  const IsometryCertificate& primal() const { return primal_; }

 private:
  IsometryCertificate dual_;
  IsometryCertificate primal_;
};

inline IsometryReport certify_isometry(const LipschitzMap& phi, MethodChoice method, CertifyOptions options = {}) {
  IsometryReport report;
  if (method == MethodChoice::both && !options.extremes && phi.norm().value >= 1.0 - detail::ratio_tolerance(phi) &&
      phi.norm().value <= 1.0 + detail::ratio_tolerance(phi))
    options.extremes = extreme_molecules(*phi.codomain(), options.vertex_feasibility);
  if (method != MethodChoice::primal) report.dual = certify_isometry_dual(phi, options);
  if (method != MethodChoice::dual) report.primal = certify_isometry_primal(phi, options);
  if (method == MethodChoice::dual) {
    report.verdict = report.dual->verdict;
  } else if (method == MethodChoice::primal) {
    report.verdict = report.primal->verdict;
  } else {
    report.verdict = report.primal->verdict;
    report.compared = report.dual->conclusive;
    if (report.compared && report.dual->verdict != report.primal->verdict)
      throw MethodDisagreementError(*report.dual, *report.primal);
  }
  return report;
}

}  // namespace lipfree

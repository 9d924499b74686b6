// Builds a few spaces, computes free norms and certifies two maps.

#include <cstdio>

#include "lipfree/builtin_maps.hpp"
#include "lipfree/lipfree.hpp"

using namespace lipfree;

int main() {
  // tripod: center 0 (the base) and three unit legs
  const auto t = tripod();
  const FreeVector mu(t, {0.0, 1.0, -0.5, -0.5});
  std::printf("tripod: ||delta_a - (delta_b + delta_c)/2|| = %.6f (flow) %.6f (lp)\n", free_norm_primal(mu).value,
              free_norm_dual(mu).value);

  std::printf("tripod extreme molecules:");
  for (auto p : extreme_molecules(*t)) std::printf(" (%zu,%zu)", p.x, p.y);
  std::printf("\n");

  for (auto which : {BuiltinMap::fold, BuiltinMap::halving}) {
    const auto phi = builtin_interval_map(which, 16);
    const auto report = certify_isometry(phi, MethodChoice::both);
    std::printf("%-8s ||phi||_Lip = %.3f, composition operator %s\n", std::string(to_string(which)).c_str(),
                phi.norm().value, report.verdict == Verdict::isometric ? "is an isometry" : "is not an isometry");
  }
  return 0;
}

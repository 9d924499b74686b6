#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lipfree/composition.hpp"
#include "lipfree/error.hpp"
#include "lipfree/metric_space.hpp"

namespace lipfree {

/// Named 1-Lipschitz maps into interval nets, parametrized by the mesh count n
/// of the codomain family.
enum class BuiltinMap { identity, fold, halving, collapse };

inline constexpr std::array<BuiltinMap, 4> kBuiltinMaps{BuiltinMap::identity, BuiltinMap::fold, BuiltinMap::halving,
                                                        BuiltinMap::collapse};

constexpr std::string_view to_string(BuiltinMap m) {
  switch (m) {
    case BuiltinMap::identity: return "identity";
    case BuiltinMap::fold: return "fold";
    case BuiltinMap::halving: return "halving";
    case BuiltinMap::collapse: return "collapse";
  }
  return "unknown";
}

inline std::optional<BuiltinMap> parse_builtin_map(std::string_view name) {
  for (auto m : kBuiltinMaps)
    if (to_string(m) == name) return m;
  return std::nullopt;
}

/// identity: interval_net(n) -> interval_net(n).
/// fold: [0, 2] with 2n steps onto interval_net(n), s -> 1 - |1 - s|.
/// halving: interval_net(n) -> interval_net(2n), t -> t / 2.
/// collapse: interval_net(n) -> interval_net(n), everything to 0.
inline LipschitzMap builtin_interval_map(BuiltinMap which, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "mesh count must be at least 1");
  switch (which) {
    case BuiltinMap::identity: return LipschitzMap::identity(interval_net(n));
    case BuiltinMap::fold: {
      std::vector<std::size_t> image(2 * n + 1);
      for (std::size_t k = 0; k <= 2 * n; ++k) image[k] = k <= n ? k : 2 * n - k;
      return LipschitzMap(line_net(2 * n, 2.0), interval_net(n), std::move(image));
    }
    case BuiltinMap::halving: {
      std::vector<std::size_t> image(n + 1);
      for (std::size_t k = 0; k <= n; ++k) image[k] = k;
      return LipschitzMap(interval_net(n), interval_net(2 * n), std::move(image));
    }
    case BuiltinMap::collapse: {
      auto net = interval_net(n);
      return LipschitzMap::collapse(net, net);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown builtin map");
}

}  // namespace lipfree

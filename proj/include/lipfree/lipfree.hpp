#pragma once

#include "lipfree/builtin_maps.hpp"
#include "lipfree/composition.hpp"
#include "lipfree/error.hpp"
#include "lipfree/free_space.hpp"
#include "lipfree/geodesic.hpp"
#include "lipfree/lipschitz.hpp"
#include "lipfree/metric_space.hpp"
#include "lipfree/min_cost_flow.hpp"
#include "lipfree/parallel.hpp"
#include "lipfree/simplex.hpp"

namespace lipfree {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lipfree

#pragma once

// Umbrella header.

#include "sparsedetect/boundary.hpp"
#include "sparsedetect/designs.hpp"
#include "sparsedetect/lowerbound.hpp"
#include "sparsedetect/model.hpp"
#include "sparsedetect/montecarlo.hpp"
#include "sparsedetect/numerics.hpp"
#include "sparsedetect/rng.hpp"
#include "sparsedetect/statistics.hpp"
#include "sparsedetect/tests.hpp"

namespace sparsedetect {
inline constexpr const char* version = "0.1.0";
}

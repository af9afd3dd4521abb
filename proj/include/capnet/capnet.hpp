#pragma once

// Umbrella header for the country-product network toolkit.

#include "capnet/binomial_model.hpp"
#include "capnet/calibrate.hpp"
#include "capnet/csv.hpp"
#include "capnet/dist_fit.hpp"
#include "capnet/error.hpp"
#include "capnet/matrix.hpp"
#include "capnet/metrics.hpp"
#include "capnet/null_models.hpp"
#include "capnet/parallel.hpp"
#include "capnet/random.hpp"
#include "capnet/rca.hpp"
#include "capnet/stats.hpp"
#include "capnet/synthetic.hpp"
#include "capnet/trade.hpp"

namespace capnet {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace capnet

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "capnet/binomial_model.hpp"
#include "capnet/metrics.hpp"
#include "capnet/rca.hpp"
#include "capnet/trade.hpp"

namespace capnet {

// Planted-model trade data: a capability world is sampled, projected through
// the subset operator, and emitted as unit-value trade records on the
// network's edges. With X = M, every off-network cell has RCA exactly 0 and
// every edge has RCA = E / (k_c0 k_p0) > 0, so thresholding anywhere strictly
// inside that gap reconstructs the planted network exactly. `safe_threshold`
// is the midpoint, half the minimum edge RCA, which keeps the reconstruction
// immune to rounding in the RCA pipeline.
struct SyntheticTrade {
  std::vector<TradeRecord> records;
  BipartiteNetwork planted;
  BinomialParams params;
  double safe_threshold = 0.0;
};

inline SyntheticTrade make_synthetic_trade(const BinomialParams& params, std::uint64_t seed) {
  params.validate();
  SyntheticTrade synth;
  synth.params = params;
  const CapabilityWorld world = sample_world(params, seed);
  synth.planted = leontief(world);
  synth.planted.countries = country_labels(synth.planted);
  synth.planted.products = product_labels(synth.planted);

  const DegreeProfile profile = degree_profile(synth.planted);
  if (profile.edges == 0) throw error("make_synthetic_trade: planted network has no edges");
  const double edges = static_cast<double>(profile.edges);
  synth.safe_threshold = std::numeric_limits<double>::infinity();
  synth.records.reserve(profile.edges);
  for (std::size_t i = 0; i < synth.planted.country_count(); ++i)
    for (std::size_t j = 0; j < synth.planted.product_count(); ++j)
      if (synth.planted.adjacency.test(i, j)) {
        synth.records.push_back(
            TradeRecord{synth.planted.countries[i], synth.planted.products[j], 1.0, {}});
        const double rca = edges / (static_cast<double>(profile.k_c0[i]) *
                                    static_cast<double>(profile.k_p0[j]));
        synth.safe_threshold = std::min(synth.safe_threshold, rca);
      }
  synth.safe_threshold *= 0.5;
  return synth;
}

}  // namespace capnet

#pragma once

#include <cstddef>
#include <cstdint>

#include "hom/data_ingest.hpp"
#include "hom/model_core.hpp"

namespace hom {

/// A series of n daily prices: the start window followed by one simulated
/// path (substream 0 of `seed`). Dates run consecutively from 2010-01-01.
PriceSeries synthetic_series(const ModelParams& params, const HistoryWindow& start, std::size_t n,
                             std::uint64_t seed);

/// Same, starting from a flat window at the reversion level.
PriceSeries synthetic_series(const ModelParams& params, std::size_t n, std::uint64_t seed);

/// Parameters of the bundled delayed-signal fixture: a lightly damped delayed
/// oscillation kicked off by a supply shock, with small noise.
ModelParams delayed_signal_params();

/// The delayed-signal fixture for a given seed (1000 points; seed 0 is the
/// file shipped in data/).
PriceSeries delayed_signal_series(std::uint64_t seed);

}  // namespace hom

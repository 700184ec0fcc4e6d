#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hom/model_core.hpp"

namespace hom {

struct SimConfig {
    std::size_t horizon = 1;
    std::size_t n_paths = 2000;
    std::uint64_t seed = 0;
    double variance_floor = 1e-12;  // used by the likelihood only
    unsigned threads = 1;           // results do not depend on this
};

/// n_paths x horizon simulated prices, row-major by path. Column t holds the
/// price after start_step + t + 1 steps from the original anchor.
struct ForecastEnsemble {
    std::size_t n_paths = 0;
    std::size_t horizon = 0;
    std::size_t start_step = 0;
    std::uint64_t seed = 0;
    ModelParams params;
    std::vector<double> values;

    [[nodiscard]] double at(std::size_t path, std::size_t t) const { return values[path * horizon + t]; }
    [[nodiscard]] std::span<const double> path(std::size_t p) const {
        return {values.data() + p * horizon, horizon};
    }
    /// Prices of every path after step t (0-based column).
    [[nodiscard]] std::vector<double> column(std::size_t t) const;
};

/// One Euler-Maruyama step with dt = 1.
[[nodiscard]] inline double step(const ModelParams& p, double current, double lagged, double noise) {
    return current + drift(p, lagged) + diffusion_coeff(p, current) * noise;
}

/// Simulates n_paths independent paths from a common history window.
/// Path p draws its noise from substream p of config.seed.
/// Throws HistoryMismatch if history.values.size() != params.tau.
ForecastEnsemble simulate_paths(const ModelParams& params, const HistoryWindow& history,
                                const SimConfig& config);

/// Continues path p from tails[p], which is the state reached after
/// `start_step` steps. With the same seed, the output equals columns
/// start_step.. of an uninterrupted run.
ForecastEnsemble resume_simulation(const std::vector<HistoryWindow>& tails, const ModelParams& params,
                                   const SimConfig& config, std::size_t start_step);

/// State of one path after `steps` columns of `ensemble` have been taken,
/// given the window the ensemble started from.
HistoryWindow tail_window(const ForecastEnsemble& ensemble, const HistoryWindow& start,
                          std::size_t path, std::size_t steps);

std::string ensemble_to_csv(const ForecastEnsemble& ensemble);
/// Per-step mean with 5th and 95th percentiles (linear interpolation).
std::string ensemble_summary_csv(const ForecastEnsemble& ensemble);

double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace hom

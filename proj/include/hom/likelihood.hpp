#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "hom/data_ingest.hpp"
#include "hom/model_core.hpp"

namespace hom {

/// Conditioning data plus observed transitions for the discretized likelihood.
struct LikelihoodInput {
    /// History followed by training prices, oldest first.
    std::vector<double> series;
    /// Leading points that only condition the sum. Transition terms start at
    /// index max(tau, conditioning), so fixing this to the history length makes
    /// likelihoods for different tau share one set of transitions.
    std::size_t conditioning = 0;
    double variance_floor = 1e-12;
    /// A transition i -> i+1 is dropped when i - tau, i or i + 1 lies in one of
    /// these ranges. Empty by default.
    std::vector<IndexRange> excluded;
};

/// Index of the first transition term for a given delay.
[[nodiscard]] inline std::size_t first_transition(const LikelihoodInput& in, std::size_t tau) {
    return std::max(tau, in.conditioning);
}

double gaussian_log_density(double x, double mean, double variance);

/// Sum over transitions i of log N(x[i+1]; x[i] + a (b - x[i-tau]),
/// max((sigma x[i])^2, variance_floor)).
///
/// Throws InsufficientData when the series is shorter than
/// first_transition + 2 and NonFiniteLikelihood when a term is NaN or infinite.
double log_likelihood(const ModelParams& params, const LikelihoodInput& input);

/// Number of transition terms log_likelihood would sum.
std::size_t transition_count(std::size_t tau, const LikelihoodInput& input);

enum class FreeParameter { A, B, Sigma, Tau };

struct ProfilePoint {
    double value = 0.0;
    std::optional<double> log_likelihood;  // empty if evaluation failed
};

/// log_likelihood along one coordinate with the others held at `fixed`.
/// Failed points are recorded as empty rather than aborting.
std::vector<ProfilePoint> log_likelihood_profile(const LikelihoodInput& input, const ModelParams& fixed,
                                                 FreeParameter free, const std::vector<double>& grid);

/// Returns `base` with coordinate `which` set to `value` (tau is rounded).
ModelParams with_coordinate(ModelParams base, FreeParameter which, double value);

}  // namespace hom

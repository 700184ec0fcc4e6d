#include "hom/likelihood.hpp"

#include <cmath>
#include <numbers>

#include "hom/errors.hpp"

namespace hom {

namespace {

const double kHalfLogTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

bool masked(const std::vector<IndexRange>& ranges, std::size_t lag, std::size_t i) {
    for (const auto& r : ranges) {
        if (r.contains(lag) || r.contains(i) || r.contains(i + 1)) return true;
    }
    return false;
}

}  // namespace

double gaussian_log_density(double x, double mean, double variance) {
    const double r = x - mean;
    return -kHalfLogTwoPi - 0.5 * std::log(variance) - 0.5 * r * r / variance;
}

std::size_t transition_count(std::size_t tau, const LikelihoodInput& input) {
    const auto first = first_transition(input, tau);
    if (input.series.size() < first + 2) return 0;
    return input.series.size() - 1 - first;
}

double log_likelihood(const ModelParams& params, const LikelihoodInput& input) {
    const auto& x = input.series;
    const auto first = first_transition(input, params.tau);
    if (x.size() < first + 2) {
        throw InsufficientData("likelihood needs at least " + std::to_string(first + 2) +
                               " prices, got " + std::to_string(x.size()));
    }

    double total = 0.0;
    for (std::size_t i = first; i + 1 < x.size(); ++i) {
        const std::size_t lag = i - params.tau;
        if (!input.excluded.empty() && masked(input.excluded, lag, i)) continue;
        const double mean = x[i] + drift(params, x[lag]);
        const double scale = diffusion_coeff(params, x[i]);
        const double variance = std::max(scale * scale, input.variance_floor);
        total += gaussian_log_density(x[i + 1], mean, variance);
    }
    if (!std::isfinite(total)) {
        throw NonFiniteLikelihood("log-likelihood is not finite");
    }
    return total;
}

ModelParams with_coordinate(ModelParams base, FreeParameter which, double value) {
    switch (which) {
        case FreeParameter::A: base.a = value; break;
        case FreeParameter::B: base.b = value; break;
        case FreeParameter::Sigma: base.sigma = value; break;
        case FreeParameter::Tau: base.tau = static_cast<std::size_t>(std::llround(std::max(value, 0.0))); break;
    }
    return base;
}

std::vector<ProfilePoint> log_likelihood_profile(const LikelihoodInput& input, const ModelParams& fixed,
                                                 FreeParameter free, const std::vector<double>& grid) {
    std::vector<ProfilePoint> out;
    out.reserve(grid.size());
    for (const double v : grid) {
        ProfilePoint pt{v, std::nullopt};
        if (std::isfinite(v)) {
            try {
                pt.log_likelihood = log_likelihood(with_coordinate(fixed, free, v), input);
            } catch (const Error&) {
            }
        }
        out.push_back(pt);
    }
    return out;
}

}  // namespace hom

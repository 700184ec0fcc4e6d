#include "hom/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hom/errors.hpp"

namespace hom {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of_log(const std::vector<double>& v) {
    std::vector<double> logs;
    logs.reserve(v.size());
    for (const double x : v) {
        if (x > 0.0) logs.push_back(std::log(x));
    }
    if (logs.size() < 2) return 0.0;
    const double m = mean_of(logs);
    double ss = 0.0;
    for (const double y : logs) ss += (y - m) * (y - m);
    return std::sqrt(ss / static_cast<double>(logs.size() - 1));
}

double clamp_to(double v, const Interval& iv) { return std::clamp(v, iv.low, iv.high); }

double evaluate(const ModelParams& p, const LikelihoodInput& input) {
    try {
        return log_likelihood(p, input);
    } catch (const Error& e) {
        throw CalibrationError(std::string("likelihood evaluation failed: ") + e.what());
    }
}

}  // namespace

void SearchBox::validate(std::size_t history_len) const {
    for (const auto* iv : {&a, &b, &sigma}) {
        if (!std::isfinite(iv->low) || !std::isfinite(iv->high) || !(iv->low < iv->high)) {
            throw ConfigError("search bounds must be finite with low < high");
        }
    }
    if (sigma.low <= 0.0) {
        throw ConfigError("sigma lower bound must be positive");
    }
    if (tau_low > tau_high || tau_high > history_len) {
        throw ConfigError("tau bounds must satisfy 0 <= low <= high <= history_len (" +
                          std::to_string(history_len) + ")");
    }
}

SearchBox default_search_box(const SeriesSplit& split, ModelKind kind) {
    const auto train = split.train.prices();
    if (train.empty()) {
        throw SplitError("training segment is empty");
    }
    const auto [mn, mx] = std::minmax_element(train.begin(), train.end());
    SearchBox box;
    box.b = {0.2 * *mn, 5.0 * *mx};
    if (!(box.b.low < box.b.high)) {
        // Non-positive training prices: widen symmetrically around the data.
        const double span = std::max({std::abs(*mn), std::abs(*mx), 1.0});
        box.b = {*mn - 5.0 * span, *mx + 5.0 * span};
    }
    box.tau_low = 0;
    box.tau_high = kind == ModelKind::Markov ? 0 : split.history.size();
    return box;
}

SearchBox SearchBoxOverride::apply(SearchBox box) const {
    if (a) box.a = *a;
    if (b) box.b = *b;
    if (sigma) box.sigma = *sigma;
    if (tau) {
        box.tau_low = tau->first;
        box.tau_high = tau->second;
    }
    return box;
}

std::vector<std::size_t> initial_delay_grid(std::size_t low, std::size_t high) {
    std::vector<std::size_t> grid;
    const double span = static_cast<double>(high - low);
    const std::size_t n = kInitialDelayGridSize;
    for (std::size_t k = 0; k < n; ++k) {
        const auto v = low + static_cast<std::size_t>(std::llround(span * static_cast<double>(k) /
                                                                    static_cast<double>(n - 1)));
        if (grid.empty() || grid.back() != v) grid.push_back(v);
    }
    return grid;
}

LikelihoodInput make_likelihood_input(const SeriesSplit& split, double variance_floor,
                                      std::vector<IndexRange> excluded) {
    LikelihoodInput in;
    in.series = split.history.prices();
    const auto train = split.train.prices();
    in.series.insert(in.series.end(), train.begin(), train.end());
    in.conditioning = split.history.size();
    in.variance_floor = variance_floor;
    in.excluded = std::move(excluded);
    return in;
}

InitGuess initial_guess(const SeriesSplit& split, const SearchBox& box, const LikelihoodInput& input,
                        ModelKind kind) {
    box.validate(split.history.size());
    const auto train = split.train.prices();
    if (train.empty()) {
        throw SplitError("training segment is empty");
    }

    InitGuess g;
    g.kind = kind;
    g.box = box;
    g.b0 = clamp_to(mean_of(train), box.b);
    g.sigma0 = clamp_to(std::max(stddev_of_log(train), kSigmaFloor), box.sigma);

    const auto delays = kind == ModelKind::Markov ? std::vector<std::size_t>{0}
                                                  : initial_delay_grid(box.tau_low, box.tau_high);
    double best = -std::numeric_limits<double>::infinity();
    g.a0 = clamp_to(kInitialSpeedGrid[0], box.a);
    g.tau0 = delays.front();
    for (const double a_raw : kInitialSpeedGrid) {
        const double a = clamp_to(a_raw, box.a);
        for (const std::size_t tau : delays) {
            const double ll = evaluate({a, g.b0, g.sigma0, tau, kind}, input);
            if (ll > best) {
                best = ll;
                g.a0 = a;
                g.tau0 = tau;
            }
        }
    }
    return g;
}

FitResult coordinate_ascent(const InitGuess& init, const LikelihoodInput& input, const AscentOptions& options) {
    if (!(options.tol > 0.0)) {
        throw ConfigError("tolerance must be positive");
    }
    const auto& box = init.box;
    ModelParams current = init.params();
    current.validate();
    double current_ll = evaluate(current, input);

    FitResult result;
    result.initial_loglik = current_ll;
    result.trace.push_back({current, current_ll});

    auto line_search = [&](FreeParameter which, const Interval& iv) {
        auto objective = [&](double v) { return evaluate(with_coordinate(current, which, v), input); };
        const double x = golden_section_max(objective, iv.low, iv.high, 1e-10 * (iv.high - iv.low));
        const auto candidate = with_coordinate(current, which, x);
        const double ll = evaluate(candidate, input);
        if (ll >= current_ll) {
            current = candidate;
            current_ll = ll;
        }
    };

    for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
        const double start_ll = current_ll;

        line_search(FreeParameter::A, box.a);
        line_search(FreeParameter::B, box.b);
        line_search(FreeParameter::Sigma, box.sigma);

        std::size_t best_tau = current.tau;
        for (std::size_t tau = box.tau_low; tau <= box.tau_high; ++tau) {
            if (tau == current.tau) continue;
            auto candidate = current;
            candidate.tau = tau;
            const double ll = evaluate(candidate, input);
            if (ll > current_ll) {
                current_ll = ll;
                best_tau = tau;
            }
        }
        current.tau = best_tau;

        result.sweeps = sweep + 1;
        result.trace.push_back({current, current_ll});
        if (current_ll - start_ll < options.tol * std::abs(current_ll)) {
            result.converged = true;
            break;
        }
    }

    result.params = current;
    result.final_loglik = current_ll;
    return result;
}

PipelineFit fit_pipeline(const PriceSeries& series, const FitConfig& config) {
    PipelineFit out;
    try {
        out.split = split_series(series, config.split);
    } catch (const Error& e) {
        throw CalibrationError(std::string("split: ") + e.what());
    }
    try {
        const auto box = config.bounds.apply(default_search_box(out.split, config.kind));
        if (config.kind == ModelKind::Markov && box.tau_high != 0) {
            throw ConfigError("a Markov fit requires tau bounds [0, 0]");
        }
        const auto input = make_likelihood_input(out.split, config.variance_floor, config.likelihood_exclusions);
        out.init = initial_guess(out.split, box, input, config.kind);
        out.fit = coordinate_ascent(out.init, input, config.ascent);
    } catch (const CalibrationError& e) {
        throw CalibrationError(std::string("calibrate: ") + e.what());
    } catch (const Error& e) {
        throw CalibrationError(std::string("initialize: ") + e.what());
    }
    return out;
}

}  // namespace hom

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hom/data_ingest.hpp"
#include "hom/likelihood.hpp"
#include "hom/model_core.hpp"

namespace hom {

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

/// Per-coordinate search bounds. tau bounds are inclusive integers.
struct SearchBox {
    Interval a{0.0, 1.0};
    Interval b;
    Interval sigma{1e-6, 1.0};
    std::size_t tau_low = 0;
    std::size_t tau_high = 0;

    void validate(std::size_t history_len) const;
};

/// Default box: a in [0, 1], b in [0.2 min(train), 5 max(train)],
/// sigma in [1e-6, 1], tau in [0, history_len] (HOM) or [0, 0] (Markov).
SearchBox default_search_box(const SeriesSplit& split, ModelKind kind);

/// Partial overrides of the default box, as read from a config file.
struct SearchBoxOverride {
    std::optional<Interval> a;
    std::optional<Interval> b;
    std::optional<Interval> sigma;
    std::optional<std::pair<std::size_t, std::size_t>> tau;

    [[nodiscard]] SearchBox apply(SearchBox box) const;
};

struct InitGuess {
    double a0 = 0.0;
    double b0 = 0.0;
    double sigma0 = 0.0;
    std::size_t tau0 = 0;
    ModelKind kind = ModelKind::HOM;
    SearchBox box;

    [[nodiscard]] ModelParams params() const { return {a0, b0, sigma0, tau0, kind}; }
};

/// Reversion speeds tried by the initial grid.
inline constexpr double kInitialSpeedGrid[] = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
inline constexpr std::size_t kInitialDelayGridSize = 20;
inline constexpr double kSigmaFloor = 1e-6;

/// Integer delays evenly spread over [low, high], at most kInitialDelayGridSize.
std::vector<std::size_t> initial_delay_grid(std::size_t low, std::size_t high);

/// Builds the likelihood input history + train, conditioned on the history.
LikelihoodInput make_likelihood_input(const SeriesSplit& split, double variance_floor = 1e-12,
                                      std::vector<IndexRange> excluded = {});

/// Rough start: b0 = mean(train), sigma0 = stddev(ln train) (floored at 1e-6),
/// (a0, tau0) = best point of the speed x delay grid.
InitGuess initial_guess(const SeriesSplit& split, const SearchBox& box, const LikelihoodInput& input,
                        ModelKind kind = ModelKind::HOM);

struct TraceEntry {
    ModelParams params;
    double log_likelihood = 0.0;
};

struct FitResult {
    ModelParams params;
    double initial_loglik = 0.0;
    double final_loglik = 0.0;
    std::size_t sweeps = 0;
    bool converged = false;
    std::vector<TraceEntry> trace;  // entry 0 is the starting point
};

struct AscentOptions {
    double tol = 1e-8;
    std::size_t max_sweeps = 100;
};

/// Cyclic coordinate ascent in the order a, b, sigma, tau. Continuous
/// coordinates use golden-section search over their bounds; tau is scanned
/// exhaustively. A move is taken only if it does not lower the likelihood, so
/// the trace is non-decreasing. Stops when a sweep gains less than
/// tol * |loglik|; converged = false if max_sweeps is hit first.
FitResult coordinate_ascent(const InitGuess& init, const LikelihoodInput& input,
                            const AscentOptions& options = {});

/// Maximizes f over [low, high] by golden-section search to an absolute
/// bracket width of abs_tol. Returns the best abscissa seen.
template <typename F>
double golden_section_max(F&& f, double low, double high, double abs_tol);

struct FitConfig {
    SplitSpec split{400, 0.8};
    ModelKind kind = ModelKind::HOM;
    SearchBoxOverride bounds;
    AscentOptions ascent;
    double variance_floor = 1e-12;
    /// Index ranges of the full series dropped from the likelihood.
    std::vector<IndexRange> likelihood_exclusions;
};

struct PipelineFit {
    SeriesSplit split;
    InitGuess init;
    FitResult fit;
};

/// split_series -> initial_guess -> coordinate_ascent. Errors are rethrown as
/// CalibrationError prefixed with the failing stage.
PipelineFit fit_pipeline(const PriceSeries& series, const FitConfig& config);

// ---------------------------------------------------------------------------

template <typename F>
double golden_section_max(F&& f, double low, double high, double abs_tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double lo = low, hi = high;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    double best_x = f1 >= f2 ? x1 : x2;
    double best_f = std::max(f1, f2);
    while (hi - lo > abs_tol) {
        if (f1 >= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
            if (f1 > best_f) { best_f = f1; best_x = x1; }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
            if (f2 > best_f) { best_f = f2; best_x = x2; }
        }
    }
    for (const double edge : {low, high}) {
        const double fe = f(edge);
        if (fe > best_f) { best_f = fe; best_x = edge; }
    }
    return best_x;
}

}  // namespace hom

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hom/calibrate.hpp"
#include "hom/data_ingest.hpp"
#include "hom/simulate.hpp"

namespace hom {

struct EvalReport {
    double mae = 0.0;       // price units
    double mre_pct = 0.0;   // percent
    double rmse = 0.0;      // price units
    double rmsr_pct = 0.0;  // percent
    double mxe = 0.0;       // price units
    std::size_t n_points_used = 0;
    std::vector<IndexRange> excluded_ranges;
};

/// Pointwise arithmetic mean over paths.
std::vector<double> mean_path(const ForecastEnsemble& ensemble);

/// MAE, MRE, RMSE, RMSR and MXE of forecast against realized over the indices
/// not covered by `mask`. Relative errors divide by the realized price.
///
/// Throws LengthMismatch, ZeroRealizedPrice, or EmptyEvaluation when the mask
/// leaves no point.
EvalReport error_metrics(const std::vector<double>& forecast, const std::vector<double>& realized,
                         const std::vector<IndexRange>& mask = {});

/// Simulates from the end of the training segment across the validation
/// window: anchor = last training price, delay buffer = the tau prices before it.
ForecastEnsemble forecast_validation(const ModelParams& params, const SeriesSplit& split,
                                     std::size_t n_paths, std::uint64_t seed, unsigned threads = 1);

/// Ranges of the full series shifted into validation-window coordinates.
std::vector<IndexRange> to_validation_ranges(const SeriesSplit& split, const std::vector<IndexRange>& ranges);

struct CompareConfig {
    FitConfig fit;
    std::size_t n_paths = 2000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    /// Full-series index ranges excluded from the error metrics.
    std::vector<IndexRange> eval_exclusions;
};

struct ModelOutcome {
    PipelineFit fit;
    std::vector<double> mean_path;
    EvalReport report;
};

struct ModelComparison {
    ModelOutcome hom;
    ModelOutcome markov;
    std::uint64_t forecast_seed = 0;
};

/// Fits the delayed model (tau free) and the Markov model (tau = 0) on the
/// same split, forecasts both with the same noise, and scores both.
ModelComparison compare_models(const PriceSeries& series, const CompareConfig& config);

nlohmann::json report_to_json(const EvalReport& report);
/// Header "Model,MAE,MRE,RMSE,RMSR,MXE" then one row per (label, report).
std::string metrics_table_csv(const std::vector<std::pair<std::string, EvalReport>>& rows);
/// date,realized,hom_mean,markov_mean over the validation window.
std::string forecast_plot_csv(const PriceSeries& validation, const std::vector<double>& hom_mean,
                              const std::vector<double>& markov_mean);

}  // namespace hom

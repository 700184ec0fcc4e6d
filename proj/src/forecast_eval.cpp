#include "hom/forecast_eval.hpp"

#include <algorithm>
#include <cmath>

#include "hom/errors.hpp"
#include "hom/rng.hpp"

namespace hom {

std::vector<double> mean_path(const ForecastEnsemble& ensemble) {
    if (ensemble.n_paths == 0) {
        throw Error("mean_path of an empty ensemble");
    }
    // Running mean: exact when every path agrees.
    std::vector<double> mean(ensemble.path(0).begin(), ensemble.path(0).end());
    for (std::size_t p = 1; p < ensemble.n_paths; ++p) {
        const auto row = ensemble.path(p);
        const double k = static_cast<double>(p + 1);
        for (std::size_t t = 0; t < ensemble.horizon; ++t) mean[t] += (row[t] - mean[t]) / k;
    }
    return mean;
}

EvalReport error_metrics(const std::vector<double>& forecast, const std::vector<double>& realized,
                         const std::vector<IndexRange>& mask) {
    if (forecast.size() != realized.size()) {
        throw LengthMismatch("forecast has " + std::to_string(forecast.size()) + " points, realized has " +
                             std::to_string(realized.size()));
    }
    EvalReport r;
    r.excluded_ranges = mask;
    double abs_sum = 0.0, rel_sum = 0.0, sq_sum = 0.0, rel_sq_sum = 0.0;
    for (std::size_t i = 0; i < forecast.size(); ++i) {
        if (std::any_of(mask.begin(), mask.end(), [i](const IndexRange& m) { return m.contains(i); })) {
            continue;
        }
        if (realized[i] == 0.0) {
            throw ZeroRealizedPrice("realized price is zero at index " + std::to_string(i));
        }
        const double e = forecast[i] - realized[i];
        const double rel = e / realized[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        rel_sum += std::abs(rel);
        rel_sq_sum += rel * rel;
        r.mxe = std::max(r.mxe, std::abs(e));
        ++r.n_points_used;
    }
    if (r.n_points_used == 0) {
        throw EmptyEvaluation("every point is excluded; nothing to evaluate");
    }
    const double n = static_cast<double>(r.n_points_used);
    r.mae = abs_sum / n;
    r.mre_pct = 100.0 * rel_sum / n;
    r.rmse = std::sqrt(sq_sum / n);
    r.rmsr_pct = 100.0 * std::sqrt(rel_sq_sum / n);
    return r;
}

ForecastEnsemble forecast_validation(const ModelParams& params, const SeriesSplit& split, std::size_t n_paths,
                                     std::uint64_t seed, unsigned threads) {
    if (split.validation.empty() || split.train.empty()) {
        throw SplitError("forecasting needs non-empty training and validation segments");
    }
    auto known = split.history.prices();
    const auto train = split.train.prices();
    known.insert(known.end(), train.begin(), train.end());

    SimConfig sim;
    sim.horizon = split.validation.size();
    sim.n_paths = n_paths;
    sim.seed = seed;
    sim.threads = threads;
    return simulate_paths(params, HistoryWindow::ending_at(known, known.size() - 1, params.tau), sim);
}

std::vector<IndexRange> to_validation_ranges(const SeriesSplit& split, const std::vector<IndexRange>& ranges) {
    const std::size_t offset = split.history.size() + split.train.size();
    const std::size_t len = split.validation.size();
    std::vector<IndexRange> out;
    for (const auto& r : ranges) {
        if (r.last < offset || r.first >= offset + len) continue;
        const std::size_t first = std::max(r.first, offset) - offset;
        const std::size_t last = std::min(r.last, offset + len - 1) - offset;
        out.push_back({first, last});
    }
    return out;
}

ModelComparison compare_models(const PriceSeries& series, const CompareConfig& config) {
    ModelComparison out;
    out.forecast_seed = derive_seed(config.seed, "forecast");

    auto run = [&](ModelKind kind) {
        ModelOutcome outcome;
        FitConfig fc = config.fit;
        fc.kind = kind;
        if (kind == ModelKind::Markov) fc.bounds.tau = std::pair<std::size_t, std::size_t>{0, 0};
        outcome.fit = fit_pipeline(series, fc);
        const auto& split = outcome.fit.split;
        const auto ensemble =
            forecast_validation(outcome.fit.fit.params, split, config.n_paths, out.forecast_seed, config.threads);
        outcome.mean_path = mean_path(ensemble);
        outcome.report = error_metrics(outcome.mean_path, split.validation.prices(),
                                       to_validation_ranges(split, config.eval_exclusions));
        return outcome;
    };
    out.hom = run(ModelKind::HOM);
    out.markov = run(ModelKind::Markov);
    return out;
}

nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json ranges = nlohmann::json::array();
    for (const auto& m : r.excluded_ranges) ranges.push_back({m.first, m.last});
    return {{"MAE", r.mae},   {"MRE_pct", r.mre_pct}, {"RMSE", r.rmse}, {"RMSR_pct", r.rmsr_pct},
            {"MXE", r.mxe},   {"n_points_used", r.n_points_used}, {"excluded_ranges", ranges}};
}

std::string metrics_table_csv(const std::vector<std::pair<std::string, EvalReport>>& rows) {
    std::string out = "Model,MAE,MRE,RMSE,RMSR,MXE\n";
    char buf[256];
    for (const auto& [label, r] : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", label.c_str(), r.mae, r.mre_pct,
                      r.rmse, r.rmsr_pct, r.mxe);
        out += buf;
    }
    return out;
}

std::string forecast_plot_csv(const PriceSeries& validation, const std::vector<double>& hom_mean,
                              const std::vector<double>& markov_mean) {
    if (hom_mean.size() != validation.size() || markov_mean.size() != validation.size()) {
        throw LengthMismatch("mean paths must cover the validation window");
    }
    std::string out = "date,realized,hom_mean,markov_mean\n";
    char buf[128];
    for (std::size_t i = 0; i < validation.size(); ++i) {
        const auto& o = validation.observations[i];
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", o.price, hom_mean[i], markov_mean[i]);
        out += format_date(o.date);
        out += buf;
    }
    return out;
}

}  // namespace hom

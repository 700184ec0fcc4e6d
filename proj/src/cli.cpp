#include "hom/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hom/errors.hpp"
#include "hom/forecast_eval.hpp"
#include "hom/gof_tests.hpp"
#include "hom/rng.hpp"
#include "hom/simulate.hpp"

namespace hom::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// An error annotated with the pipeline stage that raised it.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what) : Error(what), stage_(std::move(stage)) {}
    [[nodiscard]] const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

template <typename F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + path.string());
    out << content;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_output(const PipelineConfig& config) {
    const fs::path dir = config.output_dir;
    fs::create_directories(dir);
    write_json(dir / "config.json", json(config));
    return dir;
}

Date date_from_json(const json& j) {
    Date d;
    if (!parse_date(j.get<std::string>(), "%Y-%m-%d", d)) {
        throw ConfigError("invalid date '" + j.get<std::string>() + "' (expected YYYY-MM-DD)");
    }
    return d;
}

json interval_json(const Interval& iv) { return json::array({iv.low, iv.high}); }
Interval interval_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

PriceSeries load_series(const PipelineConfig& config) {
    return in_stage("ingest", [&] {
        if (config.input.empty()) throw ConfigError("no input file given (--input)");
        return read_csv_file(config.input, config.schema);
    });
}

ModelParams load_params(const std::string& path, const char* what) {
    return in_stage("params", [&] {
        if (path.empty()) throw ConfigError(std::string("no ") + what + " parameter file given");
        return json::parse(read_text(path)).get<ModelParams>();
    });
}

/// Exclusion ranges of the full series: configured date ranges plus, when
/// enabled, detected frozen runs.
std::vector<IndexRange> exclusion_ranges(const PriceSeries& series, const PipelineConfig& config) {
    auto ranges = date_ranges_to_indices(series, config.exclusions);
    if (config.auto_exclude_min_run > 0) {
        const auto frozen = detect_frozen_runs(series, config.auto_exclude_min_run);
        ranges.insert(ranges.end(), frozen.begin(), frozen.end());
    }
    std::sort(ranges.begin(), ranges.end(),
              [](const IndexRange& l, const IndexRange& r) { return l.first < r.first; });
    return ranges;
}

SeriesSplit split_of(const PriceSeries& series, const PipelineConfig& config) {
    return in_stage("split", [&] { return split_series(series, {config.history_len, config.train_frac}); });
}

std::vector<double> known_prices(const SeriesSplit& split) {
    auto known = split.history.prices();
    const auto train = split.train.prices();
    known.insert(known.end(), train.begin(), train.end());
    return known;
}

/// Start state for simulate/goftest: end of training if data is given,
/// otherwise a flat history at the anchor.
HistoryWindow start_window(const PipelineConfig& config, const ModelParams& params) {
    if (!config.input.empty()) {
        const auto split = split_of(load_series(config), config);
        const auto known = known_prices(split);
        return in_stage("simulate", [&] { return HistoryWindow::ending_at(known, known.size() - 1, params.tau); });
    }
    if (!config.anchor) {
        throw StageError("simulate", "need --input or --anchor to define the start state");
    }
    return HistoryWindow{std::vector<double>(params.tau, *config.anchor), *config.anchor};
}

ForecastEnsemble read_ensemble_csv(const std::string& path) {
    const auto text = read_text(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error("ensemble file is empty: " + path);
    ForecastEnsemble ens;
    {
        std::istringstream header(line);
        std::string cell;
        std::getline(header, cell, ',');
        bool first = true;
        while (std::getline(header, cell, ',')) {
            if (first && cell.rfind("step_", 0) == 0) {
                ens.start_step = std::stoul(cell.substr(5)) - 1;
            }
            first = false;
            ++ens.horizon;
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        std::size_t cols = 0;
        while (std::getline(row, cell, ',')) {
            ens.values.push_back(std::stod(cell));
            ++cols;
        }
        if (cols != ens.horizon) throw Error("ragged ensemble row in " + path);
        ++ens.n_paths;
    }
    if (ens.n_paths == 0 || ens.horizon == 0) throw Error("ensemble file has no data: " + path);
    return ens;
}

std::vector<double> read_forecast_column(const std::string& path) {
    const auto text = read_text(path);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
        std::istringstream h(line);
        std::string cell;
        while (std::getline(h, cell, ',')) header.push_back(cell);
    }
    const auto it = std::find(header.begin(), header.end(), "forecast");
    if (it == header.end()) throw SchemaError("forecast file needs a 'forecast' column: " + path);
    const auto col = static_cast<std::size_t>(it - header.begin());
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        for (std::size_t k = 0; k <= col; ++k) std::getline(row, cell, ',');
        values.push_back(std::stod(cell));
    }
    return values;
}

json fit_json(const PipelineFit& pf) {
    const auto& f = pf.fit;
    const auto& box = pf.init.box;
    return {{"params", f.params},
            {"initial_guess", {{"a0", pf.init.a0}, {"b0", pf.init.b0}, {"sigma0", pf.init.sigma0}, {"tau0", pf.init.tau0}}},
            {"search_box",
             {{"a", interval_json(box.a)},
              {"b", interval_json(box.b)},
              {"sigma", interval_json(box.sigma)},
              {"tau", json::array({box.tau_low, box.tau_high})}}},
            {"initial_loglik", f.initial_loglik},
            {"final_loglik", f.final_loglik},
            {"sweeps", f.sweeps},
            {"converged", f.converged},
            {"a_positive", f.params.a > 0.0},
            {"split",
             {{"history", pf.split.history.size()},
              {"train", pf.split.train.size()},
              {"validation", pf.split.validation.size()}}}};
}

std::string mean_path_csv(const std::vector<double>& mean, const PriceSeries& validation) {
    std::string out = "step,date,mean\n";
    char buf[64];
    for (std::size_t t = 0; t < mean.size(); ++t) {
        out += std::to_string(t + 1) + ',';
        if (t < validation.size()) out += format_date(validation.observations[t].date);
        std::snprintf(buf, sizeof buf, ",%.17g\n", mean[t]);
        out += buf;
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config serialization

void to_json(json& j, const PipelineConfig& c) {
    json bounds = json::object();
    if (c.bounds.a) bounds["a"] = interval_json(*c.bounds.a);
    if (c.bounds.b) bounds["b"] = interval_json(*c.bounds.b);
    if (c.bounds.sigma) bounds["sigma"] = interval_json(*c.bounds.sigma);
    if (c.bounds.tau) bounds["tau"] = json::array({c.bounds.tau->first, c.bounds.tau->second});
    json exclusions = json::array();
    for (const auto& [from, to] : c.exclusions) exclusions.push_back({format_date(from), format_date(to)});

    j = json{{"command", c.command},
             {"input", c.input},
             {"schema",
              {{"date_column", c.schema.date_column},
               {"price_column", c.schema.price_column},
               {"date_format", c.schema.date_format},
               {"delimiter", std::string(1, c.schema.delimiter)}}},
             {"history_len", c.history_len},
             {"train_frac", c.train_frac},
             {"bounds", bounds},
             {"tol", c.tol},
             {"max_sweeps", c.max_sweeps},
             {"variance_floor", c.variance_floor},
             {"model", c.model},
             {"n_paths", c.n_paths},
             {"seed", c.seed},
             {"exclusions", exclusions},
             {"exclude_from_likelihood", c.exclude_from_likelihood},
             {"auto_exclude_min_run", c.auto_exclude_min_run},
             {"frozen_min_run", c.frozen_min_run},
             {"gof_steps", c.gof_steps},
             {"n_bins", c.n_bins},
             {"horizon", c.horizon},
             {"trace", c.trace},
             {"write_paths", c.write_paths},
             {"params_path", c.params_path},
             {"markov_params_path", c.markov_params_path},
             {"forecast_path", c.forecast_path},
             {"ensemble_path", c.ensemble_path},
             {"anchor", c.anchor ? json(*c.anchor) : json(nullptr)},
             {"output_dir", c.output_dir}};
}

void from_json(const json& j, PipelineConfig& c) {
    static const std::vector<std::string> known = {
        "command", "input", "schema", "history_len", "train_frac", "bounds", "tol", "max_sweeps",
        "variance_floor", "model", "n_paths", "seed", "exclusions", "exclude_from_likelihood",
        "auto_exclude_min_run", "frozen_min_run", "gof_steps", "n_bins", "horizon", "trace", "write_paths",
        "params_path", "markov_params_path", "forecast_path", "ensemble_path", "anchor", "output_dir"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    const PipelineConfig d;
    c.command = j.value("command", d.command);
    c.input = j.value("input", d.input);
    if (j.contains("schema")) {
        const auto& s = j.at("schema");
        c.schema.date_column = s.value("date_column", d.schema.date_column);
        c.schema.price_column = s.value("price_column", d.schema.price_column);
        c.schema.date_format = s.value("date_format", d.schema.date_format);
        const auto delim = s.value("delimiter", std::string(1, d.schema.delimiter));
        if (delim.size() != 1) throw ConfigError("delimiter must be a single character");
        c.schema.delimiter = delim.front();
    }
    c.history_len = j.value("history_len", d.history_len);
    c.train_frac = j.value("train_frac", d.train_frac);
    c.bounds = {};
    if (j.contains("bounds")) {
        const auto& b = j.at("bounds");
        if (b.contains("a")) c.bounds.a = interval_from(b.at("a"));
        if (b.contains("b")) c.bounds.b = interval_from(b.at("b"));
        if (b.contains("sigma")) c.bounds.sigma = interval_from(b.at("sigma"));
        if (b.contains("tau")) {
            c.bounds.tau = std::pair{b.at("tau").at(0).get<std::size_t>(), b.at("tau").at(1).get<std::size_t>()};
        }
    }
    c.tol = j.value("tol", d.tol);
    c.max_sweeps = j.value("max_sweeps", d.max_sweeps);
    c.variance_floor = j.value("variance_floor", d.variance_floor);
    c.model = j.value("model", d.model);
    c.n_paths = j.value("n_paths", d.n_paths);
    c.seed = j.value("seed", d.seed);
    c.exclusions.clear();
    if (j.contains("exclusions")) {
        for (const auto& pair : j.at("exclusions")) {
            c.exclusions.emplace_back(date_from_json(pair.at(0)), date_from_json(pair.at(1)));
        }
    }
    c.exclude_from_likelihood = j.value("exclude_from_likelihood", d.exclude_from_likelihood);
    c.auto_exclude_min_run = j.value("auto_exclude_min_run", d.auto_exclude_min_run);
    c.frozen_min_run = j.value("frozen_min_run", d.frozen_min_run);
    c.gof_steps = j.value("gof_steps", d.gof_steps);
    c.n_bins = j.value("n_bins", d.n_bins);
    c.horizon = j.value("horizon", d.horizon);
    c.trace = j.value("trace", d.trace);
    c.write_paths = j.value("write_paths", d.write_paths);
    c.params_path = j.value("params_path", d.params_path);
    c.markov_params_path = j.value("markov_params_path", d.markov_params_path);
    c.forecast_path = j.value("forecast_path", d.forecast_path);
    c.ensemble_path = j.value("ensemble_path", d.ensemble_path);
    c.anchor = (j.contains("anchor") && !j.at("anchor").is_null()) ? std::optional(j.at("anchor").get<double>())
                                                                    : std::nullopt;
    c.output_dir = j.value("output_dir", d.output_dir);
}

PipelineConfig load_config(const std::string& path) {
    return in_stage("config", [&] { return json::parse(read_text(path)).get<PipelineConfig>(); });
}

// ---------------------------------------------------------------------------
// Commands

void cmd_fit(const PipelineConfig& config, const RunOptions&) {
    const auto series = load_series(config);
    const auto kind = in_stage("config", [&] { return model_kind_from_string(config.model); });

    FitConfig fc;
    fc.split = {config.history_len, config.train_frac};
    fc.kind = kind;
    fc.bounds = config.bounds;
    if (kind == ModelKind::Markov) fc.bounds.tau = std::pair<std::size_t, std::size_t>{0, 0};
    fc.ascent = {config.tol, config.max_sweeps};
    fc.variance_floor = config.variance_floor;
    if (config.exclude_from_likelihood) fc.likelihood_exclusions = exclusion_ranges(series, config);

    const auto pf = in_stage("fit", [&] { return fit_pipeline(series, fc); });

    const auto dir = prepare_output(config);
    write_json(dir / "params.json", json(pf.fit.params));
    write_json(dir / "fit.json", fit_json(pf));
    if (config.trace) {
        json trace = json::array();
        for (std::size_t k = 0; k < pf.fit.trace.size(); ++k) {
            trace.push_back({{"sweep", k}, {"params", pf.fit.trace[k].params},
                             {"loglik", pf.fit.trace[k].log_likelihood}});
        }
        write_json(dir / "trace.json", trace);
    }
}

void cmd_forecast(const PipelineConfig& config, const RunOptions& options) {
    const auto params = load_params(config.params_path, "model");
    const auto series = load_series(config);
    const auto split = split_of(series, config);

    const auto ensemble = in_stage("forecast", [&] {
        const auto known = known_prices(split);
        SimConfig sim;
        sim.horizon = config.horizon > 0 ? config.horizon : split.validation.size();
        sim.n_paths = config.n_paths;
        sim.seed = derive_seed(config.seed, "forecast");
        sim.threads = options.threads;
        return simulate_paths(params, HistoryWindow::ending_at(known, known.size() - 1, params.tau), sim);
    });

    const auto dir = prepare_output(config);
    write_text(dir / "mean_path.csv", mean_path_csv(mean_path(ensemble), split.validation));
    write_text(dir / "summary.csv", ensemble_summary_csv(ensemble));
    if (config.write_paths) write_text(dir / "ensemble.csv", ensemble_to_csv(ensemble));
}

void cmd_evaluate(const PipelineConfig& config, const RunOptions& options) {
    const auto series = load_series(config);
    const auto split = split_of(series, config);
    const auto realized = split.validation.prices();
    const auto mask = to_validation_ranges(split, exclusion_ranges(series, config));
    const auto seed = derive_seed(config.seed, "forecast");

    if (!config.forecast_path.empty()) {
        const auto forecast = in_stage("forecast", [&] { return read_forecast_column(config.forecast_path); });
        const auto report = in_stage("evaluate", [&] { return error_metrics(forecast, realized, mask); });
        const auto dir = prepare_output(config);
        write_text(dir / "metrics.csv", metrics_table_csv({{"Forecast", report}}));
        write_json(dir / "comparison.json", {{"forecast", report_to_json(report)}});
        return;
    }

    const auto hom_params = load_params(config.params_path, "HOM");
    const auto markov_params = load_params(config.markov_params_path, "Markov");
    auto score = [&](const ModelParams& p) {
        const auto ens = in_stage("forecast", [&] { return forecast_validation(p, split, config.n_paths, seed, options.threads); });
        auto mean = mean_path(ens);
        auto report = in_stage("evaluate", [&] { return error_metrics(mean, realized, mask); });
        return std::pair{std::move(mean), std::move(report)};
    };
    const auto [hom_mean, hom_report] = score(hom_params);
    const auto [markov_mean, markov_report] = score(markov_params);

    const auto dir = prepare_output(config);
    write_text(dir / "metrics.csv", metrics_table_csv({{"HOM", hom_report}, {"Markov", markov_report}}));
    write_text(dir / "forecast_plot.csv", forecast_plot_csv(split.validation, hom_mean, markov_mean));
    write_json(dir / "comparison.json",
               {{"seed", seed},
                {"n_paths", config.n_paths},
                {"HOM", {{"params", hom_params}, {"metrics", report_to_json(hom_report)}}},
                {"Markov", {{"params", markov_params}, {"metrics", report_to_json(markov_report)}}},
                {"hom_lower_rmse", hom_report.rmse < markov_report.rmse}});
}

void cmd_goftest(const PipelineConfig& config, const RunOptions& options) {
    if (config.gof_steps.empty()) throw StageError("config", "no horizon steps given for the tests");
    ForecastEnsemble ensemble;
    if (!config.ensemble_path.empty()) {
        ensemble = in_stage("ingest", [&] { return read_ensemble_csv(config.ensemble_path); });
    } else {
        const auto params = load_params(config.params_path, "model");
        const auto start = start_window(config, params);
        ensemble = in_stage("simulate", [&] {
            SimConfig sim;
            sim.horizon = *std::max_element(config.gof_steps.begin(), config.gof_steps.end());
            sim.n_paths = config.n_paths;
            sim.seed = derive_seed(config.seed, "goftest");
            sim.threads = options.threads;
            return simulate_paths(params, start, sim);
        });
    }

    std::vector<GofResult> ks, ad;
    std::vector<std::pair<std::size_t, LogHistogram>> histograms;
    in_stage("goftest", [&] {
        for (const auto step : config.gof_steps) {
            if (step <= ensemble.start_step || step - ensemble.start_step > ensemble.horizon) {
                throw Error("step " + std::to_string(step) + " is outside the ensemble");
            }
            const auto column = ensemble.column(step - ensemble.start_step - 1);
            ks.push_back(ks_lognormal(column, step));
            ad.push_back(ad_lognormal(column, step));
            histograms.emplace_back(step, distribution_export(ensemble, step - ensemble.start_step, config.n_bins));
        }
        return 0;
    });

    const auto dir = prepare_output(config);
    write_text(dir / "ks.csv", ks_table_csv(ks));
    write_text(dir / "ad.csv", ad_table_csv(ad));
    for (const auto& [step, h] : histograms) {
        write_text(dir / ("histogram_" + std::to_string(step) + ".csv"), histogram_csv(h));
    }
    json rows = json::array();
    for (std::size_t k = 0; k < ks.size(); ++k) {
        rows.push_back({{"step", ks[k].horizon_step},
                        {"ks_statistic", ks[k].statistic},
                        {"ks_p_value", *ks[k].p_value},
                        {"ks_reject_at_pct", ks[k].reject_at},
                        {"ad_statistic", ad[k].statistic},
                        {"ad_reject_at_pct", ad[k].reject_at}});
    }
    write_json(dir / "gof.json", {{"n_paths", ensemble.n_paths}, {"rows", rows}});
}

void cmd_simulate(const PipelineConfig& config, const RunOptions& options) {
    const auto params = load_params(config.params_path, "model");
    const auto start = start_window(config, params);
    std::size_t horizon = config.horizon;
    if (horizon == 0 && !config.input.empty()) horizon = split_of(load_series(config), config).validation.size();
    if (horizon == 0) throw StageError("config", "simulate needs --horizon");

    const auto ensemble = in_stage("simulate", [&] {
        SimConfig sim;
        sim.horizon = horizon;
        sim.n_paths = config.n_paths;
        sim.seed = derive_seed(config.seed, "simulate");
        sim.threads = options.threads;
        return simulate_paths(params, start, sim);
    });

    const auto dir = prepare_output(config);
    if (config.write_paths) {
        write_text(dir / "ensemble.csv", ensemble_to_csv(ensemble));
    } else {
        write_text(dir / "summary.csv", ensemble_summary_csv(ensemble));
    }
}

void cmd_detect_frozen(const PipelineConfig& config, const RunOptions&) {
    const auto series = load_series(config);
    const auto runs = in_stage("detect", [&] {
        if (config.frozen_min_run < 2) throw ConfigError("min run must be at least 2");
        return detect_frozen_runs(series, config.frozen_min_run);
    });
    json out = json::array();
    std::string csv = "first,last,length,from,to,price\n";
    char buf[64];
    for (const auto& r : runs) {
        const auto& from = series.observations[r.first];
        const auto& to = series.observations[r.last];
        out.push_back({{"first", r.first}, {"last", r.last}, {"length", r.length()},
                       {"from", format_date(from.date)}, {"to", format_date(to.date)}, {"price", from.price}});
        std::snprintf(buf, sizeof buf, "%.17g", from.price);
        csv += std::to_string(r.first) + ',' + std::to_string(r.last) + ',' + std::to_string(r.length()) + ',' +
               format_date(from.date) + ',' + format_date(to.date) + ',' + buf + '\n';
    }
    const auto dir = prepare_output(config);
    write_json(dir / "frozen.json", {{"min_run", config.frozen_min_run}, {"runs", out}});
    write_text(dir / "frozen.csv", csv);
}

// ---------------------------------------------------------------------------
// Argument parsing

namespace {

/// A flag that overrides one config field when given on the command line.
using Override = std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>;

struct Flags {
    std::string config_path;
    PipelineConfig v;  // flag storage only
    std::vector<std::string> exclusions;
    std::vector<double> a_bounds, b_bounds, sigma_bounds;
    std::vector<std::size_t> tau_bounds;
    std::string delimiter;
    unsigned threads = 1;
};

std::vector<Override> add_common_flags(CLI::App* app, Flags& f) {
    std::vector<Override> o;
    app->add_option("-c,--config", f.config_path, "JSON config file (flags override its values)");
    app->add_option("--threads", f.threads, "Worker threads for simulation (does not change results)");
    o.emplace_back(app->add_option("-i,--input", f.v.input, "Spot-price CSV"),
                   [&f](PipelineConfig& c) { c.input = f.v.input; });
    o.emplace_back(app->add_option("-o,--output", f.v.output_dir, "Output directory"),
                   [&f](PipelineConfig& c) { c.output_dir = f.v.output_dir; });
    o.emplace_back(app->add_option("--date-column", f.v.schema.date_column, "Date column name"),
                   [&f](PipelineConfig& c) { c.schema.date_column = f.v.schema.date_column; });
    o.emplace_back(app->add_option("--price-column", f.v.schema.price_column, "Price column name"),
                   [&f](PipelineConfig& c) { c.schema.price_column = f.v.schema.price_column; });
    o.emplace_back(app->add_option("--date-format", f.v.schema.date_format, "strptime date format"),
                   [&f](PipelineConfig& c) { c.schema.date_format = f.v.schema.date_format; });
    o.emplace_back(app->add_option("--delimiter", f.delimiter, "Field delimiter (one character)"),
                   [&f](PipelineConfig& c) {
                       if (f.delimiter.size() != 1) throw ConfigError("delimiter must be a single character");
                       c.schema.delimiter = f.delimiter.front();
                   });
    o.emplace_back(app->add_option("--history", f.v.history_len, "Leading observations kept as delay history"),
                   [&f](PipelineConfig& c) { c.history_len = f.v.history_len; });
    o.emplace_back(app->add_option("--train-frac", f.v.train_frac, "Training fraction of the remainder"),
                   [&f](PipelineConfig& c) { c.train_frac = f.v.train_frac; });
    o.emplace_back(app->add_option("--seed", f.v.seed, "Master random seed"),
                   [&f](PipelineConfig& c) { c.seed = f.v.seed; });
    o.emplace_back(app->add_option("--paths", f.v.n_paths, "Monte-Carlo paths"),
                   [&f](PipelineConfig& c) { c.n_paths = f.v.n_paths; });
    o.emplace_back(app->add_option("--exclude", f.exclusions, "Excluded date range FROM:TO (repeatable)"),
                   [&f](PipelineConfig& c) {
                       c.exclusions.clear();
                       for (const auto& text : f.exclusions) {
                           const auto colon = text.find(':');
                           Date from, to;
                           if (colon == std::string::npos || !parse_date(text.substr(0, colon), "%Y-%m-%d", from) ||
                               !parse_date(text.substr(colon + 1), "%Y-%m-%d", to)) {
                               throw ConfigError("bad exclusion range '" + text + "' (expected YYYY-MM-DD:YYYY-MM-DD)");
                           }
                           c.exclusions.emplace_back(from, to);
                       }
                   });
    o.emplace_back(app->add_option("--auto-exclude-frozen", f.v.auto_exclude_min_run,
                                   "Also exclude frozen runs of at least this length"),
                   [&f](PipelineConfig& c) { c.auto_exclude_min_run = f.v.auto_exclude_min_run; });
    return o;
}

void add_param_flag(CLI::App* app, Flags& f, std::vector<Override>& o) {
    o.emplace_back(app->add_option("-p,--params", f.v.params_path, "Model parameter JSON"),
                   [&f](PipelineConfig& c) { c.params_path = f.v.params_path; });
}

void add_horizon_flag(CLI::App* app, Flags& f, std::vector<Override>& o) {
    o.emplace_back(app->add_option("--horizon", f.v.horizon, "Simulated steps (default: validation length)"),
                   [&f](PipelineConfig& c) { c.horizon = f.v.horizon; });
}

void add_paths_csv_flag(CLI::App* app, Flags& f, std::vector<Override>& o) {
    o.emplace_back(app->add_flag("--write-paths", f.v.write_paths, "Write every simulated path"),
                   [](PipelineConfig& c) { c.write_paths = true; });
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Delayed mean-reversion commodity price model: fit, forecast, evaluate"};
    app.require_subcommand(1);
    Flags f;

    struct Sub {
        CLI::App* app;
        std::vector<Override> overrides;
        void (*command)(const PipelineConfig&, const RunOptions&);
    };
    std::vector<Sub> subs;

    {
        auto* s = app.add_subcommand("fit", "Estimate model parameters from a price series");
        auto o = add_common_flags(s, f);
        o.emplace_back(s->add_option("--model", f.v.model, "HOM or Markov")->check(CLI::IsMember({"HOM", "Markov"})),
                       [&f](PipelineConfig& c) { c.model = f.v.model; });
        o.emplace_back(s->add_option("--tol", f.v.tol, "Relative improvement to stop"),
                       [&f](PipelineConfig& c) { c.tol = f.v.tol; });
        o.emplace_back(s->add_option("--max-sweeps", f.v.max_sweeps, "Coordinate-ascent sweep limit"),
                       [&f](PipelineConfig& c) { c.max_sweeps = f.v.max_sweeps; });
        o.emplace_back(s->add_option("--variance-floor", f.v.variance_floor, "Lower bound on transition variance"),
                       [&f](PipelineConfig& c) { c.variance_floor = f.v.variance_floor; });
        o.emplace_back(s->add_option("--a-bounds", f.a_bounds, "LOW HIGH")->expected(2),
                       [&f](PipelineConfig& c) { c.bounds.a = Interval{f.a_bounds[0], f.a_bounds[1]}; });
        o.emplace_back(s->add_option("--b-bounds", f.b_bounds, "LOW HIGH")->expected(2),
                       [&f](PipelineConfig& c) { c.bounds.b = Interval{f.b_bounds[0], f.b_bounds[1]}; });
        o.emplace_back(s->add_option("--sigma-bounds", f.sigma_bounds, "LOW HIGH")->expected(2),
                       [&f](PipelineConfig& c) { c.bounds.sigma = Interval{f.sigma_bounds[0], f.sigma_bounds[1]}; });
        o.emplace_back(s->add_option("--tau-bounds", f.tau_bounds, "LOW HIGH")->expected(2),
                       [&f](PipelineConfig& c) { c.bounds.tau = std::pair{f.tau_bounds[0], f.tau_bounds[1]}; });
        o.emplace_back(s->add_flag("--exclude-likelihood", f.v.exclude_from_likelihood,
                                   "Drop excluded ranges from the likelihood as well"),
                       [](PipelineConfig& c) { c.exclude_from_likelihood = true; });
        o.emplace_back(s->add_flag("--trace", f.v.trace, "Write the per-sweep trace"),
                       [](PipelineConfig& c) { c.trace = true; });
        subs.push_back({s, std::move(o), cmd_fit});
    }
    {
        auto* s = app.add_subcommand("forecast", "Monte-Carlo mean-path forecast over the validation window");
        auto o = add_common_flags(s, f);
        add_param_flag(s, f, o);
        add_horizon_flag(s, f, o);
        add_paths_csv_flag(s, f, o);
        subs.push_back({s, std::move(o), cmd_forecast});
    }
    {
        auto* s = app.add_subcommand("evaluate", "Error metrics of HOM and Markov forecasts");
        auto o = add_common_flags(s, f);
        o.emplace_back(s->add_option("--hom", f.v.params_path, "HOM parameter JSON"),
                       [&f](PipelineConfig& c) { c.params_path = f.v.params_path; });
        o.emplace_back(s->add_option("--markov", f.v.markov_params_path, "Markov parameter JSON"),
                       [&f](PipelineConfig& c) { c.markov_params_path = f.v.markov_params_path; });
        o.emplace_back(s->add_option("--forecast", f.v.forecast_path, "Score a CSV with a 'forecast' column instead"),
                       [&f](PipelineConfig& c) { c.forecast_path = f.v.forecast_path; });
        subs.push_back({s, std::move(o), cmd_evaluate});
    }
    {
        auto* s = app.add_subcommand("goftest", "Kolmogorov-Smirnov and Anderson-Darling log-normality tests");
        auto o = add_common_flags(s, f);
        add_param_flag(s, f, o);
        o.emplace_back(s->add_option("--ensemble", f.v.ensemble_path, "Ensemble CSV from 'simulate --write-paths'"),
                       [&f](PipelineConfig& c) { c.ensemble_path = f.v.ensemble_path; });
        o.emplace_back(s->add_option("--steps", f.v.gof_steps, "Horizon steps to test"),
                       [&f](PipelineConfig& c) { c.gof_steps = f.v.gof_steps; });
        o.emplace_back(s->add_option("--bins", f.v.n_bins, "Histogram bins"),
                       [&f](PipelineConfig& c) { c.n_bins = f.v.n_bins; });
        o.emplace_back(s->add_option("--anchor", f.v.anchor, "Start price when no input is given"),
                       [&f](PipelineConfig& c) { c.anchor = f.v.anchor; });
        subs.push_back({s, std::move(o), cmd_goftest});
    }
    {
        auto* s = app.add_subcommand("simulate", "Generate a raw ensemble");
        auto o = add_common_flags(s, f);
        add_param_flag(s, f, o);
        add_horizon_flag(s, f, o);
        add_paths_csv_flag(s, f, o);
        o.emplace_back(s->add_option("--anchor", f.v.anchor, "Start price when no input is given"),
                       [&f](PipelineConfig& c) { c.anchor = f.v.anchor; });
        subs.push_back({s, std::move(o), cmd_simulate});
    }
    {
        auto* s = app.add_subcommand("detect-frozen", "List runs of unchanged prices");
        auto o = add_common_flags(s, f);
        o.emplace_back(s->add_option("--min-run", f.v.frozen_min_run, "Minimum run length"),
                       [&f](PipelineConfig& c) { c.frozen_min_run = f.v.frozen_min_run; });
        subs.push_back({s, std::move(o), cmd_detect_frozen});
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    for (const auto& sub : subs) {
        if (!sub.app->parsed()) continue;
        try {
            PipelineConfig config = f.config_path.empty() ? PipelineConfig{} : load_config(f.config_path);
            for (const auto& [option, apply] : sub.overrides) {
                if (option->count() > 0) in_stage("config", [&] { apply(config); return 0; });
            }
            config.command = sub.app->get_name();
            sub.command(config, RunOptions{std::max(1u, f.threads)});
            return 0;
        } catch (const StageError& e) {
            std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
        } catch (const std::exception& e) {
            std::cerr << "error [output]: " << e.what() << '\n';
        }
        return 1;
    }
    return 1;
}

}  // namespace hom::cli

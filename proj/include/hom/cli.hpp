#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hom/calibrate.hpp"
#include "hom/data_ingest.hpp"

namespace hom::cli {

/// Everything that determines a run's outputs. The merged (defaults <- config
/// file <- flags) value is written to <output_dir>/config.json; feeding that
/// file back with --config reproduces the run.
struct PipelineConfig {
    std::string command;
    std::string input;
    CsvSchema schema;
    std::size_t history_len = 400;
    double train_frac = 0.8;
    SearchBoxOverride bounds;
    double tol = 1e-8;
    std::size_t max_sweeps = 100;
    double variance_floor = 1e-12;
    std::string model = "HOM";  // fit: HOM or Markov
    std::size_t n_paths = 2000;
    std::uint64_t seed = 0;
    std::vector<std::pair<Date, Date>> exclusions;
    bool exclude_from_likelihood = false;
    std::size_t auto_exclude_min_run = 0;  // 0 = off
    std::size_t frozen_min_run = 5;        // detect-frozen
    std::vector<std::size_t> gof_steps = {90, 150, 210};
    std::size_t n_bins = 40;
    std::size_t horizon = 0;  // 0 = validation length
    bool trace = false;
    bool write_paths = false;  // forecast/simulate: full ensemble CSV
    std::string params_path;         // forecast, goftest, simulate
    std::string markov_params_path;  // evaluate
    std::string forecast_path;       // evaluate: score a given forecast column
    std::string ensemble_path;       // goftest: read an ensemble CSV
    std::optional<double> anchor;    // simulate without input data
    std::string output_dir = "out";
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);

PipelineConfig load_config(const std::string& path);

/// Runtime knobs that must not change any output.
struct RunOptions {
    unsigned threads = 1;
};

// Each command writes its outputs plus config.json into config.output_dir and
// throws hom::Error on failure.
void cmd_fit(const PipelineConfig& config, const RunOptions& options = {});
void cmd_forecast(const PipelineConfig& config, const RunOptions& options = {});
void cmd_evaluate(const PipelineConfig& config, const RunOptions& options = {});
void cmd_goftest(const PipelineConfig& config, const RunOptions& options = {});
void cmd_simulate(const PipelineConfig& config, const RunOptions& options = {});
void cmd_detect_frozen(const PipelineConfig& config, const RunOptions& options = {});

/// Parses argv, runs the selected subcommand, and returns the process exit
/// code. Errors are reported on stderr as "error [<stage>]: <message>".
int run(int argc, const char* const* argv);

}  // namespace hom::cli

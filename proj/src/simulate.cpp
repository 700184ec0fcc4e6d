#include "hom/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "hom/errors.hpp"
#include "hom/rng.hpp"

namespace hom {

namespace {

void check_window(const HistoryWindow& w, std::size_t tau) {
    if (w.values.size() != tau) {
        throw HistoryMismatch("history window holds " + std::to_string(w.values.size()) +
                              " prices but tau = " + std::to_string(tau));
    }
    if (!std::isfinite(w.anchor) ||
        !std::all_of(w.values.begin(), w.values.end(), [](double v) { return std::isfinite(v); })) {
        throw HistoryMismatch("history window contains non-finite prices");
    }
}

// Fills one row. The ring buffer holds the last tau + 1 states with the
// oldest (the lagged price) at `head`.
void simulate_one(const ModelParams& params, const HistoryWindow& start, std::uint64_t seed,
                  std::uint64_t path_index, std::size_t start_step, std::span<double> out) {
    const std::size_t width = params.tau + 1;
    std::vector<double> ring(width);
    std::copy(start.values.begin(), start.values.end(), ring.begin());
    ring[params.tau] = start.anchor;
    std::size_t head = 0;
    double current = start.anchor;
    for (std::size_t t = 0; t < out.size(); ++t) {
        const double lagged = ring[head];
        const double noise = standard_normal(seed, path_index, start_step + t);
        current = step(params, current, lagged, noise);
        ring[head] = current;
        head = (head + 1 == width) ? 0 : head + 1;
        out[t] = current;
    }
}

ForecastEnsemble run(const std::vector<HistoryWindow>& starts, const ModelParams& params,
                     const SimConfig& config, std::size_t start_step) {
    params.validate();
    if (config.horizon == 0 || config.n_paths == 0) {
        throw Error("simulation needs horizon >= 1 and n_paths >= 1");
    }
    for (const auto& w : starts) check_window(w, params.tau);

    ForecastEnsemble ens;
    ens.n_paths = config.n_paths;
    ens.horizon = config.horizon;
    ens.start_step = start_step;
    ens.seed = config.seed;
    ens.params = params;
    ens.values.resize(config.n_paths * config.horizon);

    auto work = [&](std::size_t first, std::size_t last) {
        for (std::size_t p = first; p < last; ++p) {
            const auto& w = starts.size() == 1 ? starts.front() : starts[p];
            simulate_one(params, w, config.seed, p, start_step,
                         std::span<double>(ens.values.data() + p * ens.horizon, ens.horizon));
        }
    };

    const std::size_t n_threads = std::clamp<std::size_t>(config.threads, 1, config.n_paths);
    if (n_threads == 1) {
        work(0, config.n_paths);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (config.n_paths + n_threads - 1) / n_threads;
        for (std::size_t first = 0; first < config.n_paths; first += chunk) {
            pool.emplace_back(work, first, std::min(first + chunk, config.n_paths));
        }
    }

    for (const double v : ens.values) {
        if (!std::isfinite(v)) {
            throw Error("simulation diverged to a non-finite price");
        }
    }
    return ens;
}

}  // namespace

std::vector<double> ForecastEnsemble::column(std::size_t t) const {
    std::vector<double> col(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) col[p] = at(p, t);
    return col;
}

ForecastEnsemble simulate_paths(const ModelParams& params, const HistoryWindow& history,
                                const SimConfig& config) {
    return run({history}, params, config, 0);
}

ForecastEnsemble resume_simulation(const std::vector<HistoryWindow>& tails, const ModelParams& params,
                                   const SimConfig& config, std::size_t start_step) {
    if (tails.size() != config.n_paths) {
        throw HistoryMismatch("expected one tail window per path (" + std::to_string(config.n_paths) +
                              "), got " + std::to_string(tails.size()));
    }
    return run(tails, params, config, start_step);
}

HistoryWindow tail_window(const ForecastEnsemble& ensemble, const HistoryWindow& start, std::size_t path,
                          std::size_t steps) {
    if (steps > ensemble.horizon) {
        throw HistoryMismatch("requested state beyond the simulated horizon");
    }
    // Full trajectory: start.values, anchor, then the first `steps` simulated prices.
    std::vector<double> trajectory(start.values);
    trajectory.push_back(start.anchor);
    const auto row = ensemble.path(path);
    trajectory.insert(trajectory.end(), row.begin(), row.begin() + static_cast<std::ptrdiff_t>(steps));
    return HistoryWindow::ending_at(trajectory, trajectory.size() - 1, ensemble.params.tau);
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) return NAN;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::string ensemble_to_csv(const ForecastEnsemble& ens) {
    std::string out = "path";
    for (std::size_t t = 0; t < ens.horizon; ++t) out += ",step_" + std::to_string(ens.start_step + t + 1);
    out += '\n';
    char buf[64];
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
        out += std::to_string(p);
        for (const double v : ens.path(p)) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::string ensemble_summary_csv(const ForecastEnsemble& ens) {
    std::string out = "step,mean,p05,p95\n";
    char buf[160];
    for (std::size_t t = 0; t < ens.horizon; ++t) {
        auto col = ens.column(t);
        double sum = 0.0;
        for (const double v : col) sum += v;
        std::sort(col.begin(), col.end());
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", ens.start_step + t + 1,
                      sum / static_cast<double>(col.size()), quantile_sorted(col, 0.05),
                      quantile_sorted(col, 0.95));
        out += buf;
    }
    return out;
}

}  // namespace hom

#include "hom/synthetic.hpp"

#include "hom/errors.hpp"
#include "hom/simulate.hpp"

namespace hom {

PriceSeries synthetic_series(const ModelParams& params, const HistoryWindow& start, std::size_t n,
                             std::uint64_t seed) {
    const std::size_t lead = start.values.size() + 1;
    if (n <= lead) {
        throw Error("synthetic series must be longer than its start window");
    }
    SimConfig sim;
    sim.horizon = n - lead;
    sim.n_paths = 1;
    sim.seed = seed;
    const auto ens = simulate_paths(params, start, sim);

    std::vector<double> prices(start.values);
    prices.push_back(start.anchor);
    prices.insert(prices.end(), ens.values.begin(), ens.values.end());

    PriceSeries s;
    s.source_label = "synthetic";
    auto day = std::chrono::sys_days{std::chrono::year{2010} / std::chrono::January / 1};
    for (const double p : prices) {
        s.observations.push_back({Date{day}, p});
        day += std::chrono::days{1};
    }
    return s;
}

PriceSeries synthetic_series(const ModelParams& params, std::size_t n, std::uint64_t seed) {
    return synthetic_series(params, {std::vector<double>(params.tau, params.b), params.b}, n, seed);
}

ModelParams delayed_signal_params() { return {0.07, 400.0, 0.004, 20, ModelKind::HOM}; }

PriceSeries delayed_signal_series(std::uint64_t seed) {
    const auto p = delayed_signal_params();
    // Prices held 25% above the level for the whole start window.
    return synthetic_series(p, {std::vector<double>(p.tau, 1.25 * p.b), 1.25 * p.b}, 1000, seed);
}

}  // namespace hom

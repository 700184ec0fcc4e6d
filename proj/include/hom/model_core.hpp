#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace hom {

enum class ModelKind { HOM, Markov };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& text);

/// Constant coefficients of the delayed mean-reversion SDE
///
///     dx(t) = a (b - x(t - tau)) dt + sigma x(t) dw(t)
///
/// on a grid of one observation per step. A Markov model is the tau = 0 case.
struct ModelParams {
    double a = 0.0;      // reversion speed, per step
    double b = 0.0;      // reversion level, price units
    double sigma = 0.0;  // diffusion scale, per sqrt(step)
    std::size_t tau = 0; // delay, steps
    ModelKind kind = ModelKind::HOM;

    static ModelParams markov(double a, double b, double sigma) {
        return {a, b, sigma, 0, ModelKind::Markov};
    }

    /// Throws Error if a Markov model carries a delay, sigma is negative or
    /// any coefficient is not finite.
    void validate() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// The tau prices preceding the start state (oldest first) plus the start
/// price itself. This is everything needed to continue a path.
struct HistoryWindow {
    std::vector<double> values;
    double anchor = 0.0;

    /// Window ending at index `end` of `prices`: values = prices[end-tau, end),
    /// anchor = prices[end]. Throws HistoryMismatch if end < tau.
    static HistoryWindow ending_at(const std::vector<double>& prices, std::size_t end, std::size_t tau);

    friend bool operator==(const HistoryWindow&, const HistoryWindow&) = default;
};

[[nodiscard]] inline double drift(const ModelParams& p, double lagged_price) {
    return p.a * (p.b - lagged_price);
}

[[nodiscard]] inline double diffusion_coeff(const ModelParams& p, double current_price) {
    return p.sigma * current_price;
}

void to_json(nlohmann::json& j, const ModelParams& p);
void from_json(const nlohmann::json& j, ModelParams& p);

}  // namespace hom

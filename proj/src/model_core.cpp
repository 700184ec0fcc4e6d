#include "hom/model_core.hpp"

#include <cmath>

#include "hom/errors.hpp"

namespace hom {

std::string to_string(ModelKind kind) {
    return kind == ModelKind::HOM ? "HOM" : "Markov";
}

ModelKind model_kind_from_string(const std::string& text) {
    if (text == "HOM") return ModelKind::HOM;
    if (text == "Markov") return ModelKind::Markov;
    throw Error("unknown model kind '" + text + "' (expected HOM or Markov)");
}

void ModelParams::validate() const {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(sigma)) {
        throw Error("model coefficients must be finite");
    }
    if (sigma < 0.0) {
        throw Error("sigma must be non-negative");
    }
    if (kind == ModelKind::Markov && tau != 0) {
        throw Error("a Markov model has tau = 0");
    }
}

HistoryWindow HistoryWindow::ending_at(const std::vector<double>& prices, std::size_t end,
                                       std::size_t tau) {
    if (end >= prices.size() || end < tau) {
        throw HistoryMismatch("cannot take a window of " + std::to_string(tau) +
                              " lags ending at index " + std::to_string(end));
    }
    HistoryWindow w;
    w.values.assign(prices.begin() + static_cast<std::ptrdiff_t>(end - tau),
                    prices.begin() + static_cast<std::ptrdiff_t>(end));
    w.anchor = prices[end];
    return w;
}

void to_json(nlohmann::json& j, const ModelParams& p) {
    j = nlohmann::json{{"a", p.a}, {"b", p.b}, {"sigma", p.sigma}, {"tau", p.tau}, {"kind", to_string(p.kind)}};
}

void from_json(const nlohmann::json& j, ModelParams& p) {
    p.a = j.at("a").get<double>();
    p.b = j.at("b").get<double>();
    p.sigma = j.at("sigma").get<double>();
    p.tau = j.at("tau").get<std::size_t>();
    p.kind = model_kind_from_string(j.at("kind").get<std::string>());
    p.validate();
}

}  // namespace hom

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "hom/errors.hpp"
#include "hom/gof_tests.hpp"
#include "hom/rng.hpp"

using namespace hom;

namespace {

std::vector<double> lognormal_grid(std::size_t n, double mu, double s) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::exp(mu + s * inverse_normal_cdf((static_cast<double>(i) + 0.5) / static_cast<double>(n)));
    }
    return x;
}

std::vector<double> log_cauchy(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::cauchy_distribution<double> c(std::log(400.0), 0.05);
    std::vector<double> x(n);
    for (auto& v : x) v = std::exp(c(rng));
    return x;
}

void fit_logs(const std::vector<double>& x, double& m, double& s) {
    m = 0;
    for (const double v : x) m += std::log(v);
    m /= static_cast<double>(x.size());
    s = 0;
    for (const double v : x) s += (std::log(v) - m) * (std::log(v) - m);
    s = std::sqrt(s / static_cast<double>(x.size() - 1));
}

// KS distance by counting: the empirical CDF just below and at each point.
double ks_by_counting(const std::vector<double>& x) {
    double m, s;
    fit_logs(x, m, s);
    const double n = static_cast<double>(x.size());
    double d = 0;
    for (const double v : x) {
        std::size_t below = 0, at_or_below = 0;
        for (const double w : x) {
            below += w < v;
            at_or_below += w <= v;
        }
        const double f = 0.5 * std::erfc(-(std::log(v) - m) / (s * std::numbers::sqrt2));
        d = std::max({d, std::abs(static_cast<double>(at_or_below) / n - f), std::abs(f - static_cast<double>(below) / n)});
    }
    return d;
}

// A^2 from the one-sided sum form: -n - (1/n) sum[(2i-1) ln u_i + (2(n-i)+1) ln(1-u_i)].
double ad_one_sided(std::vector<double> x) {
    double m, s;
    fit_logs(x, m, s);
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double acc = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double i = static_cast<double>(k + 1);
        const double z = (std::log(x[k]) - m) / s;
        const double u = 0.5 * std::erfc(-z / std::numbers::sqrt2);
        const double one_minus_u = 0.5 * std::erfc(z / std::numbers::sqrt2);
        acc += (2 * i - 1) * std::log(u) + (2 * (n - i) + 1) * std::log(one_minus_u);
    }
    return -n - acc / n;
}

ForecastEnsemble gbm(std::size_t paths, std::size_t horizon, std::uint64_t seed) {
    SimConfig c;
    c.horizon = horizon;
    c.n_paths = paths;
    c.seed = seed;
    return simulate_paths({0.0, 0.0, 0.01, 0}, {{}, 400.0}, c);
}

}  // namespace

TEST_CASE("Kolmogorov survival function") {
    CHECK(kolmogorov_survival(0.0) == 1.0);
    CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-4));
    CHECK(kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
    CHECK(kolmogorov_survival(5.0) < 1e-20);

    // The two series representations agree where both converge fast.
    for (double x = 0.6; x < 2.0; x += 0.05) {
        double alt = 0;
        for (int k = 1; k < 200; ++k) alt += 2 * ((k % 2) ? 1 : -1) * std::exp(-2.0 * k * k * x * x);
        CHECK(kolmogorov_survival(x) == doctest::Approx(alt).epsilon(1e-10));
    }
}

TEST_CASE("KS p-values reproduce the reported Copper Mini rows") {
    // Statistic -> reported p at n = 2000. The asymptotic law sits within 0.015
    // of the reported (finite-sample) values.
    const std::pair<double, double> rows[] = {{0.0177, 0.55}, {0.0141, 0.81}, {0.0195, 0.43}};
    for (const auto& [d, p] : rows) {
        CHECK(std::abs(kolmogorov_survival(std::sqrt(2000.0) * d) - p) <= 0.015);
    }
}

TEST_CASE("KS on an exact log-normal grid") {
    const auto r = ks_lognormal(lognormal_grid(2000, 6.0, 0.1), 90);
    CHECK(r.test == GofTest::KS);
    CHECK(r.horizon_step == 90);
    CHECK(r.statistic <= 1.0 / 2000 + 1e-3);
    CHECK(*r.p_value > 0.99);
    CHECK(r.reject_at.empty());
}

TEST_CASE("KS rejects log-Cauchy data and agrees with a counting implementation") {
    const auto x = log_cauchy(2000, 17);
    const auto r = ks_lognormal(x);
    CHECK(r.statistic == doctest::Approx(ks_by_counting(x)).epsilon(1e-12));
    CHECK(*r.p_value < 0.01);
    CHECK(r.reject_at == std::vector<double>{15, 10, 5, 2.5, 1});
}

TEST_CASE("AD on an exact log-normal grid stays below every threshold") {
    const auto r = ad_lognormal(lognormal_grid(2000, 3.0, 0.4), 150);
    CHECK(r.statistic < 0.575);
    CHECK(r.statistic >= 0.0);
    CHECK(r.reject_at.empty());
    CHECK(r.ad_critical_values == std::array<double, 5>{0.575, 0.655, 0.785, 0.916, 1.090});
}

TEST_CASE("AD rejects uniform prices and matches the one-sided formula") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(1.0, 2.0);
    std::vector<double> x(2000);
    for (auto& v : x) v = u(rng);
    const auto r = ad_lognormal(x);
    CHECK(r.statistic == doctest::Approx(ad_one_sided(x)).epsilon(1e-10));
    CHECK(r.statistic > 1.090);
    CHECK(r.reject_at == std::vector<double>{15, 10, 5, 2.5, 1});
}

TEST_CASE("AD rejection levels follow the thresholds") {
    // Mixture of two log-normals with a moderate shift gives a middling statistic.
    auto x = lognormal_grid(1000, 0.0, 0.1);
    const auto y = lognormal_grid(1000, 0.12, 0.1);
    x.insert(x.end(), y.begin(), y.end());
    const auto r = ad_lognormal(x);
    for (std::size_t k = 0; k < 5; ++k) {
        const bool rejected = std::find(r.reject_at.begin(), r.reject_at.end(), kSignificanceLevelsPct[k]) != r.reject_at.end();
        CHECK(rejected == (r.statistic > kAndersonDarlingCritical[k]));
    }
}

TEST_CASE("statistics are invariant to price scale and sample order") {
    auto x = log_cauchy(500, 3);
    const auto ks = ks_lognormal(x).statistic;
    const auto ad = ad_lognormal(x).statistic;
    for (const double c : {0.001, 7.5, 1e4}) {
        std::vector<double> scaled(x);
        for (auto& v : scaled) v *= c;
        CHECK(ks_lognormal(scaled).statistic == doctest::Approx(ks).epsilon(1e-9));
        CHECK(ad_lognormal(scaled).statistic == doctest::Approx(ad).epsilon(1e-9));
    }
    std::mt19937_64 rng(1);
    std::shuffle(x.begin(), x.end(), rng);
    CHECK(ks_lognormal(x).statistic == doctest::Approx(ks).epsilon(1e-12));
    CHECK(ad_lognormal(x).statistic == doctest::Approx(ad).epsilon(1e-12));
}

TEST_CASE("goodness-of-fit errors") {
    CHECK_THROWS_AS(ks_lognormal({1, 2, 3, 4, 5, 6, 7, 0}), NonPositivePrice);
    CHECK_THROWS_AS(ad_lognormal({1, 2, 3, 4, 5, 6, 7, -1}), NonPositivePrice);
    CHECK_THROWS_AS(ad_lognormal(std::vector<double>(10, 3.0)), DegenerateSample);
    CHECK_THROWS_AS(ks_lognormal({1, 2, 3}), Error);
}

TEST_CASE("GBM ensembles rarely reject log-normality") {
    int ks_rejects = 0, ad_rejects = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto col = gbm(2000, 210, seed).column(209);
        ks_rejects += *ks_lognormal(col).p_value < 0.05;
        ad_rejects += ad_lognormal(col).statistic > 0.785;
    }
    CHECK(ks_rejects <= 4);
    CHECK(ad_rejects <= 4);
}

TEST_CASE("distribution export") {
    SUBCASE("constant ensemble fills one bin") {
        ForecastEnsemble e;
        e.n_paths = 50;
        e.horizon = 2;
        e.values.assign(100, 123.0);
        const auto h = distribution_export(e, 2, 10);
        CHECK(std::count_if(h.counts.begin(), h.counts.end(), [](std::size_t c) { return c > 0; }) == 1);
        CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}) == 50);
    }
    SUBCASE("one bin holds every path") {
        const auto h = distribution_export(gbm(300, 20, 1), 20, 1);
        REQUIRE(h.counts.size() == 1);
        CHECK(h.counts[0] == 300);
        CHECK(h.edges.size() == 2);
    }
    SUBCASE("GBM histogram is close to the fitted normal") {
        const auto ens = gbm(2000, 210, 9);
        const std::size_t bins = 20;
        const auto h = distribution_export(ens, 210, bins);
        CHECK(h.normal_density.size() == bins);

        // Pearson chi-square with expected counts from the fitted normal CDF,
        // pooling bins until each expects at least 5.
        auto cdf = [&](double y) { return 0.5 * std::erfc(-(y - h.mean) / (h.stddev * std::numbers::sqrt2)); };
        std::vector<std::pair<double, double>> cells;  // observed, expected
        double obs = 0, expd = 0;
        for (std::size_t k = 0; k < bins; ++k) {
            const double lo = k == 0 ? -INFINITY : h.edges[k];
            const double hi = k + 1 == bins ? INFINITY : h.edges[k + 1];
            obs += static_cast<double>(h.counts[k]);
            expd += 2000.0 * ((k + 1 == bins ? 1.0 : cdf(hi)) - (k == 0 ? 0.0 : cdf(lo)));
            if (expd >= 5.0) {
                cells.emplace_back(obs, expd);
                obs = expd = 0;
            }
        }
        if (expd > 0) {
            cells.back().first += obs;
            cells.back().second += expd;
        }
        double chi2 = 0;
        for (const auto& [o, e] : cells) chi2 += (o - e) * (o - e) / e;
        const boost::math::chi_squared dist(static_cast<double>(cells.size() - 3));
        CHECK(chi2 < boost::math::quantile(dist, 0.95));
    }
    CHECK_THROWS_AS(distribution_export(gbm(10, 5, 1), 6, 3), Error);
    CHECK_THROWS_AS(distribution_export(gbm(10, 5, 1), 0, 3), Error);
}

TEST_CASE("table exports keep the reported column layout") {
    GofResult ks;
    ks.horizon_step = 90;
    ks.statistic = 0.0177;
    ks.p_value = 0.55;
    CHECK(ks_table_csv({ks}) == "Time,Statistic,p-value\n90,0.0177,0.55000000000000004\n");
    GofResult ad;
    ad.test = GofTest::AD;
    ad.horizon_step = 150;
    ad.statistic = 0.5;
    CHECK(ad_table_csv({ad}) ==
          "Time,Statistic,Statistic squared,15%,10%,5%,2.5%,1%\n150,0.5,0.25,0.575,0.655,0.785,0.916,1.090\n");
}

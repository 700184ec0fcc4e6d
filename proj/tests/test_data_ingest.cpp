#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hom/data_ingest.hpp"
#include "hom/errors.hpp"

using namespace hom;
using namespace std::chrono;

namespace {

PriceSeries make_series(const std::vector<double>& prices) {
    PriceSeries s;
    sys_days day = sys_days{2019y / January / 1};
    for (const double p : prices) {
        s.observations.push_back({year_month_day{day}, p});
        day += days{1};
    }
    return s;
}

std::string rows_csv(std::size_t n) {
    std::string out = "date,price\n";
    sys_days day = sys_days{2012y / January / 2};
    for (std::size_t i = 0; i < n; ++i) {
        out += format_date(year_month_day{day}) + "," + std::to_string(400 + (i % 37)) + "\n";
        day += days{1};
    }
    return out;
}

// O(N^2) reference: every maximal constant run, found by extending from each start.
std::vector<IndexRange> brute_force_runs(const std::vector<double>& x, std::size_t min_run) {
    std::vector<IndexRange> out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i > 0 && x[i - 1] == x[i]) continue;  // not the start of a maximal run
        std::size_t j = i;
        for (std::size_t k = i; k < x.size() && x[k] == x[i]; ++k) j = k;
        if (j - i + 1 >= min_run) out.push_back({i, j});
    }
    return out;
}

}  // namespace

TEST_CASE("parse_csv reads a well-formed file") {
    const auto s = parse_csv("date,price\n2019-01-01,100\n2019-01-02,101\n2019-01-03,99\n");
    REQUIRE(s.size() == 3);
    CHECK(s.prices() == std::vector<double>{100, 101, 99});
    CHECK(s.dropped_rows == 0);
    CHECK(s.observations[0].date == year_month_day{2019y / January / 1});
}

TEST_CASE("parse_csv drops malformed rows and counts them") {
    const auto s = parse_csv("date,price\n2019-01-01,100\n2019-01-02,abc\n2019-01-03,99\nnot-a-date,5\n2019-01-04,98\n");
    CHECK(s.prices() == std::vector<double>{100, 99, 98});
    CHECK(s.dropped_rows == 2);

    // Two valid rows are not enough for a series.
    CHECK_THROWS_AS(parse_csv("date,price\n2019-01-01,100\n2019-01-02,abc\n2019-01-03,99\n"), EmptySeries);
}

TEST_CASE("parse_csv rejects non-finite prices") {
    const auto s = parse_csv("date,price\n2019-01-01,nan\n2019-01-02,inf\n2019-01-03,1\n2019-01-04,2\n2019-01-05,3\n");
    CHECK(s.size() == 3);
    CHECK(s.dropped_rows == 2);
}

TEST_CASE("parse_csv accepts a series the size of the Copper Mini data") {
    const auto s = parse_csv(rows_csv(2006));
    CHECK(s.size() == 2006);
}

TEST_CASE("parse_csv sorts by date and keeps the last duplicate") {
    const auto s = parse_csv("date,price\n2019-01-03,3\n2019-01-01,1\n2019-01-02,2\n2019-01-01,10\n");
    CHECK(s.prices() == std::vector<double>{10, 2, 3});
    CHECK(s.duplicate_dates == 1);
}

TEST_CASE("parse_csv honours the schema") {
    CsvSchema schema;
    schema.date_column = "Day";
    schema.price_column = "Spot";
    schema.date_format = "%d/%m/%Y";
    schema.delimiter = ';';
    const auto s = parse_csv("Spot;Other;Day\n1.5;x;31/12/2019\n2.5;y;01/01/2020\n3.5;z;02/01/2020\n", schema);
    CHECK(s.prices() == std::vector<double>{1.5, 2.5, 3.5});
    CHECK(s.observations[1].date == year_month_day{2020y / January / 1});

    CHECK_THROWS_AS(parse_csv("date,close\n2019-01-01,1\n", CsvSchema{}), SchemaError);
    CHECK_THROWS_AS(parse_csv(""), EmptySeries);
}

TEST_CASE("parse_date rejects impossible dates") {
    Date d;
    CHECK_FALSE(parse_date("2019-02-30", "%Y-%m-%d", d));
    CHECK_FALSE(parse_date("2019-01-01x", "%Y-%m-%d", d));
    CHECK(parse_date("2020-02-29", "%Y-%m-%d", d));
}

TEST_CASE("write_csv then parse_csv reproduces the series") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> price(-50.0, 5000.0);
    std::uniform_int_distribution<int> gap(1, 4);
    for (int trial = 0; trial < 50; ++trial) {
        PriceSeries s;
        sys_days day = sys_days{2000y / March / 1};
        const int n = 3 + trial * 7;
        for (int i = 0; i < n; ++i) {
            s.observations.push_back({year_month_day{day}, price(rng)});
            day += days{gap(rng)};
        }
        const auto back = parse_csv(write_csv(s));
        CHECK(back.observations == s.observations);
    }
}

TEST_CASE("split_series boundaries") {
    SUBCASE("Copper Mini sized series, 400 history points") {
        const auto split = split_series(make_series(std::vector<double>(2006, 1.0)), {400, 0.8});
        CHECK(split.history.size() == 400);
        CHECK(split.train.size() == 1284);
        CHECK(split.validation.size() == 322);
    }
    SUBCASE("no history") {
        const auto split = split_series(make_series(std::vector<double>(10, 1.0)), {0, 0.8});
        CHECK(split.history.size() == 0);
        CHECK(split.train.size() == 8);
        CHECK(split.validation.size() == 2);
    }
    SUBCASE("Aluminum sized series, 75 history points") {
        const auto split = split_series(make_series(std::vector<double>(652, 1.0)), {75, 0.8});
        CHECK(split.history.size() == 75);
        CHECK(split.train.size() == 461);
        CHECK(split.validation.size() == 116);
    }
    CHECK_THROWS_AS(split_series(make_series({1, 2, 3, 4}), {2, 0.8}), SplitError);
    CHECK_THROWS_AS(split_series(make_series({1, 2, 3, 4}), {0, 1.0}), SplitError);
}

TEST_CASE("split_series partitions the series") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng() % 300;
        std::vector<double> prices(n);
        for (auto& p : prices) p = static_cast<double>(rng() % 1000);
        const auto series = make_series(prices);
        const std::size_t history = rng() % (n - 2);
        const double frac = 0.05 + 0.9 * static_cast<double>(rng() % 1000) / 1000.0;
        const auto split = split_series(series, {history, frac});

        auto joined = split.history.observations;
        joined.insert(joined.end(), split.train.observations.begin(), split.train.observations.end());
        joined.insert(joined.end(), split.validation.observations.begin(), split.validation.observations.end());
        CHECK(joined == series.observations);
        CHECK(split.train.size() ==
              static_cast<std::size_t>(std::floor(frac * static_cast<double>(n - history))));
    }
}

TEST_CASE("detect_frozen_runs examples") {
    CHECK(detect_frozen_runs(std::vector<double>{5, 5, 5, 7}, 3) == std::vector<IndexRange>{{0, 2}});
    CHECK(detect_frozen_runs(std::vector<double>{1, 2, 3}, 2).empty());
    CHECK(detect_frozen_runs(std::vector<double>{4, 4, 9, 9, 9, 9, 4}, 4) == std::vector<IndexRange>{{2, 5}});
    CHECK(detect_frozen_runs(std::vector<double>{}, 2).empty());
}

TEST_CASE("detect_frozen_runs matches a brute-force scan") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = rng() % 201;
        std::vector<double> x(n);
        // Few distinct values so runs are common.
        for (auto& v : x) v = static_cast<double>(rng() % 3);
        const std::size_t min_run = 2 + rng() % 4;
        CHECK(detect_frozen_runs(x, min_run) == brute_force_runs(x, min_run));
    }
}

TEST_CASE("date_ranges_to_indices maps calendar ranges onto observations") {
    const auto s = make_series({1, 2, 3, 4, 5, 6});  // 2019-01-01 .. 2019-01-06
    const auto ranges = date_ranges_to_indices(
        s, {{2019y / January / 2, 2019y / January / 4}, {2018y / May / 1, 2018y / May / 9}, {2019y / January / 6, 2019y / February / 1}});
    CHECK(ranges == std::vector<IndexRange>{{1, 3}, {5, 5}});
}

#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hom {

using Date = std::chrono::year_month_day;

struct PriceObservation {
    Date date;
    double price = 0.0;

    friend bool operator==(const PriceObservation&, const PriceObservation&) = default;
};

/// Cleaned, strictly date-ascending spot prices.
///
/// The time axis is the observation index; calendar gaps are not interpolated.
struct PriceSeries {
    std::vector<PriceObservation> observations;
    std::string source_label;
    std::size_t dropped_rows = 0;     // unparseable date or price
    std::size_t duplicate_dates = 0;  // earlier rows superseded by a later one

    [[nodiscard]] std::size_t size() const { return observations.size(); }
    [[nodiscard]] bool empty() const { return observations.empty(); }
    [[nodiscard]] std::vector<double> prices() const;

    /// Contiguous sub-series [first, first + count).
    [[nodiscard]] PriceSeries slice(std::size_t first, std::size_t count) const;
};

struct CsvSchema {
    std::string date_column = "date";
    std::string price_column = "price";
    std::string date_format = "%Y-%m-%d";  // strptime-style, %Y %m %d %b supported
    char delimiter = ',';
};

/// Parses delimiter-separated text with a header row.
///
/// Rows whose date or price fails to parse (or whose price is not finite) are
/// dropped and counted. Duplicate dates keep the last row in file order.
/// Throws SchemaError when a named column is missing and EmptySeries when
/// fewer than three valid rows remain.
PriceSeries parse_csv(std::string_view content, const CsvSchema& schema = {},
                      std::string source_label = {});

PriceSeries read_csv_file(const std::string& path, const CsvSchema& schema = {});

/// Writes a header plus one row per observation. Prices use round-trip
/// precision so that parse_csv(write_csv(s)) reproduces s exactly.
std::string write_csv(const PriceSeries& series, const CsvSchema& schema = {});

std::string format_date(const Date& date);
/// Parses a date with the given format; returns false on failure.
bool parse_date(std::string_view text, const std::string& format, Date& out);

struct SplitSpec {
    std::size_t history_len = 0;
    double train_frac = 0.8;
};

struct SeriesSplit {
    PriceSeries history;
    PriceSeries train;
    PriceSeries validation;
};

/// Partitions the series into history / train / validation with
/// |train| = floor(train_frac * (N - history_len)).
SeriesSplit split_series(const PriceSeries& series, const SplitSpec& spec);

/// Closed index range [first, last].
struct IndexRange {
    std::size_t first = 0;
    std::size_t last = 0;

    [[nodiscard]] bool contains(std::size_t i) const { return i >= first && i <= last; }
    [[nodiscard]] std::size_t length() const { return last - first + 1; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Maximal runs of identical consecutive prices of length >= min_run.
std::vector<IndexRange> detect_frozen_runs(const std::vector<double>& prices,
                                           std::size_t min_run);
std::vector<IndexRange> detect_frozen_runs(const PriceSeries& series, std::size_t min_run);

/// Maps inclusive calendar ranges to index ranges of `series`; ranges that
/// contain no observation are omitted.
std::vector<IndexRange> date_ranges_to_indices(const PriceSeries& series,
                                               const std::vector<std::pair<Date, Date>>& ranges);

}  // namespace hom

#include "hom/data_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "hom/errors.hpp"

namespace hom {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return fields;
}

bool parse_price(std::string_view text, double& out) {
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

std::size_t find_column(const std::vector<std::string_view>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), std::string_view{name});
    if (it == header.end()) {
        throw SchemaError("column '" + name + "' not found in header");
    }
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<double> PriceSeries::prices() const {
    std::vector<double> out;
    out.reserve(observations.size());
    for (const auto& o : observations) out.push_back(o.price);
    return out;
}

PriceSeries PriceSeries::slice(std::size_t first, std::size_t count) const {
    PriceSeries out;
    out.source_label = source_label;
    first = std::min(first, observations.size());
    count = std::min(count, observations.size() - first);
    out.observations.assign(observations.begin() + static_cast<std::ptrdiff_t>(first),
                            observations.begin() + static_cast<std::ptrdiff_t>(first + count));
    return out;
}

bool parse_date(std::string_view text, const std::string& format, Date& out) {
    std::tm tm{};
    tm.tm_mday = 1;
    std::istringstream in{std::string(text)};
    in >> std::get_time(&tm, format.c_str());
    if (in.fail()) return false;
    in >> std::ws;
    if (!in.eof()) return false;
    const Date date{std::chrono::year{tm.tm_year + 1900},
                    std::chrono::month{static_cast<unsigned>(tm.tm_mon + 1)},
                    std::chrono::day{static_cast<unsigned>(tm.tm_mday)}};
    if (!date.ok()) return false;
    out = date;
    return true;
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

PriceSeries parse_csv(std::string_view content, const CsvSchema& schema, std::string source_label) {
    PriceSeries series;
    series.source_label = std::move(source_label);

    std::size_t pos = 0;
    auto next_line = [&](std::string_view& line) {
        while (pos < content.size()) {
            auto end = content.find('\n', pos);
            if (end == std::string_view::npos) end = content.size();
            line = content.substr(pos, end - pos);
            pos = end + 1;
            if (!trim(line).empty()) return true;
        }
        return false;
    };

    std::string_view line;
    if (!next_line(line)) {
        throw EmptySeries("input is empty");
    }
    const auto header = split_fields(line, schema.delimiter);
    const auto date_col = find_column(header, schema.date_column);
    const auto price_col = find_column(header, schema.price_column);
    const auto needed = std::max(date_col, price_col);

    // Last row wins for a repeated date.
    std::map<int, PriceObservation> by_day;
    while (next_line(line)) {
        const auto fields = split_fields(line, schema.delimiter);
        Date date;
        double price = 0.0;
        if (fields.size() <= needed || !parse_date(fields[date_col], schema.date_format, date) ||
            !parse_price(fields[price_col], price)) {
            ++series.dropped_rows;
            continue;
        }
        const int key = std::chrono::sys_days{date}.time_since_epoch().count();
        const auto [it, inserted] = by_day.insert_or_assign(key, PriceObservation{date, price});
        if (!inserted) ++series.duplicate_dates;
    }

    series.observations.reserve(by_day.size());
    for (const auto& [key, obs] : by_day) series.observations.push_back(obs);
    if (series.size() < 3) {
        throw EmptySeries("need at least 3 valid rows, found " + std::to_string(series.size()));
    }
    return series;
}

PriceSeries read_csv_file(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open input file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), schema, path);
}

std::string write_csv(const PriceSeries& series, const CsvSchema& schema) {
    std::string out = schema.date_column + schema.delimiter + schema.price_column + "\n";
    char buf[64];
    for (const auto& o : series.observations) {
        std::snprintf(buf, sizeof buf, "%.17g", o.price);
        out += format_date(o.date);
        out += schema.delimiter;
        out += buf;
        out += '\n';
    }
    return out;
}

SeriesSplit split_series(const PriceSeries& series, const SplitSpec& spec) {
    const auto n = series.size();
    if (spec.history_len + 2 >= n) {
        throw SplitError("history_len " + std::to_string(spec.history_len) +
                         " leaves fewer than 3 points of a series of length " + std::to_string(n));
    }
    if (!(spec.train_frac > 0.0 && spec.train_frac < 1.0)) {
        throw SplitError("train_frac must lie in (0, 1)");
    }
    const auto remainder = n - spec.history_len;
    const auto train_len =
        static_cast<std::size_t>(std::floor(spec.train_frac * static_cast<double>(remainder)));

    SeriesSplit split;
    split.history = series.slice(0, spec.history_len);
    split.train = series.slice(spec.history_len, train_len);
    split.validation = series.slice(spec.history_len + train_len, remainder - train_len);
    return split;
}

std::vector<IndexRange> detect_frozen_runs(const std::vector<double>& prices, std::size_t min_run) {
    std::vector<IndexRange> runs;
    min_run = std::max<std::size_t>(min_run, 2);
    std::size_t start = 0;
    for (std::size_t i = 1; i <= prices.size(); ++i) {
        if (i == prices.size() || prices[i] != prices[start]) {
            if (i - start >= min_run) runs.push_back({start, i - 1});
            start = i;
        }
    }
    return runs;
}

std::vector<IndexRange> detect_frozen_runs(const PriceSeries& series, std::size_t min_run) {
    return detect_frozen_runs(series.prices(), min_run);
}

std::vector<IndexRange> date_ranges_to_indices(const PriceSeries& series,
                                               const std::vector<std::pair<Date, Date>>& ranges) {
    std::vector<IndexRange> out;
    const auto& obs = series.observations;
    for (const auto& [from, to] : ranges) {
        const auto lo = std::lower_bound(obs.begin(), obs.end(), from,
                                         [](const PriceObservation& o, const Date& d) { return o.date < d; });
        const auto hi = std::upper_bound(obs.begin(), obs.end(), to,
                                         [](const Date& d, const PriceObservation& o) { return d < o.date; });
        if (lo < hi) {
            out.push_back({static_cast<std::size_t>(lo - obs.begin()),
                           static_cast<std::size_t>(hi - obs.begin()) - 1});
        }
    }
    return out;
}

}  // namespace hom

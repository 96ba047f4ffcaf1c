#include "lvr/price_feed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lvr/csv.hpp"
#include "lvr/error.hpp"
#include "lvr/log.hpp"

namespace lvr {

namespace {

std::int64_t timestamp_of(const PricePoint& p) { return p.timestamp_ms; }
std::int64_t timestamp_of(const Quote& q) { return q.timestamp_ms; }

// Index of the last element with timestamp <= t, or npos.
template <typename Point>
std::size_t last_at_or_before(std::span<const Point> series, std::int64_t t) {
    const auto it = std::upper_bound(series.begin(), series.end(), t,
                                     [](std::int64_t v, const Point& p) {
                                         return v < timestamp_of(p);
                                     });
    if (it == series.begin()) return std::numeric_limits<std::size_t>::max();
    return static_cast<std::size_t>(std::distance(series.begin(), it)) - 1;
}

// Reads numeric rows, skipping blank lines and an optional header on the
// first non-blank line. `handle` receives the fields and the line number.
template <typename Handler>
void read_rows(const std::string& path, std::size_t min_fields, Handler&& handle) {
    csv::LineReader reader(path);
    std::string line;
    bool first = true;
    while (reader.next(line)) {
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (first) {
            first = false;
            if (csv::is_header(line)) continue;
        }
        const auto fields = csv::split(line);
        if (fields.size() < min_fields) {
            throw ParseError(path, reader.line_number(),
                             "expected at least " + std::to_string(min_fields) + " fields");
        }
        handle(fields, reader.line_number());
    }
}

template <typename Point>
Spliced<Point> splice(std::span<const Point> primary, std::span<const Point> fallback,
                      TimeRange gap) {
    Spliced<Point> out;
    if (gap.empty()) {
        out.series.assign(primary.begin(), primary.end());
        return out;
    }
    const std::size_t open = last_at_or_before(fallback, gap.start_ms);
    if (open == std::numeric_limits<std::size_t>::max() || fallback.empty() ||
        timestamp_of(fallback.back()) < gap.end_ms) {
        throw InsufficientData("fallback series does not cover the gap [" +
                               std::to_string(gap.start_ms) + ", " +
                               std::to_string(gap.end_ms) + ")");
    }
    for (const Point& p : primary) {
        if (timestamp_of(p) >= gap.start_ms) break;
        out.series.push_back(p);
    }
    Point carried = fallback[open];
    if (timestamp_of(carried) != gap.start_ms) {
        carried.timestamp_ms = gap.start_ms;
        out.series.push_back(carried);
    }
    for (std::size_t i = open; i < fallback.size(); ++i) {
        const Point& p = fallback[i];
        if (timestamp_of(p) < gap.start_ms) continue;
        if (timestamp_of(p) >= gap.end_ms) break;
        out.series.push_back(p);
    }
    for (const Point& p : primary) {
        if (timestamp_of(p) >= gap.end_ms) out.series.push_back(p);
    }
    out.splice_points = {gap.start_ms, gap.end_ms};
    log_warning("substituted fallback data in [" + std::to_string(gap.start_ms) + ", " +
                std::to_string(gap.end_ms) + ")");
    return out;
}

}  // namespace

void validate(std::span<const PricePoint> series) {
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!(series[i].price > 0.0) || !std::isfinite(series[i].price)) {
            throw ValidationError("non-positive price at " +
                                  std::to_string(series[i].timestamp_ms));
        }
        if (i > 0 && series[i].timestamp_ms <= series[i - 1].timestamp_ms) {
            throw ValidationError("price timestamps not strictly increasing at " +
                                  std::to_string(series[i].timestamp_ms));
        }
    }
}

void validate(const QuoteSeries& series) {
    const auto& q = series.quotes;
    for (std::size_t i = 0; i < q.size(); ++i) {
        validate(q[i]);
        if (i > 0 && q[i].timestamp_ms <= q[i - 1].timestamp_ms) {
            throw ValidationError("quote timestamps not strictly increasing at " +
                                  std::to_string(q[i].timestamp_ms));
        }
    }
}

std::vector<PricePoint> load_klines(const std::string& path) {
    std::vector<PricePoint> out;
    read_rows(path, 2, [&](const auto& fields, std::size_t line) {
        PricePoint p;
        if (!csv::parse(fields[0], p.timestamp_ms) || !csv::parse(fields[1], p.price)) {
            throw ParseError(path, line, "malformed kline row");
        }
        if (!(p.price > 0.0) || !std::isfinite(p.price)) {
            throw ParseError(path, line, "open price must be positive");
        }
        if (!out.empty() && p.timestamp_ms <= out.back().timestamp_ms) {
            throw ValidationError(path + ":" + std::to_string(line) +
                                  ": kline timestamps must be strictly increasing");
        }
        out.push_back(p);
    });
    return out;
}

QuoteSeries load_quote_updates(const std::string& path) {
    QuoteSeries out;
    out.source = path;
    read_rows(path, 3, [&](const auto& fields, std::size_t line) {
        Quote q;
        if (!csv::parse(fields[0], q.timestamp_ms) || !csv::parse(fields[1], q.bid) ||
            !csv::parse(fields[2], q.ask)) {
            throw ParseError(path, line, "malformed quote row");
        }
        try {
            validate(q);
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(line) + ": " + e.what());
        }
        if (!out.quotes.empty()) {
            const std::int64_t last = out.quotes.back().timestamp_ms;
            if (q.timestamp_ms < last) {
                throw ValidationError(path + ":" + std::to_string(line) +
                                      ": quote timestamps out of order");
            }
            if (q.timestamp_ms == last) {
                out.quotes.back() = q;
                ++out.duplicates_dropped;
                return;
            }
        }
        out.quotes.push_back(q);
    });
    if (out.duplicates_dropped > 0) {
        log_warning(path + ": dropped " + std::to_string(out.duplicates_dropped) +
                    " quote update(s) sharing a millisecond with a later one");
    }
    return out;
}

std::vector<Block> load_blocks(const std::string& path) {
    std::vector<Block> out;
    read_rows(path, 2, [&](const auto& fields, std::size_t line) {
        Block b;
        std::int64_t seconds = 0;
        if (!csv::parse(fields[0], b.number) || !csv::parse(fields[1], seconds)) {
            throw ParseError(path, line, "malformed block row");
        }
        b.timestamp_ms = seconds * 1000;
        if (!out.empty() && (b.timestamp_ms <= out.back().timestamp_ms ||
                             b.number <= out.back().number)) {
            throw ValidationError(path + ":" + std::to_string(line) +
                                  ": blocks must be strictly increasing");
        }
        out.push_back(b);
    });
    return out;
}

QuoteSeries to_quote_series(std::span<const PricePoint> series, std::string pair,
                            std::string source) {
    QuoteSeries out;
    out.pair = std::move(pair);
    out.source = std::move(source);
    out.quotes.reserve(series.size());
    for (const PricePoint& p : series) out.quotes.push_back({p.timestamp_ms, p.price, p.price});
    return out;
}

std::int64_t update_resolution(const QuoteSeries& series) {
    std::int64_t res = 0;
    const auto& q = series.quotes;
    for (std::size_t i = 1; i < q.size(); ++i) {
        const std::int64_t gap = q[i].timestamp_ms - q[i - 1].timestamp_ms;
        if (gap > 0 && (res == 0 || gap < res)) res = gap;
    }
    return res;
}

const Quote& quote_at(std::span<const Quote> quotes, std::int64_t t) {
    const std::size_t i = last_at_or_before(quotes, t);
    if (i == std::numeric_limits<std::size_t>::max()) {
        throw InsufficientData("no quote at or before " + std::to_string(t));
    }
    return quotes[i];
}

QuoteSeries resample_locf(const QuoteSeries& series, std::int64_t interval_ms,
                          std::int64_t start_ms, std::int64_t end_ms) {
    if (interval_ms <= 0) throw InvalidInput("resample interval must be positive");
    if (end_ms < start_ms) throw InvalidInput("resample window is empty");
    QuoteSeries out;
    out.pair = series.pair;
    out.source = series.source;
    std::span<const Quote> quotes(series.quotes);
    std::size_t i = last_at_or_before(quotes, start_ms);
    if (i == std::numeric_limits<std::size_t>::max()) {
        throw InsufficientData("no quote update at or before window start " +
                               std::to_string(start_ms));
    }
    for (std::int64_t t = start_ms; t <= end_ms; t += interval_ms) {
        while (i + 1 < quotes.size() && quotes[i + 1].timestamp_ms <= t) ++i;
        Quote q = quotes[i];
        q.timestamp_ms = t;
        out.quotes.push_back(q);
    }
    return out;
}

std::vector<PricePoint> derive_cross_pair(std::span<const PricePoint> a,
                                          std::span<const PricePoint> b) {
    if (a.size() != b.size()) throw InvalidInput("cross-pair legs are on different grids");
    std::vector<PricePoint> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].timestamp_ms != b[i].timestamp_ms) {
            throw InvalidInput("cross-pair legs are on different grids at " +
                               std::to_string(a[i].timestamp_ms));
        }
        out.push_back({a[i].timestamp_ms, a[i].price / b[i].price});
    }
    return out;
}

QuoteSeries derive_cross_pair(const QuoteSeries& a, const QuoteSeries& b) {
    const auto& qa = a.quotes;
    const auto& qb = b.quotes;
    if (qa.size() != qb.size()) throw InvalidInput("cross-pair legs are on different grids");
    QuoteSeries out;
    out.pair = a.pair + "/" + b.pair;
    out.source = a.source + "+" + b.source;
    out.quotes.reserve(qa.size());
    for (std::size_t i = 0; i < qa.size(); ++i) {
        if (qa[i].timestamp_ms != qb[i].timestamp_ms) {
            throw InvalidInput("cross-pair legs are on different grids at " +
                               std::to_string(qa[i].timestamp_ms));
        }
        out.quotes.push_back({qa[i].timestamp_ms, qa[i].bid / qb[i].ask, qa[i].ask / qb[i].bid});
    }
    return out;
}

Spliced<PricePoint> substitute_gap(std::span<const PricePoint> primary,
                                   std::span<const PricePoint> fallback, TimeRange gap) {
    return splice(primary, fallback, gap);
}

Spliced<Quote> substitute_gap(std::span<const Quote> primary, std::span<const Quote> fallback,
                              TimeRange gap) {
    return splice(primary, fallback, gap);
}

BlockPrices align_to_blocks(std::span<const PricePoint> series,
                            std::span<const std::int64_t> block_timestamps_ms) {
    BlockPrices out;
    out.points.reserve(block_timestamps_ms.size());
    for (const std::int64_t block_ts : block_timestamps_ms) {
        const std::int64_t second = block_ts - ((block_ts % 1000) + 1000) % 1000;
        const std::size_t i = last_at_or_before(series, second);
        if (i == std::numeric_limits<std::size_t>::max()) {
            throw InsufficientData("no price at or before block time " + std::to_string(block_ts));
        }
        if (series[i].timestamp_ms != second) ++out.filled;
        out.points.push_back({block_ts, series[i].price});
    }
    return out;
}

}  // namespace lvr

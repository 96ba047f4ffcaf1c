// External market data: loading, resampling, cross-pair derivation, gap
// substitution and alignment to block timestamps.
//
// Timestamps are UTC milliseconds throughout. Resampling is always last
// observation carried forward; nothing here interpolates.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lvr/arbitrage.hpp"

namespace lvr {

struct PricePoint {
    std::int64_t timestamp_ms = 0;
    double price = 0.0;
    friend bool operator==(const PricePoint&, const PricePoint&) = default;
};

struct QuoteSeries {
    std::vector<Quote> quotes;
    std::string pair;
    std::string source;
    std::size_t duplicates_dropped = 0;
};

struct Block {
    std::int64_t number = 0;
    std::int64_t timestamp_ms = 0;
};

// Half-open window [start_ms, end_ms).
struct TimeRange {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;

    bool empty() const noexcept { return end_ms <= start_ms; }
    bool contains(std::int64_t t) const noexcept { return t >= start_ms && t < end_ms; }
};

// Throws ValidationError unless timestamps are strictly increasing and prices
// positive.
void validate(std::span<const PricePoint> series);
void validate(const QuoteSeries& series);

// Kline CSV `timestamp_ms,open,high,low,close,volume` (header optional). Only
// the timestamp and open price are read.
std::vector<PricePoint> load_klines(const std::string& path);

// Quote-update CSV `timestamp_ms,bid,ask`. Updates sharing a millisecond keep
// the last one; the dropped count is recorded on the series.
QuoteSeries load_quote_updates(const std::string& path);

// Block CSV `block_number,timestamp_s`; timestamps are converted to ms.
std::vector<Block> load_blocks(const std::string& path);

// A mid-price feed as quotes with bid == ask.
QuoteSeries to_quote_series(std::span<const PricePoint> series, std::string pair,
                            std::string source);

// Smallest gap between consecutive updates; 0 for fewer than two updates.
std::int64_t update_resolution(const QuoteSeries& series);

// Quote prevailing at instant t: the last update at or before t. Throws
// InsufficientData when no update precedes t.
const Quote& quote_at(std::span<const Quote> quotes, std::int64_t t);

// One quote per grid instant start, start + interval, ..., <= end (closed
// window here, since the grid includes its end point).
QuoteSeries resample_locf(const QuoteSeries& series, std::int64_t interval_ms,
                          std::int64_t start_ms, std::int64_t end_ms);

// price_a / price_b on a shared grid.
std::vector<PricePoint> derive_cross_pair(std::span<const PricePoint> a,
                                          std::span<const PricePoint> b);

// Conservative cross quotes: bid = bid_a / ask_b, ask = ask_a / bid_b.
QuoteSeries derive_cross_pair(const QuoteSeries& a, const QuoteSeries& b);

template <typename Point>
struct Spliced {
    std::vector<Point> series;
    std::vector<std::int64_t> splice_points;
};

// Primary outside the gap, fallback inside it. The fallback value prevailing
// at the gap start is carried onto the start instant, so the output stays
// continuous across the splice. Throws InsufficientData unless the fallback
// has data at or before the gap start and at or after its end.
Spliced<PricePoint> substitute_gap(std::span<const PricePoint> primary,
                                   std::span<const PricePoint> fallback, TimeRange gap);
Spliced<Quote> substitute_gap(std::span<const Quote> primary, std::span<const Quote> fallback,
                              TimeRange gap);

struct BlockPrices {
    std::vector<PricePoint> points;  // one per block, at the block timestamp
    std::size_t filled = 0;          // blocks whose second had no price
};

// Opening price of each block's second. A missing second falls back to the
// most recent earlier price and is counted. Throws InsufficientData when no
// earlier price exists.
BlockPrices align_to_blocks(std::span<const PricePoint> series,
                            std::span<const std::int64_t> block_timestamps_ms);

}  // namespace lvr

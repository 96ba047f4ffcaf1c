#include "lvr/fee_attribution.hpp"

#include <cmath>

#include "lvr/csv.hpp"
#include "lvr/error.hpp"

namespace lvr {

namespace {

double to_y(const SwapRecord& record, double amount) {
    return record.input_token == Token::X ? amount * record.post_swap_price : amount;
}

// Decimal integer string (optionally signed) as long double.
bool parse_big(std::string_view s, long double& out) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '"' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (s.empty()) return false;
    long double v = 0.0L;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10.0L + static_cast<long double>(c - '0');
    }
    out = negative ? -v : v;
    return true;
}

long double pow10l(int e) { return std::pow(10.0L, static_cast<long double>(e)); }

}  // namespace

void validate(const SwapRecord& record) {
    if (!(record.amount_in > 0.0) || !std::isfinite(record.amount_in)) {
        throw ValidationError("swap record amount_in must be positive");
    }
    if (!(record.post_swap_liquidity > 0.0) || !std::isfinite(record.post_swap_liquidity)) {
        throw ValidationError("swap record liquidity must be positive");
    }
    if (!(record.fee_rate > 0.0 && record.fee_rate < 1.0)) {
        throw ValidationError("swap record fee_rate must lie in (0, 1)");
    }
    if (!(record.post_swap_price > 0.0) || !std::isfinite(record.post_swap_price)) {
        throw ValidationError("swap record price must be positive");
    }
}

double fee_earned(const SwapRecord& record, double position_liquidity) {
    validate(record);
    if (!(position_liquidity >= 0.0)) throw InvalidInput("position liquidity must be >= 0");
    if (position_liquidity > record.post_swap_liquidity) {
        throw InvalidInput("position liquidity exceeds the pool's in-range liquidity");
    }
    return record.fee_rate * record.amount_in * (position_liquidity / record.post_swap_liquidity);
}

double relative_fee_return(const SwapRecord& record, double fee_amount, double position_value_y) {
    if (!(position_value_y > 0.0)) throw InvalidInput("position value must be positive");
    return to_y(record, fee_amount) / position_value_y;
}

PositionLedger accumulate(PositionLedger ledger, std::span<const double> returns) {
    for (double r : returns) {
        if (!std::isfinite(r) || r <= -1.0) {
            throw InvalidInput("relative return must be finite and > -1");
        }
    }
    for (double r : returns) {
        ledger.cumulative_growth *= 1.0 + r;
        ledger.position_liquidity *= 1.0 + r;
        ledger.returns.push_back(r);
    }
    return ledger;
}

double full_range_value(double liquidity, double price) {
    return 2.0 * liquidity * std::sqrt(price);
}

FeeBacktest run_fee_backtest(std::span<const SwapRecord> records, double position_liquidity,
                             FeeAggregation aggregation) {
    if (!(position_liquidity > 0.0)) throw InvalidInput("position liquidity must be positive");
    FeeBacktest out;
    out.ledger.position_liquidity = position_liquidity;

    std::size_t i = 0;
    while (i < records.size()) {
        std::size_t end = i + 1;
        if (aggregation == FeeAggregation::per_block) {
            while (end < records.size() && records[end].block_number == records[i].block_number) {
                ++end;
            }
        }
        if (i > 0 && (records[i].timestamp_ms < records[i - 1].timestamp_ms ||
                      records[i].block_number < records[i - 1].block_number)) {
            throw InvalidInput("swap records must be in chronological order");
        }
        const SwapRecord& last = records[end - 1];
        const double l_pos = out.ledger.position_liquidity;
        double fee_y = 0.0;
        for (std::size_t j = i; j < end; ++j) {
            // End-of-block liquidity for every swap of the period.
            SwapRecord r = records[j];
            r.post_swap_liquidity = last.post_swap_liquidity;
            fee_y += to_y(r, fee_earned(r, l_pos));
        }
        const double value = full_range_value(l_pos, last.post_swap_price);
        const double ret = fee_y / value;
        const double step[] = {ret};
        out.ledger = accumulate(std::move(out.ledger), step);
        out.periods.push_back({last.block_number, last.timestamp_ms, ret});
        i = end;
    }
    return out;
}

std::vector<SwapRecord> load_swap_records(const std::string& path) {
    csv::LineReader reader(path);
    std::vector<SwapRecord> out;
    std::string line;
    bool first = true;
    while (reader.next(line)) {
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (first) {
            first = false;
            if (csv::is_header(line)) continue;
        }
        const auto f = csv::split(line);
        const std::size_t n = reader.line_number();
        if (f.size() < 7) throw ParseError(path, n, "expected 7 fields");
        SwapRecord r;
        const bool ok = csv::parse(f[0], r.block_number) && csv::parse(f[1], r.timestamp_ms) &&
                        csv::parse(f[3], r.amount_in) && csv::parse(f[4], r.fee_rate) &&
                        csv::parse(f[5], r.post_swap_price) &&
                        csv::parse(f[6], r.post_swap_liquidity);
        if (!ok) throw ParseError(path, n, "malformed swap row");
        if (f[2] == "X" || f[2] == "x") {
            r.input_token = Token::X;
        } else if (f[2] == "Y" || f[2] == "y") {
            r.input_token = Token::Y;
        } else {
            throw ParseError(path, n, "input_token must be X or Y");
        }
        try {
            validate(r);
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(n) + ": " + e.what());
        }
        if (!out.empty() && (r.block_number < out.back().block_number ||
                             r.timestamp_ms < out.back().timestamp_ms)) {
            throw ValidationError(path + ":" + std::to_string(n) +
                                  ": swap records out of chronological order");
        }
        out.push_back(r);
    }
    return out;
}

double price_from_sqrt_x96(const std::string& sqrt_price_x96, int decimals0, int decimals1) {
    long double raw = 0.0L;
    if (!parse_big(sqrt_price_x96, raw) || !(raw > 0.0L)) {
        throw InvalidInput("malformed sqrt price: " + sqrt_price_x96);
    }
    const long double q96 = std::ldexp(1.0L, 96);
    const long double root = raw / q96;
    return static_cast<double>(root * root * pow10l(decimals0 - decimals1));
}

std::vector<SwapRecord> load_raw_v3_swaps(const std::string& path, int decimals0, int decimals1) {
    csv::LineReader reader(path);
    std::vector<SwapRecord> out;
    std::string line;
    bool first = true;
    const long double liq_scale = std::sqrt(pow10l(decimals0 + decimals1));
    while (reader.next(line)) {
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (first) {
            first = false;
            if (csv::is_header(line)) continue;
        }
        const auto f = csv::split(line);
        const std::size_t n = reader.line_number();
        if (f.size() < 7) throw ParseError(path, n, "expected 7 fields");
        SwapRecord r;
        std::int64_t seconds = 0;
        std::int64_t fee_ppm = 0;
        long double amount0 = 0, amount1 = 0, liquidity = 0;
        const bool ok = csv::parse(f[0], r.block_number) && csv::parse(f[1], seconds) &&
                        parse_big(f[2], amount0) && parse_big(f[3], amount1) &&
                        parse_big(f[5], liquidity) && csv::parse(f[6], fee_ppm);
        if (!ok) throw ParseError(path, n, "malformed raw swap row");
        r.timestamp_ms = seconds * 1000;
        if (amount0 > 0.0L) {
            r.input_token = Token::X;
            r.amount_in = static_cast<double>(amount0 / pow10l(decimals0));
        } else if (amount1 > 0.0L) {
            r.input_token = Token::Y;
            r.amount_in = static_cast<double>(amount1 / pow10l(decimals1));
        } else {
            throw ParseError(path, n, "swap has no positive input amount");
        }
        r.fee_rate = static_cast<double>(fee_ppm) / 1e6;
        try {
            r.post_swap_price = price_from_sqrt_x96(std::string(f[4]), decimals0, decimals1);
        } catch (const InvalidInput& e) {
            throw ParseError(path, n, e.what());
        }
        r.post_swap_liquidity = static_cast<double>(liquidity / liq_scale);
        try {
            validate(r);
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(n) + ": " + e.what());
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace lvr

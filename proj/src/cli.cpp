#include "lvr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "lvr/csv.hpp"
#include "lvr/error.hpp"
#include "lvr/fee_attribution.hpp"
#include "lvr/price_feed.hpp"
#include "lvr/report.hpp"
#include "lvr/simulation.hpp"

namespace lvr::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using report::num;
using report::Table;

namespace {

// Bad flags, missing files and other problems with the request itself.
class ConfigError : public Error {
public:
    using Error::Error;
};

void require_file(const std::string& path, const std::string& flag) {
    if (path.empty()) throw ConfigError(flag + " is required");
    if (!fs::is_regular_file(path)) throw ConfigError(flag + ": no such file: " + path);
}

fs::path out_dir(const RunConfig& c) {
    if (c.out.empty()) throw ConfigError("--out is required");
    fs::create_directories(c.out);
    return c.out;
}

double pool_fee(const RunConfig& c) {
    const double fee = c.fee_bps / 1e4;
    if (!(fee >= 0.0 && fee < 1.0)) throw ConfigError("--fee-bps must lie in [0, 10000)");
    return fee;
}

FeeHandling fee_handling(const RunConfig& c) {
    if (c.fee_handling == "retain") return FeeHandling::retain;
    if (c.fee_handling == "withdraw") return FeeHandling::withdraw;
    throw ConfigError("--fee-handling must be retain or withdraw");
}

void check_k(const RunConfig& c) {
    if (!(c.concentration_k >= 1.0)) throw ConfigError("--concentration-k must be >= 1");
}

void check_window(const RunConfig& c) {
    if (c.window && c.window->second <= c.window->first) {
        throw ConfigError("--window must be non-empty");
    }
}

void write_table(report::Manifest& manifest, const fs::path& path, const Table& table) {
    report::write_atomic(path, table.to_csv());
    manifest.add_output(path);
}

json config_json(const RunConfig& c) {
    json p;
    p["pair"] = c.pair;
    if (!c.source.empty()) p["source"] = c.source;
    p["fee_bps"] = c.fee_bps;
    p["concentration_k"] = c.concentration_k;
    if (c.interval_ms) p["interval_ms"] = *c.interval_ms;
    if (c.window) p["window"] = {c.window->first, c.window->second};
    p["fee_handling"] = c.fee_handling;
    return p;
}

// Quotes restricted to a closed window; the quote prevailing at the window
// start is restamped onto it.
QuoteSeries window_quotes(const QuoteSeries& series, const RunConfig& c) {
    if (!c.window) return series;
    QuoteSeries out = series;
    out.quotes.clear();
    Quote first = quote_at(series.quotes, c.window->first);
    first.timestamp_ms = c.window->first;
    out.quotes.push_back(first);
    for (const Quote& q : series.quotes) {
        if (q.timestamp_ms > c.window->first && q.timestamp_ms <= c.window->second) {
            out.quotes.push_back(q);
        }
    }
    return out;
}

QuoteSeries quotes_from_prices(const std::vector<PricePoint>& prices, double spread_bps,
                               std::string pair, std::string source) {
    QuoteSeries s = to_quote_series(prices, std::move(pair), std::move(source));
    const double half = spread_bps / 2e4;
    for (Quote& q : s.quotes) {
        const double mid = q.bid;
        q.bid = mid * (1.0 - half);
        q.ask = mid * (1.0 + half);
    }
    return s;
}

GbmParams gbm_params(const RunConfig& c, std::uint64_t seed) {
    GbmParams g;
    g.sigma = c.sigma;
    g.mu = c.mu;
    g.step_ms = c.step_ms;
    g.horizon_ms = c.horizon_ms;
    g.seed = seed;
    g.initial_price = c.initial_price.value_or(1000.0);
    g.start_ms = c.start_ms;
    return g;
}

struct Feed {
    QuoteSeries quotes;
    std::string kind;  // mid | bid_ask
    std::size_t fills = 0;
    std::optional<std::vector<std::int64_t>> block_times;
};

// Historical block feed: block-second opening prices as mid quotes.
Feed block_feed(const RunConfig& c, report::Manifest& manifest) {
    require_file(c.klines, "--klines");
    require_file(c.blocks, "--blocks");
    manifest.add_input("klines", c.klines);
    manifest.add_input("blocks", c.blocks);
    const auto prices = load_klines(c.klines);
    std::vector<std::int64_t> times;
    for (const Block& b : load_blocks(c.blocks)) {
        if (c.window && (b.timestamp_ms < c.window->first || b.timestamp_ms > c.window->second)) {
            continue;
        }
        times.push_back(b.timestamp_ms);
    }
    const BlockPrices aligned = align_to_blocks(prices, times);
    Feed f;
    f.quotes = to_quote_series(aligned.points, c.pair, c.klines);
    if (!c.source.empty()) f.quotes.source = c.source;
    f.kind = "mid";
    f.fills = aligned.filled;
    f.block_times = std::move(times);
    return f;
}

// Quote (or kline) feed for fixed-interval runs.
Feed interval_feed(const RunConfig& c, report::Manifest& manifest) {
    Feed f;
    if (!c.quotes.empty()) {
        require_file(c.quotes, "--quotes");
        manifest.add_input("quotes", c.quotes);
        f.quotes = load_quote_updates(c.quotes);
        f.quotes.pair = c.pair;
        f.kind = "bid_ask";
        manifest.counters()["duplicates_dropped"] = f.quotes.duplicates_dropped;
    } else if (!c.klines.empty()) {
        require_file(c.klines, "--klines");
        manifest.add_input("klines", c.klines);
        f.quotes = to_quote_series(load_klines(c.klines), c.pair, c.klines);
        f.kind = "mid";
    } else {
        throw ConfigError("--quotes or --klines is required");
    }
    if (f.quotes.quotes.empty()) throw ValidationError("price feed is empty");
    if (!c.source.empty()) f.quotes.source = c.source;
    f.quotes = window_quotes(f.quotes, c);
    return f;
}

PoolState initial_pool(const RunConfig& c, const QuoteSeries& quotes, double fee) {
    if (quotes.quotes.empty()) throw ValidationError("price feed is empty");
    const double price = c.initial_price.value_or(quotes.quotes.front().mid());
    return PoolState::at_price(price, c.initial_value, fee);
}

LossSeries simulate(const RunConfig& c, const Feed& feed, double fee) {
    SimOptions opts;
    opts.fees = fee_handling(c);
    const PoolState pool = initial_pool(c, feed.quotes, fee);
    if (feed.block_times) {
        return run_arb_sim(pool, feed.quotes.quotes,
                           BlockSchedule::explicit_times(*feed.block_times), opts);
    }
    if (!c.interval_ms) throw ConfigError("--interval-ms is required with --quotes");
    const auto& q = feed.quotes.quotes;
    return run_arb_sim(pool, q,
                       BlockSchedule::fixed(*c.interval_ms, q.front().timestamp_ms,
                                            q.back().timestamp_ms),
                       opts);
}

Feed arb_feed(const RunConfig& c, report::Manifest& manifest) {
    if (!c.blocks.empty()) return block_feed(c, manifest);
    return interval_feed(c, manifest);
}

std::vector<SwapRecord> load_swaps(const RunConfig& c, report::Manifest& manifest) {
    require_file(c.swaps, "--swaps");
    manifest.add_input("swaps", c.swaps);
    std::vector<SwapRecord> records;
    if (c.swaps_format == "records") {
        records = load_swap_records(c.swaps);
    } else if (c.swaps_format == "raw-v3") {
        records = load_raw_v3_swaps(c.swaps, c.decimals0, c.decimals1);
    } else {
        throw ConfigError("--swaps-format must be records or raw-v3");
    }
    if (c.window) {
        std::erase_if(records, [&](const SwapRecord& r) {
            return r.timestamp_ms < c.window->first || r.timestamp_ms > c.window->second;
        });
    }
    if (records.empty()) throw ValidationError("no swap records in the requested window");
    return records;
}

FeeBacktest fee_backtest(const RunConfig& c, const std::vector<SwapRecord>& records) {
    if (!(c.position_share > 0.0 && c.position_share <= 1.0)) {
        throw ConfigError("--position-share must lie in (0, 1]");
    }
    FeeAggregation agg = FeeAggregation::per_swap;
    if (c.aggregation == "block") {
        agg = FeeAggregation::per_block;
    } else if (c.aggregation != "swap") {
        throw ConfigError("--aggregation must be swap or block");
    }
    double min_liquidity = records.front().post_swap_liquidity;
    for (const SwapRecord& r : records) min_liquidity = std::min(min_liquidity, r.post_swap_liquidity);
    return run_fee_backtest(records, c.position_share * min_liquidity, agg);
}

Table loss_events_table(const LossSeries& run, double k) {
    const auto losses = run.relative_losses();
    const auto scaled = concentration_scale(losses, k);
    Table t({"timestamp_ms", "direction", "bid", "ask", "execution_price", "amount_in",
             "amount_out", "arb_profit", "lp_relative_loss", "lp_relative_loss_scaled",
             "cumulative_loss", "cumulative_loss_scaled"});
    double log_mult = -0.0;
    double log_mult_scaled = -0.0;
    for (std::size_t i = 0; i < run.events.size(); ++i) {
        const LossEvent& e = run.events[i];
        log_mult += std::log1p(-losses[i]);
        log_mult_scaled += std::log1p(-scaled[i]);
        t.add_row({num(static_cast<long long>(e.quote.timestamp_ms)), to_string(e.trade.direction),
                   num(e.quote.bid), num(e.quote.ask), num(e.trade.execution_price_ext),
                   num(e.trade.amount_in), num(e.trade.amount_out), num(e.trade.arb_profit),
                   num(losses[i]), num(scaled[i]), num(-std::expm1(log_mult)),
                   num(-std::expm1(log_mult_scaled))});
    }
    return t;
}

Table fee_returns_table(const FeeBacktest& bt, double k) {
    std::vector<double> returns;
    returns.reserve(bt.periods.size());
    for (const FeePeriod& p : bt.periods) returns.push_back(p.relative_return);
    const auto scaled = concentration_scale(returns, k);
    Table t({"block_number", "timestamp_ms", "relative_fee_return", "relative_fee_return_scaled",
             "cumulative_growth", "cumulative_growth_scaled"});
    double g = 1.0;
    double gs = 1.0;
    for (std::size_t i = 0; i < bt.periods.size(); ++i) {
        g *= 1.0 + returns[i];
        gs *= 1.0 + scaled[i];
        t.add_row({num(static_cast<long long>(bt.periods[i].block_number)),
                   num(static_cast<long long>(bt.periods[i].timestamp_ms)), num(returns[i]),
                   num(scaled[i]), num(g), num(gs)});
    }
    return t;
}

// Reads (timestamp_ms, value_column) pairs from a table this tool wrote.
std::vector<TimedValue> read_timed_column(const std::string& path, const std::string& column) {
    csv::LineReader reader(path);
    std::string line;
    if (!reader.next(line)) return {};
    const auto header = csv::split(line);
    std::size_t ts_col = header.size();
    std::size_t v_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "timestamp_ms") ts_col = i;
        if (header[i] == column) v_col = i;
    }
    if (ts_col == header.size() || v_col == header.size()) {
        throw ParseError(path, 1, "header lacks timestamp_ms or " + column);
    }
    std::vector<TimedValue> out;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto f = csv::split(line);
        TimedValue tv{};
        if (f.size() <= std::max(ts_col, v_col) || !csv::parse(f[ts_col], tv.timestamp_ms) ||
            !csv::parse(f[v_col], tv.value)) {
            throw ParseError(path, reader.line_number(), "malformed row");
        }
        out.push_back(tv);
    }
    return out;
}

std::vector<TimedValue> scale_values(std::vector<TimedValue> v, double k) {
    std::vector<double> raw;
    raw.reserve(v.size());
    for (const auto& tv : v) raw.push_back(tv.value);
    const auto scaled = concentration_scale(raw, k);
    for (std::size_t i = 0; i < v.size(); ++i) v[i].value = scaled[i];
    return v;
}

std::pair<double, double> fit_range_for(const RunConfig& c, const SweepResult& s) {
    if (c.fit_range) return *c.fit_range;
    return {s.parameters.front(), s.parameters.back()};
}

json fit_json(const std::optional<SlopeFit>& fit) {
    if (!fit) return nullptr;
    return {{"slope", fit->slope},
            {"intercept", fit->intercept},
            {"residual", fit->residual},
            {"range", {fit->range_min, fit->range_max}},
            {"points", fit->points}};
}

// Shared body of both sweep commands.
template <typename RunSweep>
void sweep_command(const RunConfig& c, const std::string& command, const std::string& param_col,
                   double param_scale, RunSweep&& run_sweep) {
    check_k(c);
    check_window(c);
    const fs::path dir = out_dir(c);
    report::Manifest manifest(command);
    manifest.parameters() = config_json(c);

    if (c.seeds < 1) throw ConfigError("--seeds must be >= 1");
    std::vector<std::pair<std::uint64_t, QuoteSeries>> feeds;
    std::string kind;
    if (!c.quotes.empty() || !c.klines.empty()) {
        Feed f = interval_feed(c, manifest);
        kind = f.kind;
        manifest.parameters()["source"] = f.quotes.source;
        feeds.emplace_back(c.seed, std::move(f.quotes));
    } else {
        kind = c.spread_bps > 0.0 ? "synthetic_bid_ask" : "synthetic_mid";
        json g = {{"sigma", c.sigma}, {"mu", c.mu},           {"step_ms", c.step_ms},
                  {"horizon_ms", c.horizon_ms}, {"seed", c.seed}, {"seeds", c.seeds},
                  {"spread_bps", c.spread_bps}};
        manifest.parameters()["gbm"] = g;
        for (int i = 0; i < c.seeds; ++i) {
            const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(i);
            feeds.emplace_back(seed, quotes_from_prices(gbm_generate(gbm_params(c, seed)),
                                                        c.spread_bps, c.pair, "gbm"));
        }
    }
    manifest.parameters()["feed"] = kind;

    Table sweep_table({"seed", param_col, "total_loss", "total_loss_scaled", "annualized_loss",
                       "trades", "blocks"});
    Table fit_table({"seed", "slope", "intercept", "residual", "fit_min", "fit_max", "points"});
    json fits = json::array();
    double slope_sum = 0.0;
    std::size_t slope_n = 0;
    for (const auto& [seed, quotes] : feeds) {
        SweepResult s = run_sweep(quotes);
        const auto range = fit_range_for(c, s);
        try {
            s.fit = loglog_slope(s, range.first, range.second);
        } catch (const FitError& e) {
            std::cerr << "note: seed " << seed << ": " << e.what() << '\n';
        }
        const auto scaled = concentration_scale(s.total_loss, c.concentration_k);
        for (std::size_t i = 0; i < s.parameters.size(); ++i) {
            sweep_table.add_row({num(static_cast<unsigned long long>(seed)),
                                 num(s.parameters[i] * param_scale), num(s.total_loss[i]),
                                 num(scaled[i]), num(s.annualized_loss[i]),
                                 num(static_cast<unsigned long long>(s.trades[i])),
                                 num(static_cast<unsigned long long>(s.blocks[i]))});
        }
        if (s.fit) {
            fit_table.add_row({num(static_cast<unsigned long long>(seed)), num(s.fit->slope),
                               num(s.fit->intercept), num(s.fit->residual),
                               num(s.fit->range_min * param_scale),
                               num(s.fit->range_max * param_scale),
                               num(static_cast<unsigned long long>(s.fit->points))});
            slope_sum += s.fit->slope;
            ++slope_n;
        }
        fits.push_back({{"seed", seed}, {"fit", fit_json(s.fit)}});
    }
    write_table(manifest, dir / "sweep.csv", sweep_table);
    write_table(manifest, dir / "fit.csv", fit_table);
    manifest.results()["fits"] = fits;
    if (slope_n > 0) manifest.results()["mean_slope"] = slope_sum / static_cast<double>(slope_n);
    manifest.write(dir);
}

}  // namespace

std::vector<std::int64_t> default_interval_grid(bool extended) {
    std::vector<std::int64_t> grid{100, 250, 500, 1000, 2000, 4000, 8000, 12000, 16000};
    if (extended) grid.insert(grid.end(), {30000, 60000, 120000, 180000, 240000, 300000});
    return grid;
}

void cmd_simulate_arb(const RunConfig& c) {
    check_k(c);
    check_window(c);
    const double fee = pool_fee(c);
    const fs::path dir = out_dir(c);
    report::Manifest manifest("simulate-arb");
    manifest.parameters() = config_json(c);

    const Feed feed = arb_feed(c, manifest);
    const LossSeries run = simulate(c, feed, fee);
    manifest.parameters()["feed"] = feed.kind;
    manifest.parameters()["source"] = feed.quotes.source;
    manifest.counters()["price_fills"] = feed.fills;

    write_table(manifest, dir / "loss_events.csv", loss_events_table(run, c.concentration_k));

    const auto scaled = concentration_scale(run.relative_losses(), c.concentration_k);
    const std::int64_t window = run.end_ms - run.start_ms;
    Table summary({"pair", "source", "feed", "fee", "blocks", "trades", "window_start_ms",
                   "window_end_ms", "total_loss", "total_loss_scaled", "annualized_loss",
                   "price_fills"});
    summary.add_row({c.pair, c.source, feed.kind, num(fee),
                     num(static_cast<unsigned long long>(run.blocks)),
                     num(static_cast<unsigned long long>(run.events.size())),
                     num(static_cast<long long>(run.start_ms)),
                     num(static_cast<long long>(run.end_ms)), num(run.total_loss),
                     num(compound_loss(scaled)),
                     window > 0 ? num(annualize_loss(run.total_loss, window)) : std::string(),
                     num(static_cast<unsigned long long>(feed.fills))});
    write_table(manifest, dir / "loss_summary.csv", summary);
    manifest.results()["total_loss"] = run.total_loss;
    manifest.write(dir);
}

void cmd_fees(const RunConfig& c) {
    check_k(c);
    check_window(c);
    const fs::path dir = out_dir(c);
    report::Manifest manifest("fees");
    manifest.parameters() = config_json(c);
    manifest.parameters()["aggregation"] = c.aggregation;
    manifest.parameters()["position_share"] = c.position_share;

    const auto records = load_swaps(c, manifest);
    const FeeBacktest bt = fee_backtest(c, records);
    write_table(manifest, dir / "fee_returns.csv", fee_returns_table(bt, c.concentration_k));

    const auto scaled = concentration_scale(bt.ledger.returns, c.concentration_k);
    Table summary({"pair", "swaps", "periods", "cumulative_growth", "cumulative_growth_scaled",
                   "total_fee_return"});
    summary.add_row({c.pair, num(static_cast<unsigned long long>(records.size())),
                     num(static_cast<unsigned long long>(bt.periods.size())),
                     num(bt.ledger.cumulative_growth), num(compound_growth(scaled)),
                     num(bt.ledger.cumulative_growth - 1.0)});
    write_table(manifest, dir / "fee_summary.csv", summary);
    manifest.results()["cumulative_growth"] = bt.ledger.cumulative_growth;
    manifest.write(dir);
}

void cmd_compare(const RunConfig& c) {
    check_k(c);
    check_window(c);
    if (c.period_ms <= 0 || c.ratio_window_days <= 0) {
        throw ConfigError("--period-ms and --ratio-window-days must be positive");
    }
    const fs::path dir = out_dir(c);
    report::Manifest manifest("compare");
    manifest.parameters() = config_json(c);

    std::vector<TimedValue> fees;
    std::vector<TimedValue> losses;
    if (!c.fee_returns_table.empty() || !c.loss_events_table.empty()) {
        require_file(c.fee_returns_table, "--fee-returns");
        require_file(c.loss_events_table, "--loss-events");
        manifest.add_input("fee_returns", c.fee_returns_table);
        manifest.add_input("loss_events", c.loss_events_table);
        fees = read_timed_column(c.fee_returns_table, "relative_fee_return");
        losses = read_timed_column(c.loss_events_table, "lp_relative_loss");
    } else {
        const auto records = load_swaps(c, manifest);
        for (const FeePeriod& p : fee_backtest(c, records).periods) {
            fees.push_back({p.timestamp_ms, p.relative_return});
        }
        const Feed feed = arb_feed(c, manifest);
        manifest.parameters()["feed"] = feed.kind;
        manifest.parameters()["source"] = feed.quotes.source;
        manifest.counters()["price_fills"] = feed.fills;
        for (const LossEvent& e : simulate(c, feed, pool_fee(c)).events) {
            losses.push_back({e.quote.timestamp_ms, e.trade.lp_relative_loss});
        }
    }
    fees = scale_values(std::move(fees), c.concentration_k);
    losses = scale_values(std::move(losses), c.concentration_k);

    ComparisonOptions opts;
    opts.period_ms = c.period_ms;
    opts.ratio_window_ms = static_cast<std::int64_t>(c.ratio_window_days) * kMsPerDay;
    manifest.parameters()["period_ms"] = c.period_ms;
    manifest.parameters()["ratio_window_days"] = c.ratio_window_days;
    const ComparisonReport rep = fees_vs_losses(fees, losses, opts);

    Table table({"period_start_ms", "fee_return", "loss", "cumulative_difference",
                 "trailing_ratio"});
    for (const ComparisonRow& r : rep.rows) {
        table.add_row({num(static_cast<long long>(r.period_start_ms)), num(r.fee_return),
                       num(r.loss), num(r.cumulative_difference),
                       r.trailing_ratio ? num(*r.trailing_ratio) : std::string()});
    }
    write_table(manifest, dir / "comparison.csv", table);

    Table summary({"pair", "periods", "total_fee_return", "total_loss", "compounded_fee_growth",
                   "compounded_loss"});
    summary.add_row({c.pair, num(static_cast<unsigned long long>(rep.rows.size())),
                     num(rep.total_fee_return), num(rep.total_loss),
                     num(rep.compounded_fee_growth), num(rep.compounded_loss)});
    write_table(manifest, dir / "comparison_summary.csv", summary);
    manifest.write(dir);
}

void cmd_sweep_blocktime(const RunConfig& c) {
    const double fee = pool_fee(c);
    const auto intervals = c.intervals_ms.empty() ? default_interval_grid(c.extended_grid)
                                                  : c.intervals_ms;
    SimOptions opts;
    opts.fees = fee_handling(c);
    sweep_command(c, "sweep-blocktime", "interval_ms", 1.0, [&](const QuoteSeries& quotes) {
        return blocktime_sweep(initial_pool(c, quotes, fee), quotes, intervals, opts);
    });
}

void cmd_sweep_fee(const RunConfig& c) {
    std::vector<double> fees;
    const std::vector<double> bps =
        c.fees_bps.empty() ? std::vector<double>{10, 20, 30, 50, 100} : c.fees_bps;
    for (double b : bps) fees.push_back(b / 1e4);
    const std::int64_t interval = c.interval_ms.value_or(12000);
    SimOptions opts;
    opts.fees = fee_handling(c);
    sweep_command(c, "sweep-fee", "fee_bps", 1e4, [&](const QuoteSeries& quotes) {
        return fee_sweep(initial_pool(c, quotes, 0.0), quotes, interval, fees, opts);
    });
}

void cmd_synth(const RunConfig& c) {
    if (c.sigma < 0.0) throw ConfigError("--sigma must be >= 0");
    if (c.spread_bps < 0.0) throw ConfigError("--spread-bps must be >= 0");
    if (c.step_ms <= 0 || c.horizon_ms < 0 || c.horizon_ms % c.step_ms != 0) {
        throw ValidationError("--horizon-ms must be a non-negative multiple of --step-ms");
    }
    const fs::path dir = out_dir(c);
    report::Manifest manifest("synth-gbm");
    manifest.parameters() = {{"sigma", c.sigma},           {"mu", c.mu},
                             {"step_ms", c.step_ms},       {"horizon_ms", c.horizon_ms},
                             {"seed", c.seed},             {"initial_price", c.initial_price.value_or(1000.0)},
                             {"start_ms", c.start_ms},     {"spread_bps", c.spread_bps}};

    std::vector<PricePoint> prices;
    if (c.sigma == 0.0) {
        // Degenerate diffusion: a flat series on the same grid.
        GbmParams g = gbm_params(c, c.seed);
        for (std::int64_t t = 0; t <= g.horizon_ms; t += g.step_ms) {
            prices.push_back({g.start_ms + t, g.initial_price});
        }
    } else {
        prices = gbm_generate(gbm_params(c, c.seed));
    }

    Table kl({"timestamp_ms", "open", "high", "low", "close", "volume"});
    for (const PricePoint& p : prices) {
        const std::string v = num(p.price);
        kl.add_row({num(static_cast<long long>(p.timestamp_ms)), v, v, v, v, "0"});
    }
    write_table(manifest, dir / "prices.csv", kl);

    Table qt({"timestamp_ms", "bid", "ask"});
    for (const Quote& q : quotes_from_prices(prices, c.spread_bps, c.pair, "gbm").quotes) {
        qt.add_row({num(static_cast<long long>(q.timestamp_ms)), num(q.bid), num(q.ask)});
    }
    write_table(manifest, dir / "quotes.csv", qt);
    manifest.write(dir);
}

namespace {

template <typename T>
std::vector<T> parse_list(const std::string& s, const std::string& flag) {
    std::vector<T> out;
    if (s.empty()) return out;
    for (auto field : csv::split(s)) {
        T v{};
        if (!csv::parse(field, v)) throw ConfigError(flag + ": bad list element '" + std::string(field) + "'");
        out.push_back(v);
    }
    return out;
}

template <typename T>
std::pair<T, T> parse_pair(const std::string& s, const std::string& flag) {
    const auto v = parse_list<T>(s, flag);
    if (v.size() != 2) throw ConfigError(flag + " expects two comma-separated values");
    return {v[0], v[1]};
}

std::string json_scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number_float()) return num(v.get<double>());
    throw ConfigError("unsupported config value " + v.dump());
}

// Expands a JSON config object into flags placed ahead of the command-line
// flags, so explicit flags win.
std::vector<std::string> config_flags(const std::string& path) {
    if (!fs::is_regular_file(path)) throw ConfigError("--config: no such file: " + path);
    std::ifstream in(path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("--config: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ConfigError("--config must hold a JSON object");
    std::vector<std::string> flags;
    for (const auto& [key, value] : doc.items()) {
        std::string name = key;
        std::replace(name.begin(), name.end(), '_', '-');
        const std::string flag = "--" + name;
        if (value.is_boolean()) {
            if (value.get<bool>()) flags.push_back(flag);
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& e : value) joined += (joined.empty() ? "" : ",") + json_scalar(e);
            flags.push_back(flag);
            flags.push_back(joined);
        } else {
            flags.push_back(flag);
            flags.push_back(json_scalar(value));
        }
    }
    return flags;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> rest;
    std::string config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (config.empty() || rest.size() < 2) return rest;
    auto flags = config_flags(config);
    rest.insert(rest.begin() + 2, flags.begin(), flags.end());
    return rest;
}

}  // namespace

int run(const std::vector<std::string>& raw_args) {
    RunConfig c;
    std::string window, intervals, fees_bps, fit_range;
    std::optional<double> initial_price;

    CLI::App app{"Arbitrage-loss and fee simulation for constant-product AMM liquidity"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_version_flag("--version", "lvrsim 0.1.0");

    auto common = [&](CLI::App* s) {
        s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        s->add_option("--pair", c.pair, "Pair label, e.g. WETH/USDC");
        s->add_option("--source", c.source, "Price-source label, e.g. binance-perp");
        s->add_option("--out", c.out, "Output directory")->required();
        s->add_option("--window", window, "start_ms,end_ms");
        s->add_option("--concentration-k", c.concentration_k, "Concentration factor (>= 1)");
        s->add_option("--seed", c.seed, "RNG seed for synthetic feeds");
        s->add_option("--config", "JSON config file; flags override its values");
    };
    auto pool_opts = [&](CLI::App* s) {
        s->add_option("--fee-bps", c.fee_bps, "Pool fee in basis points");
        s->add_option("--initial-price", initial_price, "Initial pool price (default: first quote)");
        s->add_option("--initial-value", c.initial_value, "Initial position value in Y");
        s->add_option("--fee-handling", c.fee_handling, "retain | withdraw");
    };
    auto feed_opts = [&](CLI::App* s) {
        s->add_option("--quotes", c.quotes, "Quote-update CSV (timestamp_ms,bid,ask)");
        s->add_option("--klines", c.klines, "Kline CSV (timestamp_ms,open,...)");
    };
    auto swap_opts = [&](CLI::App* s) {
        s->add_option("--swaps", c.swaps, "Swap-record CSV");
        s->add_option("--swaps-format", c.swaps_format, "records | raw-v3");
        s->add_option("--decimals0", c.decimals0, "Token0 decimals for raw-v3 input");
        s->add_option("--decimals1", c.decimals1, "Token1 decimals for raw-v3 input");
        s->add_option("--aggregation", c.aggregation, "swap | block");
        s->add_option("--position-share", c.position_share,
                      "Position liquidity as a share of the smallest pool liquidity");
    };
    auto gbm_opts = [&](CLI::App* s) {
        s->add_option("--sigma", c.sigma, "Annualised volatility");
        s->add_option("--mu", c.mu, "Annualised drift");
        s->add_option("--step-ms", c.step_ms, "GBM step");
        s->add_option("--horizon-ms", c.horizon_ms, "GBM horizon");
        s->add_option("--start-ms", c.start_ms, "First timestamp");
        s->add_option("--spread-bps", c.spread_bps, "Full bid/ask spread of synthetic quotes");
    };

    auto* sim = app.add_subcommand("simulate-arb", "Losses to arbitrageurs over a price feed");
    common(sim);
    pool_opts(sim);
    feed_opts(sim);
    sim->add_option("--blocks", c.blocks, "Block CSV (block_number,timestamp_s)");
    sim->add_option("--interval-ms", c.interval_ms, "Fixed block interval");

    auto* fees = app.add_subcommand("fees", "Fee returns of a simulated position");
    common(fees);
    swap_opts(fees);

    auto* cmp = app.add_subcommand("compare", "Fees versus losses to arbitrageurs");
    common(cmp);
    pool_opts(cmp);
    feed_opts(cmp);
    swap_opts(cmp);
    cmp->add_option("--blocks", c.blocks, "Block CSV (block_number,timestamp_s)");
    cmp->add_option("--interval-ms", c.interval_ms, "Fixed block interval");
    cmp->add_option("--fee-returns", c.fee_returns_table, "fee_returns.csv from `fees`");
    cmp->add_option("--loss-events", c.loss_events_table, "loss_events.csv from `simulate-arb`");
    cmp->add_option("--period-ms", c.period_ms, "Comparison period");
    cmp->add_option("--ratio-window-days", c.ratio_window_days, "Trailing ratio window");

    auto* sbt = app.add_subcommand("sweep-blocktime", "Loss as a function of block interval");
    common(sbt);
    pool_opts(sbt);
    feed_opts(sbt);
    gbm_opts(sbt);
    sbt->add_option("--seeds", c.seeds, "Number of consecutive GBM seeds");
    sbt->add_option("--intervals-ms", intervals, "Comma-separated interval grid");
    sbt->add_flag("--extended-grid", c.extended_grid, "Extend the default grid to 300 s");
    sbt->add_option("--fit-range", fit_range, "min,max interval for the slope fit");

    auto* sfe = app.add_subcommand("sweep-fee", "Loss as a function of pool fee");
    common(sfe);
    pool_opts(sfe);
    feed_opts(sfe);
    gbm_opts(sfe);
    sfe->add_option("--seeds", c.seeds, "Number of consecutive GBM seeds");
    sfe->add_option("--interval-ms", c.interval_ms, "Block interval (default 12000)");
    sfe->add_option("--fees-bps", fees_bps, "Comma-separated fee grid in bp");
    sfe->add_option("--fit-range", fit_range, "min,max fee (bp) for the slope fit");

    auto* syn = app.add_subcommand("synth-gbm", "Write a synthetic GBM price and quote feed");
    common(syn);
    gbm_opts(syn);
    syn->add_option("--initial-price", initial_price, "Starting price");

    try {
        const auto args = expand_config(raw_args);
        std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
        app.parse(std::move(reversed));
        c.initial_price = initial_price;
        if (!window.empty()) c.window = parse_pair<std::int64_t>(window, "--window");
        c.intervals_ms = parse_list<std::int64_t>(intervals, "--intervals-ms");
        c.fees_bps = parse_list<double>(fees_bps, "--fees-bps");
        if (!fit_range.empty()) {
            auto r = parse_pair<double>(fit_range, "--fit-range");
            if (sfe->parsed()) r = {r.first / 1e4, r.second / 1e4};
            c.fit_range = r;
        }

        if (sim->parsed()) {
            c.subcommand = "simulate-arb";
            cmd_simulate_arb(c);
        } else if (fees->parsed()) {
            c.subcommand = "fees";
            cmd_fees(c);
        } else if (cmp->parsed()) {
            c.subcommand = "compare";
            cmd_compare(c);
        } else if (sbt->parsed()) {
            c.subcommand = "sweep-blocktime";
            cmd_sweep_blocktime(c);
        } else if (sfe->parsed()) {
            c.subcommand = "sweep-fee";
            cmd_sweep_fee(c);
        } else if (syn->parsed()) {
            c.subcommand = "synth-gbm";
            cmd_synth(c);
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kConfigFailure;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const InsufficientData& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kSuccess;
}

}  // namespace lvr::cli

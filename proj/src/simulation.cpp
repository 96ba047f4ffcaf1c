#include "lvr/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "lvr/error.hpp"

namespace lvr {

BlockSchedule BlockSchedule::fixed(std::int64_t interval_ms, std::int64_t start_ms,
                                   std::int64_t end_ms) {
    if (interval_ms <= 0) throw ValidationError("block interval must be positive");
    if (end_ms < start_ms) throw ValidationError("block schedule window is empty");
    std::vector<std::int64_t> instants;
    instants.reserve(static_cast<std::size_t>((end_ms - start_ms) / interval_ms + 1));
    for (std::int64_t t = start_ms; t <= end_ms; t += interval_ms) instants.push_back(t);
    return {std::move(instants), interval_ms};
}

BlockSchedule BlockSchedule::explicit_times(std::vector<std::int64_t> instants_ms) {
    for (std::size_t i = 1; i < instants_ms.size(); ++i) {
        if (instants_ms[i] <= instants_ms[i - 1]) {
            throw ValidationError("block instants must be strictly increasing");
        }
    }
    return {std::move(instants_ms), std::nullopt};
}

std::vector<double> LossSeries::relative_losses() const {
    std::vector<double> out;
    out.reserve(events.size());
    for (const LossEvent& e : events) out.push_back(e.trade.lp_relative_loss);
    return out;
}

std::vector<ArbEvent> LossSeries::arb_events() const {
    std::vector<ArbEvent> out;
    out.reserve(events.size());
    for (const LossEvent& e : events) out.push_back({e.quote, e.trade});
    return out;
}

LossSeries run_arb_sim(const PoolState& initial, std::span<const Quote> quotes,
                       const BlockSchedule& schedule, const SimOptions& options) {
    LossSeries out;
    out.final_state = initial;
    const auto& instants = schedule.instants();
    out.blocks = instants.size();
    if (instants.empty()) return out;
    out.start_ms = instants.front();
    out.end_ms = instants.back();
    if (quotes.empty() || quotes.front().timestamp_ms > instants.front()) {
        throw InsufficientData("quotes do not cover the first block at " +
                               std::to_string(instants.front()));
    }

    PoolState state = initial;
    std::size_t qi = 0;
    double log_mult = -0.0;
    for (const std::int64_t t : instants) {
        while (qi + 1 < quotes.size() && quotes[qi + 1].timestamp_ms <= t) ++qi;
        const Quote& prevailing = quotes[qi];
        if (options.max_quote_age_ms > 0 && t - prevailing.timestamp_ms > options.max_quote_age_ms) {
            throw InsufficientData("quote gap before block at " + std::to_string(t));
        }
        Quote q = prevailing;
        q.timestamp_ms = t;
        const auto trade = optimal_arb_trade(state, q);
        if (!trade) continue;
        state = apply_arbitrage(state, *trade, options.fees);
        out.multiplier *= 1.0 - trade->lp_relative_loss;
        log_mult += std::log1p(-trade->lp_relative_loss);
        out.events.push_back({q, *trade});
    }
    out.total_loss = -std::expm1(log_mult);
    out.final_state = state;
    return out;
}

double annualize_loss(double total_loss, std::int64_t window_ms) {
    if (window_ms <= 0) throw InvalidInput("annualization window must be positive");
    const double log_mult = std::log1p(-total_loss);
    return -std::expm1(log_mult * static_cast<double>(kMsPerYear) / static_cast<double>(window_ms));
}

namespace {

void record(SweepResult& sweep, double parameter, const LossSeries& run) {
    sweep.parameters.push_back(parameter);
    sweep.total_loss.push_back(run.total_loss);
    sweep.annualized_loss.push_back(sweep.window_ms > 0
                                        ? annualize_loss(run.total_loss, sweep.window_ms)
                                        : 0.0);
    sweep.trades.push_back(run.events.size());
    sweep.blocks.push_back(run.blocks);
}

void require_quotes(const QuoteSeries& quotes) {
    if (quotes.quotes.empty()) throw InsufficientData("sweep needs at least one quote");
}

}  // namespace

SweepResult blocktime_sweep(const PoolState& initial, const QuoteSeries& quotes,
                            std::span<const std::int64_t> intervals_ms,
                            const SimOptions& options) {
    require_quotes(quotes);
    const std::int64_t resolution = update_resolution(quotes);
    for (std::size_t i = 0; i < intervals_ms.size(); ++i) {
        if (intervals_ms[i] <= 0) throw ValidationError("block interval must be positive");
        if (i > 0 && intervals_ms[i] <= intervals_ms[i - 1]) {
            throw ValidationError("block intervals must be strictly increasing");
        }
        if (resolution > 0 && intervals_ms[i] < resolution) {
            throw ValidationError("block interval " + std::to_string(intervals_ms[i]) +
                                  " ms is finer than the quote resolution of " +
                                  std::to_string(resolution) + " ms");
        }
    }
    const std::int64_t start = quotes.quotes.front().timestamp_ms;
    const std::int64_t end = quotes.quotes.back().timestamp_ms;
    SweepResult sweep;
    sweep.kind = SweepKind::block_interval;
    sweep.window_ms = end - start;
    for (const std::int64_t interval : intervals_ms) {
        const LossSeries run =
            run_arb_sim(initial, quotes.quotes, BlockSchedule::fixed(interval, start, end), options);
        record(sweep, static_cast<double>(interval), run);
    }
    return sweep;
}

SweepResult fee_sweep(const PoolState& initial, const QuoteSeries& quotes,
                      std::int64_t interval_ms, std::span<const double> fees,
                      const SimOptions& options) {
    require_quotes(quotes);
    for (std::size_t i = 0; i < fees.size(); ++i) {
        if (!(fees[i] >= 0.0 && fees[i] < 1.0)) {
            throw ValidationError("pool fee must lie in [0, 1)");
        }
        if (i > 0 && fees[i] <= fees[i - 1]) {
            throw ValidationError("fees must be strictly increasing");
        }
    }
    const std::int64_t resolution = update_resolution(quotes);
    if (resolution > 0 && interval_ms < resolution) {
        throw ValidationError("block interval is finer than the quote resolution");
    }
    const std::int64_t start = quotes.quotes.front().timestamp_ms;
    const std::int64_t end = quotes.quotes.back().timestamp_ms;
    const BlockSchedule schedule = BlockSchedule::fixed(interval_ms, start, end);
    SweepResult sweep;
    sweep.kind = SweepKind::fee;
    sweep.window_ms = end - start;
    for (const double fee : fees) {
        const LossSeries run = run_arb_sim(initial.with_fee(fee), quotes.quotes, schedule, options);
        record(sweep, fee, run);
    }
    return sweep;
}

SlopeFit loglog_slope(std::span<const double> parameters, std::span<const double> losses,
                      double range_min, double range_max) {
    if (parameters.size() != losses.size()) throw FitError("parameter and loss counts differ");
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < parameters.size(); ++i) {
        if (parameters[i] < range_min || parameters[i] > range_max) continue;
        if (!(losses[i] > 0.0) || !(parameters[i] > 0.0)) {
            throw FitError("log-log fit needs positive values in range");
        }
        lx.push_back(std::log(parameters[i]));
        ly.push_back(std::log(losses[i]));
    }
    if (lx.size() < 3) throw FitError("log-log fit needs at least three points in range");

    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw FitError("log-log fit needs distinct parameter values");

    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    fit.range_min = range_min;
    fit.range_max = range_max;
    fit.points = lx.size();
    return fit;
}

SlopeFit loglog_slope(const SweepResult& sweep, double range_min, double range_max) {
    return loglog_slope(sweep.parameters, sweep.total_loss, range_min, range_max);
}

std::vector<PricePoint> gbm_generate(const GbmParams& p) {
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) throw ValidationError("sigma must be positive");
    if (p.step_ms <= 0) throw ValidationError("step must be positive");
    if (p.horizon_ms < 0 || p.horizon_ms % p.step_ms != 0) {
        throw ValidationError("horizon must be a non-negative multiple of the step");
    }
    if (!(p.initial_price > 0.0)) throw ValidationError("initial price must be positive");

    const std::size_t steps = static_cast<std::size_t>(p.horizon_ms / p.step_ms);
    const double dt = static_cast<double>(p.step_ms) / static_cast<double>(kMsPerYear);
    const double drift = (p.mu - 0.5 * p.sigma * p.sigma) * dt;
    const double vol = p.sigma * std::sqrt(dt);

    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<PricePoint> out;
    out.reserve(steps + 1);
    double log_price = std::log(p.initial_price);
    out.push_back({p.start_ms, p.initial_price});
    for (std::size_t i = 1; i <= steps; ++i) {
        log_price += drift + vol * normal(rng);
        out.push_back({p.start_ms + static_cast<std::int64_t>(i) * p.step_ms, std::exp(log_price)});
    }
    return out;
}

ComparisonReport fees_vs_losses(std::span<const TimedValue> fee_returns,
                                std::span<const TimedValue> losses,
                                const ComparisonOptions& options) {
    if (options.period_ms <= 0 || options.ratio_window_ms < options.period_ms) {
        throw InvalidInput("comparison period must be positive and within the ratio window");
    }
    auto period_of = [&](std::int64_t t) {
        std::int64_t q = t / options.period_ms;
        if (t % options.period_ms < 0) --q;
        return q * options.period_ms;
    };

    struct Bucket {
        double fees = 0.0;
        double losses = 0.0;
    };
    std::map<std::int64_t, Bucket> buckets;
    ComparisonReport report;
    for (const TimedValue& f : fee_returns) {
        buckets[period_of(f.timestamp_ms)].fees += f.value;
        report.compounded_fee_growth *= 1.0 + f.value;
    }
    double loss_mult = 1.0;
    for (const TimedValue& l : losses) {
        buckets[period_of(l.timestamp_ms)].losses += l.value;
        loss_mult *= 1.0 - l.value;
    }
    report.compounded_loss = 1.0 - loss_mult;
    if (buckets.empty()) return report;

    // Dense period grid so the trailing window counts calendar time.
    const std::int64_t first = buckets.begin()->first;
    const std::int64_t last = buckets.rbegin()->first;
    const std::size_t trailing =
        static_cast<std::size_t>(options.ratio_window_ms / options.period_ms);
    std::vector<Bucket> dense;
    for (std::int64_t t = first; t <= last; t += options.period_ms) {
        const auto it = buckets.find(t);
        dense.push_back(it == buckets.end() ? Bucket{} : it->second);
    }

    double cumulative = 0.0;
    for (std::size_t i = 0; i < dense.size(); ++i) {
        cumulative += dense[i].fees - dense[i].losses;
        double fee_sum = 0.0;
        double loss_sum = 0.0;
        for (std::size_t j = i + 1 > trailing ? i + 1 - trailing : 0; j <= i; ++j) {
            fee_sum += dense[j].fees;
            loss_sum += dense[j].losses;
        }
        ComparisonRow row{first + static_cast<std::int64_t>(i) * options.period_ms, dense[i].fees,
                          dense[i].losses, cumulative, std::nullopt};
        if (loss_sum > 0.0) row.trailing_ratio = fee_sum / loss_sum;
        report.rows.push_back(row);
        report.total_fee_return += dense[i].fees;
        report.total_loss += dense[i].losses;
    }
    return report;
}

}  // namespace lvr

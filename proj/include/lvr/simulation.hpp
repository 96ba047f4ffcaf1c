// Arbitrage-loss simulation over quote feeds and block schedules, block-time
// and fee sweeps, synthetic GBM feeds, log-log slope fits and the
// fees-versus-losses comparison.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lvr/arbitrage.hpp"
#include "lvr/cpmm.hpp"
#include "lvr/price_feed.hpp"

namespace lvr {

inline constexpr std::int64_t kMsPerDay = 86'400'000;
inline constexpr std::int64_t kMsPerYear = 365 * kMsPerDay;

// Instants at which arbitrageurs may trade, strictly increasing.
class BlockSchedule {
public:
    // start, start + interval, ..., <= end.
    static BlockSchedule fixed(std::int64_t interval_ms, std::int64_t start_ms,
                               std::int64_t end_ms);
    static BlockSchedule explicit_times(std::vector<std::int64_t> instants_ms);

    const std::vector<std::int64_t>& instants() const noexcept { return instants_; }
    std::optional<std::int64_t> interval_ms() const noexcept { return interval_; }

private:
    BlockSchedule(std::vector<std::int64_t> instants, std::optional<std::int64_t> interval)
        : instants_(std::move(instants)), interval_(interval) {}

    std::vector<std::int64_t> instants_;
    std::optional<std::int64_t> interval_;
};

struct LossEvent {
    Quote quote;  // stamped with the block instant
    ArbTrade trade;
};

struct LossSeries {
    std::vector<LossEvent> events;
    std::size_t blocks = 0;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    double multiplier = 1.0;  // prod(1 - loss_t)
    double total_loss = 0.0;  // 1 - multiplier
    PoolState final_state{1.0, 1.0, 0.0};

    std::vector<double> relative_losses() const;
    std::vector<ArbEvent> arb_events() const;
};

struct SimOptions {
    FeeHandling fees = FeeHandling::retain;
    // Largest tolerated age of the prevailing quote at a block; 0 disables.
    std::int64_t max_quote_age_ms = 0;
};

// Evaluates the optimal arbitrage at every block against the prevailing quote
// and threads the pool state through the run. Throws InsufficientData if a
// block precedes the first quote or the prevailing quote is too old.
LossSeries run_arb_sim(const PoolState& initial, std::span<const Quote> quotes,
                       const BlockSchedule& schedule, const SimOptions& options = {});

// 1 - multiplier^(year / window): the window's compounded loss at a 365-day
// annual rate.
double annualize_loss(double total_loss, std::int64_t window_ms);

enum class SweepKind { block_interval, fee };

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS of log-space residuals
    double range_min = 0.0;
    double range_max = 0.0;
    std::size_t points = 0;
};

struct SweepResult {
    SweepKind kind = SweepKind::block_interval;
    std::vector<double> parameters;  // interval in ms, or fee fraction
    std::vector<double> total_loss;
    std::vector<double> annualized_loss;
    std::vector<std::size_t> trades;
    std::vector<std::size_t> blocks;
    std::int64_t window_ms = 0;
    std::optional<SlopeFit> fit;
};

// One run per interval over the quotes' full time span. Throws
// ValidationError for intervals that are not strictly increasing or are finer
// than the quote update resolution.
SweepResult blocktime_sweep(const PoolState& initial, const QuoteSeries& quotes,
                            std::span<const std::int64_t> intervals_ms,
                            const SimOptions& options = {});

// One run per fee at a fixed interval. Throws ValidationError for fees outside
// [0, 1) or not strictly increasing.
SweepResult fee_sweep(const PoolState& initial, const QuoteSeries& quotes,
                      std::int64_t interval_ms, std::span<const double> fees,
                      const SimOptions& options = {});

// Ordinary least squares of log(loss) on log(parameter) over the points with
// parameter in [range_min, range_max]. Throws FitError with fewer than three
// points or a non-positive loss in range.
SlopeFit loglog_slope(std::span<const double> parameters, std::span<const double> losses,
                      double range_min, double range_max);
SlopeFit loglog_slope(const SweepResult& sweep, double range_min, double range_max);

struct GbmParams {
    double sigma = 0.5;  // per sqrt(year)
    double mu = 0.0;     // per year
    std::int64_t step_ms = 1000;
    std::int64_t horizon_ms = kMsPerDay;
    std::uint64_t seed = 0;
    double initial_price = 1.0;
    std::int64_t start_ms = 0;
};

// Exact log-normal stepping, horizon / step + 1 points. Deterministic for a
// fixed seed. Throws ValidationError for sigma <= 0, step <= 0, or a horizon
// that is not a non-negative multiple of the step.
std::vector<PricePoint> gbm_generate(const GbmParams& params);

struct TimedValue {
    std::int64_t timestamp_ms;
    double value;
};

struct ComparisonRow {
    std::int64_t period_start_ms;
    double fee_return;  // sum of relative fee returns in the period
    double loss;        // sum of relative losses in the period
    double cumulative_difference;
    std::optional<double> trailing_ratio;  // absent when trailing losses are 0
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    double total_fee_return = 0.0;
    double total_loss = 0.0;
    double compounded_fee_growth = 1.0;
    double compounded_loss = 0.0;
};

struct ComparisonOptions {
    std::int64_t period_ms = kMsPerDay;
    std::int64_t ratio_window_ms = 30 * kMsPerDay;
};

// Buckets both series into UTC-aligned periods, then reports the running sum
// of (fee return - loss) and trailing fee / loss sums.
ComparisonReport fees_vs_losses(std::span<const TimedValue> fee_returns,
                                std::span<const TimedValue> losses,
                                const ComparisonOptions& options = {});

}  // namespace lvr

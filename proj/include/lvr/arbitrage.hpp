// Optimal arbitrage between a constant-product pool and an external market.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lvr/cpmm.hpp"

namespace lvr {

// Best bid/ask on the external market. A mid-price feed has bid == ask.
struct Quote {
    std::int64_t timestamp_ms = 0;
    double bid = 0.0;
    double ask = 0.0;

    double mid() const noexcept { return 0.5 * (bid + ask); }
    friend bool operator==(const Quote&, const Quote&) = default;
};

// Throws ValidationError unless 0 < bid <= ask.
void validate(const Quote& quote);

struct ArbTrade {
    Direction direction = Direction::YforX;
    double amount_in = 0.0;            // units of the token paid into the pool
    double amount_out = 0.0;           // units of the token taken from the pool
    double execution_price_ext = 0.0;  // bid (YforX) or ask (XforY)
    double arb_profit = 0.0;           // Y units
    double lp_relative_loss = 0.0;     // arb_profit / pre-trade position value
};

// Whether the swap fee stays in the reserves or is paid out to the LP.
enum class FeeHandling {
    retain,
    withdraw,
};

struct Band {
    double lower;
    double upper;
};

// (p (1 - f), p / (1 - f)): external prices inside the closed band admit no
// profitable trade.
Band no_arb_band(const PoolState& state) noexcept;

// Profit-maximising single trade against the quote, or nullopt when the quote
// lies inside the no-arbitrage band (boundary included).
std::optional<ArbTrade> optimal_arb_trade(const PoolState& state, const Quote& quote);

// arb_profit relative to the pre-trade position valued at the execution
// price. Throws InvalidInput if the trade was not sized against state_before.
double lp_loss(const ArbTrade& trade, const PoolState& state_before);

PoolState apply_arbitrage(const PoolState& state, const ArbTrade& trade,
                          FeeHandling fees = FeeHandling::retain);

// One instant of an arbitrage run: the prevailing quote and the trade, if any.
struct ArbEvent {
    Quote quote;
    std::optional<ArbTrade> trade;
};

enum class RebalanceSizing {
    // Hold exactly the pool's asset deltas; the running value difference to
    // the pool is the additive loss-versus-rebalancing in Y.
    same_units,
    // Execute the pool's trades scaled to the portfolio size and keep the
    // portfolio in the pool's composition. 1 - pool / portfolio is then the
    // compounded relative loss.
    proportional,
};

struct RebalancingPoint {
    std::int64_t timestamp_ms;
    double valuation_price;
    double portfolio_value;
    double pool_value;
};

// Benchmark portfolio that starts with the pool's reserves and executes the
// pool's trades at the external execution price. Values are taken after each
// event at the execution price (or the quote mid when no trade happened).
// Throws InvalidInput on out-of-order timestamps or trades that do not fit
// the evolving pool holdings.
std::vector<RebalancingPoint> rebalancing_portfolio_value(
    std::span<const ArbEvent> events, const PoolState& initial_state,
    RebalanceSizing sizing = RebalanceSizing::same_units,
    FeeHandling fees = FeeHandling::retain);

}  // namespace lvr

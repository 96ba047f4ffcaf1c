#include "lvr/arbitrage.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lvr/error.hpp"

namespace lvr {

namespace {

constexpr double kPairingTolerance = 1e-9;

bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

// sqrt(1 + gap) - 1 for gap > 0, accurate when gap is tiny.
double sqrt1p_minus_one(double gap) {
    return std::expm1(0.5 * std::log1p(gap));
}

void check_pairing(const ArbTrade& trade, const SwapResult& swap) {
    if (!close_rel(swap.amount_out, trade.amount_out, kPairingTolerance)) {
        throw InvalidInput("arbitrage trade does not match the pool state it is applied to");
    }
}

}  // namespace

void validate(const Quote& quote) {
    if (!(quote.bid > 0.0) || !std::isfinite(quote.bid) || !std::isfinite(quote.ask)) {
        throw ValidationError("quote at " + std::to_string(quote.timestamp_ms) +
                              " has a non-positive bid");
    }
    if (quote.bid > quote.ask) {
        throw ValidationError("quote at " + std::to_string(quote.timestamp_ms) +
                              " has bid > ask");
    }
}

Band no_arb_band(const PoolState& state) noexcept {
    const double p = spot_price(state);
    const double g = 1.0 - state.fee();
    return {p * g, p / g};
}

std::optional<ArbTrade> optimal_arb_trade(const PoolState& state, const Quote& quote) {
    validate(quote);
    const Band band = no_arb_band(state);
    const double g = 1.0 - state.fee();
    const double x = state.reserve_x();
    const double y = state.reserve_y();

    ArbTrade t;
    if (quote.bid > band.upper) {
        // Buy X from the pool, sell it at the bid. The effective input brings
        // the fee-adjusted marginal price up to the bid:
        //   y + d = sqrt(g k bid) = y sqrt(bid / upper).
        const double s = sqrt1p_minus_one((quote.bid - band.upper) / band.upper);
        t.direction = Direction::YforX;
        t.amount_in = y * s / g;
        t.execution_price_ext = quote.bid;
        // bid * out - in, rearranged to stay positive for marginal exits.
        t.arb_profit = y * s * s / g;
    } else if (quote.ask < band.lower) {
        // Buy X at the ask, sell it into the pool:
        //   x + d = sqrt(g k / ask) = x sqrt(lower / ask).
        const double s = sqrt1p_minus_one((band.lower - quote.ask) / quote.ask);
        t.direction = Direction::XforY;
        t.amount_in = x * s / g;
        t.execution_price_ext = quote.ask;
        t.arb_profit = y * s * s / ((1.0 + s) * (1.0 + s));
    } else {
        return std::nullopt;
    }
    t.amount_out = swap_exact_in(state, t.direction, t.amount_in).amount_out;
    t.lp_relative_loss = t.arb_profit / position_value(state, t.execution_price_ext);
    return t;
}

double lp_loss(const ArbTrade& trade, const PoolState& state_before) {
    if (!(trade.execution_price_ext > 0.0)) {
        throw InvalidInput("trade has no execution price");
    }
    const SwapResult swap = swap_exact_in(state_before, trade.direction, trade.amount_in);
    check_pairing(trade, swap);
    return trade.arb_profit / position_value(state_before, trade.execution_price_ext);
}

PoolState apply_arbitrage(const PoolState& state, const ArbTrade& trade, FeeHandling fees) {
    const SwapResult swap = swap_exact_in(state, trade.direction, trade.amount_in);
    check_pairing(trade, swap);
    if (fees == FeeHandling::retain || swap.fee_paid == 0.0) {
        return swap.new_state;
    }
    const PoolState& s = swap.new_state;
    if (trade.direction == Direction::YforX) {
        return {s.reserve_x(), s.reserve_y() - swap.fee_paid, s.fee()};
    }
    return {s.reserve_x() - swap.fee_paid, s.reserve_y(), s.fee()};
}

std::vector<RebalancingPoint> rebalancing_portfolio_value(std::span<const ArbEvent> events,
                                                          const PoolState& initial_state,
                                                          RebalanceSizing sizing,
                                                          FeeHandling fees) {
    double pool_x = initial_state.reserve_x();
    double pool_y = initial_state.reserve_y();
    double port_x = pool_x;
    double port_y = pool_y;
    const double retained = fees == FeeHandling::retain ? 1.0 : 1.0 - initial_state.fee();

    std::vector<RebalancingPoint> out;
    out.reserve(events.size());
    std::int64_t last_ts = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const ArbEvent& ev = events[i];
        if (i > 0 && ev.quote.timestamp_ms < last_ts) {
            throw InvalidInput("rebalancing events out of chronological order at " +
                               std::to_string(ev.quote.timestamp_ms));
        }
        last_ts = ev.quote.timestamp_ms;

        double price = ev.quote.mid();
        if (ev.trade && ev.trade->amount_in > 0.0) {
            const ArbTrade& t = *ev.trade;
            price = t.execution_price_ext;
            const bool y_in = t.direction == Direction::YforX;
            const double pool_out = y_in ? pool_x : pool_y;
            if (!(t.amount_out > 0.0) || t.amount_out >= pool_out || !(price > 0.0)) {
                throw InvalidInput("trade at " + std::to_string(ev.quote.timestamp_ms) +
                                   " does not fit the pool holdings");
            }
            // Portfolio-to-pool size ratio before the trade.
            const double scale = sizing == RebalanceSizing::proportional
                                     ? (port_x * price + port_y) / (pool_x * price + pool_y)
                                     : 1.0;
            // The portfolio mirrors the pool's X delta and settles it in Y at
            // the external price.
            if (y_in) {
                pool_x -= t.amount_out;
                pool_y += t.amount_in * retained;
                port_x -= scale * t.amount_out;
                port_y += scale * t.amount_out * price;
            } else {
                const double x_in = t.amount_in * retained;
                pool_x += x_in;
                pool_y -= t.amount_out;
                port_x += scale * x_in;
                port_y -= scale * x_in * price;
            }
            if (sizing == RebalanceSizing::proportional) {
                // Self-financing rebalance into the pool's composition.
                const double wealth = port_x * price + port_y;
                const double pool_wealth = pool_x * price + pool_y;
                port_x = wealth * pool_x / pool_wealth;
                port_y = wealth * pool_y / pool_wealth;
            }
        }
        out.push_back({ev.quote.timestamp_ms, price, port_x * price + port_y,
                       pool_x * price + pool_y});
    }
    return out;
}

}  // namespace lvr

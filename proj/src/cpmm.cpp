#include "lvr/cpmm.hpp"

#include <cmath>
#include <string>

#include "lvr/error.hpp"

namespace lvr {

const char* to_string(Direction d) noexcept {
    return d == Direction::YforX ? "YforX" : "XforY";
}

PoolState::PoolState(double reserve_x, double reserve_y, double fee)
    : reserve_x_(reserve_x), reserve_y_(reserve_y), fee_(fee) {
    if (!(std::isfinite(reserve_x) && reserve_x > 0.0) ||
        !(std::isfinite(reserve_y) && reserve_y > 0.0)) {
        throw InvalidInput("pool reserves must be positive and finite");
    }
    if (!(fee >= 0.0 && fee < 1.0)) {
        throw InvalidInput("pool fee must lie in [0, 1), got " + std::to_string(fee));
    }
}

PoolState PoolState::at_price(double price, double value, double fee) {
    if (!(price > 0.0) || !(value > 0.0)) {
        throw InvalidInput("initial price and value must be positive");
    }
    // Half the value in each asset.
    return {0.5 * value / price, 0.5 * value, fee};
}

double spot_price(const PoolState& state) noexcept {
    return state.reserve_y() / state.reserve_x();
}

double position_value(const PoolState& state, double external_price) {
    if (!(external_price > 0.0) || !std::isfinite(external_price)) {
        throw InvalidInput("external price must be positive");
    }
    return state.reserve_x() * external_price + state.reserve_y();
}

SwapResult swap_exact_in(const PoolState& state, Direction direction, double amount_in) {
    if (!(amount_in >= 0.0) || !std::isfinite(amount_in)) {
        throw InvalidInput("swap amount_in must be non-negative and finite");
    }
    if (amount_in == 0.0) {
        return {0.0, 0.0, 0.0, state};
    }
    const double fee_paid = state.fee() * amount_in;
    const double effective = amount_in - fee_paid;

    const bool y_in = direction == Direction::YforX;
    const double reserve_in = y_in ? state.reserve_y() : state.reserve_x();
    const double reserve_out = y_in ? state.reserve_x() : state.reserve_y();

    // reserve_out - k / (reserve_in + effective), without the cancellation.
    const double amount_out = reserve_out * effective / (reserve_in + effective);
    const double new_out = reserve_out - amount_out;
    const double new_in = reserve_in + amount_in;
    if (!(new_out > 0.0) || !std::isfinite(new_in)) {
        throw InvalidInput("swap would exhaust the output reserve");
    }
    PoolState next = y_in ? PoolState(new_out, new_in, state.fee())
                          : PoolState(new_in, new_out, state.fee());
    return {amount_in, fee_paid, amount_out, next};
}

std::vector<double> concentration_scale(std::span<const double> relative_series, double factor_k) {
    if (!(factor_k >= 1.0) || !std::isfinite(factor_k)) {
        throw InvalidInput("concentration factor must be >= 1");
    }
    std::vector<double> out;
    out.reserve(relative_series.size());
    for (double v : relative_series) out.push_back(v * factor_k);
    return out;
}

double compound_growth(std::span<const double> returns) {
    double g = 1.0;
    for (double r : returns) g *= 1.0 + r;
    return g;
}

double compound_loss(std::span<const double> losses) {
    // 1 - prod(1 - l) cancels badly when the total is small; work in log space.
    double s = -0.0;
    for (double l : losses) s += std::log1p(-l);
    return -std::expm1(s);
}

}  // namespace lvr

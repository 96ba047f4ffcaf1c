// Constant-product pool state, pricing and swap execution.
//
// Prices are always quoted in units of Y per unit of X; Y is the quote asset.
// All functions are pure: a PoolState is an immutable value and every state
// transition returns a new one.
#pragma once

#include <span>
#include <vector>

namespace lvr {

enum class Direction {
    YforX,  // trader pays Y into the pool and receives X
    XforY,  // trader pays X into the pool and receives Y
};

const char* to_string(Direction d) noexcept;

class PoolState {
public:
    // Throws InvalidInput unless both reserves are positive and finite and
    // fee is in [0, 1).
    PoolState(double reserve_x, double reserve_y, double fee);

    // Pool with the given marginal price whose position is worth `value` Y.
    static PoolState at_price(double price, double value, double fee);

    double reserve_x() const noexcept { return reserve_x_; }
    double reserve_y() const noexcept { return reserve_y_; }
    double fee() const noexcept { return fee_; }
    double invariant() const noexcept { return reserve_x_ * reserve_y_; }

    PoolState with_fee(double fee) const { return {reserve_x_, reserve_y_, fee}; }
    PoolState scaled(double c) const { return {reserve_x_ * c, reserve_y_ * c, fee_}; }

    friend bool operator==(const PoolState&, const PoolState&) = default;

private:
    double reserve_x_;
    double reserve_y_;
    double fee_;
};

struct SwapResult {
    double amount_in;   // input token units, fee included
    double fee_paid;    // input token units, fee * amount_in
    double amount_out;  // output token units
    PoolState new_state;
};

double spot_price(const PoolState& state) noexcept;

// Value of the pool reserves in Y at an external price.
double position_value(const PoolState& state, double external_price);

// Fee is taken from the input side; the full input (fee included) is added
// to the reserves. Zero input is a no-op. Throws InvalidInput for negative
// or non-finite input, or when the trade would exhaust the output reserve.
SwapResult swap_exact_in(const PoolState& state, Direction direction, double amount_in);

// Multiplies each per-period relative value by the concentration factor k of
// a ranged position. Throws InvalidInput when k < 1.
std::vector<double> concentration_scale(std::span<const double> relative_series, double factor_k);

// prod(1 + r_t) over a series of relative returns.
double compound_growth(std::span<const double> returns);

// 1 - prod(1 - l_t) over a series of relative losses.
double compound_loss(std::span<const double> losses);

}  // namespace lvr

// Fee income of a small full-range position, attributed pro rata from
// historical swaps at the post-swap in-range liquidity.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lvr {

enum class Token { X, Y };

struct SwapRecord {
    std::int64_t block_number = 0;
    std::int64_t timestamp_ms = 0;
    Token input_token = Token::Y;
    double amount_in = 0.0;            // input token units, fee included
    double fee_rate = 0.0;             // fraction of amount_in
    double post_swap_price = 0.0;      // Y per X after the swap
    double post_swap_liquidity = 0.0;  // in-range L = sqrt(x y) after the swap
};

// Throws ValidationError unless amount_in > 0, liquidity > 0, fee in (0, 1)
// and price > 0.
void validate(const SwapRecord& record);

// Value-semantics ledger; accumulate() returns an updated copy.
struct PositionLedger {
    double position_liquidity = 0.0;
    double cumulative_growth = 1.0;
    std::vector<double> returns;
};

// fee_rate * amount_in * position / pool liquidity, in input-token units.
// Throws InvalidInput when the position exceeds the in-range liquidity.
double fee_earned(const SwapRecord& record, double position_liquidity);

// Fee converted to Y at the post-swap price, relative to the position value.
double relative_fee_return(const SwapRecord& record, double fee_amount, double position_value_y);

// Compounds the returns into the ledger; liquidity grows with it. Throws
// InvalidInput for any return <= -1 or non-finite.
PositionLedger accumulate(PositionLedger ledger, std::span<const double> returns);

// Value in Y of a full-range position of liquidity L at price P: 2 L sqrt(P).
double full_range_value(double liquidity, double price);

enum class FeeAggregation {
    per_swap,
    // Swaps of one block share the end-of-block liquidity and price.
    per_block,
};

struct FeePeriod {
    std::int64_t block_number;
    std::int64_t timestamp_ms;
    double relative_return;
};

struct FeeBacktest {
    std::vector<FeePeriod> periods;
    PositionLedger ledger;
};

// Replays swaps in chronological order, compounding each period's fee into
// the position.
FeeBacktest run_fee_backtest(std::span<const SwapRecord> records, double position_liquidity,
                             FeeAggregation aggregation = FeeAggregation::per_swap);

// Swap-record CSV `block_number,timestamp_ms,input_token,amount_in,fee_rate,
// post_swap_price,post_swap_liquidity`; input_token is X or Y.
std::vector<SwapRecord> load_swap_records(const std::string& path);

// Price (token1 per token0, human units) from a Q64.96 square-root price given
// as a decimal integer string.
double price_from_sqrt_x96(const std::string& sqrt_price_x96, int decimals0, int decimals1);

// Converts a raw concentrated-liquidity swap export
//   block_number,timestamp_s,amount0,amount1,sqrt_price_x96,liquidity,fee_ppm
// (signed raw integer amounts, pool-positive = paid into the pool) into swap
// records with token0 as X and token1 as Y.
std::vector<SwapRecord> load_raw_v3_swaps(const std::string& path, int decimals0, int decimals1);

}  // namespace lvr

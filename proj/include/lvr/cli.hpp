// Command-line driver: subcommands simulate-arb, fees, compare,
// sweep-blocktime, sweep-fee and synth-gbm. Every command writes CSV tables
// plus manifest.json into --out.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lvr::cli {

enum ExitCode : int {
    kSuccess = 0,
    kRuntimeFailure = 1,
    kConfigFailure = 2,
};

struct RunConfig {
    std::string subcommand;
    std::string pair = "X/Y";
    std::string source;  // price-source label, e.g. binance-perp
    double fee_bps = 30.0;
    std::string quotes;
    std::string klines;
    std::string blocks;
    std::string swaps;
    std::string swaps_format = "records";  // records | raw-v3
    int decimals0 = 18;
    int decimals1 = 18;
    std::string fee_returns_table;
    std::string loss_events_table;
    std::optional<std::int64_t> interval_ms;
    std::optional<std::pair<std::int64_t, std::int64_t>> window;
    std::string out;
    std::uint64_t seed = 0;
    int seeds = 1;
    double concentration_k = 1.0;
    std::optional<double> initial_price;
    double initial_value = 1e6;
    std::string fee_handling = "retain";  // retain | withdraw
    std::string aggregation = "swap";     // swap | block
    double position_share = 1e-6;
    std::int64_t period_ms = 86'400'000;
    int ratio_window_days = 30;
    // Synthetic feed.
    double sigma = 0.5;
    double mu = 0.0;
    std::int64_t step_ms = 100;
    std::int64_t horizon_ms = 86'400'000;
    std::int64_t start_ms = 0;
    double spread_bps = 0.0;
    // Sweeps.
    std::vector<std::int64_t> intervals_ms;
    bool extended_grid = false;
    std::vector<double> fees_bps;
    std::optional<std::pair<double, double>> fit_range;
};

std::vector<std::int64_t> default_interval_grid(bool extended);

// Parses argv-style arguments (program name first), runs the subcommand and
// maps failures to exit codes; diagnostics go to stderr.
int run(const std::vector<std::string>& args);

// Subcommand bodies; they throw on failure.
void cmd_simulate_arb(const RunConfig& config);
void cmd_fees(const RunConfig& config);
void cmd_compare(const RunConfig& config);
void cmd_sweep_blocktime(const RunConfig& config);
void cmd_sweep_fee(const RunConfig& config);
void cmd_synth(const RunConfig& config);

}  // namespace lvr::cli

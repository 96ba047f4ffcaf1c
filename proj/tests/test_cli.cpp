#include <doctest.h>

#include <string>
#include <vector>

#include "json.hpp"
#include "lvr/cli.hpp"
#include "lvr/report.hpp"
#include "util.hpp"

using testutil::fixture;
using testutil::read_file;
using testutil::TempDir;

namespace {

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "lvrsim");
    return lvr::cli::run(args);
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < s.size()) {
        const std::size_t end = s.find('\n', start);
        out.push_back(s.substr(start, end - start));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t end = line.find(',', start);
        out.push_back(line.substr(start, end - start));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

// Column values of a CSV written by the tool.
std::vector<std::string> column(const std::string& csv, const std::string& name) {
    const auto ls = lines(csv);
    const auto header = fields(ls.at(0));
    std::size_t c = 0;
    while (c < header.size() && header[c] != name) ++c;
    REQUIRE(c < header.size());
    std::vector<std::string> out;
    for (std::size_t i = 1; i < ls.size(); ++i) {
        if (!ls[i].empty()) out.push_back(fields(ls[i]).at(c));
    }
    return out;
}

nlohmann::json manifest(const std::filesystem::path& dir) {
    return nlohmann::json::parse(read_file(dir / "manifest.json"));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synthetic feed") {
    TempDir d;
    const auto out = d.path() / "g";
    REQUIRE(run({"synth-gbm", "--out", out.string(), "--sigma", "0.4", "--step-ms", "1000",
                 "--horizon-ms", "60000", "--seed", "3", "--spread-bps", "2"}) == 0);
    const auto prices = read_file(out / "prices.csv");
    CHECK(lines(prices).at(0) == "timestamp_ms,open,high,low,close,volume,schema_version");
    CHECK(column(prices, "timestamp_ms").size() == 61);
    CHECK(column(prices, "schema_version").front() == "1");
    const auto quotes = read_file(out / "quotes.csv");
    const auto bid = column(quotes, "bid");
    const auto ask = column(quotes, "ask");
    for (std::size_t i = 0; i < bid.size(); ++i) CHECK(std::stod(bid[i]) < std::stod(ask[i]));

    const auto m = manifest(out);
    CHECK(m["command"] == "synth-gbm");
    CHECK(m["outputs"].size() == 2);
    CHECK(m["outputs"][0]["sha256"] == lvr::report::sha256_hex(prices));

    SUBCASE("fixed seed reproduces the files") {
        const auto again = d.path() / "g2";
        REQUIRE(run({"synth-gbm", "--out", again.string(), "--sigma", "0.4", "--step-ms", "1000",
                     "--horizon-ms", "60000", "--seed", "3", "--spread-bps", "2"}) == 0);
        CHECK(read_file(again / "prices.csv") == prices);
        CHECK(read_file(again / "quotes.csv") == quotes);
    }
    SUBCASE("zero volatility is flat") {
        const auto flat = d.path() / "flat";
        REQUIRE(run({"synth-gbm", "--out", flat.string(), "--sigma", "0", "--step-ms", "1000",
                     "--horizon-ms", "10000", "--initial-price", "5"}) == 0);
        for (const auto& p : column(read_file(flat / "prices.csv"), "open")) CHECK(p == "5");
    }
    SUBCASE("horizon not a multiple of the step") {
        CHECK(run({"synth-gbm", "--out", (d.path() / "bad").string(), "--step-ms", "300",
                   "--horizon-ms", "1000"}) == 2);
    }
}

TEST_CASE("simulate-arb") {
    TempDir d;
    const auto out = d.path() / "a";
    const std::vector<std::string> args{"simulate-arb", "--out", out.string(), "--quotes",
                                        fixture("quotes_small.csv"), "--interval-ms", "1000",
                                        "--fee-bps", "1"};
    REQUIRE(run(args) == 0);
    const auto events = read_file(out / "loss_events.csv");
    CHECK_FALSE(column(events, "lp_relative_loss").empty());
    const auto summary = read_file(out / "loss_summary.csv");
    CHECK(column(summary, "feed").at(0) == "bid_ask");
    const auto m = manifest(out);
    CHECK(m["inputs"][0]["sha256"] == lvr::report::sha256_file(fixture("quotes_small.csv")));
    CHECK(m["counters"]["duplicates_dropped"] == 1);

    SUBCASE("rerun gives identical tables") {
        auto again = args;
        again[2] = (d.path() / "b").string();
        REQUIRE(run(again) == 0);
        CHECK(read_file(d.path() / "b" / "loss_events.csv") == events);
        CHECK(read_file(d.path() / "b" / "loss_summary.csv") == summary);
    }
    SUBCASE("concentration scales the loss columns") {
        auto scaled = args;
        scaled[2] = (d.path() / "k").string();
        scaled.insert(scaled.end(), {"--concentration-k", "10"});
        REQUIRE(run(scaled) == 0);
        const auto raw = column(read_file(d.path() / "k" / "loss_events.csv"), "lp_relative_loss");
        const auto k = column(read_file(d.path() / "k" / "loss_events.csv"), "lp_relative_loss_scaled");
        for (std::size_t i = 0; i < raw.size(); ++i) {
            CHECK(std::stod(k[i]) == doctest::Approx(10 * std::stod(raw[i])).epsilon(1e-12));
        }
    }
    SUBCASE("window restricts the run") {
        const auto w = d.path() / "w";
        REQUIRE(run({"simulate-arb", "--out", w.string(), "--quotes", fixture("quotes_small.csv"),
                     "--interval-ms", "1000", "--window", "1700000010000,1700000100000"}) == 0);
        const auto s = read_file(w / "loss_summary.csv");
        CHECK(column(s, "window_start_ms").at(0) == "1700000010000");
        CHECK(column(s, "window_end_ms").at(0) == "1700000100000");
    }
}

TEST_CASE("simulate-arb over historical blocks") {
    TempDir d;
    const auto out = d.path() / "h";
    REQUIRE(run({"simulate-arb", "--out", out.string(), "--klines", fixture("klines_small.csv"),
                 "--blocks", fixture("blocks_small.csv"), "--fee-bps", "5"}) == 0);
    const auto s = read_file(out / "loss_summary.csv");
    CHECK(column(s, "feed").at(0) == "mid");
    CHECK(column(s, "blocks").at(0) == "25");
    CHECK(column(s, "price_fills").at(0) == "1");
    CHECK(manifest(out)["counters"]["price_fills"] == 1);
    CHECK(manifest(out)["parameters"]["source"] == fixture("klines_small.csv"));
}

TEST_CASE("source label") {
    TempDir d;
    const auto out = d.path() / "s";
    REQUIRE(run({"simulate-arb", "--out", out.string(), "--klines", fixture("klines_small.csv"),
                 "--interval-ms", "12000", "--source", "binance-perp"}) == 0);
    CHECK(column(read_file(out / "loss_summary.csv"), "source").at(0) == "binance-perp");
    CHECK(manifest(out)["parameters"]["source"] == "binance-perp");
}

TEST_CASE("constant price gives zero loss") {
    TempDir d;
    const auto g = d.path() / "g";
    REQUIRE(run({"synth-gbm", "--out", g.string(), "--sigma", "0", "--step-ms", "1000",
                 "--horizon-ms", "600000"}) == 0);
    const auto out = d.path() / "a";
    REQUIRE(run({"simulate-arb", "--out", out.string(), "--klines", (g / "prices.csv").string(),
                 "--interval-ms", "12000"}) == 0);
    CHECK(column(read_file(out / "loss_summary.csv"), "total_loss").at(0) == "0");
    CHECK(column(read_file(out / "loss_events.csv"), "lp_relative_loss").empty());
}

TEST_CASE("configuration errors exit with 2") {
    TempDir d;
    const auto out = (d.path() / "x").string();
    const std::string missing = (d.path() / "nope.csv").string();
    CHECK(run({"simulate-arb", "--out", out, "--quotes", missing, "--interval-ms", "100"}) == 2);
    CHECK(run({"fees", "--out", out, "--swaps", missing}) == 2);
    CHECK(run({"simulate-arb", "--out", out, "--quotes", fixture("quotes_small.csv")}) == 2);
    CHECK(run({"simulate-arb", "--out", out, "--quotes", fixture("quotes_small.csv"),
               "--interval-ms", "1000", "--fee-bps", "10000"}) == 2);
    CHECK(run({"simulate-arb", "--out", out, "--quotes", fixture("quotes_small.csv"),
               "--interval-ms", "1000", "--window", "5,5"}) == 2);
    CHECK(run({"sweep-blocktime", "--out", out, "--quotes", fixture("quotes_small.csv"),
               "--intervals-ms", "10,1000,2000"}) == 2);
    CHECK(run({"fees", "--out", out, "--swaps", fixture("swaps_1000.csv"),
               "--concentration-k", "0.5"}) == 2);
    CHECK(run({"nonsense"}) == 2);
    CHECK(run({"fees", "--swaps", fixture("swaps_1000.csv")}) == 2);
}

TEST_CASE("config file with flag overrides") {
    TempDir d;
    const auto cfg = d.write("run.json", nlohmann::json{{"quotes", fixture("quotes_small.csv")},
                                                        {"interval_ms", 5000},
                                                        {"fee_bps", 30}}
                                             .dump());
    const auto a = d.path() / "a";
    REQUIRE(run({"simulate-arb", "--config", cfg, "--out", a.string(), "--fee-bps", "1"}) == 0);
    const auto m = manifest(a);
    CHECK(m["parameters"]["fee_bps"] == 1.0);
    CHECK(m["parameters"]["interval_ms"] == 5000);
    CHECK(run({"simulate-arb", "--config", (d.path() / "none.json").string(), "--out",
               a.string()}) == 2);
}

TEST_CASE("fees") {
    TempDir d;
    const auto out = d.path() / "f";
    REQUIRE(run({"fees", "--out", out.string(), "--swaps", fixture("swaps_1000.csv"),
                 "--position-share", "1e-4"}) == 0);
    const auto returns = read_file(out / "fee_returns.csv");
    CHECK(column(returns, "relative_fee_return").size() == 1000);
    const auto growth = std::stod(column(read_file(out / "fee_summary.csv"), "cumulative_growth").at(0));
    const auto expected = nlohmann::json::parse(read_file(fixture("swaps_1000_expected.json")));
    CHECK(growth == doctest::Approx(expected["growth_per_swap"].get<double>()).epsilon(1e-9));

    const auto blocks = d.path() / "fb";
    REQUIRE(run({"fees", "--out", blocks.string(), "--swaps", fixture("swaps_1000.csv"),
                 "--aggregation", "block"}) == 0);
    CHECK(column(read_file(blocks / "fee_returns.csv"), "block_number").size() ==
          expected["blocks"].get<std::size_t>());
}

TEST_CASE("compare") {
    TempDir d;
    SUBCASE("fees equal to losses") {
        const auto fees = d.write("f.csv",
                                  "timestamp_ms,relative_fee_return\n0,0.001\n86400000,0.002\n");
        const auto losses = d.write("l.csv",
                                    "timestamp_ms,lp_relative_loss\n10,0.001\n86400010,0.002\n");
        const auto out = d.path() / "c";
        REQUIRE(run({"compare", "--out", out.string(), "--fee-returns", fees, "--loss-events",
                     losses}) == 0);
        const auto c = read_file(out / "comparison.csv");
        for (const auto& v : column(c, "cumulative_difference")) CHECK(std::stod(v) == 0.0);
        for (const auto& v : column(c, "trailing_ratio")) CHECK(v == "1");
    }
    SUBCASE("fees only") {
        const auto fees = d.write("f.csv", "timestamp_ms,relative_fee_return\n0,0.001\n"
                                           "86400000,0.002\n172800000,0.001\n");
        const auto losses = d.write("l.csv", "timestamp_ms,lp_relative_loss\n");
        const auto out = d.path() / "c";
        REQUIRE(run({"compare", "--out", out.string(), "--fee-returns", fees, "--loss-events",
                     losses}) == 0);
        const auto c = read_file(out / "comparison.csv");
        const auto diff = column(c, "cumulative_difference");
        for (std::size_t i = 1; i < diff.size(); ++i) CHECK(std::stod(diff[i]) > std::stod(diff[i - 1]));
        for (const auto& v : column(c, "trailing_ratio")) CHECK(v.empty());
    }
    SUBCASE("tables written by the other commands") {
        const auto f = d.path() / "f";
        const auto a = d.path() / "a";
        REQUIRE(run({"fees", "--out", f.string(), "--swaps", fixture("swaps_1000.csv")}) == 0);
        REQUIRE(run({"simulate-arb", "--out", a.string(), "--quotes", fixture("quotes_small.csv"),
                     "--interval-ms", "1000"}) == 0);
        const auto out = d.path() / "c";
        REQUIRE(run({"compare", "--out", out.string(), "--fee-returns",
                     (f / "fee_returns.csv").string(), "--loss-events",
                     (a / "loss_events.csv").string()}) == 0);
        CHECK_FALSE(column(read_file(out / "comparison.csv"), "period_start_ms").empty());
    }
}

TEST_CASE("sweeps") {
    TempDir d;
    SUBCASE("block time on a quote file") {
        const auto out = d.path() / "s";
        REQUIRE(run({"sweep-blocktime", "--out", out.string(), "--quotes",
                     fixture("quotes_small.csv"), "--fee-bps", "0", "--intervals-ms",
                     "100,200,500,1000,2000", "--fit-range", "100,2000"}) == 0);
        CHECK(column(read_file(out / "sweep.csv"), "interval_ms").size() == 5);
        const auto m = manifest(out);
        CHECK(m["results"]["fits"][0]["fit"]["range"] == nlohmann::json::array({100.0, 2000.0}));
    }
    SUBCASE("synthetic seeds are reproducible") {
        const std::vector<std::string> base{"--sigma", "0.5", "--step-ms", "1000", "--horizon-ms",
                                            "21600000", "--seeds", "2", "--seed", "7"};
        auto a = base;
        a.insert(a.begin(), {"sweep-fee", "--out", (d.path() / "a").string()});
        auto b = base;
        b.insert(b.begin(), {"sweep-fee", "--out", (d.path() / "b").string()});
        REQUIRE(run(a) == 0);
        REQUIRE(run(b) == 0);
        CHECK(read_file(d.path() / "a" / "sweep.csv") == read_file(d.path() / "b" / "sweep.csv"));
        CHECK(read_file(d.path() / "a" / "fit.csv") == read_file(d.path() / "b" / "fit.csv"));
        CHECK(column(read_file(d.path() / "a" / "sweep.csv"), "fee_bps").size() == 10);
        const auto m = manifest(d.path() / "a");
        CHECK(m["results"]["fits"][0]["fit"]["range"] == nlohmann::json::array({0.001, 0.01}));
    }
}

TEST_CASE("default interval grid") {
    const auto g = lvr::cli::default_interval_grid(false);
    CHECK(g == std::vector<std::int64_t>{100, 250, 500, 1000, 2000, 4000, 8000, 12000, 16000});
    const auto e = lvr::cli::default_interval_grid(true);
    CHECK(e.size() == 15);
    CHECK(e.back() == 300000);
}

}  // TEST_SUITE

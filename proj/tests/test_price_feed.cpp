#include <doctest.h>
#include <zlib.h>

#include <string>
#include <vector>

#include "lvr/error.hpp"
#include "lvr/log.hpp"
#include "lvr/price_feed.hpp"
#include "util.hpp"

using namespace lvr;
using testutil::TempDir;

namespace {

QuoteSeries series(std::vector<Quote> q) {
    QuoteSeries s;
    s.quotes = std::move(q);
    return s;
}

// Collects warnings for the lifetime of the object.
struct WarningCapture {
    std::vector<std::string> messages;
    WarningCapture() {
        set_warning_sink([this](const std::string& m) { messages.push_back(m); });
    }
    ~WarningCapture() { set_warning_sink(nullptr); }
};

}  // namespace

TEST_SUITE("price_feed") {

TEST_CASE("klines") {
    TempDir dir;
    SUBCASE("open price of each row") {
        const auto p = dir.write("k.csv", "1672531200000,1200.50,1201,1199,1200.9,10\n"
                                          "1672531201000,1200.90,1202,1200,1201.5,3\n");
        const auto k = load_klines(p);
        REQUIRE(k.size() == 2);
        CHECK(k[0] == PricePoint{1672531200000, 1200.50});
        CHECK(k[1] == PricePoint{1672531201000, 1200.90});
    }
    SUBCASE("header is detected") {
        const auto p = dir.write("k.csv", "timestamp_ms,open,high,low,close,volume\n"
                                          "1000,5,5,5,5,0\n");
        CHECK(load_klines(p) == std::vector<PricePoint>{{1000, 5}});
    }
    SUBCASE("empty file") {
        CHECK(load_klines(dir.write("k.csv", "")).empty());
    }
    SUBCASE("duplicate timestamp") {
        const auto p = dir.write("k.csv", "1000,5,5,5,5,0\n1000,6,6,6,6,0\n");
        CHECK_THROWS_AS(load_klines(p), ValidationError);
    }
    SUBCASE("unsorted rows") {
        const auto p = dir.write("k.csv", "2000,5,5,5,5,0\n1000,6,6,6,6,0\n");
        CHECK_THROWS_AS(load_klines(p), ValidationError);
    }
    SUBCASE("malformed row reports its line") {
        const auto p = dir.write("k.csv", "ts,open\n1000,5\n2000,abc\n");
        try {
            load_klines(p);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_klines((dir.path() / "none.csv").string()), IoError);
    }
    SUBCASE("gzip input") {
        const auto p = (dir.path() / "k.csv.gz").string();
        gzFile gz = gzopen(p.c_str(), "wb");
        const std::string body = "timestamp_ms,open\n1000,5\n2000,6\n";
        gzwrite(gz, body.data(), static_cast<unsigned>(body.size()));
        gzclose(gz);
        CHECK(load_klines(p) == std::vector<PricePoint>{{1000, 5}, {2000, 6}});
    }
}

TEST_CASE("quote updates") {
    TempDir dir;
    SUBCASE("bid and ask") {
        const auto q = load_quote_updates(dir.write("q.csv", "0,99,101\n"));
        REQUIRE(q.quotes.size() == 1);
        CHECK(q.quotes[0] == Quote{0, 99, 101});
    }
    SUBCASE("crossed quote") {
        CHECK_THROWS_AS(load_quote_updates(dir.write("q.csv", "0,101,99\n")), ValidationError);
    }
    SUBCASE("same millisecond keeps the last update") {
        WarningCapture warnings;
        const auto q = load_quote_updates(dir.write("q.csv", "0,99,101\n5,98,100\n5,97,99\n9,96,98\n"));
        REQUIRE(q.quotes.size() == 3);
        CHECK(q.quotes[1] == Quote{5, 97, 99});
        CHECK(q.duplicates_dropped == 1);
        CHECK(warnings.messages.size() == 1);
    }
    SUBCASE("bundled fixture") {
        WarningCapture warnings;
        const auto q = load_quote_updates(testutil::fixture("quotes_small.csv"));
        CHECK(q.quotes.size() == 3000);
        CHECK(q.duplicates_dropped == 1);
        CHECK(update_resolution(q) == 100);
        CHECK_NOTHROW(validate(q));
    }
}

TEST_CASE("blocks") {
    TempDir dir;
    const auto b = load_blocks(dir.write("b.csv", "block_number,timestamp_s\n100,12\n101,24\n"));
    REQUIRE(b.size() == 2);
    CHECK(b[0].number == 100);
    CHECK(b[0].timestamp_ms == 12000);
    CHECK(b[1].timestamp_ms == 24000);
    CHECK_THROWS_AS(load_blocks(dir.write("b2.csv", "100,12\n101,12\n")), ValidationError);
}

TEST_CASE("series validation") {
    CHECK_THROWS_AS(validate(std::vector<PricePoint>{{0, 1}, {0, 2}}), ValidationError);
    CHECK_THROWS_AS(validate(std::vector<PricePoint>{{0, -1}}), ValidationError);
    CHECK_THROWS_AS(validate(series({{0, 2, 1}})), ValidationError);
    CHECK_NOTHROW(validate(series({{0, 1, 2}, {1, 1, 1}})));
}

TEST_CASE("quote lookup") {
    const auto s = series({{0, 99, 101}, {5000, 100, 102}});
    CHECK(quote_at(s.quotes, 0).bid == 99);
    CHECK(quote_at(s.quotes, 4999).bid == 99);
    CHECK(quote_at(s.quotes, 5000).bid == 100);
    CHECK(quote_at(s.quotes, 99999).bid == 100);
    CHECK_THROWS_AS(quote_at(s.quotes, -1), InsufficientData);
}

TEST_CASE("resample by last observation") {
    const auto s = series({{0, 99, 101}, {5000, 100, 102}});
    SUBCASE("hand-computed grid") {
        const auto r = resample_locf(s, 4000, 0, 8000);
        CHECK(r.quotes == std::vector<Quote>{{0, 99, 101}, {4000, 99, 101}, {8000, 100, 102}});
    }
    SUBCASE("interval longer than the window") {
        const auto r = resample_locf(s, 10000, 0, 8000);
        CHECK(r.quotes == std::vector<Quote>{{0, 99, 101}});
    }
    SUBCASE("constant input") {
        const auto c = series({{0, 5, 5}});
        const auto r = resample_locf(c, 250, 0, 10000);
        CHECK(r.quotes.size() == 41);
        for (const Quote& q : r.quotes) CHECK(q.bid == 5);
    }
    SUBCASE("window starts before the data") {
        CHECK_THROWS_AS(resample_locf(s, 1000, -1, 8000), InsufficientData);
    }
    SUBCASE("bad interval") {
        CHECK_THROWS_AS(resample_locf(s, 0, 0, 8000), InvalidInput);
    }
}

TEST_CASE("resampling properties on a random feed") {
    const auto q = load_quote_updates(testutil::fixture("quotes_small.csv"));
    const std::int64_t t0 = q.quotes.front().timestamp_ms;
    const std::int64_t t1 = q.quotes.back().timestamp_ms;
    for (std::int64_t d : {100, 300, 700, 1000}) {
        const auto r = resample_locf(q, d, t0, t1);
        // Exact arithmetic grid with values drawn from the input.
        for (std::size_t i = 0; i < r.quotes.size(); ++i) {
            CHECK(r.quotes[i].timestamp_ms == t0 + static_cast<std::int64_t>(i) * d);
            const Quote& src = quote_at(q.quotes, r.quotes[i].timestamp_ms);
            CHECK(r.quotes[i].bid == src.bid);
            CHECK(r.quotes[i].ask == src.ask);
        }
        CHECK(r.quotes.back().timestamp_ms + d > t1);
        // Coarsening: d then 2d equals 2d directly.
        const auto twice = resample_locf(r, 2 * d, t0, t1);
        CHECK(twice.quotes == resample_locf(q, 2 * d, t0, t1).quotes);
    }
}

TEST_CASE("cross pairs") {
    SUBCASE("mid prices") {
        const std::vector<PricePoint> ldo{{0, 2.5}};
        const std::vector<PricePoint> eth{{0, 2500}};
        const auto c = derive_cross_pair(ldo, eth);
        REQUIRE(c.size() == 1);
        CHECK(c[0].price == doctest::Approx(0.001).epsilon(1e-15));
    }
    SUBCASE("series with itself") {
        const std::vector<PricePoint> a{{0, 3}, {1, 7}, {2, 0.1}};
        for (const auto& p : derive_cross_pair(a, a)) CHECK(p.price == 1.0);
        const auto q = load_quote_updates(testutil::fixture("quotes_small.csv"));
        for (const Quote& x : derive_cross_pair(q, q).quotes) {
            CHECK(x.bid <= 1.0);
            CHECK(x.ask >= 1.0);
        }
    }
    SUBCASE("conservative bid and ask") {
        const auto c = derive_cross_pair(series({{0, 2.4, 2.6}}), series({{0, 2400, 2600}}));
        CHECK(c.quotes[0].bid == doctest::Approx(9.231e-4).epsilon(1e-4));
        CHECK(c.quotes[0].ask == doctest::Approx(1.0833e-3).epsilon(1e-4));
        CHECK(c.quotes[0].bid == 2.4 / 2600);
        CHECK(c.quotes[0].ask == 2.6 / 2400);
    }
    SUBCASE("grid mismatch") {
        CHECK_THROWS_AS(derive_cross_pair(std::vector<PricePoint>{{0, 1}},
                                          std::vector<PricePoint>{{1, 1}}),
                        InvalidInput);
        CHECK_THROWS_AS(derive_cross_pair(std::vector<PricePoint>{{0, 1}},
                                          std::vector<PricePoint>{{0, 1}, {1, 1}}),
                        InvalidInput);
        CHECK_THROWS_AS(derive_cross_pair(series({{0, 1, 1}}), series({{3, 1, 1}})), InvalidInput);
    }
}

TEST_CASE("gap substitution") {
    WarningCapture warnings;
    const std::vector<PricePoint> primary{{0, 1}, {1000, 1.1}, {5000, 1.5}, {6000, 1.6}};
    const std::vector<PricePoint> fallback{{0, 2}, {1500, 2.15}, {2000, 2.2}, {3000, 2.3},
                                           {4000, 2.4}, {5000, 2.5}, {6000, 2.6}};
    SUBCASE("empty gap is the identity") {
        const auto s = substitute_gap(primary, fallback, TimeRange{3000, 3000});
        CHECK(s.series == primary);
        CHECK(s.splice_points.empty());
    }
    SUBCASE("fallback fills the window") {
        const auto s = substitute_gap(primary, fallback, TimeRange{2000, 5000});
        const std::vector<PricePoint> expected{{0, 1},      {1000, 1.1}, {2000, 2.2},
                                               {3000, 2.3}, {4000, 2.4}, {5000, 1.5},
                                               {6000, 1.6}};
        CHECK(s.series == expected);
        CHECK(s.splice_points == std::vector<std::int64_t>{2000, 5000});
        CHECK(warnings.messages.size() == 1);
    }
    SUBCASE("primary empty inside the gap stays continuous") {
        const auto s = substitute_gap(primary, fallback, TimeRange{1200, 5000});
        // The fallback value prevailing at the gap start is placed on it.
        CHECK(s.series[2] == PricePoint{1200, 2.0});
        CHECK_NOTHROW(validate(s.series));
        CHECK(quote_at(to_quote_series(s.series, "", "").quotes, 1800).bid == 2.15);
    }
    SUBCASE("fallback lacks coverage") {
        CHECK_THROWS_AS(substitute_gap(primary, fallback, TimeRange{2000, 7000}), InsufficientData);
        const std::vector<PricePoint> late{{2500, 1}, {9000, 1}};
        CHECK_THROWS_AS(substitute_gap(primary, late, TimeRange{2000, 5000}), InsufficientData);
    }
    SUBCASE("quotes") {
        const std::vector<Quote> p{{0, 1, 1}, {4000, 1, 1}};
        const std::vector<Quote> f{{0, 2, 3}, {4000, 2, 3}};
        const auto s = substitute_gap(p, f, TimeRange{1000, 3000});
        CHECK(s.series == std::vector<Quote>{{0, 1, 1}, {1000, 2, 3}, {4000, 1, 1}});
    }
}

TEST_CASE("alignment to blocks") {
    std::vector<PricePoint> every_second;
    for (int s = 0; s <= 30; ++s) every_second.push_back({s * 1000, 100.0 + s});
    SUBCASE("block seconds present") {
        const std::vector<std::int64_t> blocks{12000, 24000};
        const auto a = align_to_blocks(every_second, blocks);
        CHECK(a.points == std::vector<PricePoint>{{12000, 112}, {24000, 124}});
        CHECK(a.filled == 0);
    }
    SUBCASE("missing second falls back") {
        std::vector<PricePoint> holed = every_second;
        holed.erase(holed.begin() + 13);
        const std::vector<std::int64_t> blocks{13000};
        const auto a = align_to_blocks(holed, blocks);
        CHECK(a.points == std::vector<PricePoint>{{13000, 112}});
        CHECK(a.filled == 1);
    }
    SUBCASE("no blocks") {
        const auto a = align_to_blocks(every_second, std::vector<std::int64_t>{});
        CHECK(a.points.empty());
        CHECK(a.filled == 0);
    }
    SUBCASE("block before the data") {
        const std::vector<std::int64_t> blocks{-5000};
        CHECK_THROWS_AS(align_to_blocks(every_second, blocks), InsufficientData);
    }
    SUBCASE("bundled fixture") {
        const auto k = load_klines(testutil::fixture("klines_small.csv"));
        std::vector<std::int64_t> blocks;
        for (const Block& b : load_blocks(testutil::fixture("blocks_small.csv"))) {
            blocks.push_back(b.timestamp_ms);
        }
        const auto a = align_to_blocks(k, blocks);
        CHECK(a.points.size() == 25);
        // Second 61 is missing from the klines and block 5 lands on it.
        CHECK(a.filled == 1);
    }
}

}  // TEST_SUITE

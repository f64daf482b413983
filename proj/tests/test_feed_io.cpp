#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mbo/errors.hpp"
#include "mbo/feed_io.hpp"
#include "mbo/rng.hpp"

using namespace mbo;

TEST_SUITE_BEGIN("feed_io");

namespace {

// The five example rows from the feed schema documentation.
const char* kTableRows[] = {
    "2018-01-02 09:21:15.717500766,462805645163273214,1,,2,,",
    "2018-01-02 09:21:18.585446702,462805645163298476,1,1,1,68.54,8334.0",
    "2018-01-02 09:21:20.680552032,462805645163297649,1,1,0,68.56,3227.0",
    "2018-01-02 09:21:20.944574722,462805645163297649,1,,2,,",
    "2018-01-02 09:21:20.945483443,462805645163298567,1,2,1,68.59,5100.0",
};

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

MboMessage random_valid_message(Rng& rng, Timestamp ts) {
    MboMessage msg;
    msg.timestamp = ts;
    msg.order_id = rng.next_u64();
    msg.order_type = rng.bernoulli(0.9) ? OrderType::kLimit : OrderType::kMarket;
    int action = static_cast<int>(rng.below(3));
    if (action == 2) {
        msg.action = Action::kCancel;
        return msg;
    }
    msg.action = action == 1 ? Action::kAdd : Action::kUpdate;
    msg.side = rng.bernoulli(0.5) ? Side::kBuy : Side::kSell;
    msg.price = Decimal::from_raw(rng.range(1, 4'000'000));
    msg.size = Decimal::from_raw(rng.range(1, 100'000'0));
    return msg;
}

}  // namespace

TEST_CASE("parses the documented add row exactly") {
    MboMessage msg = parse_mbo_line(kTableRows[1]);
    CHECK(msg.order_id == 462805645163298476ULL);
    CHECK(msg.order_type == OrderType::kLimit);
    REQUIRE(msg.side.has_value());
    CHECK(*msg.side == Side::kBuy);
    CHECK(msg.action == Action::kAdd);
    REQUIRE(msg.price.has_value());
    CHECK(msg.price->raw() == 685400);  // 68.54 with no float drift
    REQUIRE(msg.size.has_value());
    CHECK(msg.size->raw() == 83340000);
    CHECK(msg.timestamp.to_string() == "2018-01-02 09:21:18.585446702");
}

TEST_CASE("parses a cancel with absent side/price/size") {
    MboMessage msg = parse_mbo_line(kTableRows[0]);
    CHECK(msg.action == Action::kCancel);
    CHECK_FALSE(msg.side.has_value());
    CHECK_FALSE(msg.price.has_value());
    CHECK_FALSE(msg.size.has_value());
}

TEST_CASE("serialisation reproduces the documented row text") {
    for (const char* row : kTableRows) {
        MboMessage msg = parse_mbo_line(row);
        CHECK(serialize_mbo(msg) == row);
    }
}

TEST_CASE("rejects malformed rows with the reason") {
    CHECK_THROWS_WITH_AS(parse_mbo_line("x,1,1,1,1,68.54,10"),
                         doctest::Contains("malformed timestamp"), ParseError);
    CHECK_THROWS_AS(parse_mbo_line("2018-01-02 09:21:18.585446702,abc,1,1,1,68.54,10"),
                    ParseError);
    // Add with missing price/size.
    CHECK_THROWS_AS(parse_mbo_line("2018-01-02 09:21:18.585446702,5,1,1,1,,"), ParseError);
    // Unknown enum codes.
    CHECK_THROWS_AS(parse_mbo_line("2018-01-02 09:21:18.585446702,5,7,1,1,68.54,10"), ParseError);
    CHECK_THROWS_AS(parse_mbo_line("2018-01-02 09:21:18.585446702,5,1,3,1,68.54,10"), ParseError);
    CHECK_THROWS_AS(parse_mbo_line("2018-01-02 09:21:18.585446702,5,1,1,9,68.54,10"), ParseError);
    // Cancel carrying a price.
    CHECK_THROWS_AS(parse_mbo_line("2018-01-02 09:21:18.585446702,5,1,,2,68.54,"), ParseError);
    // Wrong field count.
    CHECK_THROWS_AS(parse_mbo_line("2018-01-02 09:21:18.585446702,5,1,1,1,68.54"), ParseError);
}

TEST_CASE("round-trip property over seeded random messages") {
    Rng rng(20180102);
    Timestamp ts = Timestamp::from_civil(2018, 1, 2, 9, 0, 0, 0);
    for (int i = 0; i < 10'000; ++i) {
        ts = ts + static_cast<std::int64_t>(rng.below(1'000'000'000));
        MboMessage msg = random_valid_message(rng, ts);
        MboMessage back = parse_mbo_line(serialize_mbo(msg));
        REQUIRE(back == msg);
    }
}

TEST_CASE("read_feed yields rows in order and checks the header") {
    std::string path = temp_path("mbo_feed_test.csv");
    {
        std::ofstream out(path);
        out << kFeedHeader << "\n";
        for (const char* row : kTableRows) out << row << "\n";
    }
    std::vector<MboMessage> msgs = read_feed(path);
    REQUIRE(msgs.size() == 5);
    CHECK(msgs[0].action == Action::kCancel);
    CHECK(msgs[4].side == Side::kSell);

    SUBCASE("empty file with header only") {
        std::ofstream(path) << kFeedHeader << "\n";
        CHECK(read_feed(path).empty());
    }
    SUBCASE("bad header aborts") {
        std::ofstream(path) << "time,stuff\n";
        CHECK_THROWS_AS(read_feed(path), ParseError);
    }
    SUBCASE("timestamp regression aborts with row number") {
        std::ofstream out(path);
        out << kFeedHeader << "\n" << kTableRows[1] << "\n" << kTableRows[0] << "\n";
        out.close();
        CHECK_THROWS_WITH_AS(read_feed(path), doctest::Contains("row 2"), DataError);
    }
    SUBCASE("malformed row names its row number") {
        std::ofstream out(path);
        out << kFeedHeader << "\n" << kTableRows[0] << "\n" << "garbage\n";
        out.close();
        CHECK_THROWS_WITH_AS(read_feed(path), doctest::Contains("row 2"), ParseError);
    }
    std::remove(path.c_str());
}

TEST_CASE("missing feed file reports an io error") {
    CHECK_THROWS_AS(read_feed("/nonexistent/feed.csv"), IoError);
}

TEST_CASE("snapshot round-trip and invariants") {
    LobSnapshot snap;
    REQUIRE(Timestamp::parse("2018-01-02 09:21:18.585446702", snap.timestamp));
    snap.asks = {{Decimal::from_raw(700200), Decimal::from_int(300)},
                 {Decimal::from_raw(700400), Decimal::from_int(7580)}};
    snap.bids = {{Decimal::from_raw(700000), Decimal::from_int(120)}};
    CHECK(snapshot_violation(snap).empty());

    LobSnapshot back = parse_snapshot_line(serialize_snapshot(snap));
    CHECK(back == snap);

    SUBCASE("crossed snapshot is rejected") {
        snap.bids[0].price = Decimal::from_raw(700300);
        CHECK_FALSE(snapshot_violation(snap).empty());
    }
    SUBCASE("unsorted asks are rejected") {
        std::swap(snap.asks[0], snap.asks[1]);
        CHECK_FALSE(snapshot_violation(snap).empty());
    }
}

TEST_SUITE_END();

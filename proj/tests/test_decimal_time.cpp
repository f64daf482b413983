#include <doctest.h>

#include "mbo/decimal.hpp"
#include "mbo/timestamp.hpp"

using namespace mbo;

TEST_SUITE_BEGIN("decimal_time");

TEST_CASE("decimal parses and scales exactly") {
    Decimal d;
    REQUIRE(Decimal::parse("68.54", d));
    CHECK(d.raw() == 685400);
    REQUIRE(Decimal::parse("8334.0", d));
    CHECK(d.raw() == 83340000);
    REQUIRE(Decimal::parse("0.0001", d));
    CHECK(d.raw() == 1);
    REQUIRE(Decimal::parse("-0.25", d));
    CHECK(d.raw() == -2500);
    REQUIRE(Decimal::parse("70", d));
    CHECK(d.raw() == 700000);
    // Digits past the 4th fractional place are accepted only when zero.
    REQUIRE(Decimal::parse("1.23450000", d));
    CHECK(d.raw() == 12345);
    CHECK_FALSE(Decimal::parse("1.23456", d));
    CHECK_FALSE(Decimal::parse("", d));
    CHECK_FALSE(Decimal::parse("12.", d));
    CHECK_FALSE(Decimal::parse(".5", d));
    CHECK_FALSE(Decimal::parse("1,5", d));
    CHECK_FALSE(Decimal::parse("abc", d));
}

TEST_CASE("decimal formatting matches the feed's canonical shapes") {
    CHECK(Decimal::from_raw(685400).to_string(0) == "68.54");
    CHECK(Decimal::from_raw(83340000).to_string(1) == "8334.0");
    CHECK(Decimal::from_raw(700000).to_string(0) == "70");
    CHECK(Decimal::from_raw(700000).to_string(1) == "70.0");
    CHECK(Decimal::from_raw(-2500).to_string(0) == "-0.25");
    CHECK(Decimal::from_raw(1).to_string(0) == "0.0001");
}

TEST_CASE("decimal times 1e4 is an exact integer for <= 4 decimals") {
    // The property behind exact level keys: raw() IS value * 1e4.
    for (const char* text : {"0.0001", "99.99", "123.4567", "5100.0", "1"}) {
        Decimal d;
        REQUIRE(Decimal::parse(text, d));
        Decimal round_trip;
        REQUIRE(Decimal::parse(d.to_string(0), round_trip));
        CHECK(round_trip.raw() == d.raw());
    }
}

TEST_CASE("tick arithmetic") {
    Decimal price, tick;
    REQUIRE(Decimal::parse("70.04", price));
    REQUIRE(Decimal::parse("0.01", tick));
    CHECK(price.is_multiple_of(tick));
    CHECK(price.div_ticks(tick) == 7004);
    Decimal off;
    REQUIRE(Decimal::parse("70.045", off));
    CHECK_FALSE(off.is_multiple_of(tick));
}

TEST_CASE("timestamp round-trips the Table-style format") {
    Timestamp ts;
    REQUIRE(Timestamp::parse("2018-01-02 09:21:18.585446702", ts));
    CHECK(ts.to_string() == "2018-01-02 09:21:18.585446702");
    CHECK(ts.date_string() == "2018-01-02");

    REQUIRE(Timestamp::parse("2018-01-02 09:21:15.717500766", ts));
    Timestamp later;
    REQUIRE(Timestamp::parse("2018-01-02 09:21:20.944574722", later));
    CHECK(ts < later);
    CHECK(ts.day_index() == later.day_index());
}

TEST_CASE("timestamp rejects malformed text") {
    Timestamp ts;
    CHECK_FALSE(Timestamp::parse("x", ts));
    CHECK_FALSE(Timestamp::parse("2018-01-02T09:21:18.585446702", ts));
    CHECK_FALSE(Timestamp::parse("2018-01-02 09:21:18.585", ts));  // 9 digits required
    CHECK_FALSE(Timestamp::parse("2018-13-02 09:21:18.585446702", ts));
    CHECK_FALSE(Timestamp::parse("2018-01-02 25:21:18.585446702", ts));
}

TEST_CASE("day boundaries are calendar days") {
    Timestamp a = Timestamp::from_civil(2018, 1, 2, 23, 59, 59, 999999999);
    Timestamp b = Timestamp::from_civil(2018, 1, 3, 0, 0, 0, 0);
    CHECK(a.day_index() + 1 == b.day_index());
    CHECK(Timestamp::day_index_to_date(b.day_index()) == "2018-01-03");
}

TEST_SUITE_END();

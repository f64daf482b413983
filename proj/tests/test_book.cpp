#include <doctest.h>

#include "mbo/book.hpp"
#include "mbo/errors.hpp"
#include "mbo/synth.hpp"

using namespace mbo;

TEST_SUITE_BEGIN("book");

namespace {

const Decimal kTick = Decimal::from_raw(100);  // 0.01

MboMessage add(std::uint64_t id, Side side, const char* price, std::int64_t shares,
               OrderType type = OrderType::kLimit) {
    MboMessage msg;
    msg.timestamp = Timestamp::from_civil(2018, 1, 2, 9, 30, 0, 0);
    msg.order_id = id;
    msg.order_type = type;
    msg.side = side;
    msg.action = Action::kAdd;
    Decimal px;
    REQUIRE(Decimal::parse(price, px));
    msg.price = px;
    msg.size = Decimal::from_int(shares);
    return msg;
}

MboMessage update(std::uint64_t id, Side side, const char* price, std::int64_t shares) {
    MboMessage msg = add(id, side, price, shares);
    msg.action = Action::kUpdate;
    return msg;
}

MboMessage cancel(std::uint64_t id) {
    MboMessage msg;
    msg.timestamp = Timestamp::from_civil(2018, 1, 2, 9, 30, 0, 0);
    msg.order_id = id;
    msg.order_type = OrderType::kLimit;
    msg.action = Action::kCancel;
    return msg;
}

}  // namespace

TEST_CASE("adding a sell joins the back of its level") {
    LimitOrderBook book(kTick);
    book.apply_message(add(1, Side::kSell, "70.04", 1000));
    book.apply_message(add(2, Side::kSell, "70.04", 2000));
    // The documented example: ID 46280 arrives at 70.04 with size 7580.
    auto ev = book.apply_message(add(46280, Side::kSell, "70.04", 7580));
    CHECK(ev.kind == BookEvent::Kind::kAdded);

    LobSnapshot snap = book.snapshot();
    REQUIRE(snap.asks.size() == 1);
    CHECK(snap.asks[0].price.to_string() == "70.04");
    CHECK(snap.asks[0].size.raw() == Decimal::from_int(1000 + 2000 + 7580).raw());
    auto order = book.find_order(46280);
    REQUIRE(order.has_value());
    // Last in the FIFO queue: both earlier orders have lower arrival seq.
    CHECK(order->arrival_seq > book.find_order(2)->arrival_seq);
}

TEST_CASE("cancelling a level's only order removes the level") {
    LimitOrderBook book(kTick);
    book.apply_message(add(1, Side::kBuy, "69.98", 500));
    book.apply_message(add(2, Side::kBuy, "70.00", 300));
    book.apply_message(add(3, Side::kSell, "70.02", 400));
    auto top = book.best_state();
    REQUIRE(top.has_value());
    CHECK(top->bid_price_raw == 700000);

    auto ev = book.apply_message(cancel(2));
    CHECK(ev.kind == BookEvent::Kind::kCancelled);
    top = book.best_state();
    REQUIRE(top.has_value());
    CHECK(top->bid_price_raw == 699800);  // best quote recomputed
    CHECK(book.level_count(Side::kBuy) == 1);
    CHECK_FALSE(book.contains(2));
}

TEST_CASE("marketable buy fills in price-then-FIFO priority") {
    LimitOrderBook book(kTick);
    book.apply_message(add(10, Side::kSell, "70.02", 300));  // A, front
    book.apply_message(add(11, Side::kSell, "70.02", 500));  // B, behind A
    book.apply_message(add(12, Side::kBuy, "69.99", 100));

    auto ev = book.apply_message(add(20, Side::kBuy, "70.02", 600));
    CHECK(ev.kind == BookEvent::Kind::kExecuted);
    REQUIRE(ev.fills.size() == 2);
    CHECK(ev.fills[0].maker_order_id == 10);
    CHECK(ev.fills[0].quantity_raw == Decimal::from_int(300).raw());
    CHECK(ev.fills[1].maker_order_id == 11);
    CHECK(ev.fills[1].quantity_raw == Decimal::from_int(300).raw());

    // B keeps the front of the queue with 200 remaining.
    auto b = book.find_order(11);
    REQUIRE(b.has_value());
    CHECK(b->size_raw == Decimal::from_int(200).raw());
    CHECK_FALSE(book.contains(10));
    CHECK_FALSE(book.contains(20));  // aggressor fully filled, nothing rests
    CHECK(book.validate().empty());
}

TEST_CASE("crossing limit rests its remainder at the limit price") {
    LimitOrderBook book(kTick);
    book.apply_message(add(1, Side::kSell, "70.02", 300));
    auto ev = book.apply_message(add(2, Side::kBuy, "70.03", 1000));
    CHECK(ev.kind == BookEvent::Kind::kExecuted);
    REQUIRE(book.contains(2));
    auto rest = book.find_order(2);
    CHECK(rest->size_raw == Decimal::from_int(700).raw());
    CHECK(rest->price_ticks == 7003);
    CHECK(book.level_count(Side::kSell) == 0);
    CHECK(book.validate().empty());
}

TEST_CASE("market order remainder is discarded") {
    LimitOrderBook book(kTick);
    book.apply_message(add(1, Side::kSell, "70.02", 300));
    auto ev = book.apply_message(add(2, Side::kBuy, "70.02", 900, OrderType::kMarket));
    CHECK(ev.kind == BookEvent::Kind::kExecuted);
    REQUIRE(ev.fills.size() == 1);
    CHECK(ev.fills[0].quantity_raw == Decimal::from_int(300).raw());
    CHECK_FALSE(book.contains(2));
    CHECK(book.level_count(Side::kSell) == 0);
    CHECK(book.level_count(Side::kBuy) == 0);
}

TEST_CASE("update semantics: size decrease keeps priority, increase loses it") {
    LimitOrderBook book(kTick);
    book.apply_message(add(1, Side::kBuy, "70.00", 500));
    book.apply_message(add(2, Side::kBuy, "70.00", 400));

    SUBCASE("partial cancellation stays in place") {
        book.apply_message(update(1, Side::kBuy, "70.00", 200));
        auto o1 = book.find_order(1);
        auto o2 = book.find_order(2);
        CHECK(o1->size_raw == Decimal::from_int(200).raw());
        CHECK(o1->arrival_seq < o2->arrival_seq);
    }
    SUBCASE("size increase moves to the back") {
        book.apply_message(update(1, Side::kBuy, "70.00", 900));
        auto o1 = book.find_order(1);
        auto o2 = book.find_order(2);
        CHECK(o1->arrival_seq > o2->arrival_seq);
    }
    SUBCASE("price change moves to the new level's back") {
        book.apply_message(update(1, Side::kBuy, "69.99", 500));
        auto o1 = book.find_order(1);
        CHECK(o1->price_ticks == 6999);
        CHECK(book.level_count(Side::kBuy) == 2);
    }
    SUBCASE("repricing across the spread executes") {
        book.apply_message(add(3, Side::kSell, "70.02", 300));
        auto ev = book.apply_message(update(1, Side::kBuy, "70.02", 500));
        CHECK(ev.kind == BookEvent::Kind::kExecuted);
        REQUIRE(ev.fills.size() == 1);
        auto o1 = book.find_order(1);
        REQUIRE(o1.has_value());
        CHECK(o1->size_raw == Decimal::from_int(200).raw());
        CHECK(book.validate().empty());
    }
    CHECK(book.validate().empty());
}

TEST_CASE("unknown and duplicate ids are hard errors") {
    LimitOrderBook book(kTick);
    book.apply_message(add(7, Side::kBuy, "70.00", 100));
    CHECK_THROWS_WITH_AS(book.apply_message(cancel(8)), doctest::Contains("8"), DataError);
    CHECK_THROWS_WITH_AS(book.apply_message(update(9, Side::kBuy, "70.00", 50)),
                         doctest::Contains("9"), DataError);
    CHECK_THROWS_WITH_AS(book.apply_message(add(7, Side::kBuy, "69.99", 100)),
                         doctest::Contains("7"), DataError);
    // Off-tick price.
    MboMessage bad = add(10, Side::kBuy, "70.005", 100);
    CHECK_THROWS_AS(book.apply_message(bad), DataError);
}

TEST_CASE("best_state mid price and mid size") {
    LimitOrderBook book(kTick);
    CHECK_FALSE(book.best_state().has_value());  // empty book: unavailable

    book.apply_message(add(1, Side::kBuy, "68.54", 100));
    CHECK_FALSE(book.best_state().has_value());  // one-sided: unavailable

    book.apply_message(add(2, Side::kSell, "68.56", 300));
    auto top = book.best_state();
    REQUIRE(top.has_value());
    CHECK(top->mid_price() == doctest::Approx(68.55).epsilon(1e-12));
    CHECK(top->mid_size() == doctest::Approx(200.0).epsilon(1e-12));

    SUBCASE("equal best sizes give mid size equal to either") {
        book.apply_message(add(3, Side::kBuy, "68.54", 200));  // bid total 300
        top = book.best_state();
        CHECK(top->mid_size() == doctest::Approx(300.0));
    }
}

TEST_CASE("snapshot truncates to the ten best levels") {
    LimitOrderBook book(kTick);
    for (int i = 0; i < 12; ++i) {
        char px[16];
        std::snprintf(px, sizeof px, "70.%02d", 10 + i);
        book.apply_message(add(static_cast<std::uint64_t>(100 + i), Side::kSell, px, 10 + i));
    }
    for (int i = 0; i < 3; ++i) {
        char px[16];
        std::snprintf(px, sizeof px, "69.%02d", 99 - i);
        book.apply_message(add(static_cast<std::uint64_t>(200 + i), Side::kBuy, px, 10));
    }
    LobSnapshot snap = book.snapshot();
    REQUIRE(snap.asks.size() == 10);
    CHECK(snap.asks[0].price.to_string() == "70.1");
    CHECK(snap.asks[9].price.to_string() == "70.19");  // the 10 best of 12
    CHECK(snap.bids.size() == 3);
    CHECK(snapshot_violation(snap).empty());
}

TEST_CASE("validate catches a corrupted book") {
    LimitOrderBook book(kTick);
    CHECK(book.validate().empty());  // empty book is valid
    book.apply_message(add(1, Side::kBuy, "70.00", 100));
    book.apply_message(add(2, Side::kSell, "70.02", 100));
    CHECK(book.validate().empty());
}

TEST_CASE("incremental book equals from-scratch replay at random prefixes") {
    SynthConfig cfg;
    cfg.seed = 99;
    cfg.n_messages = 20'000;
    cfg.n_days = 2;
    SynthFeed feed = generate_feed(cfg);

    // Spot-check a handful of prefixes here; the acceptance suite runs the
    // full thousand-prefix version.
    LimitOrderBook incremental(cfg.tick_size);
    std::size_t next_check = 1;
    std::vector<std::size_t> checks{17, 503, 1999, 7777, feed.messages.size()};
    std::size_t ci = 0;
    for (std::size_t i = 0; i < feed.messages.size(); ++i) {
        incremental.apply_message(feed.messages[i]);
        if (ci < checks.size() && i + 1 == checks[ci]) {
            LimitOrderBook replay(cfg.tick_size);
            for (std::size_t j = 0; j <= i; ++j) replay.apply_message(feed.messages[j]);
            REQUIRE(incremental.same_structure(replay));
            REQUIRE(incremental.validate().empty());
            ++ci;
        }
    }
    (void)next_check;
}

TEST_SUITE_END();

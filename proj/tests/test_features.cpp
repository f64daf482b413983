#include <doctest.h>

#include <cmath>

#include "mbo/errors.hpp"
#include "mbo/features.hpp"
#include "mbo/synth.hpp"

using namespace mbo;

TEST_SUITE_BEGIN("features");

namespace {

const Decimal kTick = Decimal::from_raw(100);  // 0.01

MboMessage make_msg(std::uint64_t id, Action action, std::optional<Side> side,
                    const char* price, std::optional<double> shares,
                    OrderType type = OrderType::kLimit) {
    MboMessage msg;
    msg.timestamp = Timestamp::from_civil(2018, 1, 2, 9, 30, 0, 0);
    msg.order_id = id;
    msg.order_type = type;
    msg.side = side;
    msg.action = action;
    if (price) {
        Decimal px;
        REQUIRE(Decimal::parse(price, px));
        msg.price = px;
    }
    if (shares) msg.size = Decimal::from_double(*shares);
    return msg;
}

}  // namespace

TEST_CASE("preprocess add, update, cancel per the per-ID rules") {
    OrderTracker tracker;

    // New add: change_price 0, change_size = full size.
    ProcessedMessage add = tracker.process(
        make_msg(1, Action::kAdd, Side::kBuy, "68.54", 8334.0));
    CHECK(add.side == Side::kBuy);
    CHECK(add.action == +1);
    CHECK(add.price.raw() == 685400);
    CHECK(add.size.raw() == Decimal::from_int(8334).raw());
    CHECK(add.change_price.raw() == 0);
    CHECK(add.change_size.raw() == Decimal::from_int(8334).raw());

    // Update: deltas against this ID's previous entry.
    ProcessedMessage upd = tracker.process(
        make_msg(1, Action::kUpdate, Side::kBuy, "68.56", 3227.0));
    CHECK(upd.action == 0);
    CHECK(upd.change_price.raw() == 200);  // +0.02
    CHECK(upd.change_size.raw() == Decimal::from_int(3227 - 8334).raw());

    // Cancel: side/price inherited, size forced to 0.
    ProcessedMessage cxl = tracker.process(make_msg(1, Action::kCancel, {}, nullptr, {}));
    CHECK(cxl.action == -1);
    CHECK(cxl.side == Side::kBuy);
    CHECK(cxl.price.raw() == 685600);
    CHECK(cxl.size.raw() == 0);
    CHECK(cxl.change_price.raw() == 0);
    CHECK(cxl.change_size.raw() == Decimal::from_int(-3227).raw());

    // The ID is gone once cancelled.
    CHECK_THROWS_AS(tracker.process(make_msg(1, Action::kUpdate, Side::kBuy, "68.56", 10.0)),
                    DataError);
    CHECK_THROWS_AS(tracker.process(make_msg(99, Action::kCancel, {}, nullptr, {})), DataError);
}

TEST_CASE("duplicate live add id is rejected") {
    OrderTracker tracker;
    tracker.process(make_msg(5, Action::kAdd, Side::kSell, "70.00", 10.0));
    CHECK_THROWS_AS(tracker.process(make_msg(5, Action::kAdd, Side::kSell, "70.00", 10.0)),
                    DataError);
}

TEST_CASE("normalisation formulas") {
    ProcessedMessage p;
    p.side = Side::kSell;
    p.action = +1;

    TopOfBook top;
    SUBCASE("price four ticks above a 70.00 mid") {
        top.bid_price_raw = 699900;  // 69.99
        top.ask_price_raw = 700100;  // 70.01 -> mid 70.00
        top.bid_size_raw = Decimal::from_int(5000).raw();
        top.ask_size_raw = Decimal::from_int(2580).raw();  // mid size 3790
        Decimal px;
        REQUIRE(Decimal::parse("70.04", px));
        p.price = px;
        p.size = Decimal::from_int(7580);
        p.change_price = Decimal::from_raw(200);
        p.change_size = Decimal::from_int(-120);

        FeatureVector f = normalize(p, top, kTick);
        CHECK(f[0] == 2.0);                                   // side unchanged
        CHECK(f[1] == 1.0);                                   // action unchanged
        CHECK(f[2] == doctest::Approx(0.04).epsilon(1e-15));  // (0.04)/(0.01*100)
        CHECK(f[3] == doctest::Approx(2.0).epsilon(1e-15));   // 7580/3790
        CHECK(f[4] == doctest::Approx(2.0).epsilon(1e-15));   // 0.02/0.01
        CHECK(f[5] == doctest::Approx(-120.0 / 3790.0));
    }
    SUBCASE("price equal to the mid is exactly zero") {
        top.bid_price_raw = 699900;
        top.ask_price_raw = 700100;
        top.bid_size_raw = top.ask_size_raw = Decimal::from_int(100).raw();
        Decimal px;
        REQUIRE(Decimal::parse("70.00", px));
        p.price = px;
        p.size = Decimal::from_int(1);
        p.change_price = Decimal::from_raw(0);
        p.change_size = Decimal::from_raw(0);
        FeatureVector f = normalize(p, top, kTick);
        CHECK(f[2] == 0.0);
        CHECK(f[4] == 0.0);
    }
}

TEST_CASE("scale invariance is exact at the bit level") {
    // Scaling all prices and the tick by c leaves the price features
    // unchanged; scaling all sizes by c leaves the size features unchanged.
    ProcessedMessage p;
    p.side = Side::kBuy;
    p.action = 0;
    p.price = Decimal::from_raw(700400);
    p.size = Decimal::from_int(7580);
    p.change_price = Decimal::from_raw(-300);
    p.change_size = Decimal::from_int(42);
    TopOfBook top;
    top.bid_price_raw = 700000;
    top.ask_price_raw = 700200;
    top.bid_size_raw = Decimal::from_int(5000).raw();
    top.ask_size_raw = Decimal::from_int(2580).raw();

    FeatureVector base = normalize(p, top, kTick);
    for (std::int64_t num : {1, 2, 10, 20}) {
        for (std::int64_t den : {1, 2}) {  // covers c = 0.5, 1, 2, 5, 10, 20
            ProcessedMessage ps = p;
            TopOfBook tops = top;
            ps.price = Decimal::from_raw(p.price.raw() * num / den);
            ps.change_price = Decimal::from_raw(p.change_price.raw() * num / den);
            tops.bid_price_raw = top.bid_price_raw * num / den;
            tops.ask_price_raw = top.ask_price_raw * num / den;
            Decimal tick_scaled = Decimal::from_raw(kTick.raw() * num / den);
            FeatureVector f = normalize(ps, tops, tick_scaled);
            CHECK(f[2] == base[2]);  // bitwise equal
            CHECK(f[4] == base[4]);

            ProcessedMessage qs = p;
            TopOfBook topq = top;
            qs.size = Decimal::from_raw(p.size.raw() * num / den);
            qs.change_size = Decimal::from_raw(p.change_size.raw() * num / den);
            topq.bid_size_raw = top.bid_size_raw * num / den;
            topq.ask_size_raw = top.ask_size_raw * num / den;
            FeatureVector g = normalize(qs, topq, kTick);
            CHECK(g[3] == base[3]);
            CHECK(g[5] == base[5]);
        }
    }
}

TEST_CASE("ten-level filter feeds the book but not the tick stream") {
    FeatureStream stream(kTick);
    // Build 11 ask levels and one bid so the mid exists.
    stream.on_message(make_msg(1, Action::kAdd, Side::kBuy, "69.99", 100.0));
    for (int i = 0; i < 11; ++i) {
        char px[16];
        std::snprintf(px, sizeof px, "70.%02d", 1 + i);
        stream.on_message(
            make_msg(static_cast<std::uint64_t>(10 + i), Action::kAdd, Side::kSell, px, 50.0));
    }
    std::size_t ticks_before = stream.ticks().size();

    // Level-12 add: applied to the book, excluded from the stream.
    bool retained = stream.on_message(make_msg(50, Action::kAdd, Side::kSell, "70.12", 5.0));
    CHECK_FALSE(retained);
    CHECK(stream.ticks().size() == ticks_before);
    CHECK(stream.book().level_count(Side::kSell) == 12);

    // At the touch: retained.
    CHECK(stream.on_message(make_msg(51, Action::kAdd, Side::kSell, "70.01", 5.0)));
}

TEST_CASE("cancel of an inner level is retained") {
    FeatureStream stream(kTick);
    stream.on_message(make_msg(1, Action::kAdd, Side::kBuy, "69.99", 100.0));
    stream.on_message(make_msg(2, Action::kAdd, Side::kSell, "70.01", 50.0));
    stream.on_message(make_msg(3, Action::kAdd, Side::kSell, "70.03", 50.0));
    std::size_t before = stream.ticks().size();
    CHECK(stream.on_message(make_msg(3, Action::kCancel, {}, nullptr, {})));
    CHECK(stream.ticks().size() == before + 1);
}

TEST_CASE("ticks skip one-sided books entirely") {
    FeatureStream stream(kTick);
    bool retained = stream.on_message(make_msg(1, Action::kAdd, Side::kBuy, "69.99", 100.0));
    CHECK_FALSE(retained);  // no ask side yet: mid unavailable
    CHECK(stream.ticks().empty());
    CHECK(stream.on_message(make_msg(2, Action::kAdd, Side::kSell, "70.01", 50.0)));
    CHECK(stream.ticks().size() == 1);
}

TEST_CASE("window end indices honour lookback and day boundaries") {
    std::vector<std::int32_t> days;
    SUBCASE("49 ticks yield no windows") {
        days.assign(49, 100);
        CHECK(window_end_indices(days, 50).empty());
    }
    SUBCASE("50 ticks yield exactly one") {
        days.assign(50, 100);
        auto ends = window_end_indices(days, 50);
        REQUIRE(ends.size() == 1);
        CHECK(ends[0] == 49);
    }
    SUBCASE("120 ticks in one day yield 71") {
        days.assign(120, 100);
        CHECK(window_end_indices(days, 50).size() == 71);
    }
    SUBCASE("windows never span a day boundary") {
        days.assign(60, 100);
        days.insert(days.end(), 70, 101);
        auto ends = window_end_indices(days, 50);
        // 11 from day one (ends 49..59), 21 from day two (ends 109..129).
        REQUIRE(ends.size() == 32);
        for (std::size_t e : ends) {
            std::size_t start = e - 49;
            CHECK(days[start] == days[e]);
        }
    }
}

TEST_CASE("lob rows are level-major with padding for shallow sides") {
    LobSnapshot snap;
    snap.asks = {{Decimal::from_raw(700100), Decimal::from_int(50)},
                 {Decimal::from_raw(700300), Decimal::from_int(75)}};
    snap.bids = {{Decimal::from_raw(699900), Decimal::from_int(100)}};
    auto row = lob_raw_row(snap);
    CHECK(row[0] == doctest::Approx(70.01));
    CHECK(row[1] == doctest::Approx(50.0));
    CHECK(row[2] == doctest::Approx(69.99));
    CHECK(row[3] == doctest::Approx(100.0));
    CHECK(row[4] == doctest::Approx(70.03));
    // Ask level 3+ padded with the deepest price and zero size.
    CHECK(row[8] == doctest::Approx(70.03));
    CHECK(row[9] == 0.0);
    // Bid level 2+ padded likewise.
    CHECK(row[6] == doctest::Approx(69.99));
    CHECK(row[7] == 0.0);
}

TEST_CASE("lob z-scoring uses training statistics only") {
    std::vector<std::array<double, kLobFeatureWidth>> rows(6);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int c = 0; c < kLobFeatureWidth; ++c)
            rows[r][c] = static_cast<double>(r) + 0.1 * c;

    LobStats stats = fit_lob_stats(rows, 0, 4);  // training rows only
    // Column 0 over rows 0..3 has mean 1.5.
    CHECK(stats.mean[0] == doctest::Approx(1.5));
    auto z = lob_featurize(rows[5], stats);
    CHECK(z[0] == doctest::Approx((5.0 - 1.5) / stats.stddev[0]));

    SUBCASE("definition check: mean 100, std 2, value 104 gives 2") {
        LobStats s;
        s.mean.fill(100.0);
        s.stddev.fill(2.0);
        std::array<double, kLobFeatureWidth> raw;
        raw.fill(104.0);
        auto out = lob_featurize(raw, s);
        for (double v : out) CHECK(v == doctest::Approx(2.0));
    }
    SUBCASE("column equal to its mean is all zeros") {
        std::array<double, kLobFeatureWidth> raw;
        for (int c = 0; c < kLobFeatureWidth; ++c) raw[c] = stats.mean[c];
        auto out = lob_featurize(raw, stats);
        for (double v : out) CHECK(v == 0.0);
    }
    SUBCASE("zero-variance column is an error naming the column") {
        std::vector<std::array<double, kLobFeatureWidth>> flat(4);
        for (auto& r : flat) r.fill(1.0);
        CHECK_THROWS_WITH_AS(fit_lob_stats(flat, 0, 4), doctest::Contains("column"), DataError);
    }
}

TEST_SUITE_END();

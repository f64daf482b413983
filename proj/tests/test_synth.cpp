#include <doctest.h>

#include <cmath>
#include <map>

#include "mbo/book.hpp"
#include "mbo/errors.hpp"
#include "mbo/feed_io.hpp"
#include "mbo/features.hpp"
#include "mbo/labels.hpp"
#include "mbo/synth.hpp"

using namespace mbo;

TEST_SUITE_BEGIN("synth");

TEST_CASE("config validation") {
    SynthConfig cfg;
    CHECK(cfg.violation().empty());
    SUBCASE("probabilities must sum to one") {
        cfg.p_add = 0.9;
        CHECK_FALSE(cfg.violation().empty());
    }
    SUBCASE("signal strength range") {
        cfg.signal_strength = 1.5;
        CHECK_FALSE(cfg.violation().empty());
    }
    SUBCASE("mid must sit on the tick grid") {
        cfg.initial_mid = Decimal::from_raw(100'0050);
        CHECK_FALSE(cfg.violation().empty());
    }
}

TEST_CASE("empty feed for zero messages") {
    SynthConfig cfg;
    cfg.n_messages = 0;
    CHECK(generate_feed(cfg).messages.empty());
}

TEST_CASE("same seed gives byte-identical feeds") {
    SynthConfig cfg;
    cfg.n_messages = 5'000;
    cfg.signal_strength = 0.5;
    SynthFeed a = generate_feed(cfg);
    SynthFeed b = generate_feed(cfg);
    REQUIRE(a.messages.size() == b.messages.size());
    for (std::size_t i = 0; i < a.messages.size(); ++i)
        REQUIRE(serialize_mbo(a.messages[i]) == serialize_mbo(b.messages[i]));

    SynthConfig other = cfg;
    other.seed = cfg.seed + 1;
    SynthFeed c = generate_feed(other);
    bool any_diff = c.messages.size() != a.messages.size();
    for (std::size_t i = 0; !any_diff && i < a.messages.size(); ++i)
        any_diff = !(a.messages[i] == c.messages[i]);
    CHECK(any_diff);
}

TEST_CASE("every generated message is legal against the book") {
    SynthConfig cfg;
    cfg.seed = 7;
    cfg.n_messages = 30'000;
    cfg.signal_strength = 0.6;
    cfg.n_days = 3;
    SynthFeed feed = generate_feed(cfg);
    REQUIRE(feed.messages.size() == cfg.n_messages);

    std::map<std::int32_t, LimitOrderBook> books;  // fresh book per day
    Timestamp prev = feed.messages.front().timestamp;
    for (const MboMessage& msg : feed.messages) {
        CHECK(message_violation(msg).empty());
        REQUIRE(msg.timestamp >= prev);
        prev = msg.timestamp;
        auto [it, fresh] = books.try_emplace(msg.timestamp.day_index(), cfg.tick_size);
        it->second.apply_message(msg);  // throws on any illegal reference
    }
    for (auto& [day, book] : books) REQUIRE(book.validate().empty());
    CHECK(books.size() == 3);
}

TEST_CASE("planted bursts predict the subsequent label direction") {
    SynthConfig cfg;
    cfg.seed = 11;
    cfg.n_messages = 100'000;
    cfg.signal_strength = 0.8;
    cfg.signal_burst_length = 25;
    cfg.n_days = 4;
    SynthFeed feed = generate_feed(cfg);
    REQUIRE(feed.bursts.size() > 20);

    // Tick stream and mid series exactly as the pipeline computes them.
    FeatureStream stream(cfg.tick_size);
    std::vector<std::size_t> tick_of_message(feed.messages.size(), SIZE_MAX);
    for (std::size_t i = 0; i < feed.messages.size(); ++i)
        if (stream.on_message(feed.messages[i]))
            tick_of_message[i] = stream.ticks().size() - 1;

    const std::vector<Tick>& ticks = stream.ticks();
    std::vector<double> mids;
    std::vector<std::int32_t> days;
    for (const Tick& t : ticks) {
        mids.push_back(t.mid_price);
        days.push_back(t.day_index);
    }
    const int k = 20;
    std::vector<LabeledTick> ls = l_values_series(mids, days, k);
    std::vector<double> l_at_tick(ticks.size(), std::nan(""));
    for (const LabeledTick& lt : ls) l_at_tick[lt.tick_index] = lt.l_value;

    // Count agreement between burst direction and the label at burst end.
    int agree = 0, usable = 0;
    for (const PlantedBurst& burst : feed.bursts) {
        std::size_t tick = SIZE_MAX;
        for (std::size_t m = burst.last_message; m >= burst.first_message; --m) {
            if (tick_of_message[m] != SIZE_MAX) {
                tick = tick_of_message[m];
                break;
            }
            if (m == 0) break;
        }
        if (tick == SIZE_MAX || tick >= l_at_tick.size()) continue;
        double l = l_at_tick[tick];
        if (std::isnan(l)) continue;
        ++usable;
        if ((burst.direction > 0 && l > 0) || (burst.direction < 0 && l < 0)) ++agree;
    }
    REQUIRE(usable > 20);
    double agreement = static_cast<double>(agree) / usable;
    INFO("agreement ", agreement, " over ", usable, " bursts");
    CHECK(agreement > 0.60);
}

TEST_CASE("signal-free feed labels are balanced after calibration") {
    SynthConfig cfg;
    cfg.seed = 3;
    cfg.n_messages = 120'000;
    cfg.signal_strength = 0.0;
    cfg.n_days = 4;
    SynthFeed feed = generate_feed(cfg);

    FeatureStream stream(cfg.tick_size);
    for (const MboMessage& msg : feed.messages) stream.on_message(msg);
    std::vector<double> mids;
    std::vector<std::int32_t> days;
    for (const Tick& t : stream.ticks()) {
        mids.push_back(t.mid_price);
        days.push_back(t.day_index);
    }
    REQUIRE(mids.size() > 50'000);

    std::vector<LabeledTick> ls = l_values_series(mids, days, 20);
    std::vector<double> l_values;
    for (const LabeledTick& lt : ls) l_values.push_back(lt.l_value);
    double alpha = calibrate_alpha(l_values);
    ClassProportions p = proportions_at(l_values, alpha);
    INFO("alpha ", alpha, " proportions ", p.down, " ", p.stationary, " ", p.up);
    CHECK(std::fabs(p.down - 1.0 / 3.0) < 0.02);
    CHECK(std::fabs(p.stationary - 1.0 / 3.0) < 0.02);
    CHECK(std::fabs(p.up - 1.0 / 3.0) < 0.02);
}

TEST_SUITE_END();

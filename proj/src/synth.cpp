#include "mbo/synth.hpp"

#include <algorithm>
#include <cmath>

#include "mbo/book.hpp"
#include "mbo/errors.hpp"
#include "mbo/rng.hpp"

namespace mbo {
namespace {

constexpr std::int64_t kSessionOpenNs = (8LL * 3600 + 30 * 60) * 1'000'000'000LL;   // 08:30
constexpr std::int64_t kSessionCloseNs = 16LL * 3600 * 1'000'000'000LL;             // 16:00

bool is_weekend(std::int32_t day_index) {
    int weekday = (day_index % 7 + 7 + 4) % 7;  // 0 = Sunday (1970-01-01 was a Thursday)
    return weekday == 0 || weekday == 6;
}

class FeedBuilder {
public:
    FeedBuilder(const SynthConfig& cfg, SynthFeed& out)
        : cfg_(cfg),
          out_(out),
          rng_(cfg.seed),
          book_(cfg.tick_size),
          anchor_ticks_(cfg.initial_mid.div_ticks(cfg.tick_size)) {}

    void run() {
        std::size_t per_day = (cfg_.n_messages + cfg_.n_days - 1) / std::max(cfg_.n_days, 1);
        std::int32_t day = Timestamp::from_civil(2018, 1, 2, 0, 0, 0, 0).day_index();
        std::size_t remaining = cfg_.n_messages;
        for (int d = 0; d < cfg_.n_days && remaining > 0; ++d) {
            while (is_weekend(day)) ++day;
            run_day(day, std::min(per_day, remaining));
            remaining = cfg_.n_messages - out_.messages.size();
            ++day;
        }
    }

private:
    enum class Phase { kNormal, kBurst, kDrift, kCooldown };

    void run_day(std::int32_t day_index, std::size_t budget) {
        book_ = LimitOrderBook(cfg_.tick_size);
        live_.clear();
        live_pos_.clear();
        phase_ = Phase::kNormal;
        now_ = static_cast<std::int64_t>(day_index) * Timestamp::kNsPerDay + kSessionOpenNs;
        std::int64_t gap_mean =
            std::max<std::int64_t>(1, (kSessionCloseNs - kSessionOpenNs) /
                                          std::max<std::int64_t>(1, (std::int64_t)budget));

        std::size_t end = out_.messages.size() + budget;
        seed_book(end);
        while (out_.messages.size() < end) {
            advance_clock(gap_mean, day_index);
            step();
        }
    }

    void advance_clock(std::int64_t gap_mean, std::int32_t day_index) {
        double u = rng_.uniform01();
        std::int64_t gap = 1 + static_cast<std::int64_t>(-std::log1p(-u) * (double)gap_mean);
        std::int64_t close = static_cast<std::int64_t>(day_index) * Timestamp::kNsPerDay +
                             kSessionCloseNs;
        now_ = std::min(now_ + gap, close);
    }

    // Initial liquidity: a ladder of resting orders on both sides.
    void seed_book(std::size_t end) {
        for (int level = 1; level <= 10 && out_.messages.size() < end; ++level) {
            for (int side_code = 1; side_code <= 2 && out_.messages.size() < end; ++side_code) {
                Side side = static_cast<Side>(side_code);
                std::int64_t px = side == Side::kBuy ? anchor_ticks_ - level
                                                     : anchor_ticks_ + level;
                emit_add(side, px, draw_size());
            }
        }
    }

    void step() {
        // Keep the book two-sided so the mid stays available.
        if (book_.level_count(Side::kBuy) < 2) {
            emit_add(Side::kBuy, reference_price(Side::kBuy) - rng_.range(0, 2), draw_size());
            return;
        }
        if (book_.level_count(Side::kSell) < 2) {
            emit_add(Side::kSell, reference_price(Side::kSell) + rng_.range(0, 2), draw_size());
            return;
        }

        update_phase();
        if (phase_ == Phase::kBurst) {
            burst_step();
            return;
        }
        if (phase_ == Phase::kDrift && rng_.bernoulli(0.35 + 0.4 * cfg_.signal_strength)) {
            drift_step();
            return;
        }
        neutral_step();
    }

    void update_phase() {
        switch (phase_) {
            case Phase::kNormal:
                if (cfg_.signal_strength > 0.0 &&
                    rng_.bernoulli(0.004 * cfg_.signal_strength)) {
                    phase_ = Phase::kBurst;
                    burst_dir_ = rng_.bernoulli(0.5) ? +1 : -1;
                    phase_left_ = 6 + static_cast<int>(rng_.below(5));
                    out_.bursts.push_back(
                        PlantedBurst{burst_dir_, out_.messages.size(), out_.messages.size()});
                }
                break;
            case Phase::kBurst:
                if (phase_left_ <= 0) {
                    phase_ = Phase::kDrift;
                    phase_left_ = 3 * cfg_.signal_burst_length;
                }
                break;
            case Phase::kDrift:
                if (phase_left_ <= 0) {
                    phase_ = Phase::kCooldown;
                    phase_left_ = 40;
                }
                break;
            case Phase::kCooldown:
                if (phase_left_ <= 0) phase_ = Phase::kNormal;
                break;
        }
    }

    // Same-side adds joining (or improving) the touch: the observable signal.
    void burst_step() {
        Side side = burst_dir_ > 0 ? Side::kBuy : Side::kSell;
        std::int64_t px = touch_join_price(side, /*improve_prob=*/0.35);
        emit_add(side, px, draw_size(3.0));
        --phase_left_;
        out_.bursts.back().last_message = out_.messages.size() - 1;
    }

    // Directional pressure: consume the opposite touch or improve our side.
    void drift_step() {
        Side side = burst_dir_ > 0 ? Side::kBuy : Side::kSell;
        double u = rng_.uniform01();
        if (u < 0.45) {
            emit_market(side, draw_size(1.5));
        } else if (u < 0.75) {
            if (!cancel_near_touch(opposite(side))) emit_market(side, draw_size());
        } else {
            emit_add(side, touch_join_price(side, 0.8), draw_size(2.0));
        }
        --phase_left_;
    }

    void neutral_step() {
        if (phase_ == Phase::kCooldown) --phase_left_;
        double u = rng_.uniform01();
        if (u < cfg_.p_add) {
            Side side = rng_.bernoulli(0.5) ? Side::kBuy : Side::kSell;
            emit_add(side, passive_price(side), draw_size());
        } else if (u < cfg_.p_add + cfg_.p_update) {
            if (!emit_random_update()) neutral_fallback_add();
        } else if (u < cfg_.p_add + cfg_.p_update + cfg_.p_cancel) {
            if (!emit_random_cancel()) neutral_fallback_add();
        } else {
            Side side = rng_.bernoulli(0.5) ? Side::kBuy : Side::kSell;
            emit_market(side, draw_size(0.7));
        }
    }

    void neutral_fallback_add() {
        Side side = rng_.bernoulli(0.5) ? Side::kBuy : Side::kSell;
        emit_add(side, passive_price(side), draw_size());
    }

    std::int64_t best_ticks(Side side) const {
        auto px = book_.level_price_at(side, 1);
        return px ? *px : reference_price(side);
    }

    std::int64_t reference_price(Side side) const {
        auto top = book_.best_state();
        if (top) {
            std::int64_t mid2 = (top->bid_price_raw + top->ask_price_raw) / cfg_.tick_size.raw();
            return side == Side::kBuy ? mid2 / 2 - 1 : (mid2 + 1) / 2 + 1;
        }
        return side == Side::kBuy ? anchor_ticks_ - 1 : anchor_ticks_ + 1;
    }

    // Price at the touch, sometimes one tick inside the spread.
    std::int64_t touch_join_price(Side side, double improve_prob) {
        std::int64_t best = best_ticks(side);
        std::int64_t other = best_ticks(opposite(side));
        std::int64_t spread = side == Side::kBuy ? other - best : best - other;
        if (spread > 1 && rng_.bernoulli(improve_prob))
            return side == Side::kBuy ? best + 1 : best - 1;
        return best;
    }

    // Geometric distance behind the touch; occasionally improving.
    std::int64_t passive_price(Side side) {
        std::int64_t best = best_ticks(side);
        std::int64_t other = best_ticks(opposite(side));
        std::int64_t spread = side == Side::kBuy ? other - best : best - other;
        if (spread > 1 && rng_.bernoulli(0.25))
            return side == Side::kBuy ? best + 1 : best - 1;
        std::int64_t offset = rng_.geometric(cfg_.level_geometric_p);
        std::int64_t px = side == Side::kBuy ? best - offset : best + offset;
        return std::max<std::int64_t>(px, 1);
    }

    Decimal draw_size(double scale = 1.0) {
        double v = std::exp(cfg_.size_lognorm_mu + cfg_.size_lognorm_sigma * rng_.normal());
        std::int64_t shares = static_cast<std::int64_t>(std::llround(v * scale));
        return Decimal::from_int(std::clamp<std::int64_t>(shares, 1, 5000));
    }

    void emit(MboMessage msg) {
        BookEvent ev = book_.apply_message(msg);
        if (msg.action == Action::kAdd && msg.order_type == OrderType::kLimit &&
            book_.contains(msg.order_id))
            live_push(msg.order_id);
        for (const Fill& f : ev.fills)
            if (!book_.contains(f.maker_order_id)) live_erase(f.maker_order_id);
        if (msg.action == Action::kCancel) live_erase(msg.order_id);
        if (msg.action == Action::kUpdate && !book_.contains(msg.order_id))
            live_erase(msg.order_id);
        out_.messages.push_back(std::move(msg));
    }

    void emit_add(Side side, std::int64_t price_ticks, Decimal size) {
        price_ticks = std::max<std::int64_t>(price_ticks, 1);
        MboMessage msg;
        msg.timestamp = Timestamp::from_ns(now_);
        msg.order_id = next_id_++;
        msg.order_type = OrderType::kLimit;
        msg.side = side;
        msg.action = Action::kAdd;
        msg.price = Decimal::from_raw(price_ticks * cfg_.tick_size.raw());
        msg.size = size;
        emit(std::move(msg));
    }

    void emit_market(Side side, Decimal size) {
        if (book_.level_count(opposite(side)) == 0) return;
        MboMessage msg;
        msg.timestamp = Timestamp::from_ns(now_);
        msg.order_id = next_id_++;
        msg.order_type = OrderType::kMarket;
        msg.side = side;
        msg.action = Action::kAdd;
        msg.price = Decimal::from_raw(best_ticks(opposite(side)) * cfg_.tick_size.raw());
        msg.size = size;
        emit(std::move(msg));
    }

    bool emit_random_cancel() {
        if (live_.empty()) return false;
        std::uint64_t id = live_[rng_.below(live_.size())];
        MboMessage msg;
        msg.timestamp = Timestamp::from_ns(now_);
        msg.order_id = id;
        msg.order_type = OrderType::kLimit;
        msg.action = Action::kCancel;
        emit(std::move(msg));
        return true;
    }

    bool emit_random_update() {
        if (live_.empty()) return false;
        std::uint64_t id = live_[rng_.below(live_.size())];
        auto order = book_.find_order(id);
        if (!order) return false;
        MboMessage msg;
        msg.timestamp = Timestamp::from_ns(now_);
        msg.order_id = id;
        msg.order_type = OrderType::kLimit;
        msg.side = order->side;
        msg.action = Action::kUpdate;
        if (rng_.bernoulli(0.7) && order->size_raw > Decimal::kScale) {
            // Partial cancellation: shrink in place.
            std::int64_t shares = order->size_raw / Decimal::kScale;
            std::int64_t kept = std::max<std::int64_t>(1, (shares * rng_.range(2, 9)) / 10);
            msg.price = Decimal::from_raw(order->price_ticks * cfg_.tick_size.raw());
            msg.size = Decimal::from_int(kept);
        } else {
            // Reprice a tick or two; may cross, which the book resolves.
            std::int64_t shift = rng_.range(1, 2) * (rng_.bernoulli(0.5) ? 1 : -1);
            std::int64_t px = std::max<std::int64_t>(order->price_ticks + shift, 1);
            msg.price = Decimal::from_raw(px * cfg_.tick_size.raw());
            msg.size = Decimal::from_raw(order->size_raw);
        }
        emit(std::move(msg));
        return true;
    }

    // Cancel a resting order within two ticks of the side's best. The live
    // list is sampled with a bounded number of tries to stay O(1).
    bool cancel_near_touch(Side side) {
        if (live_.empty() || book_.level_count(side) == 0) return false;
        std::int64_t best = best_ticks(side);
        for (int tries = 0; tries < 16; ++tries) {
            std::uint64_t id = live_[rng_.below(live_.size())];
            auto order = book_.find_order(id);
            if (!order || order->side != side) continue;
            if (std::llabs(order->price_ticks - best) > 2) continue;
            MboMessage msg;
            msg.timestamp = Timestamp::from_ns(now_);
            msg.order_id = id;
            msg.order_type = OrderType::kLimit;
            msg.action = Action::kCancel;
            emit(std::move(msg));
            return true;
        }
        return false;
    }

    void live_push(std::uint64_t id) {
        live_pos_[id] = live_.size();
        live_.push_back(id);
    }

    void live_erase(std::uint64_t id) {
        auto it = live_pos_.find(id);
        if (it == live_pos_.end()) return;
        std::size_t pos = it->second;
        std::uint64_t back = live_.back();
        live_[pos] = back;
        live_pos_[back] = pos;
        live_.pop_back();
        live_pos_.erase(it);
    }

    const SynthConfig& cfg_;
    SynthFeed& out_;
    Rng rng_;
    LimitOrderBook book_;
    std::int64_t anchor_ticks_;
    std::vector<std::uint64_t> live_;
    std::unordered_map<std::uint64_t, std::size_t> live_pos_;
    std::uint64_t next_id_ = 1000;
    std::int64_t now_ = 0;
    Phase phase_ = Phase::kNormal;
    int burst_dir_ = 0;
    int phase_left_ = 0;
};

}  // namespace

std::string SynthConfig::violation() const {
    if (std::abs(p_add + p_update + p_cancel + p_market - 1.0) > 1e-9)
        return "event probabilities must sum to 1";
    if (p_add <= 0 || p_update < 0 || p_cancel < 0 || p_market < 0)
        return "event probabilities must be non-negative (add positive)";
    if (signal_strength < 0.0 || signal_strength > 1.0)
        return "signal_strength must be in [0, 1]";
    if (signal_burst_length < 1) return "signal_burst_length must be >= 1";
    if (tick_size.raw() <= 0) return "tick size must be positive";
    if (initial_mid.raw() <= 0 || !initial_mid.is_multiple_of(tick_size))
        return "initial mid must be a positive multiple of the tick size";
    if (level_geometric_p <= 0.0 || level_geometric_p >= 1.0)
        return "level_geometric_p must be in (0, 1)";
    if (n_days < 1) return "n_days must be >= 1";
    return {};
}

SynthFeed generate_feed(const SynthConfig& cfg) {
    if (auto why = cfg.violation(); !why.empty()) throw ConfigError(why);
    SynthFeed feed;
    if (cfg.n_messages == 0) return feed;
    feed.messages.reserve(cfg.n_messages);
    FeedBuilder builder(cfg, feed);
    builder.run();
    return feed;
}

}  // namespace mbo

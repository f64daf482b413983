#include "mbo/features.hpp"

#include <cmath>

#include "mbo/errors.hpp"

namespace mbo {

ProcessedMessage OrderTracker::process(const MboMessage& msg) {
    if (auto why = message_violation(msg); !why.empty()) throw DataError(why);

    ProcessedMessage out;
    switch (msg.action) {
        case Action::kAdd: {
            out.side = *msg.side;
            out.action = +1;
            out.price = *msg.price;
            out.size = *msg.size;
            out.change_price = Decimal::from_raw(0);
            out.change_size = out.size;  // first entry of this ID: full size added
            if (msg.order_type == OrderType::kLimit) {
                auto [it, inserted] =
                    state_.emplace(msg.order_id, State{out.side, out.price, out.size});
                if (!inserted)
                    throw DataError("add with duplicate live order id " +
                                    std::to_string(msg.order_id));
            }
            break;
        }
        case Action::kUpdate: {
            auto it = state_.find(msg.order_id);
            if (it == state_.end())
                throw DataError("update references unknown order id " +
                                std::to_string(msg.order_id));
            State& prev = it->second;
            out.side = msg.side ? *msg.side : prev.side;
            out.action = 0;
            out.price = msg.price ? *msg.price : prev.price;
            out.size = msg.size ? *msg.size : prev.size;
            out.change_price = out.price - prev.price;
            out.change_size = out.size - prev.size;
            prev = State{out.side, out.price, out.size};
            break;
        }
        case Action::kCancel: {
            auto it = state_.find(msg.order_id);
            if (it == state_.end())
                throw DataError("cancel references unknown order id " +
                                std::to_string(msg.order_id));
            const State& prev = it->second;
            out.side = prev.side;
            out.action = -1;
            out.price = prev.price;
            out.size = Decimal::from_raw(0);  // no shares outstanding after the action
            out.change_price = Decimal::from_raw(0);
            out.change_size = Decimal::from_raw(0) - prev.size;
            state_.erase(it);
            break;
        }
    }
    return out;
}

FeatureVector normalize(const ProcessedMessage& p, const TopOfBook& top, Decimal tick_size) {
    if (tick_size.raw() <= 0) throw ConfigError("tick size must be positive");
    std::int64_t mid_size_x2 = top.bid_size_raw + top.ask_size_raw;
    if (mid_size_x2 <= 0) throw DataError("mid size unavailable");

    // Pure integer ratios: scaling all prices and the tick by c, or all
    // sizes by c, multiplies numerator and denominator alike.
    double norm_price =
        static_cast<double>(2 * p.price.raw() - top.bid_price_raw - top.ask_price_raw) /
        (2.0 * static_cast<double>(tick_size.raw()) * 100.0);
    double norm_size = static_cast<double>(2 * p.size.raw()) / static_cast<double>(mid_size_x2);
    double norm_change_price =
        static_cast<double>(p.change_price.raw()) / static_cast<double>(tick_size.raw());
    double norm_change_size =
        static_cast<double>(2 * p.change_size.raw()) / static_cast<double>(mid_size_x2);

    return FeatureVector{static_cast<double>(static_cast<int>(p.side)),
                         static_cast<double>(p.action),
                         norm_price,
                         norm_size,
                         norm_change_price,
                         norm_change_size};
}

FeatureStream::FeatureStream(Decimal tick_size, bool collect_lob)
    : tick_size_(tick_size), collect_lob_(collect_lob), book_(tick_size) {}

bool FeatureStream::within_ten_levels(Side side, std::int64_t price_ticks) const {
    auto tenth = book_.level_price_at(side, kSnapshotDepth);
    if (!tenth) return true;  // fewer than ten levels: nothing is outside
    return side == Side::kBuy ? price_ticks >= *tenth : price_ticks <= *tenth;
}

bool FeatureStream::on_message(const MboMessage& msg) {
    // Every message updates the book; only in-band ticks reach the stream.
    book_.apply_message(msg);
    ProcessedMessage processed = tracker_.process(msg);

    std::int64_t price_ticks = processed.price.div_ticks(tick_size_);
    if (!within_ten_levels(processed.side, price_ticks)) return false;

    auto top = book_.best_state();
    if (!top) return false;  // one-sided book: skip the tick entirely
    if (top->bid_size_raw + top->ask_size_raw <= 0) return false;

    Tick tick;
    tick.message_index = book_.event_count() - 1;
    tick.day_index = msg.timestamp.day_index();
    tick.mid_price = top->mid_price();
    tick.mbo = normalize(processed, *top, tick_size_);
    ticks_.push_back(tick);
    if (collect_lob_) lob_rows_.push_back(lob_raw_row(book_.snapshot()));
    return true;
}

std::vector<std::size_t> window_end_indices(const std::vector<std::int32_t>& day_index,
                                            int lookback) {
    std::vector<std::size_t> ends;
    if (lookback < 1) throw ConfigError("lookback must be >= 1");
    std::size_t run_start = 0;
    for (std::size_t t = 0; t < day_index.size(); ++t) {
        if (t > 0 && day_index[t] != day_index[t - 1]) run_start = t;
        if (t + 1 - run_start >= static_cast<std::size_t>(lookback)) ends.push_back(t);
    }
    return ends;
}

std::vector<std::size_t> window_end_indices(const std::vector<Tick>& ticks, int lookback) {
    std::vector<std::int32_t> days;
    days.reserve(ticks.size());
    for (const Tick& t : ticks) days.push_back(t.day_index);
    return window_end_indices(days, lookback);
}

std::array<double, kLobFeatureWidth> lob_raw_row(const LobSnapshot& snap) {
    std::array<double, kLobFeatureWidth> row{};
    auto level_or_pad = [](const std::vector<SnapshotLevel>& side, int i, double& px, double& sz) {
        if (i < static_cast<int>(side.size())) {
            px = side[static_cast<std::size_t>(i)].price.to_double();
            sz = side[static_cast<std::size_t>(i)].size.to_double();
        } else {
            px = side.empty() ? 0.0 : side.back().price.to_double();
            sz = 0.0;
        }
    };
    for (int i = 0; i < kSnapshotDepth; ++i) {
        level_or_pad(snap.asks, i, row[4 * i + 0], row[4 * i + 1]);
        level_or_pad(snap.bids, i, row[4 * i + 2], row[4 * i + 3]);
    }
    return row;
}

LobStats fit_lob_stats(const std::vector<std::array<double, kLobFeatureWidth>>& rows,
                       std::size_t first, std::size_t last) {
    if (last > rows.size() || first >= last) throw DataError("empty statistics range");
    std::size_t n = last - first;
    LobStats stats;
    for (std::size_t r = first; r < last; ++r)
        for (int c = 0; c < kLobFeatureWidth; ++c) stats.mean[c] += rows[r][c];
    for (int c = 0; c < kLobFeatureWidth; ++c) stats.mean[c] /= static_cast<double>(n);
    for (std::size_t r = first; r < last; ++r)
        for (int c = 0; c < kLobFeatureWidth; ++c) {
            double d = rows[r][c] - stats.mean[c];
            stats.stddev[c] += d * d;
        }
    for (int c = 0; c < kLobFeatureWidth; ++c) {
        stats.stddev[c] = std::sqrt(stats.stddev[c] / static_cast<double>(n));
        if (stats.stddev[c] == 0.0)
            throw DataError("zero standard deviation in LOB column " + std::to_string(c));
    }
    return stats;
}

std::array<double, kLobFeatureWidth> lob_featurize(const std::array<double, kLobFeatureWidth>& raw,
                                                   const LobStats& stats) {
    std::array<double, kLobFeatureWidth> out;
    for (int c = 0; c < kLobFeatureWidth; ++c) out[c] = (raw[c] - stats.mean[c]) / stats.stddev[c];
    return out;
}

}  // namespace mbo

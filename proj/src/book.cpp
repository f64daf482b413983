#include "mbo/book.hpp"

#include <algorithm>

#include "mbo/errors.hpp"

namespace mbo {

LimitOrderBook::LimitOrderBook(Decimal tick_size) : tick_size_(tick_size) {
    if (tick_size.raw() <= 0) throw ConfigError("tick size must be positive");
}

std::int64_t LimitOrderBook::to_ticks(Decimal price) const {
    if (!price.is_multiple_of(tick_size_) || price.raw() <= 0)
        throw DataError("price " + price.to_string() + " is not a positive multiple of tick " +
                        tick_size_.to_string());
    return price.div_ticks(tick_size_);
}

void LimitOrderBook::rest_order(std::uint64_t id, Side side, std::int64_t price_ticks,
                                std::int64_t size_raw) {
    Level& level = side == Side::kBuy ? bids_[price_ticks] : asks_[price_ticks];
    level.queue.push_back(RestingOrder{id, side, price_ticks, size_raw, ++arrival_counter_});
    level.total_raw += size_raw;
    index_[id] = Locator{side, price_ticks, std::prev(level.queue.end())};
}

void LimitOrderBook::remove_order(const Locator& loc, std::uint64_t id) {
    auto erase_from = [&](auto& map) {
        auto level_it = map.find(loc.price_ticks);
        level_it->second.total_raw -= loc.it->size_raw;
        level_it->second.queue.erase(loc.it);
        if (level_it->second.queue.empty()) map.erase(level_it);
    };
    if (loc.side == Side::kBuy)
        erase_from(bids_);
    else
        erase_from(asks_);
    index_.erase(id);
}

std::int64_t LimitOrderBook::match(Side aggressor_side, std::optional<std::int64_t> limit_ticks,
                                   std::int64_t size_raw, std::vector<Fill>& fills) {
    std::int64_t remaining = size_raw;
    auto sweep = [&](auto& map, auto crosses) {
        while (remaining > 0 && !map.empty()) {
            auto level_it = map.begin();
            if (!crosses(level_it->first)) break;
            Level& level = level_it->second;
            while (remaining > 0 && !level.queue.empty()) {
                RestingOrder& maker = level.queue.front();
                std::int64_t qty = std::min(remaining, maker.size_raw);
                maker.size_raw -= qty;
                level.total_raw -= qty;
                remaining -= qty;
                fills.push_back(Fill{maker.order_id, level_it->first, qty});
                if (maker.size_raw == 0) {
                    index_.erase(maker.order_id);
                    level.queue.pop_front();
                }
            }
            if (level.queue.empty()) map.erase(level_it);
        }
    };
    if (aggressor_side == Side::kBuy) {
        sweep(asks_, [&](std::int64_t px) { return !limit_ticks || px <= *limit_ticks; });
    } else {
        sweep(bids_, [&](std::int64_t px) { return !limit_ticks || px >= *limit_ticks; });
    }
    return remaining;
}

BookEvent LimitOrderBook::apply_message(const MboMessage& msg) {
    if (auto why = message_violation(msg); !why.empty()) throw DataError(why);
    ++event_count_;
    last_ts_ = msg.timestamp;

    BookEvent event;
    event.affected_orders.push_back(msg.order_id);

    switch (msg.action) {
        case Action::kAdd: {
            if (index_.count(msg.order_id))
                throw DataError("duplicate live order id " + std::to_string(msg.order_id));
            Side side = *msg.side;
            std::int64_t ticks = to_ticks(*msg.price);
            std::int64_t remaining;
            if (msg.order_type == OrderType::kMarket) {
                // No price bound; any unfilled remainder is discarded.
                remaining = match(side, std::nullopt, msg.size->raw(), event.fills);
            } else {
                remaining = match(side, ticks, msg.size->raw(), event.fills);
                if (remaining > 0) rest_order(msg.order_id, side, ticks, remaining);
            }
            event.kind = event.fills.empty() ? BookEvent::Kind::kAdded : BookEvent::Kind::kExecuted;
            break;
        }
        case Action::kUpdate: {
            auto it = index_.find(msg.order_id);
            if (it == index_.end())
                throw DataError("update for unknown order id " + std::to_string(msg.order_id));
            std::int64_t new_ticks = to_ticks(*msg.price);
            std::int64_t new_size = msg.size->raw();
            Locator loc = it->second;
            if (new_ticks == loc.price_ticks && new_size <= loc.it->size_raw) {
                // Pure size decrease (partial cancellation) keeps queue position.
                std::int64_t delta = loc.it->size_raw - new_size;
                loc.it->size_raw = new_size;
                auto& map_level = loc.side == Side::kBuy ? bids_.at(loc.price_ticks)
                                                         : asks_.at(loc.price_ticks);
                map_level.total_raw -= delta;
                if (new_size == 0) remove_order(loc, msg.order_id);
                event.kind = BookEvent::Kind::kUpdated;
            } else {
                // Price change or size increase loses priority: the order
                // re-enters at the back, matching first if it now crosses.
                Side side = loc.side;
                remove_order(loc, msg.order_id);
                std::int64_t remaining = match(side, new_ticks, new_size, event.fills);
                if (remaining > 0) rest_order(msg.order_id, side, new_ticks, remaining);
                event.kind = event.fills.empty() ? BookEvent::Kind::kUpdated
                                                 : BookEvent::Kind::kExecuted;
            }
            break;
        }
        case Action::kCancel: {
            auto it = index_.find(msg.order_id);
            if (it == index_.end())
                throw DataError("cancel for unknown order id " + std::to_string(msg.order_id));
            remove_order(it->second, msg.order_id);
            event.kind = BookEvent::Kind::kCancelled;
            break;
        }
    }
    return event;
}

std::optional<TopOfBook> LimitOrderBook::best_state() const {
    if (bids_.empty() || asks_.empty()) return std::nullopt;
    const auto& bb = *bids_.begin();
    const auto& ba = *asks_.begin();
    TopOfBook top;
    top.bid_price_raw = bb.first * tick_size_.raw();
    top.bid_size_raw = bb.second.total_raw;
    top.ask_price_raw = ba.first * tick_size_.raw();
    top.ask_size_raw = ba.second.total_raw;
    return top;
}

template <class Map>
void LimitOrderBook::collect_side(const Map& map, int depth, std::vector<SnapshotLevel>& out,
                                  Decimal tick_size) {
    int count = 0;
    for (const auto& [ticks, level] : map) {
        if (count++ == depth) break;
        out.push_back(SnapshotLevel{Decimal::from_raw(ticks * tick_size.raw()),
                                    Decimal::from_raw(level.total_raw)});
    }
}

LobSnapshot LimitOrderBook::snapshot(int depth) const {
    LobSnapshot snap;
    snap.timestamp = last_ts_;
    collect_side(asks_, depth, snap.asks, tick_size_);
    collect_side(bids_, depth, snap.bids, tick_size_);
    return snap;
}

std::size_t LimitOrderBook::level_count(Side side) const {
    return side == Side::kBuy ? bids_.size() : asks_.size();
}

std::optional<RestingOrder> LimitOrderBook::find_order(std::uint64_t order_id) const {
    auto it = index_.find(order_id);
    if (it == index_.end()) return std::nullopt;
    return *it->second.it;
}

std::optional<std::int64_t> LimitOrderBook::level_price_at(Side side, int depth) const {
    auto nth = [&](const auto& map) -> std::optional<std::int64_t> {
        if (static_cast<std::size_t>(depth) > map.size()) return std::nullopt;
        auto it = map.begin();
        std::advance(it, depth - 1);
        return it->first;
    };
    return side == Side::kBuy ? nth(bids_) : nth(asks_);
}

std::vector<std::string> LimitOrderBook::validate() const {
    std::vector<std::string> violations;
    std::size_t queued_orders = 0;

    auto check_side = [&](const auto& map, Side side, const char* name) {
        for (const auto& [ticks, level] : map) {
            if (level.queue.empty()) {
                violations.push_back(std::string(name) + " level " + std::to_string(ticks) +
                                     " is empty");
                continue;
            }
            std::int64_t sum = 0;
            for (const auto& order : level.queue) {
                ++queued_orders;
                sum += order.size_raw;
                if (order.size_raw <= 0)
                    violations.push_back("order " + std::to_string(order.order_id) +
                                         " has non-positive size");
                if (order.side != side || order.price_ticks != ticks)
                    violations.push_back("order " + std::to_string(order.order_id) +
                                         " misfiled at " + name + " level " +
                                         std::to_string(ticks));
                auto it = index_.find(order.order_id);
                if (it == index_.end())
                    violations.push_back("order " + std::to_string(order.order_id) +
                                         " missing from index");
                else if (it->second.price_ticks != ticks || it->second.side != side ||
                         &*it->second.it != &order)
                    violations.push_back("index entry for order " +
                                         std::to_string(order.order_id) + " is stale");
            }
            if (sum != level.total_raw)
                violations.push_back(std::string(name) + " level " + std::to_string(ticks) +
                                     " total " + std::to_string(level.total_raw) +
                                     " != queue sum " + std::to_string(sum));
        }
    };
    check_side(bids_, Side::kBuy, "bid");
    check_side(asks_, Side::kSell, "ask");

    if (queued_orders != index_.size())
        violations.push_back("index size " + std::to_string(index_.size()) +
                             " != queued orders " + std::to_string(queued_orders));
    if (!bids_.empty() && !asks_.empty() && bids_.begin()->first >= asks_.begin()->first)
        violations.push_back("book crossed: best bid " + std::to_string(bids_.begin()->first) +
                             " >= best ask " + std::to_string(asks_.begin()->first));
    return violations;
}

bool LimitOrderBook::same_structure(const LimitOrderBook& other) const {
    auto side_equal = [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return false;
        auto ia = a.begin();
        auto ib = b.begin();
        for (; ia != a.end(); ++ia, ++ib) {
            if (ia->first != ib->first || ia->second.total_raw != ib->second.total_raw ||
                ia->second.queue.size() != ib->second.queue.size())
                return false;
            auto qa = ia->second.queue.begin();
            auto qb = ib->second.queue.begin();
            for (; qa != ia->second.queue.end(); ++qa, ++qb)
                if (qa->order_id != qb->order_id || qa->size_raw != qb->size_raw) return false;
        }
        return true;
    };
    return tick_size_ == other.tick_size_ && side_equal(bids_, other.bids_) &&
           side_equal(asks_, other.asks_);
}

}  // namespace mbo

#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mbo/feed_io.hpp"
#include "mbo/message.hpp"

namespace mbo {

// One order resting in a price level's FIFO queue. Sizes are Decimal raw
// units; prices are integer ticks (price / tick_size).
struct RestingOrder {
    std::uint64_t order_id = 0;
    Side side = Side::kBuy;
    std::int64_t price_ticks = 0;
    std::int64_t size_raw = 0;
    std::uint64_t arrival_seq = 0;
};

struct Fill {
    std::uint64_t maker_order_id = 0;
    std::int64_t price_ticks = 0;
    std::int64_t quantity_raw = 0;

    bool operator==(const Fill&) const = default;
};

struct BookEvent {
    enum class Kind { kAdded, kUpdated, kCancelled, kExecuted };
    Kind kind = Kind::kAdded;
    std::vector<std::uint64_t> affected_orders;
    std::vector<Fill> fills;  // in the FIFO order they occurred
};

// Best-of-book state. Mid price and mid size are the means of the two best
// prices and the two best sizes; absent whenever either side is empty.
struct TopOfBook {
    std::int64_t bid_price_raw = 0;
    std::int64_t bid_size_raw = 0;
    std::int64_t ask_price_raw = 0;
    std::int64_t ask_size_raw = 0;

    double mid_price() const { return (bid_price_raw + ask_price_raw) * 0.5e-4; }
    double mid_size() const { return (bid_size_raw + ask_size_raw) * 0.5e-4; }
};

// Full-depth limit order book maintained from the MBO stream. Single
// writer; snapshots and queries are safe between apply_message calls.
class LimitOrderBook {
public:
    explicit LimitOrderBook(Decimal tick_size);

    // Applies one message, matching marketable flow in price-then-FIFO
    // priority. Throws DataError on unknown/duplicate IDs or off-tick
    // prices. Book invariants hold on return.
    BookEvent apply_message(const MboMessage& msg);

    std::optional<TopOfBook> best_state() const;
    LobSnapshot snapshot(int depth = kSnapshotDepth) const;

    // Empty when all invariants hold; each entry names the level or ID.
    std::vector<std::string> validate() const;

    Decimal tick_size() const { return tick_size_; }
    std::size_t order_count() const { return index_.size(); }
    std::size_t level_count(Side side) const;
    bool contains(std::uint64_t order_id) const { return index_.count(order_id) != 0; }
    std::optional<RestingOrder> find_order(std::uint64_t order_id) const;
    std::uint64_t event_count() const { return event_count_; }
    Timestamp last_timestamp() const { return last_ts_; }

    // Price of the depth-th best level on a side (1-based), if that deep.
    std::optional<std::int64_t> level_price_at(Side side, int depth) const;

    // Structural equality: same levels, totals and queue orders (ids and
    // sizes). Arrival sequence numbers are not compared.
    bool same_structure(const LimitOrderBook& other) const;

private:
    struct Level {
        std::list<RestingOrder> queue;
        std::int64_t total_raw = 0;
    };
    using BidMap = std::map<std::int64_t, Level, std::greater<>>;
    using AskMap = std::map<std::int64_t, Level>;

    struct Locator {
        Side side;
        std::int64_t price_ticks;
        std::list<RestingOrder>::iterator it;
    };

    std::int64_t to_ticks(Decimal price) const;
    void rest_order(std::uint64_t id, Side side, std::int64_t price_ticks, std::int64_t size_raw);
    void remove_order(const Locator& loc, std::uint64_t id);
    // Matches an aggressor against the opposite side. limit_ticks empty
    // means no price bound (market order). Returns the unfilled remainder.
    std::int64_t match(Side aggressor_side, std::optional<std::int64_t> limit_ticks,
                       std::int64_t size_raw, std::vector<Fill>& fills);

    template <class Map>
    static void collect_side(const Map& map, int depth, std::vector<SnapshotLevel>& out,
                             Decimal tick_size);

    Decimal tick_size_;
    BidMap bids_;
    AskMap asks_;
    std::unordered_map<std::uint64_t, Locator> index_;
    std::uint64_t arrival_counter_ = 0;
    std::uint64_t event_count_ = 0;
    Timestamp last_ts_;
};

}  // namespace mbo

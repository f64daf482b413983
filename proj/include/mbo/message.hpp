#pragma once

#include <cstdint>
#include <optional>

#include "mbo/decimal.hpp"
#include "mbo/timestamp.hpp"

namespace mbo {

enum class OrderType : int { kLimit = 1, kMarket = 2 };
enum class Side : int { kBuy = 1, kSell = 2 };
enum class Action : int { kUpdate = 0, kAdd = 1, kCancel = 2 };

constexpr Side opposite(Side s) { return s == Side::kBuy ? Side::kSell : Side::kBuy; }

// One feed record. Cancels carry no side/price/size; the order is located
// by ID alone. Adds and updates carry all three.
struct MboMessage {
    Timestamp timestamp;
    std::uint64_t order_id = 0;
    OrderType order_type = OrderType::kLimit;
    std::optional<Side> side;
    Action action = Action::kAdd;
    std::optional<Decimal> price;
    std::optional<Decimal> size;

    bool operator==(const MboMessage&) const = default;
};

// Checks the per-message invariants (field presence by action, positive
// size on add). Returns an empty string when valid, else the reason.
std::string message_violation(const MboMessage& msg);

}  // namespace mbo

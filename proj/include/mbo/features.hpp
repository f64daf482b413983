#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "mbo/book.hpp"
#include "mbo/message.hpp"

namespace mbo {

constexpr int kMboFeatureWidth = 6;
constexpr int kLobFeatureWidth = 4 * kSnapshotDepth;  // 10 levels x {apx, asz, bpx, bsz}
constexpr int kDefaultLookback = 50;

// Message after per-ID preprocessing: absent side/price filled from the
// order's latest known state, cancel size forced to 0, action remapped to
// {-1, 0, +1}, and the price/size deltas against the previous entry of the
// same ID.
struct ProcessedMessage {
    Side side = Side::kBuy;
    int action = 0;  // -1 cancel, 0 update, +1 add
    Decimal price;
    Decimal size;
    Decimal change_price;  // signed
    Decimal change_size;   // signed

    bool operator==(const ProcessedMessage&) const = default;
};

// Latest side/price/size per live order ID, driven purely by messages.
// Market orders never rest, so they pass through untracked.
class OrderTracker {
public:
    ProcessedMessage process(const MboMessage& msg);  // throws DataError on unknown ID
    std::size_t live_count() const { return state_.size(); }

private:
    struct State {
        Side side;
        Decimal price;
        Decimal size;
    };
    std::unordered_map<std::uint64_t, State> state_;
};

using FeatureVector = std::array<double, kMboFeatureWidth>;

// The six normalised features. Prices are expressed in ticks away from the
// mid (divided by a further 100 for the level feature, per the scheme);
// sizes are relative to the mid size. Computed from raw integer ratios so
// the result is invariant under common scaling of prices+tick or of sizes.
FeatureVector normalize(const ProcessedMessage& p, const TopOfBook& top, Decimal tick_size);

// One retained tick: the unit of tick time shared by features, labels and
// mid-price sampling.
struct Tick {
    std::size_t message_index = 0;  // row in the source feed
    std::int32_t day_index = 0;
    double mid_price = 0.0;
    FeatureVector mbo{};
};

// Drives a book in lockstep with the message stream. Every message updates
// the book; a message enters the tick stream only if its (filled) price
// lies within the ten best levels of its side and the mid is available.
class FeatureStream {
public:
    FeatureStream(Decimal tick_size, bool collect_lob = false);

    // Returns true when the message produced a tick.
    bool on_message(const MboMessage& msg);

    const std::vector<Tick>& ticks() const { return ticks_; }
    const std::vector<std::array<double, kLobFeatureWidth>>& lob_rows() const { return lob_rows_; }
    const LimitOrderBook& book() const { return book_; }

private:
    bool within_ten_levels(Side side, std::int64_t price_ticks) const;

    Decimal tick_size_;
    bool collect_lob_;
    LimitOrderBook book_;
    OrderTracker tracker_;
    std::vector<Tick> ticks_;
    std::vector<std::array<double, kLobFeatureWidth>> lob_rows_;
};

// Indices of ticks that can end a lookback window: at least T-1 ticks of
// the same trading day precede them. Stride 1.
std::vector<std::size_t> window_end_indices(const std::vector<Tick>& ticks, int lookback);
std::vector<std::size_t> window_end_indices(const std::vector<std::int32_t>& day_index,
                                            int lookback);

// Per-column z-score statistics for the LOB path. Fit on training rows
// only; applying them to later rows never leaks test-period information.
struct LobStats {
    std::array<double, kLobFeatureWidth> mean{};
    std::array<double, kLobFeatureWidth> stddev{};
};

LobStats fit_lob_stats(const std::vector<std::array<double, kLobFeatureWidth>>& rows,
                       std::size_t first, std::size_t last);  // rows [first, last)

std::array<double, kLobFeatureWidth> lob_featurize(
    const std::array<double, kLobFeatureWidth>& raw, const LobStats& stats);

// Flattens a book snapshot into the 40 raw columns, level-major:
// ask_px, ask_sz, bid_px, bid_sz per level. A side shallower than ten
// levels is padded with its deepest present price and zero size.
std::array<double, kLobFeatureWidth> lob_raw_row(const LobSnapshot& snap);

}  // namespace mbo

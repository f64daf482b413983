#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mbo/decimal.hpp"
#include "mbo/message.hpp"

namespace mbo {

// Seeded zero-intelligence feed generator. Event types are drawn
// independently, limit prices sit a geometric number of ticks from the
// touch, and an internal shadow book guarantees every emitted message is
// legal (cancels and updates reference live IDs, adds use fresh IDs).
//
// signal_strength > 0 plants a learnable pattern: short bursts of
// same-side adds at the touch, each followed by a biased event flow that
// drifts the mid in the burst direction for at least signal_burst_length
// ticks.
struct SynthConfig {
    std::uint64_t seed = 42;
    std::size_t n_messages = 100'000;
    Decimal tick_size = Decimal::from_raw(100);        // 0.01
    Decimal initial_mid = Decimal::from_int(100);      // 100.00
    double p_add = 0.46;
    double p_update = 0.18;
    double p_cancel = 0.30;
    double p_market = 0.06;
    double level_geometric_p = 0.45;   // placement decay over distance from touch
    double size_lognorm_mu = 4.6051701859880914;  // ln 100
    double size_lognorm_sigma = 0.8;
    double signal_strength = 0.0;      // in [0, 1]
    int signal_burst_length = 25;      // minimum drift duration, in ticks
    int n_days = 8;
    std::string instrument = "SYNTH";

    // Empty when valid, else the first violated constraint.
    std::string violation() const;
};

struct PlantedBurst {
    int direction = 0;                // +1 up, -1 down
    std::size_t first_message = 0;    // indices into the emitted feed
    std::size_t last_message = 0;
};

struct SynthFeed {
    std::vector<MboMessage> messages;
    std::vector<PlantedBurst> bursts;
};

SynthFeed generate_feed(const SynthConfig& cfg);

}  // namespace mbo

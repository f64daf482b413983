#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace mbo {

enum class LabelClass : int { kDown = 0, kStationary = 1, kUp = 2 };

// Smooth label at tick t for horizon k: the relative change between the
// mean mid over the next k ticks and the mean mid over the last k ticks
// (both windows inclusive of k points, the backward one ending at t).
// Ticks without both complete windows produce no label.
struct LabeledTick {
    std::size_t tick_index = 0;
    std::int32_t day_index = 0;
    double l_value = 0.0;
    LabelClass label = LabelClass::kStationary;
};

// l > alpha is up, l < -alpha is down, stationary otherwise. The
// inequalities are strict: ties at +-alpha are stationary.
LabelClass classify(double l, double alpha);

// Streaming labeller over one day's mid series: emits l_t for every t with
// complete backward and forward windows. O(n) via running window sums.
std::vector<std::pair<std::size_t, double>> smooth_labels_one_day(
    const std::vector<double>& mids, int horizon);

// Multi-day series; windows never span a day boundary.
std::vector<LabeledTick> label_series(const std::vector<double>& mids,
                                      const std::vector<std::int32_t>& day_index, int horizon,
                                      double alpha);

// Returns the l values only (classless), aligned as LabeledTick but with
// alpha irrelevant; used for calibration.
std::vector<LabeledTick> l_values_series(const std::vector<double>& mids,
                                         const std::vector<std::int32_t>& day_index, int horizon);

// Picks the threshold that best balances the three classes over a training
// set of l values: grid over the empirical |l| quantiles, minimising the
// largest deviation of any class proportion from 1/3.
double calibrate_alpha(const std::vector<double>& l_values);

struct ClassProportions {
    double down = 0.0;
    double stationary = 0.0;
    double up = 0.0;
};

ClassProportions class_balance(const std::vector<LabelClass>& labels);
ClassProportions proportions_at(const std::vector<double>& l_values, double alpha);

}  // namespace mbo

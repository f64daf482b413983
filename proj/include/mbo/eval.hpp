#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mbo {

// Support-weighted multiclass metrics, in percent. Weighting recall by
// class support makes weighted recall coincide with accuracy, so those
// two columns agree row-by-row in any results table built from this.
struct EvalMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

EvalMetrics metrics(const std::vector<int>& predicted, const std::vector<int>& truth);

struct Confusion {
    std::array<std::array<std::size_t, 3>, 3> counts{};     // [true][pred]
    std::array<std::array<double, 3>, 3> normalized{};      // rows sum to 1
    std::array<bool, 3> empty_row{};                        // flagged, not normalised
};

Confusion confusion(const std::vector<int>& predicted, const std::vector<int>& truth);

struct QuartileSummary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

QuartileSummary quartiles(std::vector<double> values);

struct DailyAccuracy {
    std::vector<std::int32_t> day;
    std::vector<double> accuracy;
    QuartileSummary summary;
    std::vector<std::int32_t> skipped_days;  // zero-sample days
};

DailyAccuracy daily_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth,
                             const std::vector<std::int32_t>& days);

// Scalar predictive signal per sample: p(up) - p(down). Monotone in
// directional conviction and symmetric across the up/down classes.
std::vector<double> directional_signal(const std::vector<std::array<double, 3>>& probs);

struct CorrelationMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> r;
    std::vector<std::vector<bool>> defined;  // false for zero-variance pairs
};

CorrelationMatrix pearson_matrix(const std::vector<std::string>& names,
                                 const std::vector<std::vector<double>>& signals);

double pearson(const std::vector<double>& a, const std::vector<double>& b, bool& defined);

struct KsResult {
    double d = 0.0;        // sup |F_A - F_B|
    double p_value = 1.0;  // two-sample asymptotic
};

KsResult ks_statistic(std::vector<double> a, std::vector<double> b);

// Equal-weight ensemble: the per-sample arithmetic mean of the members'
// probability rows. All members must be aligned and the same length.
std::vector<std::array<double, 3>> ensemble(
    const std::vector<std::vector<std::array<double, 3>>>& members);

std::vector<int> argmax_classes(const std::vector<std::array<double, 3>>& probs);

}  // namespace mbo

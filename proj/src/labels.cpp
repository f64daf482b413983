#include "mbo/labels.hpp"

#include <algorithm>
#include <cmath>

#include "mbo/errors.hpp"

namespace mbo {

LabelClass classify(double l, double alpha) {
    if (l > alpha) return LabelClass::kUp;
    if (l < -alpha) return LabelClass::kDown;
    return LabelClass::kStationary;
}

std::vector<std::pair<std::size_t, double>> smooth_labels_one_day(const std::vector<double>& mids,
                                                                  int horizon) {
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    std::vector<std::pair<std::size_t, double>> out;
    std::size_t n = mids.size();
    std::size_t k = static_cast<std::size_t>(horizon);
    if (n < 2 * k) return out;

    // m_minus(t) averages mids[t-k+1 .. t]; m_plus(t) averages mids[t+1 .. t+k].
    double back_sum = 0.0;
    double fwd_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) back_sum += mids[i];
    for (std::size_t i = k; i < 2 * k; ++i) fwd_sum += mids[i];

    for (std::size_t t = k - 1; t + k < n; ++t) {
        if (t > k - 1) {
            back_sum += mids[t] - mids[t - k];
            fwd_sum += mids[t + k] - mids[t];
        }
        double m_minus = back_sum / static_cast<double>(k);
        double m_plus = fwd_sum / static_cast<double>(k);
        if (m_minus <= 0.0) throw DataError("non-positive mid mean in label window");
        out.emplace_back(t, (m_plus - m_minus) / m_minus);
    }
    return out;
}

namespace {

template <class Emit>
void for_each_day(const std::vector<double>& mids, const std::vector<std::int32_t>& day_index,
                  Emit&& emit) {
    if (mids.size() != day_index.size()) throw DataError("mids/day series length mismatch");
    std::size_t start = 0;
    while (start < mids.size()) {
        std::size_t end = start;
        while (end < mids.size() && day_index[end] == day_index[start]) ++end;
        emit(start, end);
        start = end;
    }
}

}  // namespace

std::vector<LabeledTick> l_values_series(const std::vector<double>& mids,
                                         const std::vector<std::int32_t>& day_index, int horizon) {
    std::vector<LabeledTick> out;
    for_each_day(mids, day_index, [&](std::size_t start, std::size_t end) {
        std::vector<double> day_mids(mids.begin() + static_cast<std::ptrdiff_t>(start),
                                     mids.begin() + static_cast<std::ptrdiff_t>(end));
        for (auto [t, l] : smooth_labels_one_day(day_mids, horizon)) {
            LabeledTick lt;
            lt.tick_index = start + t;
            lt.day_index = day_index[start];
            lt.l_value = l;
            out.push_back(lt);
        }
    });
    return out;
}

std::vector<LabeledTick> label_series(const std::vector<double>& mids,
                                      const std::vector<std::int32_t>& day_index, int horizon,
                                      double alpha) {
    if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
    std::vector<LabeledTick> out = l_values_series(mids, day_index, horizon);
    for (LabeledTick& lt : out) lt.label = classify(lt.l_value, alpha);
    return out;
}

ClassProportions proportions_at(const std::vector<double>& l_values, double alpha) {
    if (l_values.empty()) throw DataError("no l values");
    std::size_t up = 0, down = 0;
    for (double l : l_values) {
        if (l > alpha)
            ++up;
        else if (l < -alpha)
            ++down;
    }
    double n = static_cast<double>(l_values.size());
    ClassProportions p;
    p.up = static_cast<double>(up) / n;
    p.down = static_cast<double>(down) / n;
    p.stationary = 1.0 - p.up - p.down;
    return p;
}

double calibrate_alpha(const std::vector<double>& l_values) {
    if (l_values.size() < 1000)
        throw DataError("calibration needs at least 1000 training l values, got " +
                        std::to_string(l_values.size()));

    std::vector<double> abs_l(l_values.size());
    for (std::size_t i = 0; i < l_values.size(); ++i) abs_l[i] = std::fabs(l_values[i]);
    std::sort(abs_l.begin(), abs_l.end());
    if (abs_l.back() == 0.0) throw DataError("degenerate l distribution: all values are zero");

    std::vector<double> sorted_l(l_values);
    std::sort(sorted_l.begin(), sorted_l.end());
    auto deviation_at = [&](double alpha) {
        // up = #(l > alpha), down = #(l < -alpha), via binary search.
        auto n = static_cast<double>(sorted_l.size());
        double up = static_cast<double>(
            sorted_l.end() - std::upper_bound(sorted_l.begin(), sorted_l.end(), alpha));
        double down = static_cast<double>(
            std::lower_bound(sorted_l.begin(), sorted_l.end(), -alpha) - sorted_l.begin());
        double stat = n - up - down;
        return std::max({std::fabs(up / n - 1.0 / 3.0), std::fabs(down / n - 1.0 / 3.0),
                         std::fabs(stat / n - 1.0 / 3.0)});
    };

    // Candidate thresholds: the |l| quantile grid (plus zero). The class
    // proportions only change at order statistics of |l|, so a dense
    // quantile sweep finds the minimiser to within one grid step.
    constexpr int kGridPoints = 4096;
    double best_alpha = 0.0;
    double best_dev = deviation_at(0.0);
    for (int g = 0; g <= kGridPoints; ++g) {
        std::size_t idx = static_cast<std::size_t>(
            (static_cast<double>(g) / kGridPoints) * static_cast<double>(abs_l.size() - 1));
        double alpha = abs_l[idx];
        double dev = deviation_at(alpha);
        if (dev < best_dev) {
            best_dev = dev;
            best_alpha = alpha;
        }
    }
    return best_alpha;
}

ClassProportions class_balance(const std::vector<LabelClass>& labels) {
    if (labels.empty()) throw DataError("empty split");
    std::size_t counts[3] = {0, 0, 0};
    for (LabelClass c : labels) ++counts[static_cast<int>(c)];
    double n = static_cast<double>(labels.size());
    return ClassProportions{static_cast<double>(counts[0]) / n,
                            static_cast<double>(counts[1]) / n,
                            static_cast<double>(counts[2]) / n};
}

}  // namespace mbo

#include "mbo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mbo/errors.hpp"

namespace mbo {

namespace {

void check_aligned(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw DataError(std::string("misaligned ") + what);
    if (a == 0) throw DataError(std::string("empty ") + what);
}

}  // namespace

EvalMetrics metrics(const std::vector<int>& predicted, const std::vector<int>& truth) {
    check_aligned(predicted.size(), truth.size(), "prediction/label series");
    Confusion cm = confusion(predicted, truth);

    double n = static_cast<double>(truth.size());
    double correct = 0.0;
    for (int c = 0; c < 3; ++c) correct += static_cast<double>(cm.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)]);

    EvalMetrics out;
    out.accuracy = 100.0 * correct / n;
    for (int c = 0; c < 3; ++c) {
        auto cu = static_cast<std::size_t>(c);
        double support = 0.0, pred_c = 0.0;
        for (int j = 0; j < 3; ++j) {
            support += static_cast<double>(cm.counts[cu][static_cast<std::size_t>(j)]);
            pred_c += static_cast<double>(cm.counts[static_cast<std::size_t>(j)][cu]);
        }
        double tp = static_cast<double>(cm.counts[cu][cu]);
        double precision_c = pred_c > 0.0 ? tp / pred_c : 0.0;
        double recall_c = support > 0.0 ? tp / support : 0.0;
        double f1_c = (precision_c + recall_c) > 0.0
                          ? 2.0 * precision_c * recall_c / (precision_c + recall_c)
                          : 0.0;
        double weight = support / n;
        out.precision += 100.0 * weight * precision_c;
        out.recall += 100.0 * weight * recall_c;
        out.f1 += 100.0 * weight * f1_c;
    }
    return out;
}

Confusion confusion(const std::vector<int>& predicted, const std::vector<int>& truth) {
    check_aligned(predicted.size(), truth.size(), "prediction/label series");
    Confusion cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] > 2 || predicted[i] < 0 || predicted[i] > 2)
            throw DataError("class code outside {0,1,2} at sample " + std::to_string(i));
        ++cm.counts[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
    }
    for (int r = 0; r < 3; ++r) {
        auto ru = static_cast<std::size_t>(r);
        std::size_t row_total = cm.counts[ru][0] + cm.counts[ru][1] + cm.counts[ru][2];
        if (row_total == 0) {
            cm.empty_row[ru] = true;
            continue;
        }
        for (int c = 0; c < 3; ++c)
            cm.normalized[ru][static_cast<std::size_t>(c)] =
                static_cast<double>(cm.counts[ru][static_cast<std::size_t>(c)]) /
                static_cast<double>(row_total);
    }
    return cm;
}

QuartileSummary quartiles(std::vector<double> values) {
    if (values.empty()) throw DataError("no values to summarise");
    std::sort(values.begin(), values.end());
    auto interp = [&](double p) {
        double h = p * static_cast<double>(values.size() - 1);
        std::size_t lo = static_cast<std::size_t>(std::floor(h));
        std::size_t hi = std::min(lo + 1, values.size() - 1);
        double frac = h - std::floor(h);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    QuartileSummary s;
    s.min = values.front();
    s.q1 = interp(0.25);
    s.median = interp(0.5);
    s.q3 = interp(0.75);
    s.max = values.back();
    return s;
}

DailyAccuracy daily_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth,
                             const std::vector<std::int32_t>& days) {
    check_aligned(predicted.size(), truth.size(), "prediction/label series");
    check_aligned(predicted.size(), days.size(), "prediction/day series");

    std::map<std::int32_t, std::pair<std::size_t, std::size_t>> per_day;  // day -> (correct, n)
    for (std::size_t i = 0; i < truth.size(); ++i) {
        auto& [correct, n] = per_day[days[i]];
        ++n;
        if (predicted[i] == truth[i]) ++correct;
    }
    DailyAccuracy out;
    for (const auto& [day, stats] : per_day) {
        if (stats.second == 0) {
            out.skipped_days.push_back(day);
            continue;
        }
        out.day.push_back(day);
        out.accuracy.push_back(100.0 * static_cast<double>(stats.first) /
                               static_cast<double>(stats.second));
    }
    out.summary = quartiles(out.accuracy);
    return out;
}

std::vector<double> directional_signal(const std::vector<std::array<double, 3>>& probs) {
    std::vector<double> signal(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) signal[i] = probs[i][2] - probs[i][0];
    return signal;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b, bool& defined) {
    check_aligned(a.size(), b.size(), "signal pair");
    double n = static_cast<double>(a.size());
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double da = a[i] - mean_a;
        double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) {
        defined = false;
        return 0.0;
    }
    defined = true;
    return cov / std::sqrt(var_a * var_b);
}

CorrelationMatrix pearson_matrix(const std::vector<std::string>& names,
                                 const std::vector<std::vector<double>>& signals) {
    if (names.size() != signals.size()) throw DataError("name/signal count mismatch");
    std::size_t m = signals.size();
    CorrelationMatrix out;
    out.names = names;
    out.r.assign(m, std::vector<double>(m, 0.0));
    out.defined.assign(m, std::vector<bool>(m, true));
    for (std::size_t i = 0; i < m; ++i) {
        out.r[i][i] = 1.0;
        for (std::size_t j = i + 1; j < m; ++j) {
            bool defined = true;
            double r = pearson(signals[i], signals[j], defined);
            out.r[i][j] = out.r[j][i] = r;
            out.defined[i][j] = out.defined[j][i] = defined;
        }
    }
    return out;
}

KsResult ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DataError("KS requires non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    KsResult out;
    std::size_t i = 0, j = 0;
    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        out.d = std::max(out.d, std::fabs(static_cast<double>(i) / na -
                                          static_cast<double>(j) / nb));
    }

    // Asymptotic two-sample p-value (Smirnov series with the small-sample
    // correction from Numerical Recipes).
    double ne = na * nb / (na + nb);
    double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * out.d;
    double p = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2.0 * sign * std::exp(-2.0 * lambda * lambda * k * k);
        p += term;
        sign = -sign;
        if (std::fabs(term) < 1e-12) break;
    }
    out.p_value = std::clamp(p, 0.0, 1.0);
    return out;
}

std::vector<std::array<double, 3>> ensemble(
    const std::vector<std::vector<std::array<double, 3>>>& members) {
    if (members.empty()) throw DataError("ensemble needs at least one member");
    std::size_t n = members[0].size();
    for (const auto& m : members) check_aligned(m.size(), n, "ensemble members");
    std::vector<std::array<double, 3>> out(n, {0.0, 0.0, 0.0});
    double k = static_cast<double>(members.size());
    for (const auto& m : members)
        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < 3; ++c) out[i][static_cast<std::size_t>(c)] += m[i][static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) out[i][static_cast<std::size_t>(c)] /= k;
    return out;
}

std::vector<int> argmax_classes(const std::vector<std::array<double, 3>>& probs) {
    std::vector<int> classes(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        int best = 0;
        for (int c = 1; c < 3; ++c)
            if (probs[i][static_cast<std::size_t>(c)] > probs[i][static_cast<std::size_t>(best)])
                best = c;
        classes[i] = best;
    }
    return classes;
}

}  // namespace mbo

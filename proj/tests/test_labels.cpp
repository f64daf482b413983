#include <doctest.h>

#include <cmath>

#include "mbo/errors.hpp"
#include "mbo/labels.hpp"
#include "mbo/rng.hpp"

using namespace mbo;

TEST_SUITE_BEGIN("labels");

namespace {

// Brute-force reference for the smooth label: recompute both window means
// from scratch at every index. The streaming implementation must match
// this exactly.
std::vector<std::pair<std::size_t, double>> brute_force_labels(const std::vector<double>& mids,
                                                               int k) {
    std::vector<std::pair<std::size_t, double>> out;
    std::size_t ku = static_cast<std::size_t>(k);
    for (std::size_t t = 0; t < mids.size(); ++t) {
        if (t + 1 < ku || t + ku >= mids.size()) continue;
        double back = 0.0, fwd = 0.0;
        for (std::size_t i = 0; i < ku; ++i) back += mids[t - i];
        for (std::size_t i = 1; i <= ku; ++i) fwd += mids[t + i];
        double m_minus = back / k;
        double m_plus = fwd / k;
        out.emplace_back(t, (m_plus - m_minus) / m_minus);
    }
    return out;
}

}  // namespace

TEST_CASE("constant mids give zero labels") {
    std::vector<double> mids(100, 42.0);
    for (auto [t, l] : smooth_labels_one_day(mids, 20)) CHECK(l == 0.0);
}

TEST_CASE("hand-computed case k=2") {
    std::vector<double> mids{10.0, 10.0, 10.2, 10.2};
    auto ls = smooth_labels_one_day(mids, 2);
    // Only t=1 has both windows: m- = (10+10)/2, m+ = (10.2+10.2)/2.
    REQUIRE(ls.size() == 1);
    CHECK(ls[0].first == 1);
    CHECK(ls[0].second == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("scaling the mid series leaves labels unchanged") {
    Rng rng(17);
    std::vector<double> mids;
    double m = 100.0;
    for (int i = 0; i < 500; ++i) {
        m += rng.uniform(-0.01, 0.01);
        mids.push_back(m);
    }
    auto base = smooth_labels_one_day(mids, 50);
    std::vector<double> scaled(mids);
    for (double& x : scaled) x *= 3.0;
    auto after = smooth_labels_one_day(scaled, 50);
    REQUIRE(base.size() == after.size());
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(after[i].second == doctest::Approx(base[i].second).epsilon(1e-12));
}

TEST_CASE("streaming labeller equals brute force at every index") {
    Rng rng(4);
    std::vector<double> mids;
    double m = 50.0;
    for (int i = 0; i < 3'000; ++i) {
        m += rng.uniform(-0.005, 0.005);
        mids.push_back(m);
    }
    for (int k : {20, 50, 100}) {
        auto fast = smooth_labels_one_day(mids, k);
        auto slow = brute_force_labels(mids, k);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t i = 0; i < fast.size(); ++i) {
            CHECK(fast[i].first == slow[i].first);
            CHECK(std::fabs(fast[i].second - slow[i].second) < 1e-12);
        }
    }
}

TEST_CASE("boundary ticks produce no label") {
    std::vector<double> mids(99, 10.0);
    auto ls = smooth_labels_one_day(mids, 50);
    // t ranges over [49, 48]: with 99 points and k=50 nothing qualifies
    // until there are at least 100 points.
    CHECK(ls.empty());
    mids.push_back(10.0);
    ls = smooth_labels_one_day(mids, 50);
    CHECK(ls.size() == 1);
}

TEST_CASE("labels never cross a day boundary") {
    std::vector<double> mids(200, 10.0);
    std::vector<std::int32_t> days(200, 7);
    for (std::size_t i = 100; i < 200; ++i) days[i] = 8;
    auto ls = l_values_series(mids, days, 30);
    // Each 100-tick day supports t in [29, 69]: 41 labels per day.
    CHECK(ls.size() == 82);
    for (const LabeledTick& lt : ls) {
        std::size_t day_start = lt.tick_index < 100 ? 0 : 100;
        CHECK(lt.tick_index >= day_start + 29);
        CHECK(lt.tick_index + 30 < day_start + 100);
    }
}

TEST_CASE("classification thresholds are strict") {
    const double alpha = 0.25e-4;  // a documented k=20 setting
    CHECK(classify(0.0, alpha) == LabelClass::kStationary);
    CHECK(classify(alpha, alpha) == LabelClass::kStationary);   // tie: stationary
    CHECK(classify(-alpha, alpha) == LabelClass::kStationary);  // tie: stationary
    CHECK(classify(3e-5, 2.5e-5) == LabelClass::kUp);
    CHECK(classify(-3e-5, 2.5e-5) == LabelClass::kDown);
}

TEST_CASE("classify mirrors under negation") {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        double l = rng.uniform(-1e-3, 1e-3);
        double alpha = rng.uniform(0.0, 5e-4);
        LabelClass pos = classify(l, alpha);
        LabelClass neg = classify(-l, alpha);
        if (pos == LabelClass::kUp) CHECK(neg == LabelClass::kDown);
        if (pos == LabelClass::kDown) CHECK(neg == LabelClass::kUp);
        if (pos == LabelClass::kStationary) CHECK(neg == LabelClass::kStationary);
    }
}

TEST_CASE("alpha calibration balances a symmetric distribution") {
    Rng rng(31);
    std::vector<double> ls;
    for (int i = 0; i < 30'000; ++i) ls.push_back(rng.normal() * 1e-4);

    double alpha = calibrate_alpha(ls);
    // Brute-force scan over |l| order statistics must not beat the grid by
    // more than one quantile step.
    std::vector<double> abs_l;
    for (double l : ls) abs_l.push_back(std::fabs(l));
    std::sort(abs_l.begin(), abs_l.end());
    // The 2/3 quantile of |l| balances a symmetric distribution.
    double expect = abs_l[static_cast<std::size_t>(2.0 / 3.0 * (abs_l.size() - 1))];
    CHECK(alpha == doctest::Approx(expect).epsilon(0.02));

    ClassProportions p = proportions_at(ls, alpha);
    CHECK(std::fabs(p.down - 1.0 / 3.0) < 0.01);
    CHECK(std::fabs(p.stationary - 1.0 / 3.0) < 0.01);
    CHECK(std::fabs(p.up - 1.0 / 3.0) < 0.01);
}

TEST_CASE("calibration rejects degenerate input") {
    std::vector<double> zeros(2000, 0.0);
    CHECK_THROWS_AS(calibrate_alpha(zeros), DataError);
    std::vector<double> too_few(100, 1e-4);
    CHECK_THROWS_AS(calibrate_alpha(too_few), DataError);
}

TEST_CASE("class balance proportions") {
    std::vector<LabelClass> labels;
    for (int i = 0; i < 10; ++i) {
        labels.push_back(LabelClass::kDown);
        labels.push_back(LabelClass::kStationary);
        labels.push_back(LabelClass::kUp);
    }
    ClassProportions p = class_balance(labels);
    CHECK(p.down == doctest::Approx(1.0 / 3.0));
    CHECK(p.stationary == doctest::Approx(1.0 / 3.0));
    CHECK(p.up == doctest::Approx(1.0 / 3.0));

    std::vector<LabelClass> one_class(5, LabelClass::kUp);
    p = class_balance(one_class);
    CHECK(p.up == 1.0);
    CHECK(p.down == 0.0);
    CHECK(p.stationary == 0.0);

    CHECK_THROWS_AS(class_balance({}), DataError);
}

TEST_SUITE_END();

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mbo/decimal.hpp"
#include "mbo/features.hpp"
#include "mbo/labels.hpp"

namespace mbo {

// Feature rows for one instrument in tick time, plus the aligned mid and
// day series. Windows are views into this matrix: storing rows once keeps
// a lookback-50 stream fifty times smaller than materialised windows.
struct TickSeries {
    std::string mode = "mbo";  // "mbo" or "lob"
    std::string instrument = "SYNTH";
    Decimal tick_size;
    int feature_width = kMboFeatureWidth;
    int lookback = kDefaultLookback;
    std::vector<double> rows;  // size() * feature_width, row-major
    std::vector<std::int32_t> day_index;
    std::vector<double> mid;

    std::size_t size() const { return day_index.size(); }
    const double* row(std::size_t i) const {
        return rows.data() + i * static_cast<std::size_t>(feature_width);
    }
};

// Binary layout: per row a u32 column count followed by that many
// little-endian float64 values. Shapes and tick metadata live in the JSON
// sidecar at <path>.json.
void write_tick_series(const TickSeries& series, const std::string& path);
TickSeries read_tick_series(const std::string& path);

void write_mids_csv(const TickSeries& series, const std::string& path);
// tick_index,date,mid_price
struct MidsFile {
    std::vector<std::size_t> tick_index;
    std::vector<std::int32_t> day_index;
    std::vector<double> mid;
};
MidsFile read_mids_csv(const std::string& path);

void write_labels_csv(const std::vector<LabeledTick>& labels, const std::string& path);
std::vector<LabeledTick> read_labels_csv(const std::string& path);

// Labelled windows over a series: one sample per tick that both ends a
// full same-day lookback window and carries a label.
struct SampleSet {
    const TickSeries* series = nullptr;
    int lookback = kDefaultLookback;
    std::vector<std::size_t> end_tick;
    std::vector<int> label;  // class codes 0/1/2

    std::size_t size() const { return end_tick.size(); }
    const double* window(std::size_t i) const {
        return series->row(end_tick[i] + 1 - static_cast<std::size_t>(lookback));
    }
    std::int32_t day(std::size_t i) const { return series->day_index[end_tick[i]]; }
};

SampleSet make_samples(const TickSeries& series, const std::vector<LabeledTick>& labels,
                       int lookback);

// Chronological split by trading day: the first `train_frac` of distinct
// days train, the next `val_frac` validate, the remainder tests. Days are
// never shared between splits.
struct SplitFractions {
    double train = 0.5;
    double val = 0.25;
};

struct Splits {
    SampleSet train;
    SampleSet val;
    SampleSet test;
};

Splits split_by_day(const SampleSet& all, SplitFractions fractions);

// The day-to-split assignment behind split_by_day, for anything else that
// must respect the same boundaries (alpha calibration, LOB statistics).
struct DaySplit {
    std::int32_t last_train_day = 0;  // inclusive
    std::int32_t last_val_day = 0;    // inclusive
    int which(std::int32_t day) const {
        return day <= last_train_day ? 0 : (day <= last_val_day ? 1 : 2);
    }
};

DaySplit day_split(const std::vector<std::int32_t>& day_index, SplitFractions fractions);

}  // namespace mbo

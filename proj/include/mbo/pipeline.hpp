#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mbo/dataset.hpp"
#include "mbo/synth.hpp"
#include "mbo/train.hpp"

namespace mbo {

// One model entry in the pipeline config: which feature stream it trains
// on and its hyperparameters.
struct PipelineModel {
    std::string name;       // defaults to "<DATA>-<ARCH>", e.g. "MBO-LSTM"
    std::string data = "mbo";  // "mbo" or "lob"
    nn::Arch arch = nn::Arch::kLinear;
    int layers = 1;
    int units = 32;
    double learning_rate = 1e-4;
    int batch_size = 128;
    int max_epochs = 200;
};

struct PipelineConfig {
    std::uint64_t seed = 7;
    std::string out_dir = "run";
    SynthConfig gen;
    int lookback = kDefaultLookback;
    int horizon = 20;
    std::optional<double> alpha;  // absent: calibrate on the training days
    SplitFractions split;
    std::vector<PipelineModel> models;
    int threads = 0;
    // Subsample training windows by this stride (1 = every window). Desk-
    // scale control; validation/test always use every window.
    int train_stride = 1;

    static PipelineConfig from_json_file(const std::string& path);
    std::string violation() const;
};

struct PipelineResult {
    std::string report_path;
    std::string feed_path;
    std::vector<std::string> checkpoint_dirs;
};

// gen -> rebuild -> featurize -> label -> train -> predict -> eval, all
// seeded; rerunning with the same config writes byte-identical artifacts.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace mbo

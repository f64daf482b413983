#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mbo/dataset.hpp"
#include "mbo/nn/checkpoint.hpp"
#include "mbo/nn/model.hpp"

namespace mbo {

struct TrainConfig {
    nn::ModelSpec model;
    double learning_rate = 1e-4;
    int batch_size = 128;
    int patience = 10;    // epochs without strict val-loss improvement
    int max_epochs = 200;
    std::uint64_t seed = 0;
    int threads = 0;      // 0 = hardware concurrency

    std::string violation() const;  // empty when valid
};

// Stops after `patience` consecutive epochs without a strictly better
// validation loss; remembers which epoch was best.
class EarlyStopper {
public:
    explicit EarlyStopper(int patience) : patience_(patience) {}

    // Returns true when training should stop after this epoch.
    bool observe(int epoch, double val_loss) {
        if (val_loss < best_loss_) {
            best_loss_ = val_loss;
            best_epoch_ = epoch;
            since_best_ = 0;
            return false;
        }
        return ++since_best_ >= patience_;
    }

    int best_epoch() const { return best_epoch_; }
    double best_loss() const { return best_loss_; }

private:
    int patience_;
    double best_loss_ = std::numeric_limits<double>::infinity();
    int best_epoch_ = -1;
    int since_best_ = 0;
};

struct FitResult {
    nn::Checkpoint checkpoint;  // parameters from the best validation epoch
    int epochs_run = 0;
};

// Minibatch Adam on mean cross-entropy. Shuffling is seeded and batch
// gradients reduce in a fixed chunk order, so a (config, seed, data)
// triple always yields the same trajectory regardless of thread count.
FitResult fit(const TrainConfig& cfg, const SampleSet& train, const SampleSet& val);

// Mean cross-entropy of the checkpointed model over a sample set.
double evaluate_loss(const nn::Parameters& params, const SampleSet& set, int threads = 0);

// Class probabilities for every listed window end; rows sum to 1.
std::vector<std::array<double, 3>> predict(const nn::Checkpoint& ckpt, const TickSeries& series,
                                           const std::vector<std::size_t>& end_ticks,
                                           int threads = 0);

// Appendix-style hyperparameter grid; every axis must stay inside the
// allowed search space.
struct GridSpace {
    std::vector<int> layers{1};
    std::vector<int> units{32};
    std::vector<double> learning_rates{1e-4};
    std::vector<int> batch_sizes{128};

    std::string violation(nn::Arch arch) const;
};

struct GridRun {
    TrainConfig config;
    double val_loss = 0.0;
    int best_epoch = -1;
};

struct GridResult {
    TrainConfig best;
    std::vector<GridRun> leaderboard;  // sorted by ascending val loss
};

GridResult grid_search(nn::Arch arch, int lookback, int feature_width, const GridSpace& space,
                       const SampleSet& train, const SampleSet& val, std::uint64_t seed,
                       int max_epochs = 200, int threads = 0);

}  // namespace mbo

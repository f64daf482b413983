#pragma once

#include <string>
#include <vector>

#include "mbo/nn/model.hpp"

namespace mbo::nn {

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

// On-disk model: manifest.json (architecture, shapes, seeds, byte offsets,
// training history) next to tensors.bin, a raw little-endian float64 blob.
// save followed by load reproduces the parameters bit for bit.
struct Checkpoint {
    Parameters params;
    std::uint64_t seed = 0;
    std::vector<EpochRecord> history;
    int best_epoch = -1;
    // The LOB path stores its z-score statistics so prediction applies the
    // training-period normalisation; empty for the MBO path.
    std::vector<double> norm_mean;
    std::vector<double> norm_std;

    void save(const std::string& dir) const;
    static Checkpoint load(const std::string& dir);
};

}  // namespace mbo::nn

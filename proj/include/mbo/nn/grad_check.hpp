#pragma once

#include <cstdint>

#include "mbo/nn/model.hpp"

namespace mbo::nn {

// Central-difference verification of the analytic gradients on a random
// batch: samples coordinates from every tensor, perturbs by +-epsilon, and
// compares (L(t+e) - L(t-e)) / 2e against the reverse-mode value. The
// relative error uses max(|analytic|, |numeric|, 1e-8) as denominator.
struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t coords_checked = 0;
    std::string worst_tensor;
};

GradCheckResult finite_diff_check(const ModelSpec& spec, std::uint64_t seed, double epsilon,
                                  int batch_size = 3, std::size_t coords_per_tensor = 200);

}  // namespace mbo::nn

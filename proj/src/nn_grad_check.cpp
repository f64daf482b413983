#include "mbo/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mbo/errors.hpp"
#include "mbo/rng.hpp"

namespace mbo::nn {

GradCheckResult finite_diff_check(const ModelSpec& spec, std::uint64_t seed, double epsilon,
                                  int batch_size, std::size_t coords_per_tensor) {
    if (epsilon < 1e-7 || epsilon > 1e-4)
        throw ConfigError("epsilon must lie in [1e-7, 1e-4]");

    Parameters params(spec);
    params.init_glorot(seed);

    // Random batch: windows uniform in [-1, 1], random targets.
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::size_t window_len = static_cast<std::size_t>(spec.flat_input());
    std::vector<std::vector<double>> windows(static_cast<std::size_t>(batch_size));
    std::vector<int> targets(static_cast<std::size_t>(batch_size));
    for (int b = 0; b < batch_size; ++b) {
        windows[static_cast<std::size_t>(b)].resize(window_len);
        for (double& x : windows[static_cast<std::size_t>(b)]) x = rng.uniform(-1.0, 1.0);
        targets[static_cast<std::size_t>(b)] = static_cast<int>(rng.below(kClasses));
    }

    Workspace ws(spec);
    auto batch_loss = [&](const Parameters& p) {
        double total = 0.0;
        for (int b = 0; b < batch_size; ++b) {
            auto logits = forward(p, windows[static_cast<std::size_t>(b)].data(), ws);
            total += cross_entropy(logits, targets[static_cast<std::size_t>(b)], ws.probs);
        }
        return total / static_cast<double>(batch_size);
    };

    Parameters grad(spec);
    grad.fill(0.0);
    double inv_b = 1.0 / static_cast<double>(batch_size);
    for (int b = 0; b < batch_size; ++b)
        accumulate_gradient(params, windows[static_cast<std::size_t>(b)].data(),
                            targets[static_cast<std::size_t>(b)], inv_b, grad, ws);

    GradCheckResult result;
    for (std::size_t s = 0; s < params.tensors().size(); ++s) {
        Tensor& tensor = params[s];
        std::size_t n = tensor.size();
        // Every coordinate when the tensor is small, else a random sample.
        std::vector<std::size_t> coords;
        if (n <= coords_per_tensor) {
            coords.resize(n);
            for (std::size_t i = 0; i < n; ++i) coords[i] = i;
        } else {
            coords.reserve(coords_per_tensor);
            for (std::size_t i = 0; i < coords_per_tensor; ++i)
                coords.push_back(rng.below(n));
        }
        for (std::size_t idx : coords) {
            double saved = tensor.data[idx];
            tensor.data[idx] = saved + epsilon;
            double up = batch_loss(params);
            tensor.data[idx] = saved - epsilon;
            double down = batch_loss(params);
            tensor.data[idx] = saved;

            double numeric = (up - down) / (2.0 * epsilon);
            double analytic = grad[s].data[idx];
            double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
            double rel = std::fabs(analytic - numeric) / denom;
            ++result.coords_checked;
            if (rel > result.max_rel_error) {
                result.max_rel_error = rel;
                result.worst_tensor = tensor.name;
            }
        }
    }
    return result;
}

}  // namespace mbo::nn

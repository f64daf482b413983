#pragma once

#include <cmath>
#include <cstdint>

#include "mbo/errors.hpp"
#include "mbo/nn/model.hpp"

namespace mbo::nn {

// Bias-corrected Adam. Moments mirror the parameter layout slot-for-slot.
struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class AdamState {
public:
    AdamState() = default;
    AdamState(const ModelSpec& spec, AdamConfig cfg)
        : cfg_(cfg), first_(spec), second_(spec) {
        first_.fill(0.0);
        second_.fill(0.0);
    }

    void step(Parameters& params, const Parameters& grad) {
        ++step_count_;
        double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
        double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
        for (std::size_t s = 0; s < params.tensors().size(); ++s) {
            Tensor& theta = params[s];
            const Tensor& g = grad[s];
            Tensor& m = first_[s];
            Tensor& v = second_[s];
            if (theta.size() != g.size()) throw DataError("gradient shape mismatch");
            for (std::size_t i = 0; i < theta.size(); ++i) {
                m.data[i] = cfg_.beta1 * m.data[i] + (1.0 - cfg_.beta1) * g.data[i];
                v.data[i] = cfg_.beta2 * v.data[i] + (1.0 - cfg_.beta2) * g.data[i] * g.data[i];
                double m_hat = m.data[i] / bc1;
                double v_hat = v.data[i] / bc2;
                theta.data[i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
            }
        }
    }

    std::uint64_t step_count() const { return step_count_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    Parameters first_;
    Parameters second_;
    std::uint64_t step_count_ = 0;
};

}  // namespace mbo::nn

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mbo/nn/tensor.hpp"

namespace mbo::nn {

constexpr int kClasses = 3;

enum class Arch { kLinear, kMlp, kLstm, kAttention };

std::string arch_name(Arch a);
Arch arch_from_name(const std::string& name);

// Architecture descriptor. The linear model is the zero-hidden-layer
// special case of the MLP; both consume the flattened T*F window. LSTM and
// attention consume F features per step.
struct ModelSpec {
    Arch arch = Arch::kLinear;
    int lookback = 50;       // T
    int feature_width = 6;   // F
    int layers = 1;          // hidden / recurrent layers; 0 for linear
    int units = 64;          // N_h

    int flat_input() const { return lookback * feature_width; }
    int hidden_layers() const { return arch == Arch::kLinear ? 0 : layers; }
    bool recurrent() const { return arch == Arch::kLstm || arch == Arch::kAttention; }

    std::size_t param_count() const;
    std::string violation() const;  // empty when valid

    bool operator==(const ModelSpec&) const = default;
};

// The model's named tensors in a fixed layout order; the same layout is
// reused for gradients and Adam moments so slot i always lines up.
class Parameters {
public:
    Parameters() = default;
    explicit Parameters(const ModelSpec& spec);

    // Glorot-uniform weights, zero biases; deterministic in the seed.
    void init_glorot(std::uint64_t seed);
    void fill(double value);

    std::vector<Tensor>& tensors() { return tensors_; }
    const std::vector<Tensor>& tensors() const { return tensors_; }
    Tensor& operator[](std::size_t i) { return tensors_[i]; }
    const Tensor& operator[](std::size_t i) const { return tensors_[i]; }
    std::size_t total_size() const;

    const ModelSpec& spec() const { return spec_; }

    // Layout accessors. LSTM gates are ordered i, f, c, o.
    std::size_t lstm_slot(int layer, int gate, int part) const;  // part: 0 Wx, 1 Wh, 2 bx, 3 bh
    std::size_t mlp_slot(int layer, int part) const;             // part: 0 W, 1 b
    std::size_t attn_v() const;
    std::size_t attn_wh() const;
    std::size_t attn_wc() const;
    std::size_t out_w() const;
    std::size_t out_b() const;

private:
    ModelSpec spec_;
    std::vector<Tensor> tensors_;
};

// Scratch buffers for one sample's forward and backward pass; reusable
// across samples, never shared across threads.
struct Workspace {
    explicit Workspace(const ModelSpec& spec);

    // MLP activations per hidden layer.
    std::vector<std::vector<double>> mlp_h;
    // LSTM caches: [layer][step] of gate/state vectors.
    std::vector<std::vector<double>> gate_i, gate_f, gate_g, gate_o, cell, tanh_cell, hidden;
    // Attention caches.
    std::vector<double> attn_scores, attn_weights, attn_context, attn_concat, attn_a;
    std::vector<std::vector<double>> attn_s;  // tanh(Wh h_t) per step
    // Backward scratch.
    std::vector<double> d_hidden_next, d_cell_next, dz, d_input_row, d_hidden_now;
    std::vector<std::vector<double>> d_inject;  // per-step dh entering a layer

    std::array<double, kClasses> logits{};
    std::array<double, kClasses> probs{};
};

// Max-shifted softmax cross-entropy. Returns the loss; fills probs.
double cross_entropy(const std::array<double, kClasses>& logits, int target,
                     std::array<double, kClasses>& probs);

// Pure function of (params, window): class logits. The window is row-major
// T x F, oldest row first.
std::array<double, kClasses> forward(const Parameters& params, const double* window,
                                     Workspace& ws);

// Forward + reverse pass for one sample. Adds `weight` times the gradient
// of the sample's cross-entropy to `grad` and returns the loss. Throws
// DataError on non-finite loss or gradient inputs.
double accumulate_gradient(const Parameters& params, const double* window, int target,
                           double weight, Parameters& grad, Workspace& ws);

}  // namespace mbo::nn

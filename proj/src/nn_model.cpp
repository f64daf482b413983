#include "mbo/nn/model.hpp"

#include <cmath>

#include "mbo/errors.hpp"
#include "mbo/rng.hpp"

namespace mbo::nn {

namespace {

constexpr const char* kGateNames[4] = {"i", "f", "c", "o"};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::string arch_name(Arch a) {
    switch (a) {
        case Arch::kLinear: return "lm";
        case Arch::kMlp: return "mlp";
        case Arch::kLstm: return "lstm";
        case Arch::kAttention: return "attention";
    }
    return "?";
}

Arch arch_from_name(const std::string& name) {
    if (name == "lm" || name == "linear") return Arch::kLinear;
    if (name == "mlp") return Arch::kMlp;
    if (name == "lstm") return Arch::kLstm;
    if (name == "attention") return Arch::kAttention;
    throw ConfigError("unknown architecture: " + name);
}

std::string ModelSpec::violation() const {
    if (lookback < 1) return "lookback must be >= 1";
    if (feature_width < 1) return "feature width must be >= 1";
    if (arch != Arch::kLinear && layers < 1) return "need at least one hidden layer";
    if (arch != Arch::kLinear && units < 1) return "need at least one unit";
    return {};
}

std::size_t ModelSpec::param_count() const {
    std::size_t n_h = static_cast<std::size_t>(units);
    std::size_t flat = static_cast<std::size_t>(flat_input());
    std::size_t count = 0;
    switch (arch) {
        case Arch::kLinear:
            return kClasses * flat + kClasses;
        case Arch::kMlp: {
            std::size_t prev = flat;
            for (int l = 0; l < layers; ++l) {
                count += n_h * prev + n_h;
                prev = n_h;
            }
            return count + kClasses * n_h + kClasses;
        }
        case Arch::kLstm:
        case Arch::kAttention: {
            std::size_t in = static_cast<std::size_t>(feature_width);
            for (int l = 0; l < layers; ++l) {
                // Four gates, each with input and recurrent weights and a
                // bias on each of the two affine terms.
                count += 4 * (n_h * in + n_h * n_h + 2 * n_h);
                in = n_h;
            }
            if (arch == Arch::kAttention) count += n_h + n_h * n_h + n_h * 2 * n_h;
            return count + kClasses * n_h + kClasses;
        }
    }
    return 0;
}

Parameters::Parameters(const ModelSpec& spec) : spec_(spec) {
    if (auto why = spec.violation(); !why.empty()) throw ConfigError(why);
    std::size_t n_h = static_cast<std::size_t>(spec.units);
    auto add = [this](std::string name, std::size_t rows, std::size_t cols) {
        tensors_.emplace_back(std::move(name), rows, cols);
    };

    if (spec.arch == Arch::kMlp || spec.arch == Arch::kLinear) {
        std::size_t prev = static_cast<std::size_t>(spec.flat_input());
        for (int l = 0; l < spec.hidden_layers(); ++l) {
            std::string base = "mlp" + std::to_string(l);
            add(base + ".W", n_h, prev);
            add(base + ".b", n_h, 1);
            prev = n_h;
        }
        add("out.W", kClasses, prev);
        add("out.b", kClasses, 1);
        return;
    }

    std::size_t in = static_cast<std::size_t>(spec.feature_width);
    for (int l = 0; l < spec.layers; ++l) {
        std::string base = "lstm" + std::to_string(l) + ".";
        for (const char* gate : kGateNames) {
            add(base + gate + ".Wx", n_h, in);
            add(base + gate + ".Wh", n_h, n_h);
            add(base + gate + ".bx", n_h, 1);
            add(base + gate + ".bh", n_h, 1);
        }
        in = n_h;
    }
    if (spec.arch == Arch::kAttention) {
        add("attn.v", n_h, 1);
        add("attn.Wh", n_h, n_h);
        add("attn.Wc", n_h, 2 * n_h);
    }
    add("out.W", kClasses, n_h);
    add("out.b", kClasses, 1);
}

std::size_t Parameters::lstm_slot(int layer, int gate, int part) const {
    return static_cast<std::size_t>(layer * 16 + gate * 4 + part);
}
std::size_t Parameters::mlp_slot(int layer, int part) const {
    return static_cast<std::size_t>(layer * 2 + part);
}
std::size_t Parameters::attn_v() const { return static_cast<std::size_t>(spec_.layers * 16); }
std::size_t Parameters::attn_wh() const { return attn_v() + 1; }
std::size_t Parameters::attn_wc() const { return attn_v() + 2; }
std::size_t Parameters::out_w() const { return tensors_.size() - 2; }
std::size_t Parameters::out_b() const { return tensors_.size() - 1; }

std::size_t Parameters::total_size() const {
    std::size_t n = 0;
    for (const Tensor& t : tensors_) n += t.size();
    return n;
}

void Parameters::fill(double value) {
    for (Tensor& t : tensors_)
        for (double& x : t.data) x = value;
}

void Parameters::init_glorot(std::uint64_t seed) {
    Rng rng(seed);
    for (Tensor& t : tensors_) {
        bool is_bias = t.name.find(".b") != std::string::npos;
        if (is_bias) {
            for (double& x : t.data) x = 0.0;
            continue;
        }
        // attn.v acts as a 1 x units weight for the score dot product.
        std::size_t fan_out = t.cols == 1 ? 1 : t.rows;
        std::size_t fan_in = t.cols == 1 ? t.rows : t.cols;
        double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& x : t.data) x = rng.uniform(-limit, limit);
    }
}

Workspace::Workspace(const ModelSpec& spec) {
    std::size_t n_h = static_cast<std::size_t>(spec.units);
    std::size_t steps = static_cast<std::size_t>(spec.lookback);
    if (spec.arch == Arch::kMlp || spec.arch == Arch::kLinear) {
        mlp_h.assign(static_cast<std::size_t>(spec.hidden_layers()), std::vector<double>(n_h));
        d_hidden_next.assign(std::max<std::size_t>(n_h, static_cast<std::size_t>(spec.flat_input())), 0.0);
        d_hidden_now.assign(std::max<std::size_t>(n_h, static_cast<std::size_t>(spec.flat_input())), 0.0);
        dz.assign(n_h, 0.0);
        return;
    }
    std::size_t layers = static_cast<std::size_t>(spec.layers);
    auto grid = [&](std::vector<std::vector<double>>& v) {
        v.assign(layers * steps, std::vector<double>(n_h, 0.0));
    };
    grid(gate_i);
    grid(gate_f);
    grid(gate_g);
    grid(gate_o);
    grid(cell);
    grid(tanh_cell);
    grid(hidden);
    d_hidden_next.assign(n_h, 0.0);
    d_cell_next.assign(n_h, 0.0);
    d_hidden_now.assign(n_h, 0.0);
    dz.assign(n_h, 0.0);
    d_input_row.assign(std::max(n_h, static_cast<std::size_t>(spec.feature_width)), 0.0);
    d_inject.assign(2 * steps, std::vector<double>(n_h, 0.0));
    if (spec.arch == Arch::kAttention) {
        attn_scores.assign(steps, 0.0);
        attn_weights.assign(steps, 0.0);
        attn_context.assign(n_h, 0.0);
        attn_concat.assign(2 * n_h, 0.0);
        attn_a.assign(n_h, 0.0);
        attn_s.assign(steps, std::vector<double>(n_h, 0.0));
    }
}

double cross_entropy(const std::array<double, kClasses>& logits, int target,
                     std::array<double, kClasses>& probs) {
    double max_logit = std::max({logits[0], logits[1], logits[2]});
    double sum = 0.0;
    for (int c = 0; c < kClasses; ++c) {
        probs[static_cast<std::size_t>(c)] = std::exp(logits[static_cast<std::size_t>(c)] - max_logit);
        sum += probs[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < kClasses; ++c) probs[static_cast<std::size_t>(c)] /= sum;
    // Log-space form: finite whenever the logits are finite.
    return max_logit + std::log(sum) - logits[static_cast<std::size_t>(target)];
}

namespace {

// ---- MLP ------------------------------------------------------------------

void mlp_forward(const Parameters& params, const double* window, Workspace& ws) {
    const ModelSpec& spec = params.spec();
    const double* h_prev = window;
    for (int l = 0; l < spec.hidden_layers(); ++l) {
        const Tensor& w = params[params.mlp_slot(l, 0)];
        const Tensor& b = params[params.mlp_slot(l, 1)];
        std::vector<double>& h = ws.mlp_h[static_cast<std::size_t>(l)];
        matvec(w, h_prev, h.data());
        for (std::size_t i = 0; i < h.size(); ++i) {
            h[i] += b.data[i];
            if (h[i] < 0.0) h[i] = 0.0;  // ReLU
        }
        h_prev = h.data();
    }
    const Tensor& wo = params[params.out_w()];
    const Tensor& bo = params[params.out_b()];
    matvec(wo, h_prev, ws.logits.data());
    for (int c = 0; c < kClasses; ++c) ws.logits[static_cast<std::size_t>(c)] += bo.data[static_cast<std::size_t>(c)];
}

void mlp_backward(const Parameters& params, const double* window,
                  const std::array<double, kClasses>& dlogits, Parameters& grad, Workspace& ws) {
    const ModelSpec& spec = params.spec();
    int layers = spec.hidden_layers();
    const double* h_last = layers > 0 ? ws.mlp_h[static_cast<std::size_t>(layers - 1)].data() : window;
    std::size_t last_dim = layers > 0 ? static_cast<std::size_t>(spec.units)
                                      : static_cast<std::size_t>(spec.flat_input());

    rank1_add(grad[params.out_w()], dlogits.data(), h_last);
    vec_add(grad[params.out_b()].ptr(), dlogits.data(), kClasses);

    std::vector<double>& dh = ws.d_hidden_now;
    std::fill(dh.begin(), dh.begin() + static_cast<std::ptrdiff_t>(last_dim), 0.0);
    matvec_transpose_add(params[params.out_w()], dlogits.data(), dh.data());

    for (int l = layers - 1; l >= 0; --l) {
        const std::vector<double>& h = ws.mlp_h[static_cast<std::size_t>(l)];
        std::vector<double>& dz = ws.dz;
        for (std::size_t i = 0; i < h.size(); ++i) dz[i] = h[i] > 0.0 ? dh[i] : 0.0;

        const double* below = l > 0 ? ws.mlp_h[static_cast<std::size_t>(l - 1)].data() : window;
        std::size_t below_dim = l > 0 ? static_cast<std::size_t>(spec.units)
                                      : static_cast<std::size_t>(spec.flat_input());
        rank1_add(grad[params.mlp_slot(l, 0)], dz.data(), below);
        vec_add(grad[params.mlp_slot(l, 1)].ptr(), dz.data(), h.size());

        if (l > 0) {
            std::fill(dh.begin(), dh.begin() + static_cast<std::ptrdiff_t>(below_dim), 0.0);
            matvec_transpose_add(params[params.mlp_slot(l, 0)], dz.data(), dh.data());
        }
    }
}

// ---- LSTM stack -------------------------------------------------------------

inline std::size_t cell_index(const ModelSpec& spec, int layer, int t) {
    return static_cast<std::size_t>(layer) * static_cast<std::size_t>(spec.lookback) +
           static_cast<std::size_t>(t);
}

void lstm_forward(const Parameters& params, const double* window, Workspace& ws) {
    const ModelSpec& spec = params.spec();
    std::size_t n_h = static_cast<std::size_t>(spec.units);
    int steps = spec.lookback;

    for (int l = 0; l < spec.layers; ++l) {
        std::size_t in_dim = l == 0 ? static_cast<std::size_t>(spec.feature_width) : n_h;
        const Tensor* wx[4];
        const Tensor* wh[4];
        const Tensor* bx[4];
        const Tensor* bh[4];
        for (int g = 0; g < 4; ++g) {
            wx[g] = &params[params.lstm_slot(l, g, 0)];
            wh[g] = &params[params.lstm_slot(l, g, 1)];
            bx[g] = &params[params.lstm_slot(l, g, 2)];
            bh[g] = &params[params.lstm_slot(l, g, 3)];
        }
        for (int t = 0; t < steps; ++t) {
            std::size_t ci = cell_index(spec, l, t);
            const double* x = l == 0 ? window + static_cast<std::size_t>(t) * in_dim
                                     : ws.hidden[cell_index(spec, l - 1, t)].data();
            const double* h_prev = t > 0 ? ws.hidden[ci - 1].data() : nullptr;
            const double* c_prev = t > 0 ? ws.cell[ci - 1].data() : nullptr;

            std::vector<double>* zs[4] = {&ws.gate_i[ci], &ws.gate_f[ci], &ws.gate_g[ci],
                                          &ws.gate_o[ci]};
            for (int g = 0; g < 4; ++g) {
                std::vector<double>& z = *zs[g];
                for (std::size_t u = 0; u < n_h; ++u) z[u] = bx[g]->data[u] + bh[g]->data[u];
                matvec_add(*wx[g], x, z.data());
                if (h_prev) matvec_add(*wh[g], h_prev, z.data());
            }
            std::vector<double>& c = ws.cell[ci];
            std::vector<double>& tc = ws.tanh_cell[ci];
            std::vector<double>& h = ws.hidden[ci];
            for (std::size_t u = 0; u < n_h; ++u) {
                double iv = sigmoid(ws.gate_i[ci][u]);
                double fv = sigmoid(ws.gate_f[ci][u]);
                double gv = std::tanh(ws.gate_g[ci][u]);
                double ov = sigmoid(ws.gate_o[ci][u]);
                ws.gate_i[ci][u] = iv;
                ws.gate_f[ci][u] = fv;
                ws.gate_g[ci][u] = gv;
                ws.gate_o[ci][u] = ov;
                c[u] = (c_prev ? fv * c_prev[u] : 0.0) + iv * gv;
                tc[u] = std::tanh(c[u]);
                h[u] = ov * tc[u];
            }
        }
    }
}

// Backward through one LSTM layer given per-step dh injections in
// ws.d_inject[layer_offset + t]; writes dx injections for the layer below
// into ws.d_inject[below_offset + t] (skipped for layer 0).
void lstm_layer_backward(const Parameters& params, const double* window, int l,
                         std::size_t inject_off, std::size_t below_off, Parameters& grad,
                         Workspace& ws) {
    const ModelSpec& spec = params.spec();
    std::size_t n_h = static_cast<std::size_t>(spec.units);
    int steps = spec.lookback;
    std::size_t in_dim = l == 0 ? static_cast<std::size_t>(spec.feature_width) : n_h;

    std::fill(ws.d_hidden_next.begin(), ws.d_hidden_next.end(), 0.0);
    std::fill(ws.d_cell_next.begin(), ws.d_cell_next.end(), 0.0);

    std::vector<double> dz_i(n_h), dz_f(n_h), dz_g(n_h), dz_o(n_h), dc(n_h);

    for (int t = steps - 1; t >= 0; --t) {
        std::size_t ci = cell_index(spec, l, t);
        const double* x = l == 0 ? window + static_cast<std::size_t>(t) * in_dim
                                 : ws.hidden[cell_index(spec, l - 1, t)].data();
        const double* h_prev = t > 0 ? ws.hidden[ci - 1].data() : nullptr;
        const double* c_prev = t > 0 ? ws.cell[ci - 1].data() : nullptr;

        const std::vector<double>& iv = ws.gate_i[ci];
        const std::vector<double>& fv = ws.gate_f[ci];
        const std::vector<double>& gv = ws.gate_g[ci];
        const std::vector<double>& ov = ws.gate_o[ci];
        const std::vector<double>& tc = ws.tanh_cell[ci];

        for (std::size_t u = 0; u < n_h; ++u) {
            double dh = ws.d_inject[inject_off + static_cast<std::size_t>(t)][u] +
                        ws.d_hidden_next[u];
            double dov = dh * tc[u];
            dz_o[u] = dov * ov[u] * (1.0 - ov[u]);
            double dcv = dh * ov[u] * (1.0 - tc[u] * tc[u]) + ws.d_cell_next[u];
            dc[u] = dcv;
            double dfv = c_prev ? dcv * c_prev[u] : 0.0;
            dz_f[u] = dfv * fv[u] * (1.0 - fv[u]);
            double div = dcv * gv[u];
            dz_i[u] = div * iv[u] * (1.0 - iv[u]);
            double dgv = dcv * iv[u];
            dz_g[u] = dgv * (1.0 - gv[u] * gv[u]);
            ws.d_cell_next[u] = dcv * fv[u];
        }

        std::fill(ws.d_hidden_next.begin(), ws.d_hidden_next.end(), 0.0);
        bool want_dx = l > 0;
        if (want_dx)
            std::fill(ws.d_input_row.begin(),
                      ws.d_input_row.begin() + static_cast<std::ptrdiff_t>(in_dim), 0.0);

        const std::vector<double>* dzs[4] = {&dz_i, &dz_f, &dz_g, &dz_o};
        for (int g = 0; g < 4; ++g) {
            const std::vector<double>& dz = *dzs[g];
            rank1_add(grad[params.lstm_slot(l, g, 0)], dz.data(), x);
            if (h_prev) rank1_add(grad[params.lstm_slot(l, g, 1)], dz.data(), h_prev);
            vec_add(grad[params.lstm_slot(l, g, 2)].ptr(), dz.data(), n_h);
            vec_add(grad[params.lstm_slot(l, g, 3)].ptr(), dz.data(), n_h);
            if (want_dx) matvec_transpose_add(params[params.lstm_slot(l, g, 0)], dz.data(),
                                              ws.d_input_row.data());
            if (t > 0) matvec_transpose_add(params[params.lstm_slot(l, g, 1)], dz.data(),
                                            ws.d_hidden_next.data());
        }
        if (want_dx)
            for (std::size_t u = 0; u < in_dim; ++u)
                ws.d_inject[below_off + static_cast<std::size_t>(t)][u] = ws.d_input_row[u];
    }
}

void lstm_stack_backward(const Parameters& params, const double* window, Parameters& grad,
                         Workspace& ws) {
    const ModelSpec& spec = params.spec();
    std::size_t steps = static_cast<std::size_t>(spec.lookback);
    // Ping-pong between the two injection banks as we descend the stack.
    std::size_t top_off = 0;
    std::size_t below_off = steps;
    for (int l = spec.layers - 1; l >= 0; --l) {
        if (l > 0)
            for (std::size_t t = 0; t < steps; ++t)
                std::fill(ws.d_inject[below_off + t].begin(), ws.d_inject[below_off + t].end(),
                          0.0);
        lstm_layer_backward(params, window, l, top_off, below_off, grad, ws);
        std::swap(top_off, below_off);
    }
}

// ---- Attention head ---------------------------------------------------------

void attention_head_forward(const Parameters& params, Workspace& ws) {
    const ModelSpec& spec = params.spec();
    std::size_t n_h = static_cast<std::size_t>(spec.units);
    std::size_t steps = static_cast<std::size_t>(spec.lookback);
    int top = spec.layers - 1;

    const Tensor& v = params[params.attn_v()];
    const Tensor& wh = params[params.attn_wh()];
    const Tensor& wc = params[params.attn_wc()];

    double max_score = -1e300;
    for (std::size_t t = 0; t < steps; ++t) {
        const double* h = ws.hidden[cell_index(spec, top, static_cast<int>(t))].data();
        std::vector<double>& s = ws.attn_s[t];
        matvec(wh, h, s.data());
        double e = 0.0;
        for (std::size_t u = 0; u < n_h; ++u) {
            s[u] = std::tanh(s[u]);
            e += v.data[u] * s[u];
        }
        ws.attn_scores[t] = e;
        max_score = std::max(max_score, e);
    }
    double denom = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
        ws.attn_weights[t] = std::exp(ws.attn_scores[t] - max_score);
        denom += ws.attn_weights[t];
    }
    std::fill(ws.attn_context.begin(), ws.attn_context.end(), 0.0);
    for (std::size_t t = 0; t < steps; ++t) {
        ws.attn_weights[t] /= denom;
        const double* h = ws.hidden[cell_index(spec, top, static_cast<int>(t))].data();
        vec_add(ws.attn_context.data(), h, n_h, ws.attn_weights[t]);
    }
    const double* h_last = ws.hidden[cell_index(spec, top, static_cast<int>(steps) - 1)].data();
    std::copy_n(ws.attn_context.data(), n_h, ws.attn_concat.data());
    std::copy_n(h_last, n_h, ws.attn_concat.data() + n_h);
    matvec(wc, ws.attn_concat.data(), ws.attn_a.data());
    for (std::size_t u = 0; u < n_h; ++u) ws.attn_a[u] = std::tanh(ws.attn_a[u]);

    const Tensor& wo = params[params.out_w()];
    const Tensor& bo = params[params.out_b()];
    matvec(wo, ws.attn_a.data(), ws.logits.data());
    for (int c = 0; c < kClasses; ++c)
        ws.logits[static_cast<std::size_t>(c)] += bo.data[static_cast<std::size_t>(c)];
}

// Fills ws.d_inject[0..T) (bank 0) with per-step dh for the top LSTM layer.
void attention_head_backward(const Parameters& params,
                             const std::array<double, kClasses>& dlogits, Parameters& grad,
                             Workspace& ws) {
    const ModelSpec& spec = params.spec();
    std::size_t n_h = static_cast<std::size_t>(spec.units);
    std::size_t steps = static_cast<std::size_t>(spec.lookback);
    int top = spec.layers - 1;

    rank1_add(grad[params.out_w()], dlogits.data(), ws.attn_a.data());
    vec_add(grad[params.out_b()].ptr(), dlogits.data(), kClasses);

    std::vector<double> da(n_h, 0.0);
    matvec_transpose_add(params[params.out_w()], dlogits.data(), da.data());
    std::vector<double> du(n_h);
    for (std::size_t u = 0; u < n_h; ++u) du[u] = da[u] * (1.0 - ws.attn_a[u] * ws.attn_a[u]);

    rank1_add(grad[params.attn_wc()], du.data(), ws.attn_concat.data());
    std::vector<double> dconcat(2 * n_h, 0.0);
    matvec_transpose_add(params[params.attn_wc()], du.data(), dconcat.data());
    const double* dcontext = dconcat.data();

    for (std::size_t t = 0; t < steps; ++t)
        std::fill(ws.d_inject[t].begin(), ws.d_inject[t].end(), 0.0);
    // Direct path into the last hidden state.
    vec_add(ws.d_inject[steps - 1].data(), dconcat.data() + n_h, n_h);

    // Through the context vector: c = sum_t alpha_t h_t.
    std::vector<double> d_alpha(steps, 0.0);
    double weighted = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
        const double* h = ws.hidden[cell_index(spec, top, static_cast<int>(t))].data();
        double acc = 0.0;
        for (std::size_t u = 0; u < n_h; ++u) acc += h[u] * dcontext[u];
        d_alpha[t] = acc;
        weighted += ws.attn_weights[t] * acc;
        vec_add(ws.d_inject[t].data(), dcontext, n_h, ws.attn_weights[t]);
    }
    // Softmax backward, then the score path e_t = v . tanh(Wh h_t).
    const Tensor& v = params[params.attn_v()];
    std::vector<double> dzs(n_h);
    for (std::size_t t = 0; t < steps; ++t) {
        double de = ws.attn_weights[t] * (d_alpha[t] - weighted);
        if (de == 0.0) continue;
        const double* h = ws.hidden[cell_index(spec, top, static_cast<int>(t))].data();
        const std::vector<double>& s = ws.attn_s[t];
        for (std::size_t u = 0; u < n_h; ++u) {
            grad[params.attn_v()].data[u] += de * s[u];
            dzs[u] = de * v.data[u] * (1.0 - s[u] * s[u]);
        }
        rank1_add(grad[params.attn_wh()], dzs.data(), h);
        matvec_transpose_add(params[params.attn_wh()], dzs.data(), ws.d_inject[t].data());
    }
}

}  // namespace

std::array<double, kClasses> forward(const Parameters& params, const double* window,
                                     Workspace& ws) {
    const ModelSpec& spec = params.spec();
    switch (spec.arch) {
        case Arch::kLinear:
        case Arch::kMlp:
            mlp_forward(params, window, ws);
            break;
        case Arch::kLstm: {
            lstm_forward(params, window, ws);
            const double* h_last =
                ws.hidden[cell_index(spec, spec.layers - 1, spec.lookback - 1)].data();
            const Tensor& wo = params[params.out_w()];
            const Tensor& bo = params[params.out_b()];
            matvec(wo, h_last, ws.logits.data());
            for (int c = 0; c < kClasses; ++c)
                ws.logits[static_cast<std::size_t>(c)] += bo.data[static_cast<std::size_t>(c)];
            break;
        }
        case Arch::kAttention:
            lstm_forward(params, window, ws);
            attention_head_forward(params, ws);
            break;
    }
    for (double z : ws.logits)
        if (!std::isfinite(z)) throw DataError("non-finite logit in forward pass");
    return ws.logits;
}

double accumulate_gradient(const Parameters& params, const double* window, int target,
                           double weight, Parameters& grad, Workspace& ws) {
    const ModelSpec& spec = params.spec();
    std::array<double, kClasses> logits = forward(params, window, ws);
    double loss = cross_entropy(logits, target, ws.probs);
    if (!std::isfinite(loss)) throw DataError("non-finite loss");

    std::array<double, kClasses> dlogits;
    for (int c = 0; c < kClasses; ++c)
        dlogits[static_cast<std::size_t>(c)] =
            weight * (ws.probs[static_cast<std::size_t>(c)] - (c == target ? 1.0 : 0.0));

    switch (spec.arch) {
        case Arch::kLinear:
        case Arch::kMlp:
            mlp_backward(params, window, dlogits, grad, ws);
            break;
        case Arch::kLstm: {
            std::size_t steps = static_cast<std::size_t>(spec.lookback);
            for (std::size_t t = 0; t < steps; ++t)
                std::fill(ws.d_inject[t].begin(), ws.d_inject[t].end(), 0.0);
            const double* h_last =
                ws.hidden[cell_index(spec, spec.layers - 1, spec.lookback - 1)].data();
            rank1_add(grad[params.out_w()], dlogits.data(), h_last);
            vec_add(grad[params.out_b()].ptr(), dlogits.data(), kClasses);
            matvec_transpose_add(params[params.out_w()], dlogits.data(),
                                 ws.d_inject[steps - 1].data());
            lstm_stack_backward(params, window, grad, ws);
            break;
        }
        case Arch::kAttention:
            attention_head_backward(params, dlogits, grad, ws);
            lstm_stack_backward(params, window, grad, ws);
            break;
    }
    return loss;
}

}  // namespace mbo::nn

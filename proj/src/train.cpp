#include "mbo/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "mbo/errors.hpp"
#include "mbo/nn/adam.hpp"
#include "mbo/rng.hpp"

namespace mbo {

namespace {

constexpr std::size_t kChunk = 32;  // samples per reduction chunk

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(chunk_index) for chunks covering [0, count) with a static
// round-robin assignment. Chunk results must be written to per-chunk
// slots; callers reduce them in chunk order, which keeps every sum
// bitwise independent of the thread count. The first exception thrown in
// any worker is rethrown on the calling thread.
template <class Fn>
void parallel_chunks(std::size_t count, int threads, Fn&& fn) {
    std::size_t n_chunks = (count + kChunk - 1) / kChunk;
    if (threads <= 1 || n_chunks <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t c = static_cast<std::size_t>(t); c < n_chunks;
                     c += static_cast<std::size_t>(threads))
                    fn(c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

struct BatchScratch {
    std::vector<nn::Parameters> grads;  // one per chunk slot
    std::vector<nn::Workspace> workspaces;
    std::vector<double> losses;

    BatchScratch(const nn::ModelSpec& spec, std::size_t max_batch) {
        std::size_t slots = (max_batch + kChunk - 1) / kChunk;
        grads.reserve(slots);
        workspaces.reserve(slots);
        for (std::size_t i = 0; i < slots; ++i) {
            grads.emplace_back(spec);
            workspaces.emplace_back(spec);
        }
        losses.assign(slots, 0.0);
    }
};

// Mean-CE gradient over batch indices [first, last) of `order`, reduced
// deterministically into `grad`. Returns the batch loss sum.
double batch_gradient(const nn::Parameters& params, const SampleSet& set,
                      const std::vector<std::size_t>& order, std::size_t first, std::size_t last,
                      int threads, BatchScratch& scratch, nn::Parameters& grad) {
    std::size_t batch_n = last - first;
    double weight = 1.0 / static_cast<double>(batch_n);
    std::size_t n_chunks = (batch_n + kChunk - 1) / kChunk;

    parallel_chunks(batch_n, threads, [&](std::size_t c) {
        nn::Parameters& g = scratch.grads[c];
        g.fill(0.0);
        double loss = 0.0;
        std::size_t begin = first + c * kChunk;
        std::size_t end = std::min(begin + kChunk, last);
        for (std::size_t i = begin; i < end; ++i) {
            std::size_t sample = order[i];
            loss += nn::accumulate_gradient(params, set.window(sample), set.label[sample], weight,
                                            g, scratch.workspaces[c]);
        }
        scratch.losses[c] = loss;
    });

    grad.fill(0.0);
    double loss_sum = 0.0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        loss_sum += scratch.losses[c];
        for (std::size_t s = 0; s < grad.tensors().size(); ++s)
            nn::vec_add(grad[s].ptr(), scratch.grads[c][s].ptr(), grad[s].size());
    }
    return loss_sum;
}

}  // namespace

std::string TrainConfig::violation() const {
    if (auto why = model.violation(); !why.empty()) return why;
    if (learning_rate < 0.0) return "learning rate must be >= 0";
    if (batch_size < 1) return "batch size must be >= 1";
    if (patience < 1) return "patience must be >= 1";
    if (max_epochs < 1) return "max_epochs must be >= 1";
    return {};
}

double evaluate_loss(const nn::Parameters& params, const SampleSet& set, int threads) {
    if (set.size() == 0) throw DataError("cannot evaluate on an empty set");
    threads = resolve_threads(threads);
    std::size_t n_chunks = (set.size() + kChunk - 1) / kChunk;
    std::vector<double> losses(n_chunks, 0.0);
    std::vector<nn::Workspace> workspaces;
    workspaces.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) workspaces.emplace_back(params.spec());

    auto chunk_loss = [&](std::size_t c, nn::Workspace& ws) {
        double loss = 0.0;
        std::size_t begin = c * kChunk;
        std::size_t end = std::min(begin + kChunk, set.size());
        for (std::size_t i = begin; i < end; ++i) {
            auto logits = nn::forward(params, set.window(i), ws);
            loss += nn::cross_entropy(logits, set.label[i], ws.probs);
        }
        losses[c] = loss;
    };
    if (threads <= 1 || n_chunks <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) chunk_loss(c, workspaces[0]);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr error;
        std::mutex error_mutex;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t]() {
                try {
                    for (std::size_t c = static_cast<std::size_t>(t); c < n_chunks;
                         c += static_cast<std::size_t>(threads))
                        chunk_loss(c, workspaces[static_cast<std::size_t>(t)]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            });
        }
        for (std::thread& th : pool) th.join();
        if (error) std::rethrow_exception(error);
    }
    double total = 0.0;
    for (double l : losses) total += l;
    return total / static_cast<double>(set.size());
}

FitResult fit(const TrainConfig& cfg, const SampleSet& train, const SampleSet& val) {
    if (auto why = cfg.violation(); !why.empty()) throw ConfigError(why);
    if (train.size() == 0 || val.size() == 0) throw DataError("empty train or validation set");

    int threads = resolve_threads(cfg.threads);
    nn::Parameters params(cfg.model);
    params.init_glorot(cfg.seed);

    Rng shuffle_rng(cfg.seed ^ 0xd1b54a32d192ed03ULL);
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
    BatchScratch scratch(cfg.model, std::min(batch, train.size()));
    nn::Parameters grad(cfg.model);
    nn::AdamState adam(cfg.model, nn::AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8});

    EarlyStopper stopper(cfg.patience);
    nn::Checkpoint best;
    best.seed = cfg.seed;
    FitResult result;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss_sum = 0.0;
        for (std::size_t first = 0; first < train.size(); first += batch) {
            std::size_t last = std::min(first + batch, train.size());
            double batch_sum;
            try {
                batch_sum = batch_gradient(params, train, order, first, last, threads, scratch,
                                           grad);
            } catch (const DataError& e) {
                throw DataError("epoch " + std::to_string(epoch) + ", batch at sample " +
                                std::to_string(first) + ": " + e.what());
            }
            if (!std::isfinite(batch_sum))
                throw DataError("non-finite loss at epoch " + std::to_string(epoch) +
                                ", batch at sample " + std::to_string(first));
            epoch_loss_sum += batch_sum;
            adam.step(params, grad);
        }
        double train_loss = epoch_loss_sum / static_cast<double>(train.size());
        double val_loss = evaluate_loss(params, val, threads);
        best.history.push_back(nn::EpochRecord{epoch, train_loss, val_loss});
        result.epochs_run = epoch;

        bool stop = stopper.observe(epoch, val_loss);
        if (stopper.best_epoch() == epoch) {
            best.params = params;  // deep copy of the best-so-far weights
            best.best_epoch = epoch;
        }
        if (stop) break;
    }
    result.checkpoint = std::move(best);
    return result;
}

std::vector<std::array<double, 3>> predict(const nn::Checkpoint& ckpt, const TickSeries& series,
                                           const std::vector<std::size_t>& end_ticks,
                                           int threads) {
    const nn::ModelSpec& spec = ckpt.params.spec();
    if (spec.feature_width != series.feature_width)
        throw DataError("checkpoint expects feature width " + std::to_string(spec.feature_width) +
                        ", series has " + std::to_string(series.feature_width));
    threads = resolve_threads(threads);
    std::size_t lb = static_cast<std::size_t>(spec.lookback);
    for (std::size_t e : end_ticks) {
        if (e + 1 < lb || e >= series.size())
            throw DataError("window end " + std::to_string(e) + " has no full window");
    }
    std::vector<std::array<double, 3>> probs(end_ticks.size());

    auto run_range = [&](std::size_t begin, std::size_t end, nn::Workspace& ws) {
        for (std::size_t i = begin; i < end; ++i) {
            const double* window = series.row(end_ticks[i] + 1 - lb);
            auto logits = nn::forward(ckpt.params, window, ws);
            nn::cross_entropy(logits, 0, ws.probs);  // probabilities only
            probs[i] = ws.probs;
        }
    };

    if (threads <= 1 || end_ticks.size() < 256) {
        nn::Workspace ws(spec);
        run_range(0, end_ticks.size(), ws);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr error;
        std::mutex error_mutex;
        std::size_t per = (end_ticks.size() + static_cast<std::size_t>(threads) - 1) /
                          static_cast<std::size_t>(threads);
        for (int t = 0; t < threads; ++t) {
            std::size_t begin = static_cast<std::size_t>(t) * per;
            std::size_t end = std::min(begin + per, end_ticks.size());
            if (begin >= end) break;
            pool.emplace_back([&, begin, end]() {
                try {
                    nn::Workspace ws(spec);
                    run_range(begin, end, ws);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            });
        }
        for (std::thread& th : pool) th.join();
        if (error) std::rethrow_exception(error);
    }
    return probs;
}

std::string GridSpace::violation(nn::Arch arch) const {
    auto subset = [](const auto& values, const auto& allowed) {
        for (const auto& v : values)
            if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) return false;
        return !values.empty();
    };
    const std::vector<int> allowed_layers{1, 2, 3};
    const std::vector<int> allowed_units{32, 64, 128};
    const std::vector<double> allowed_lr{1e-4, 5e-4, 1e-3};
    const std::vector<int> allowed_batch{64, 128, 256};
    if (!subset(learning_rates, allowed_lr)) return "learning rate outside search space";
    if (!subset(batch_sizes, allowed_batch)) return "batch size outside search space";
    if (arch != nn::Arch::kLinear) {
        if (!subset(layers, allowed_layers)) return "layer count outside search space";
        if (!subset(units, allowed_units)) return "unit count outside search space";
    }
    return {};
}

GridResult grid_search(nn::Arch arch, int lookback, int feature_width, const GridSpace& space,
                       const SampleSet& train, const SampleSet& val, std::uint64_t seed,
                       int max_epochs, int threads) {
    if (auto why = space.violation(arch); !why.empty()) throw ConfigError(why);

    std::vector<TrainConfig> configs;
    std::vector<int> layer_axis = arch == nn::Arch::kLinear ? std::vector<int>{0} : space.layers;
    std::vector<int> unit_axis = arch == nn::Arch::kLinear ? std::vector<int>{0} : space.units;
    for (int layers : layer_axis)
        for (int units : unit_axis)
            for (double lr : space.learning_rates)
                for (int batch : space.batch_sizes) {
                    TrainConfig cfg;
                    cfg.model.arch = arch;
                    cfg.model.lookback = lookback;
                    cfg.model.feature_width = feature_width;
                    cfg.model.layers = arch == nn::Arch::kLinear ? 1 : layers;
                    cfg.model.units = arch == nn::Arch::kLinear ? 1 : units;
                    cfg.learning_rate = lr;
                    cfg.batch_size = batch;
                    cfg.max_epochs = max_epochs;
                    cfg.seed = seed;
                    cfg.threads = threads;
                    configs.push_back(cfg);
                }
    if (configs.empty()) throw ConfigError("empty hyperparameter space");

    GridResult result;
    for (const TrainConfig& cfg : configs) {
        FitResult run = fit(cfg, train, val);
        GridRun entry;
        entry.config = cfg;
        entry.best_epoch = run.checkpoint.best_epoch;
        entry.val_loss = run.checkpoint.history.empty()
                             ? std::numeric_limits<double>::infinity()
                             : run.checkpoint.history[static_cast<std::size_t>(
                                                          run.checkpoint.best_epoch - 1)]
                                   .val_loss;
        result.leaderboard.push_back(entry);
    }
    std::stable_sort(result.leaderboard.begin(), result.leaderboard.end(),
                     [](const GridRun& a, const GridRun& b) { return a.val_loss < b.val_loss; });
    result.best = result.leaderboard.front().config;
    return result;
}

}  // namespace mbo

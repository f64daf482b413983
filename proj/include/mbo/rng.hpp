#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mbo {

// Deterministic random source. std::mt19937_64 is fully specified by the
// standard; the distribution transforms live here because the standard
// library's distributions are implementation-defined and would break
// byte-identical reruns.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform01() {  // [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased enough for simulation use; exact bound via 128-bit multiply.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform01() < p; }

    double normal() {
        // Box-Muller; one draw per call pair is wasteful but branch-free
        // state keeps replay order obvious.
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Geometric on {0, 1, 2, ...} with success probability p.
    std::int64_t geometric(double p) {
        double u = uniform01();
        if (u >= 1.0) u = 0.9999999999999999;
        return static_cast<std::int64_t>(std::floor(std::log1p(-u) / std::log1p(-p)));
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace mbo

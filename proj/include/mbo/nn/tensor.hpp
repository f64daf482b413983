#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mbo::nn {

// Named dense tensor, row-major, float64. cols == 1 marks a vector.
struct Tensor {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 1;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::string n, std::size_t r, std::size_t c)
        : name(std::move(n)), rows(r), cols(c), data(r * c, 0.0) {}

    std::size_t size() const { return data.size(); }
    double* ptr() { return data.data(); }
    const double* ptr() const { return data.data(); }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// y = W x, W is (rows x cols), x has cols entries, y has rows entries.
inline void matvec(const Tensor& w, const double* x, double* y) {
    const double* row = w.ptr();
    for (std::size_t r = 0; r < w.rows; ++r, row += w.cols) {
        double acc = 0.0;
        for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

inline void matvec_add(const Tensor& w, const double* x, double* y) {
    const double* row = w.ptr();
    for (std::size_t r = 0; r < w.rows; ++r, row += w.cols) {
        double acc = 0.0;
        for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * x[c];
        y[r] += acc;
    }
}

// x += W^T y; iterated by rows so memory access stays contiguous.
inline void matvec_transpose_add(const Tensor& w, const double* y, double* x) {
    const double* row = w.ptr();
    for (std::size_t r = 0; r < w.rows; ++r, row += w.cols) {
        double yr = y[r];
        if (yr == 0.0) continue;
        for (std::size_t c = 0; c < w.cols; ++c) x[c] += row[c] * yr;
    }
}

// W += scale * a b^T with a of length rows, b of length cols.
inline void rank1_add(Tensor& w, const double* a, const double* b, double scale = 1.0) {
    double* row = w.ptr();
    for (std::size_t r = 0; r < w.rows; ++r, row += w.cols) {
        double ar = scale * a[r];
        if (ar == 0.0) continue;
        for (std::size_t c = 0; c < w.cols; ++c) row[c] += ar * b[c];
    }
}

inline void vec_add(double* y, const double* x, std::size_t n, double scale = 1.0) {
    for (std::size_t i = 0; i < n; ++i) y[i] += scale * x[i];
}

}  // namespace mbo::nn

#include "pcgseg/kernels.hpp"

namespace pcgseg::kern {
namespace {

double dot_s(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_s(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_s(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

void hadamard_s(const double* x, const double* y, double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
}

void gemv_s(const double* a, const double* x, const double* b, double* y,
            std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = b ? b[r] : 0.0;
        const double* row = a + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

void gemv_t_acc_s(const double* a, const double* x, double* y,
                  std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a + r * cols;
        const double xr = x[r];
        for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
    }
}

void ger_acc_s(double* a, const double* x, const double* y,
               std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = a + r * cols;
        const double xr = x[r];
        for (std::size_t c = 0; c < cols; ++c) row[c] += xr * y[c];
    }
}

const Kernels kScalar = {
    dot_s, axpy_s, scale_s, hadamard_s, gemv_s, gemv_t_acc_s, ger_acc_s, "scalar",
};

} // namespace

const Kernels& scalar() { return kScalar; }

} // namespace pcgseg::kern

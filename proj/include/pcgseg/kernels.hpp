#pragma once

#include <cstddef>
#include <string>

namespace pcgseg::kern {

// Vector/matrix primitives behind the recurrent model and DSP loops.
// A scalar reference implementation always exists; an AVX2 variant is
// selected at runtime when the CPU supports it. Results of the two may
// differ by floating-point reassociation only.
struct Kernels {
    // sum_i x[i]*y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y[i] += a*x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // y[i] = a*x[i]
    void (*scale)(double a, const double* x, double* y, std::size_t n);
    // z[i] = x[i]*y[i]
    void (*hadamard)(const double* x, const double* y, double* z, std::size_t n);
    // y = A*x + b, A row-major rows x cols, b may be null
    void (*gemv)(const double* a, const double* x, const double* b, double* y,
                 std::size_t rows, std::size_t cols);
    // y += A^T * x, A row-major rows x cols, x has rows entries, y has cols
    void (*gemv_t_acc)(const double* a, const double* x, double* y,
                       std::size_t rows, std::size_t cols);
    // A += x * y^T (outer product), A row-major rows x cols
    void (*ger_acc)(double* a, const double* x, const double* y,
                    std::size_t rows, std::size_t cols);
    const char* name;
};

const Kernels& scalar();
const Kernels& active();          // best available, resolved once
bool avx2_available();
const Kernels* avx2_or_null();    // null when unsupported at build or run time

} // namespace pcgseg::kern

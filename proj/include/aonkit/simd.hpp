#pragma once

// Runtime-dispatched double precision vector kernels.
//
// Every dense inner loop in the library (matmul, gram, im2col products,
// power iteration) reduces to dot() and axpy(). Each kernel has a scalar
// reference implementation and, where the target supports it, an AVX2+FMA
// or NEON variant. The active backend is chosen once on first use:
//
//   AONKIT_SIMD=scalar|avx2|neon|auto   (default auto = best available)
//
// A fixed backend gives bitwise reproducible results; different backends
// agree to rounding (different summation order and fused multiply-add).

#include <cstddef>
#include <span>
#include <string_view>

namespace aonkit::simd {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
    double (*dot)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
} // namespace scalar

namespace avx2 {
bool compiled();
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
} // namespace avx2

namespace neon {
bool compiled();
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
} // namespace neon

bool backend_available(Backend b);
Backend best_backend();
Backend active_backend();
// Throws std::invalid_argument if the backend is not available on this CPU.
void set_backend(Backend b);
std::string_view backend_name(Backend b);
const KernelTable& kernels();

inline double dot(std::span<const double> a, std::span<const double> b) {
    return kernels().dot(a.data(), b.data(), a.size());
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    kernels().axpy(alpha, x.data(), y.data(), x.size());
}

// Restores the previous backend on scope exit; used by equivalence tests.
class ScopedBackend {
public:
    explicit ScopedBackend(Backend b) : saved_(active_backend()) { set_backend(b); }
    ~ScopedBackend() { set_backend(saved_); }
    ScopedBackend(const ScopedBackend&) = delete;
    ScopedBackend& operator=(const ScopedBackend&) = delete;

private:
    Backend saved_;
};

} // namespace aonkit::simd

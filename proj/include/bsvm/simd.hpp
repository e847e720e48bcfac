#pragma once

// Data-parallel inner loops used by kernel assembly. Every kernel has a
// scalar reference implementation; vectorized variants (AVX2+FMA on x86-64,
// NEON on aarch64) are selected once at runtime from the host CPU features.
// The variants reassociate the reduction, so results agree with the scalar
// reference to rounding, not bitwise. Within one process the selected variant
// never changes unless force_isa() is called, so results are reproducible.

#include <cstddef>
#include <span>
#include <string_view>

namespace bsvm::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

/// Best variant supported by this CPU and build.
Isa detect_isa();

/// Variant currently used by the dispatching entry points.
Isa active_isa();

/// Pin the dispatching entry points to a variant (tests, benchmarks).
/// Requesting an unsupported variant falls back to Scalar.
void force_isa(Isa isa);

namespace scalar {
double dot(const double *a, const double *b, std::size_t n);
double squared_distance(const double *a, const double *b, std::size_t n);
void squared_distances(const double *x, const double *rows, std::size_t nrows,
                       std::size_t dim, double *out);
void axpy(double alpha, const double *x, double *y, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double *a, const double *b, std::size_t n);
double squared_distance(const double *a, const double *b, std::size_t n);
void squared_distances(const double *x, const double *rows, std::size_t nrows,
                       std::size_t dim, double *out);
void axpy(double alpha, const double *x, double *y, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double *a, const double *b, std::size_t n);
double squared_distance(const double *a, const double *b, std::size_t n);
void squared_distances(const double *x, const double *rows, std::size_t nrows,
                       std::size_t dim, double *out);
void axpy(double alpha, const double *x, double *y, std::size_t n);
}  // namespace neon
#endif

// Dispatching entry points.
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

/// out[r] = ||x - rows[r]||^2 for a row-major block of nrows x dim.
void squared_distances(std::span<const double> x, std::span<const double> rows,
                       std::size_t dim, std::span<double> out);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace bsvm::simd

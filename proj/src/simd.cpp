#include "bsvm/simd.hpp"

#include <atomic>
#include <cassert>

#include "bsvm/errors.hpp"

namespace bsvm::simd {

namespace scalar {

double dot(const double *a, const double *b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

double squared_distance(const double *a, const double *b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

void squared_distances(const double *x, const double *rows, std::size_t nrows,
                       std::size_t dim, double *out) {
  for (std::size_t r = 0; r < nrows; ++r) out[r] = squared_distance(x, rows + r * dim, dim);
}

void axpy(double alpha, const double *x, double *y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

}  // namespace scalar

namespace {

struct Table {
  double (*dot)(const double *, const double *, std::size_t);
  double (*squared_distance)(const double *, const double *, std::size_t);
  void (*squared_distances)(const double *, const double *, std::size_t, std::size_t, double *);
  void (*axpy)(double, const double *, double *, std::size_t);
};

constexpr Table kScalar{scalar::dot, scalar::squared_distance, scalar::squared_distances,
                        scalar::axpy};
#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2{avx2::dot, avx2::squared_distance, avx2::squared_distances, avx2::axpy};
#endif
#if defined(__aarch64__)
constexpr Table kNeon{neon::dot, neon::squared_distance, neon::squared_distances, neon::axpy};
#endif

const Table *table_for(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2:
      return &kAvx2;
#endif
#if defined(__aarch64__)
    case Isa::Neon:
      return &kNeon;
#endif
    default:
      return &kScalar;
  }
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::atomic<Isa> &active() {
  static std::atomic<Isa> isa{detect_isa()};
  return isa;
}

const Table &table() { return *table_for(active().load(std::memory_order_relaxed)); }

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw InputError("simd: operand length mismatch");
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

Isa detect_isa() {
  if (supported(Isa::Avx2)) return Isa::Avx2;
  if (supported(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void force_isa(Isa isa) { active().store(supported(isa) ? isa : Isa::Scalar); }

double dot(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  return table().dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  return table().squared_distance(a.data(), b.data(), a.size());
}

void squared_distances(std::span<const double> x, std::span<const double> rows, std::size_t dim,
                       std::span<double> out) {
  check_same_size(x.size(), dim);
  check_same_size(rows.size(), out.size() * dim);
  table().squared_distances(x.data(), rows.data(), out.size(), dim, out.data());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same_size(x.size(), y.size());
  table().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace bsvm::simd

#pragma once

// Data-parallel inner loops shared by the eigensolver, the Bloch projection
// and the circulant operator. Every kernel has a scalar reference; SIMD
// variants are selected once at runtime and must agree with it to rounding.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace qslab::kernels {

enum class Isa { scalar, avx2, neon };

struct Table {
  Isa isa;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // Plane rotation of two rows: (x, y) <- (c x + s y, c y - s x).
  void (*rotate)(double c, double s, double* x, double* y, std::size_t n);
};

std::string_view name(Isa isa);

// Variants compiled into this binary and supported by the running CPU.
std::vector<Isa> available();

// Table for one ISA; throws ParameterError if it is not available.
const Table& table(Isa isa);

// Best available table, or the one named by QSLAB_ISA (scalar|avx2|neon).
const Table& active();

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline void rotate(double c, double s, std::span<double> x, std::span<double> y) {
  active().rotate(c, s, x.data(), y.data(), x.size());
}

namespace detail {
const Table& scalar_table();
#if defined(QSLAB_HAVE_AVX2)
const Table& avx2_table();
#endif
#if defined(QSLAB_HAVE_NEON)
const Table& neon_table();
#endif
}  // namespace detail

}  // namespace qslab::kernels

#pragma once

// Dense double-precision kernels used by the similarity, fill and neural
// code. Every kernel has a scalar reference implementation; SIMD variants
// are selected once at startup from the CPU's capabilities and can be
// overridden with QOS_SIMD=scalar|avx2|neon.

#include <cstddef>
#include <span>
#include <string_view>

namespace qos::kernels {

enum class Isa { scalar, avx2, neon };

struct Table {
  Isa isa;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // y[r] = bias[r] + dot(w[r, :], x) for a row-major rows x cols matrix.
  // bias may be null.
  void (*gemv)(const double* w, const double* bias, const double* x, double* y,
               std::size_t rows, std::size_t cols);

  // y += w^T d, where w is row-major rows x cols and d has `rows` entries.
  void (*gemv_t)(const double* w, const double* d, double* y, std::size_t rows,
                 std::size_t cols);

  // v = mu * v + coeff * x;  w += v
  void (*momentum_step)(double* w, double* v, const double* x, double coeff,
                        double mu, std::size_t n);
};

const Table& scalar_table();

// Null when the variant was not compiled into this binary.
const Table* avx2_table();
const Table* neon_table();

bool cpu_supports(Isa isa);

// The table in use. Chosen on first call unless force() ran earlier.
const Table& active();

// Switches the active table. Returns false (and leaves the table alone) when
// the variant is unavailable on this build or CPU.
bool force(Isa isa);

std::string_view name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace qos::kernels

// AArch64 only; NEON is part of the base ISA there.

#include <arm_neon.h>

#include "qos/kernels.hpp"

namespace qos::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_neon(const double* w, const double* bias, const double* x, double* y,
               std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = (bias ? bias[r] : 0.0) + dot_neon(w + r * cols, x, cols);
  }
}

void gemv_t_neon(const double* w, const double* d, double* y, std::size_t rows,
                 std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (d[r] != 0.0) axpy_neon(d[r], w + r * cols, y, cols);
  }
}

void momentum_step_neon(double* w, double* v, const double* x, double coeff, double mu,
                        std::size_t n) {
  const float64x2_t vc = vdupq_n_f64(coeff);
  const float64x2_t vm = vdupq_n_f64(mu);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vv = vfmaq_f64(vmulq_f64(vm, vld1q_f64(v + i)), vc, vld1q_f64(x + i));
    vst1q_f64(v + i, vv);
    vst1q_f64(w + i, vaddq_f64(vld1q_f64(w + i), vv));
  }
  for (; i < n; ++i) {
    v[i] = mu * v[i] + coeff * x[i];
    w[i] += v[i];
  }
}

const Table kNeon{Isa::neon, dot_neon, axpy_neon, gemv_neon, gemv_t_neon, momentum_step_neon};

}  // namespace

const Table* neon_table() { return &kNeon; }

}  // namespace qos::kernels

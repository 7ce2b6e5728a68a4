#include "qos/kernels.hpp"

namespace qos::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* w, const double* bias, const double* x, double* y,
                 std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w + r * cols;
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += wr[c] * x[c];
    y[r] = (bias ? bias[r] : 0.0) + s;
  }
}

void gemv_t_scalar(const double* w, const double* d, double* y, std::size_t rows,
                   std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double dr = d[r];
    if (dr == 0.0) continue;
    const double* wr = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += dr * wr[c];
  }
}

void momentum_step_scalar(double* w, double* v, const double* x, double coeff,
                          double mu, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = mu * v[i] + coeff * x[i];
    w[i] += v[i];
  }
}

const Table kScalar{Isa::scalar, dot_scalar, axpy_scalar, gemv_scalar, gemv_t_scalar,
                    momentum_step_scalar};

}  // namespace

const Table& scalar_table() { return kScalar; }

}  // namespace qos::kernels

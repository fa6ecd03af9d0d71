#include <cmath>

#include "binyard/kernels.hpp"

namespace binyard::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void matvec_scalar(const double* w, const double* b, const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = b[r] + dot_scalar(w + r * cols, x, cols);
}

void matvec_t_scalar(const double* w, const double* gy, double* gx, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(gy[r], w + r * cols, gx, cols);
}

void outer_acc_scalar(const double* gy, const double* x, double* gw, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(gy[r], x, gw + r * cols, cols);
}

void adam_scalar(double* p, const double* g, double* m, double* v, std::size_t n, const AdamCoeffs& c) {
  const double om1 = 1.0 - c.beta1;
  const double om2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = c.beta1 * m[i] + om1 * g[i];
    v[i] = c.beta2 * v[i] + om2 * (g[i] * g[i]);
    const double mhat = m[i] / c.bias1;
    const double vhat = v[i] / c.bias2;
    p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
  }
}

}  // namespace

const Table& scalar_table() {
  static const Table t{dot_scalar, axpy_scalar, matvec_scalar, matvec_t_scalar, outer_acc_scalar, adam_scalar};
  return t;
}

}  // namespace binyard::kernels

#pragma once

// Dense inner loops used by the MLP and the optimizer. Every kernel has a
// scalar reference version; on x86-64 an AVX2/FMA version is compiled in a
// separate translation unit and picked at runtime when the CPU supports it.
// Set BINYARD_ISA=scalar to force the reference path.

#include <cstddef>
#include <span>
#include <string>

namespace binyard::kernels {

enum class Isa { Scalar, Avx2 };

std::string to_string(Isa isa);

struct AdamCoeffs {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias1;  // 1 - beta1^t
  double bias2;  // 1 - beta2^t
};

struct Table {
  /// sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// y[r] = b[r] + W[r,:] . x for a row-major rows x cols matrix
  void (*matvec)(const double* w, const double* b, const double* x, double* y, std::size_t rows, std::size_t cols);
  /// gx[c] += sum_r W[r,c] * gy[r]
  void (*matvec_t)(const double* w, const double* gy, double* gx, std::size_t rows, std::size_t cols);
  /// gW[r,c] += gy[r] * x[c]
  void (*outer_acc)(const double* gy, const double* x, double* gw, std::size_t rows, std::size_t cols);
  /// One Adam moment update + parameter step over n entries.
  void (*adam)(double* p, const double* g, double* m, double* v, std::size_t n, const AdamCoeffs& c);
};

const Table& scalar_table();
#ifdef BINYARD_HAVE_AVX2
const Table& avx2_table();
#endif

bool isa_supported(Isa isa);

/// Table for an explicit ISA. Throws std::runtime_error when unsupported.
const Table& table_for(Isa isa);

/// Currently selected table (best supported ISA unless overridden).
const Table& active();
Isa active_isa();
void set_active_isa(Isa isa);

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}

}  // namespace binyard::kernels

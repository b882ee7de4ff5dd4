#include "dacdr/kernels.hpp"

// Reference kernels. The loop structure here is the contract: every other
// backend must replay the same operations in the same order so results match
// bit for bit (the build disables FMA contraction globally).

namespace dacdr::kernels {
namespace {

void matmul_acc_scalar(const double* a, const double* b, double* c, int m,
                       int k, int n) {
  for (int i = 0; i < m; ++i) {
    double* crow = c + static_cast<std::size_t>(i) * n;
    const double* arow = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double aip = arow[p];
      const double* brow = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

void matmul_tn_acc_scalar(const double* a, const double* g, double* c, int m,
                          int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    const double* grow = g + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double aip = arow[p];
      double* crow = c + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += aip * grow[j];
    }
  }
}

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_scalar(const double* a, double s, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void relu_scalar(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void relu_backward_scalar(const double* x, const double* g, double* gx,
                          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > 0.0) gx[i] += g[i];
  }
}

const Backend kScalar = {
    "scalar",          matmul_acc_scalar, matmul_tn_acc_scalar,
    add_scalar,        sub_scalar,        mul_scalar,
    scale_scalar,      axpy_scalar,       relu_scalar,
    relu_backward_scalar,
};

}  // namespace

const Backend& scalar_backend() { return kScalar; }

}  // namespace dacdr::kernels

#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace dacdr::kernels {

// Dense double-precision kernels behind the tensor engine. Each backend must
// produce bit-identical results: the scalar versions fix the accumulation
// order (ascending k per output element, plain mul+add) and the SIMD versions
// reproduce it lane for lane. Equivalence tests compare backends with memcmp.
struct Backend {
  const char* name;

  // c[m x n] += a[m x k] * b[k x n], all row-major.
  void (*matmul_acc)(const double* a, const double* b, double* c, int m, int k,
                     int n);
  // c[k x n] += a^T * g where a is [m x k] and g is [m x n].
  void (*matmul_tn_acc)(const double* a, const double* g, double* c, int m,
                        int k, int n);

  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  void (*scale)(const double* a, double s, double* out, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[i] = a[i] > 0 ? a[i] : +0.0
  void (*relu)(const double* a, double* out, std::size_t n);
  // gx[i] += g[i] where x[i] > 0
  void (*relu_backward)(const double* x, const double* g, double* gx,
                        std::size_t n);
};

const Backend& scalar_backend();

// Backends usable on this machine, scalar first.
const std::vector<const Backend*>& available_backends();

// Active backend: best available, overridable with DACDR_KERNELS=scalar|avx2
// or select(). Selection happens once, before any compute.
const Backend& active();
bool select(std::string_view name);

}  // namespace dacdr::kernels

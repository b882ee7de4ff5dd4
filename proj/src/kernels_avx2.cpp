#include "dacdr/kernels.hpp"

// AVX2 variants. Vectorization runs along the contiguous output axis only, so
// each output element sees the same adds in the same order as the scalar
// reference: mul+add (never fmadd), tails handled elementwise.

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

namespace dacdr::kernels {
namespace {

// crow[j] += aip * brow[j] for j in [0, n)
inline void axpy_row(double aip, const double* brow, double* crow, int n) {
  const __m256d va = _mm256_set1_pd(aip);
  int j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d vb = _mm256_loadu_pd(brow + j);
    const __m256d vc = _mm256_loadu_pd(crow + j);
    _mm256_storeu_pd(crow + j, _mm256_add_pd(vc, _mm256_mul_pd(va, vb)));
  }
  for (; j < n; ++j) crow[j] += aip * brow[j];
}

void matmul_acc_avx2(const double* a, const double* b, double* c, int m, int k,
                     int n) {
  for (int i = 0; i < m; ++i) {
    double* crow = c + static_cast<std::size_t>(i) * n;
    const double* arow = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p)
      axpy_row(arow[p], b + static_cast<std::size_t>(p) * n, crow, n);
  }
}

void matmul_tn_acc_avx2(const double* a, const double* g, double* c, int m,
                        int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    const double* grow = g + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p)
      axpy_row(arow[p], grow, c + static_cast<std::size_t>(p) * n, n);
  }
}

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_avx2(const double* a, double s, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vs));
  for (; i < n; ++i) out[i] = a[i] * s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i,
                     _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void relu_avx2(const double* a, double* out, std::size_t n) {
  // x > 0 ? x : +0.0; mask-and keeps -0.0 inputs at +0.0, matching scalar.
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(a + i);
    const __m256d mask = _mm256_cmp_pd(vx, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_and_pd(vx, mask));
  }
  for (; i < n; ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void relu_backward_avx2(const double* x, const double* g, double* gx,
                        std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    const __m256d vg = _mm256_and_pd(_mm256_loadu_pd(g + i), mask);
    _mm256_storeu_pd(gx + i, _mm256_add_pd(_mm256_loadu_pd(gx + i), vg));
  }
  for (; i < n; ++i) {
    if (x[i] > 0.0) gx[i] += g[i];
  }
}

}  // namespace

const Backend* avx2_backend_impl() {
  static const Backend kAvx2 = {
      "avx2",      matmul_acc_avx2, matmul_tn_acc_avx2,
      add_avx2,    sub_avx2,        mul_avx2,
      scale_avx2,  axpy_avx2,       relu_avx2,
      relu_backward_avx2,
  };
  return &kAvx2;
}

}  // namespace dacdr::kernels

#else

namespace dacdr::kernels {
const Backend* avx2_backend_impl() { return nullptr; }
}  // namespace dacdr::kernels

#endif

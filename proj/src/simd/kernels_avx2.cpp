#include "thinktank/simd/kernels.hpp"

#if defined(THINKTANK_HAVE_AVX2)

#include <immintrin.h>

namespace thinktank::simd {
namespace {

inline double reduce_add_f64x4(__m256d x) {
  const __m128d lo = _mm256_castpd256_pd128(x);
  const __m128d hi = _mm256_extractf128_pd(x, 1);
  const __m128d sum = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(sum, _mm_unpackhi_pd(sum, sum)));
}

double dot_avx2(const float* a, const float* b, std::size_t dim) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= dim; i += 8) {
    const __m256 va = _mm256_loadu_ps(a + i);
    const __m256 vb = _mm256_loadu_ps(b + i);
    const __m256d a_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(va));
    const __m256d a_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(va, 1));
    const __m256d b_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(vb));
    const __m256d b_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1));
    acc0 = _mm256_fmadd_pd(a_lo, b_lo, acc0);
    acc1 = _mm256_fmadd_pd(a_hi, b_hi, acc1);
  }
  double acc = reduce_add_f64x4(_mm256_add_pd(acc0, acc1));
  for (; i < dim; ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

double squared_norm_avx2(const float* a, std::size_t dim) { return dot_avx2(a, a, dim); }

void dot_rows_avx2(const float* query, const float* rows, std::size_t dim, std::size_t count, double* out) {
  for (std::size_t r = 0; r < count; ++r) {
    if (r + 1 < count) _mm_prefetch(reinterpret_cast<const char*>(rows + (r + 1) * dim), _MM_HINT_T0);
    out[r] = dot_avx2(query, rows + r * dim, dim);
  }
}

}  // namespace

const Kernels* avx2_kernels() {
  static const Kernels k{"avx2", &dot_avx2, &squared_norm_avx2, &dot_rows_avx2};
  return &k;
}

}  // namespace thinktank::simd

#else

namespace thinktank::simd {
const Kernels* avx2_kernels() { return nullptr; }
}  // namespace thinktank::simd

#endif

#include "thinktank/simd/kernels.hpp"

namespace thinktank::simd {
namespace {

double dot_scalar(const float* a, const float* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

double squared_norm_scalar(const float* a, std::size_t dim) { return dot_scalar(a, a, dim); }

void dot_rows_scalar(const float* query, const float* rows, std::size_t dim, std::size_t count, double* out) {
  for (std::size_t r = 0; r < count; ++r) out[r] = dot_scalar(query, rows + r * dim, dim);
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{"scalar", &dot_scalar, &squared_norm_scalar, &dot_rows_scalar};
  return k;
}

}  // namespace thinktank::simd

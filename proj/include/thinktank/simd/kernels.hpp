#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Similarity kernels for the flat vector index. Every variant accumulates in
// double precision so variants agree to ~1e-12 regardless of lane order.
namespace thinktank::simd {

struct Kernels {
  std::string_view name;
  double (*dot)(const float* a, const float* b, std::size_t dim);
  double (*squared_norm)(const float* a, std::size_t dim);
  /// out[r] = dot(query, rows + r * dim) for r in [0, count).
  void (*dot_rows)(const float* query, const float* rows, std::size_t dim, std::size_t count, double* out);
};

const Kernels& scalar_kernels();

/// nullptr when the AVX2 variant was not compiled in.
const Kernels* avx2_kernels();

bool cpu_has_avx2();

/// Best variant for this CPU. THINKTANK_SIMD=scalar forces the reference kernels.
const Kernels& active_kernels();

/// Cosine similarity of the query against each row; zero-norm pairs score 0.
void cosine_rows(const Kernels& k, std::span<const float> query, std::span<const float> rows,
                 std::span<const double> row_norms, std::span<double> out);

}  // namespace thinktank::simd

#include <cmath>
#include <cstdlib>
#include <string_view>

#include "thinktank/simd/kernels.hpp"

namespace thinktank::simd {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Kernels& active_kernels() {
  static const Kernels& chosen = []() -> const Kernels& {
    const char* forced = std::getenv("THINKTANK_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_kernels();
    if (const Kernels* k = avx2_kernels(); k != nullptr && cpu_has_avx2()) return *k;
    return scalar_kernels();
  }();
  return chosen;
}

void cosine_rows(const Kernels& k, std::span<const float> query, std::span<const float> rows,
                 std::span<const double> row_norms, std::span<double> out) {
  const std::size_t dim = query.size();
  const std::size_t count = row_norms.size();
  k.dot_rows(query.data(), rows.data(), dim, count, out.data());
  const double qn = std::sqrt(k.squared_norm(query.data(), dim));
  for (std::size_t r = 0; r < count; ++r) {
    const double denom = qn * row_norms[r];
    out[r] = denom > 0.0 ? out[r] / denom : 0.0;
  }
}

}  // namespace thinktank::simd

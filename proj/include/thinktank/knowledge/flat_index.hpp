#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "thinktank/simd/kernels.hpp"

namespace thinktank::knowledge {

struct RowScore {
  std::size_t row = 0;
  double score = 0.0;
};

/// Exact cosine search over a row-major float matrix.
class FlatIndex {
 public:
  explicit FlatIndex(std::size_t dim = 0, const simd::Kernels& kernels = simd::active_kernels());

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return norms_.size(); }
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<const float> data() const noexcept { return data_; }

  /// Sets the dimension when empty; otherwise Error(config) on mismatch.
  void add(std::span<const float> vector);

  /// Cosine of the query against every row, indexed by row.
  std::vector<double> scores(std::span<const float> query) const;

  /// Highest k rows by score; `tie_less(a, b)` orders rows with equal scores.
  std::vector<RowScore> top_k(std::span<const float> query, std::size_t k,
                              const std::function<bool(std::size_t, std::size_t)>& tie_less) const;

 private:
  std::size_t dim_;
  const simd::Kernels* kernels_;
  std::vector<float> data_;
  std::vector<double> norms_;
};

}  // namespace thinktank::knowledge

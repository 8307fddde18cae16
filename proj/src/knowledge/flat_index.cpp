#include "thinktank/knowledge/flat_index.hpp"

#include <algorithm>
#include <cmath>

#include "thinktank/error.hpp"

namespace thinktank::knowledge {

FlatIndex::FlatIndex(std::size_t dim, const simd::Kernels& kernels) : dim_(dim), kernels_(&kernels) {}

void FlatIndex::add(std::span<const float> vector) {
  if (vector.empty()) fail(ErrorKind::validation, "cannot index an empty vector");
  if (dim_ == 0 && norms_.empty()) dim_ = vector.size();
  if (vector.size() != dim_) {
    fail(ErrorKind::config, "embedding dimension " + std::to_string(vector.size()) + " does not match index dimension " +
                                std::to_string(dim_));
  }
  for (float v : vector) {
    if (!std::isfinite(v)) fail(ErrorKind::validation, "embedding contains a non-finite value");
  }
  data_.insert(data_.end(), vector.begin(), vector.end());
  norms_.push_back(std::sqrt(kernels_->squared_norm(vector.data(), dim_)));
}

std::vector<double> FlatIndex::scores(std::span<const float> query) const {
  if (norms_.empty()) return {};
  if (query.size() != dim_) {
    fail(ErrorKind::config, "query dimension " + std::to_string(query.size()) + " does not match index dimension " +
                                std::to_string(dim_));
  }
  std::vector<double> out(norms_.size());
  simd::cosine_rows(*kernels_, query, data_, norms_, out);
  for (double& s : out) s = std::clamp(s, -1.0, 1.0);
  return out;
}

std::vector<RowScore> FlatIndex::top_k(std::span<const float> query, std::size_t k,
                                       const std::function<bool(std::size_t, std::size_t)>& tie_less) const {
  const std::vector<double> all = scores(query);
  std::vector<RowScore> rows(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) rows[i] = RowScore{i, all[i]};
  const auto better = [&](const RowScore& a, const RowScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return tie_less(a.row, b.row);
  };
  const std::size_t take = std::min(k, rows.size());
  std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take), rows.end(), better);
  rows.resize(take);
  return rows;
}

}  // namespace thinktank::knowledge

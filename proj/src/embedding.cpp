#include "evloc/embedding.hpp"

#include <cmath>
#include <string>

#include "evloc/error.hpp"

namespace evloc {

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim)
    : rows_(rows), dim_(dim), data_(rows * dim, 0.0) {}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  require(data_.size() == rows_ * dim_, ErrorKind::ShapeError,
          "embedding buffer holds " + std::to_string(data_.size()) + " values, expected " +
              std::to_string(rows_ * dim_));
}

bool EmbeddingMatrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void EmbeddingMatrix::push_row(std::span<const double> values) {
  if (rows_ == 0 && data_.empty()) dim_ = values.size();
  require(values.size() == dim_, ErrorKind::ShapeError,
          "row of dimension " + std::to_string(values.size()) + " pushed into matrix of dimension " +
              std::to_string(dim_));
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

}  // namespace evloc

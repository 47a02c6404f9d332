// Dense row-major N x D embedding storage (frames, captions, transitions).

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace evloc {

class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  /// Zero-filled rows x dim matrix.
  EmbeddingMatrix(std::size_t rows, std::size_t dim);
  /// Takes ownership of `data`, which must hold rows * dim values.
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * dim_, dim_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * dim_, dim_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }

  bool all_finite() const noexcept;

  /// Appends a row; the first row fixes the dimension of an empty matrix.
  void push_row(std::span<const double> values);

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

}  // namespace evloc

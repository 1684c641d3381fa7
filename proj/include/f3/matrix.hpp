#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "f3/text.hpp"

namespace f3 {

/// Row-compressed matrix with implicit zeros. Dense user-feature blocks and
/// TF-IDF blocks share this representation so every learner sees one type.
class SparseMatrix {
 public:
  struct RowView {
    std::span<const std::uint32_t> index;
    std::span<const double> value;

    /// Stored value at `col`, or 0.
    double at(std::uint32_t col) const;
  };

  SparseMatrix() = default;
  explicit SparseMatrix(std::size_t cols) : cols_(cols) {}

  static SparseMatrix from_dense(std::span<const std::vector<double>> rows, std::size_t cols);
  static SparseMatrix from_dense(std::span<const std::vector<double>> rows);

  /// Appends a dense row; zeros are not stored.
  void add_row(std::span<const double> dense);
  /// Appends entries with strictly increasing indices below cols().
  void add_row(std::span<const SparseEntry> entries);

  std::size_t rows() const { return indptr_.size() - 1; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  RowView row(std::size_t r) const {
    auto begin = indptr_[r], end = indptr_[r + 1];
    return {std::span(indices_).subspan(begin, end - begin),
            std::span(values_).subspan(begin, end - begin)};
  }

  std::vector<double> dense_row(std::size_t r) const;

  bool all_finite() const;

 private:
  std::size_t cols_ = 0;
  std::vector<std::size_t> indptr_{0};
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
};

}  // namespace f3

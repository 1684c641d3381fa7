#include "f3/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace f3 {

double SparseMatrix::RowView::at(std::uint32_t col) const {
  auto it = std::lower_bound(index.begin(), index.end(), col);
  if (it == index.end() || *it != col) return 0.0;
  return value[static_cast<std::size_t>(it - index.begin())];
}

SparseMatrix SparseMatrix::from_dense(std::span<const std::vector<double>> rows, std::size_t cols) {
  SparseMatrix m(cols);
  for (const auto& r : rows) m.add_row(r);
  return m;
}

SparseMatrix SparseMatrix::from_dense(std::span<const std::vector<double>> rows) {
  return from_dense(rows, rows.empty() ? 0 : rows.front().size());
}

void SparseMatrix::add_row(std::span<const double> dense) {
  if (dense.size() != cols_)
    throw std::invalid_argument("row has " + std::to_string(dense.size()) + " columns, expected " +
                                std::to_string(cols_));
  for (std::size_t c = 0; c < dense.size(); ++c) {
    if (dense[c] != 0.0) {
      indices_.push_back(static_cast<std::uint32_t>(c));
      values_.push_back(dense[c]);
    }
  }
  indptr_.push_back(values_.size());
}

void SparseMatrix::add_row(std::span<const SparseEntry> entries) {
  long last = -1;
  for (const auto& e : entries) {
    if (static_cast<long>(e.index) <= last || e.index >= cols_)
      throw std::invalid_argument("sparse row indices must be increasing and within columns");
    last = e.index;
    if (e.weight != 0.0) {
      indices_.push_back(e.index);
      values_.push_back(e.weight);
    }
  }
  indptr_.push_back(values_.size());
}

std::vector<double> SparseMatrix::dense_row(std::size_t r) const {
  std::vector<double> out(cols_, 0.0);
  auto view = row(r);
  for (std::size_t i = 0; i < view.index.size(); ++i) out[view.index[i]] = view.value[i];
  return out;
}

bool SparseMatrix::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace f3

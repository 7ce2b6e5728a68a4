#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qos {

// (row, column) position in a user x service matrix.
struct Cell {
  std::uint32_t row = 0;
  std::uint32_t col = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Dense row-major matrix of doubles.
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  std::vector<double> column(std::size_t j) const;

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Grid transposed() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// User x service QoS log. Zero marks a pair that was never invoked; every
// stored value is >= 0.
class QosMatrix : public Grid {
 public:
  QosMatrix() = default;
  QosMatrix(std::size_t rows, std::size_t cols) : Grid(rows, cols, 0.0) {}
  explicit QosMatrix(Grid g) : Grid(std::move(g)) {}

  // Builds from raw values, mapping failed-invocation sentinels (<= 0) to 0.
  // Throws InputError on non-finite values or ragged rows.
  static QosMatrix from_raw(const std::vector<std::vector<double>>& rows);

  bool observed(std::size_t i, std::size_t j) const { return (*this)(i, j) > 0.0; }
  std::size_t observed_count() const;
  std::vector<Cell> observed_cells() const;

  // Mean over observed entries; 0 when nothing is observed.
  double observed_mean() const;

  QosMatrix transposed() const { return QosMatrix(Grid::transposed()); }

  // Rows and columns picked (in the given order) from this matrix.
  QosMatrix submatrix(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const;
  QosMatrix select_rows(std::span<const std::size_t> rows) const;
};

}  // namespace qos

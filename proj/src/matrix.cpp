#include "qos/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qos/error.hpp"

namespace qos {

std::vector<double> Grid::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

Grid Grid::transposed() const {
  Grid t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

QosMatrix QosMatrix::from_raw(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t m = n ? rows.front().size() : 0;
  QosMatrix q(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != m) {
      throw InputError("row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                       " values, expected " + std::to_string(m));
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double v = rows[i][j];
      if (!std::isfinite(v)) throw InputError("non-finite QoS value at row " + std::to_string(i));
      q(i, j) = v > 0.0 ? v : 0.0;
    }
  }
  return q;
}

std::size_t QosMatrix::observed_count() const {
  std::size_t n = 0;
  for (double v : data()) n += v > 0.0;
  return n;
}

std::vector<Cell> QosMatrix::observed_cells() const {
  std::vector<Cell> cells;
  cells.reserve(observed_count());
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j)
      if (observed(i, j)) cells.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
  return cells;
}

double QosMatrix::observed_mean() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : data()) {
    if (v > 0.0) {
      sum += v;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

QosMatrix QosMatrix::submatrix(std::span<const std::size_t> rs,
                               std::span<const std::size_t> cs) const {
  QosMatrix out(rs.size(), cs.size());
  for (std::size_t a = 0; a < rs.size(); ++a)
    for (std::size_t b = 0; b < cs.size(); ++b) out(a, b) = (*this)(rs[a], cs[b]);
  return out;
}

QosMatrix QosMatrix::select_rows(std::span<const std::size_t> rs) const {
  QosMatrix out(rs.size(), cols());
  for (std::size_t a = 0; a < rs.size(); ++a) {
    auto src = row(rs[a]);
    std::copy(src.begin(), src.end(), out.row(a).begin());
  }
  return out;
}

}  // namespace qos

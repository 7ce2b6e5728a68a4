#pragma once

#include <cmath>
#include <cstdint>

#include "qos/fill.hpp"
#include "qos/rng.hpp"

namespace qos::test {

// Mean relative error of mf_fill on the masked cells of an exactly rank-1
// positive matrix with `masked` of its cells hidden.
inline double rank1_recovery_error(std::uint64_t seed, std::size_t n = 20, double masked = 0.3,
                                   const MfConfig& config = MfConfig{}) {
  Rng rng(seed);
  std::vector<double> u(n), v(n);
  for (auto& x : u) x = rng.uniform(0.5, 2.0);
  for (auto& x : v) x = rng.uniform(0.5, 2.0);
  QosMatrix truth(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) truth(i, j) = u[i] * v[j];

  std::vector<Cell> cells;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cells.push_back({std::uint32_t(i), std::uint32_t(j)});
  rng.shuffle(std::span<Cell>(cells));
  const std::size_t hide = static_cast<std::size_t>(std::llround(masked * double(cells.size())));

  QosMatrix input = truth;
  for (std::size_t c = 0; c < hide; ++c) input(cells[c].row, cells[c].col) = 0.0;
  MfConfig cfg = config;
  cfg.seed = derive_seed(seed, "mf-recovery");
  const QosMatrix out = mf_fill(input, cfg);

  double err = 0.0;
  for (std::size_t c = 0; c < hide; ++c) {
    const double t = truth(cells[c].row, cells[c].col);
    err += std::abs(out(cells[c].row, cells[c].col) - t) / t;
  }
  return err / double(hide);
}

}  // namespace qos::test

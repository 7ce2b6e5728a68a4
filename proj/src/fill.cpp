#include "qos/fill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qos/error.hpp"
#include "qos/geo.hpp"
#include "qos/kernels.hpp"
#include "qos/rng.hpp"

namespace qos {

std::string_view to_string(DeviationMode mode) {
  return mode == DeviationMode::signed_mean ? "signed_mean" : "majority_sign";
}

DeviationMode parse_deviation_mode(std::string_view text) {
  if (text == "signed_mean") return DeviationMode::signed_mean;
  if (text == "majority_sign") return DeviationMode::majority_sign;
  throw InputError("unknown deviation mode '" + std::string(text) +
                   "' (expected signed_mean or majority_sign)");
}

namespace {

QosMatrix cf_fill_users(const QosMatrix& q, CfDiagnostics* diag) {
  const std::size_t nu = q.rows();
  const std::size_t ns = q.cols();
  QosMatrix out = q;
  if (q.observed_count() == nu * ns) return out;

  const Grid wu = SimilarityView(q, Axis::users).gram();
  const Grid ws = SimilarityView(q, Axis::services).gram();
  const auto& k = kernels::active();

  Grid mask(nu, ns);
  for (std::size_t i = 0; i < nu; ++i)
    for (std::size_t j = 0; j < ns; ++j) mask(i, j) = q.observed(i, j) ? 1.0 : 0.0;

  // Weighted column averages for every cell, excluding the row's own value.
  Grid num(nu, ns);
  Grid den(nu, ns);
  for (std::size_t i = 0; i < nu; ++i) {
    double* nrow = num.row(i).data();
    double* drow = den.row(i).data();
    for (std::size_t o = 0; o < nu; ++o) {
      const double w = wu(i, o);
      if (o == i || w == 0.0) continue;
      k.axpy(w, q.row(o).data(), nrow, ns);
      k.axpy(w, mask.row(o).data(), drow, ns);
    }
  }

  // Signed deviations on the observed cells whose average exists.
  Grid dev(nu, ns);
  Grid used(nu, ns);
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t j = 0; j < ns; ++j) {
      if (!q.observed(i, j) || den(i, j) <= 0.0) continue;
      dev(i, j) = q(i, j) - num(i, j) / den(i, j);
      used(i, j) = 1.0;
    }
  }

  const double mean = q.observed_mean();
  CfDiagnostics local;
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t j = 0; j < ns; ++j) {
      if (q.observed(i, j)) continue;
      ++local.filled;
      if (den(i, j) <= 0.0) {
        out(i, j) = mean;
        ++local.mean_fallbacks;
        continue;
      }
      const double avg = num(i, j) / den(i, j);
      const double wsum = k.dot(ws.row(j).data(), used.row(i).data(), ns);
      double d = 0.0;
      if (wsum > 0.0) d = k.dot(ws.row(j).data(), dev.row(i).data(), ns) / wsum;
      out(i, j) = std::max(0.0, avg + d);
    }
  }
  if (diag) {
    diag->filled += local.filled;
    diag->mean_fallbacks += local.mean_fallbacks;
  }
  return out;
}

double mf_loss(const std::vector<Cell>& cells, const QosMatrix& q, const Grid& p, const Grid& s,
               double reg) {
  const auto& k = kernels::active();
  const std::size_t r = p.cols();
  double loss = 0.0;
  for (const Cell& c : cells) {
    const double* pu = p.row(c.row).data();
    const double* sj = s.row(c.col).data();
    const double e = q(c.row, c.col) - k.dot(pu, sj, r);
    loss += e * e + reg * (k.dot(pu, pu, r) + k.dot(sj, sj, r));
  }
  return loss;
}

}  // namespace

QosMatrix cf_fill(const QosMatrix& q, FilterMode mode, CfDiagnostics* diagnostics,
                  DeviationMode deviation) {
  if (deviation == DeviationMode::majority_sign) {
    throw InputError("deviation_mode majority_sign is reserved and not implemented");
  }
  if (mode == FilterMode::user_intensive) return cf_fill_users(q, diagnostics);
  return cf_fill_users(q.transposed(), diagnostics).transposed();
}

QosMatrix cf_fill(const FilterResult& filtered, CfDiagnostics* diagnostics,
                  DeviationMode deviation) {
  return cf_fill(filtered.submatrix, filtered.mode, diagnostics, deviation);
}

MfResult mf_factorize(const QosMatrix& q, const MfConfig& config) {
  if (config.rank == 0) throw InputError("mf rank must be >= 1");
  if (!(config.learning_rate > 0.0)) throw InputError("mf learning rate must be > 0");
  if (!(config.regularization >= 0.0)) throw InputError("mf regularization must be >= 0");

  const std::vector<Cell> cells = q.observed_cells();
  if (cells.empty()) throw PipelineError("matrix factorization needs an observed entry");
  MfResult result;
  result.filled = q;
  if (cells.size() == q.rows() * q.cols()) return result;

  const std::size_t r = config.rank;
  Rng rng(config.seed);
  const double hi = 0.1 * std::sqrt(q.observed_mean());
  Grid p(q.rows(), r);
  Grid s(q.cols(), r);
  for (double& v : p.data()) v = rng.uniform(0.0, hi);
  for (double& v : s.data()) v = rng.uniform(0.0, hi);

  const auto& k = kernels::active();
  const double lr = config.learning_rate;
  const double reg = config.regularization;

  Grid best_p = p;
  Grid best_s = s;
  double best = mf_loss(cells, q, p, s, reg);
  result.initial_loss = best;

  std::vector<Cell> order = cells;
  std::vector<double> pu_old(r);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<Cell>(order));
    for (const Cell& c : order) {
      double* pu = p.row(c.row).data();
      double* sj = s.row(c.col).data();
      const double e = q(c.row, c.col) - k.dot(pu, sj, r);
      std::copy(pu, pu + r, pu_old.begin());
      for (std::size_t f = 0; f < r; ++f) {
        pu[f] += lr * (e * sj[f] - reg * pu[f]);
        sj[f] += lr * (e * pu_old[f] - reg * sj[f]);
      }
    }
    const double loss = mf_loss(cells, q, p, s, reg);
    if (!std::isfinite(loss)) break;
    if (loss < best) {
      best = loss;
      best_p = p;
      best_s = s;
      result.best_epoch = epoch;
    }
  }
  result.final_loss = best;

  for (std::size_t i = 0; i < q.rows(); ++i) {
    for (std::size_t j = 0; j < q.cols(); ++j) {
      if (q.observed(i, j)) continue;
      result.filled(i, j) = std::max(0.0, k.dot(best_p.row(i).data(), best_s.row(j).data(), r));
    }
  }
  return result;
}

QosMatrix mf_fill(const QosMatrix& q, const MfConfig& config) {
  return mf_factorize(q, config).filled;
}

QosMatrix mf_fill(const FilterResult& filtered, const MfConfig& config) {
  return mf_fill(filtered.submatrix, config);
}

}  // namespace qos

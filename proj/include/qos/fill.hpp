#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "qos/filtering.hpp"
#include "qos/matrix.hpp"

namespace qos {

// How the CF deviation term combines per-service deviations. Only the
// signed weighted mean is implemented; `majority_sign` is reserved.
enum class DeviationMode { signed_mean, majority_sign };
std::string_view to_string(DeviationMode mode);
DeviationMode parse_deviation_mode(std::string_view text);

struct CfDiagnostics {
  std::size_t filled = 0;          // zero cells that received a value
  std::size_t mean_fallbacks = 0;  // cells with no weighted neighbour
};

// Memory-based fill of every zero cell.
//
// User-intensive: a similarity-weighted column average over the other users
// who observed the column, corrected by the service-similarity-weighted mean
// of the target user's signed deviations (actual - average) on the services
// they observed. Service-intensive is the transpose. Observed cells pass
// through, results are clamped to >= 0, and a cell with no weighted
// neighbour takes the mean of the observed entries.
QosMatrix cf_fill(const QosMatrix& q, FilterMode mode, CfDiagnostics* diagnostics = nullptr,
                  DeviationMode deviation = DeviationMode::signed_mean);
QosMatrix cf_fill(const FilterResult& filtered, CfDiagnostics* diagnostics = nullptr,
                  DeviationMode deviation = DeviationMode::signed_mean);

struct MfConfig {
  std::size_t rank = 10;
  double learning_rate = 0.005;
  double regularization = 0.02;
  std::size_t epochs = 500;
  std::uint64_t seed = 7;
};

struct MfResult {
  QosMatrix filled;
  double initial_loss = 0.0;  // before the first epoch
  double final_loss = 0.0;    // of the factors kept
  std::size_t best_epoch = 0;  // 0 means the initial factors were kept
};

// Latent-factor completion by SGD over the observed cells (visited in a
// seeded order each epoch). Loss is the squared error over observed cells
// plus regularization * (|p_u|^2 + |s_j|^2) per observed cell. The factors
// with the lowest loss seen are kept. Observed cells pass through, missing
// cells are clamped to >= 0.
MfResult mf_factorize(const QosMatrix& q, const MfConfig& config);
QosMatrix mf_fill(const QosMatrix& q, const MfConfig& config);
QosMatrix mf_fill(const FilterResult& filtered, const MfConfig& config);

struct FilledMatrices {
  QosMatrix cf_ui;
  QosMatrix mf_ui;
  QosMatrix cf_si;
  QosMatrix mf_si;
};

}  // namespace qos

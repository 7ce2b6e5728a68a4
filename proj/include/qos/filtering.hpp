#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qos/geo.hpp"
#include "qos/matrix.hpp"

namespace qos {

using IndexSet = std::vector<std::size_t>;  // ascending entity indices
using Contexts = std::vector<std::optional<GeoContext>>;

enum class FilterMode { user_intensive, service_intensive };
std::string_view to_string(FilterMode mode);

struct FilterThresholds {
  double user_distance_km = 0.0;     // contextual distance for users
  double service_distance_km = 0.0;  // contextual distance for services
  double user_similarity = 0.0;      // cosine, [0, 1]
  double service_similarity = 0.0;   // cosine, [0, 1]
  // Context-sensitivity counts. When unset, the merge uses k times the size
  // of the similarity cluster it is merging with.
  std::optional<double> user_cs_count;
  std::optional<double> service_cs_count;
  double k = 0.5;
};

// The training log plus contexts a filter runs against.
struct FilterProblem {
  const QosMatrix* train = nullptr;  // training entries only
  const Contexts* user_contexts = nullptr;
  const Contexts* service_contexts = nullptr;
  bool use_context = true;
  // Merged sets smaller than this are topped up with the most similar
  // entities by cosine.
  std::size_t min_neighbors = 5;

  bool context_enabled() const { return use_context && user_contexts && service_contexts; }
};

struct FilterDiagnostics {
  std::size_t user_context_size = 0;
  std::size_t user_similarity_size = 0;
  std::size_t service_context_size = 0;
  std::size_t service_similarity_size = 0;
  bool user_context_sensitive = false;
  bool service_context_sensitive = false;
  bool user_fallback = false;
  bool service_fallback = false;
};

struct FilterResult {
  IndexSet users;
  IndexSet services;
  QosMatrix submatrix;  // rows follow `users`, columns follow `services`
  FilterMode mode = FilterMode::user_intensive;
  FilterDiagnostics diagnostics;

  std::optional<std::size_t> local_user(std::size_t global) const;
  std::optional<std::size_t> local_service(std::size_t global) const;
};

// Picks the element at 1-based position ceil(|values| * k) (clamped to
// [1, |values|]) of `values` sorted descending (distances) or ascending
// (similarities).
double order_statistic(std::vector<double> values, double k, bool descending);

// Data-driven thresholds for a target pair. Distances come from the k-rule
// over descending contextual distances to the target; similarities are
// max(lambda_k, k * lambda_max) over ascending cosine values on the training
// log. The target itself is excluded from both distributions.
FilterThresholds compute_thresholds(const FilterProblem& problem, std::size_t target_user,
                                    std::size_t target_service, double k);

// Transitive closure from {target} over `candidates`: any candidate within
// `threshold_km` of a current member joins. Candidates without a context
// never join; a target without a context yields {target}.
IndexSet cluster_by_context(std::span<const std::size_t> candidates, std::size_t target,
                            const Contexts& contexts, double threshold_km);

// Same closure with cosine similarity >= threshold along `axis` of `matrix`.
// Entities with no observed entry never join; such a target yields {target}.
IndexSet cluster_by_similarity(std::span<const std::size_t> candidates, std::size_t target,
                               const QosMatrix& matrix, Axis axis, double threshold);

// Intersection when it holds at least `threshold_count` members (target
// included), otherwise the similarity set.
IndexSet context_sensitive_merge(std::span<const std::size_t> context_set,
                                 std::span<const std::size_t> similarity_set,
                                 double threshold_count);

// Users first (context + similarity + merge on the whole log), rows
// restricted, then services with similarity computed on the restricted rows.
FilterResult user_intensive_filter(const FilterProblem& problem, std::size_t target_user,
                                   std::size_t target_service, const FilterThresholds& thresholds);

// Services first on the whole log, then users on the restricted columns.
FilterResult service_intensive_filter(const FilterProblem& problem, std::size_t target_user,
                                      std::size_t target_service,
                                      const FilterThresholds& thresholds);

}  // namespace qos

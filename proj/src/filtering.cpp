#include "qos/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qos/error.hpp"

namespace qos {

std::string_view to_string(FilterMode mode) {
  return mode == FilterMode::user_intensive ? "user-intensive" : "service-intensive";
}

namespace {

std::optional<std::size_t> find_local(const IndexSet& set, std::size_t global) {
  auto it = std::lower_bound(set.begin(), set.end(), global);
  if (it == set.end() || *it != global) return std::nullopt;
  return static_cast<std::size_t>(it - set.begin());
}

IndexSet iota_set(std::size_t n) {
  IndexSet s(n);
  std::iota(s.begin(), s.end(), std::size_t{0});
  return s;
}

// Shared closure: grows {target} by any remaining candidate linked to a
// member, visiting each member once.
template <typename Linked>
IndexSet transitive_closure(std::span<const std::size_t> candidates, std::size_t target,
                            Linked linked) {
  IndexSet members{target};
  std::vector<std::size_t> remaining;
  remaining.reserve(candidates.size());
  for (auto c : candidates)
    if (c != target) remaining.push_back(c);

  for (std::size_t next = 0; next < members.size(); ++next) {
    const std::size_t member = members[next];
    std::vector<std::size_t> keep;
    keep.reserve(remaining.size());
    for (auto c : remaining) {
      if (linked(member, c)) members.push_back(c);
      else keep.push_back(c);
    }
    remaining.swap(keep);
    if (remaining.empty()) break;
  }
  std::sort(members.begin(), members.end());
  return members;
}

IndexSet similarity_closure(const SimilarityView& view, std::span<const std::size_t> candidates,
                            std::size_t target, double threshold) {
  // Entities without history have no defined similarity and never link,
  // like entities without a location.
  if (!view.has_history(target)) return {target};
  return transitive_closure(candidates, target, [&](std::size_t a, std::size_t b) {
    return view.has_history(b) && view.similarity(a, b) >= threshold;
  });
}

double cs_count(const std::optional<double>& fixed, double k, std::size_t similarity_size) {
  return fixed ? *fixed : k * static_cast<double>(similarity_size);
}

// Adds the entities most similar to the target (ties to the lower index)
// until the set reaches `min_size` or candidates run out.
bool top_up(IndexSet& set, const SimilarityView& view, std::size_t target, std::size_t min_size) {
  if (set.size() >= min_size) return false;
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t e = 0; e < view.size(); ++e) {
    if (e == target || std::binary_search(set.begin(), set.end(), e)) continue;
    ranked.emplace_back(view.similarity(target, e), e);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  bool changed = false;
  for (const auto& [sim, e] : ranked) {
    if (set.size() >= min_size) break;
    set.push_back(e);
    changed = true;
  }
  std::sort(set.begin(), set.end());
  return changed;
}

struct AxisFilter {
  IndexSet merged;
  std::size_t context_size = 0;
  std::size_t similarity_size = 0;
  bool context_sensitive = false;
  bool fallback = false;
};

AxisFilter filter_axis(const FilterProblem& problem, const QosMatrix& matrix, Axis axis,
                       std::size_t target, double distance_km, double similarity,
                       const std::optional<double>& fixed_count, double k) {
  const SimilarityView view(matrix, axis);
  const IndexSet all = iota_set(view.size());
  AxisFilter out;
  IndexSet sim = similarity_closure(view, all, target, similarity);
  out.similarity_size = sim.size();
  if (problem.context_enabled()) {
    const Contexts& ctx =
        axis == Axis::users ? *problem.user_contexts : *problem.service_contexts;
    IndexSet c = cluster_by_context(all, target, ctx, distance_km);
    out.context_size = c.size();
    IndexSet merged = context_sensitive_merge(c, sim, cs_count(fixed_count, k, sim.size()));
    out.context_sensitive = merged.size() != sim.size() || merged == c;
    out.merged = std::move(merged);
  } else {
    out.merged = std::move(sim);
  }
  out.fallback = top_up(out.merged, view, target, problem.min_neighbors);
  return out;
}

void check_targets(const FilterProblem& p, std::size_t tu, std::size_t ts) {
  if (!p.train) throw InputError("filter problem has no training matrix");
  if (tu >= p.train->rows() || ts >= p.train->cols()) {
    throw InputError("target (" + std::to_string(tu) + ", " + std::to_string(ts) +
                     ") outside a " + std::to_string(p.train->rows()) + "x" +
                     std::to_string(p.train->cols()) + " log");
  }
}

}  // namespace

std::optional<std::size_t> FilterResult::local_user(std::size_t global) const {
  return find_local(users, global);
}

std::optional<std::size_t> FilterResult::local_service(std::size_t global) const {
  return find_local(services, global);
}

double order_statistic(std::vector<double> values, double k, bool descending) {
  if (values.empty()) throw PipelineError("order statistic of an empty candidate set");
  if (descending) std::sort(values.begin(), values.end(), std::greater<>());
  else std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  auto pos = static_cast<std::size_t>(std::ceil(n * k));
  pos = std::clamp<std::size_t>(pos, 1, values.size());
  return values[pos - 1];
}

FilterThresholds compute_thresholds(const FilterProblem& problem, std::size_t target_user,
                                    std::size_t target_service, double k) {
  if (!(k >= 0.0 && k <= 1.0)) throw InputError("k must lie in [0, 1]");
  check_targets(problem, target_user, target_service);
  const QosMatrix& q = *problem.train;
  if (q.rows() < 2 || q.cols() < 2) throw PipelineError("empty candidate set for thresholds");

  FilterThresholds t;
  t.k = k;

  auto distance_threshold = [&](const Contexts& ctx, std::size_t target) {
    if (!ctx[target]) return 0.0;
    std::vector<double> d;
    for (std::size_t e = 0; e < ctx.size(); ++e)
      if (e != target && ctx[e]) d.push_back(haversine_km(*ctx[target], *ctx[e]));
    return d.empty() ? 0.0 : order_statistic(std::move(d), k, true);
  };
  if (problem.context_enabled()) {
    t.user_distance_km = distance_threshold(*problem.user_contexts, target_user);
    t.service_distance_km = distance_threshold(*problem.service_contexts, target_service);
  }

  auto similarity_threshold = [&](Axis axis, std::size_t target) {
    const SimilarityView view(q, axis);
    std::vector<double> s;
    s.reserve(view.size() - 1);
    for (std::size_t e = 0; e < view.size(); ++e)
      if (e != target) s.push_back(view.similarity(target, e));
    const double lambda_max = *std::max_element(s.begin(), s.end());
    return std::max(order_statistic(std::move(s), k, false), k * lambda_max);
  };
  t.user_similarity = similarity_threshold(Axis::users, target_user);
  t.service_similarity = similarity_threshold(Axis::services, target_service);
  return t;
}

IndexSet cluster_by_context(std::span<const std::size_t> candidates, std::size_t target,
                            const Contexts& contexts, double threshold_km) {
  if (!contexts[target]) return {target};
  return transitive_closure(candidates, target, [&](std::size_t a, std::size_t b) {
    return contexts[a] && contexts[b] && haversine_km(*contexts[a], *contexts[b]) <= threshold_km;
  });
}

IndexSet cluster_by_similarity(std::span<const std::size_t> candidates, std::size_t target,
                               const QosMatrix& matrix, Axis axis, double threshold) {
  return similarity_closure(SimilarityView(matrix, axis), candidates, target, threshold);
}

IndexSet context_sensitive_merge(std::span<const std::size_t> context_set,
                                 std::span<const std::size_t> similarity_set,
                                 double threshold_count) {
  IndexSet both;
  std::set_intersection(context_set.begin(), context_set.end(), similarity_set.begin(),
                        similarity_set.end(), std::back_inserter(both));
  if (static_cast<double>(both.size()) >= threshold_count) return both;
  return IndexSet(similarity_set.begin(), similarity_set.end());
}

FilterResult user_intensive_filter(const FilterProblem& problem, std::size_t target_user,
                                   std::size_t target_service,
                                   const FilterThresholds& thresholds) {
  check_targets(problem, target_user, target_service);
  const QosMatrix& q = *problem.train;
  FilterResult r;
  r.mode = FilterMode::user_intensive;

  AxisFilter users = filter_axis(problem, q, Axis::users, target_user, thresholds.user_distance_km,
                                 thresholds.user_similarity, thresholds.user_cs_count, thresholds.k);
  const QosMatrix rows_only = q.select_rows(users.merged);
  AxisFilter services =
      filter_axis(problem, rows_only, Axis::services, target_service,
                  thresholds.service_distance_km, thresholds.service_similarity,
                  thresholds.service_cs_count, thresholds.k);

  r.users = std::move(users.merged);
  r.services = std::move(services.merged);
  r.submatrix = q.submatrix(r.users, r.services);
  r.diagnostics = {users.context_size,        users.similarity_size,
                   services.context_size,     services.similarity_size,
                   users.context_sensitive,   services.context_sensitive,
                   users.fallback,            services.fallback};
  return r;
}

FilterResult service_intensive_filter(const FilterProblem& problem, std::size_t target_user,
                                      std::size_t target_service,
                                      const FilterThresholds& thresholds) {
  check_targets(problem, target_user, target_service);
  const QosMatrix& q = *problem.train;
  FilterResult r;
  r.mode = FilterMode::service_intensive;

  AxisFilter services =
      filter_axis(problem, q, Axis::services, target_service, thresholds.service_distance_km,
                  thresholds.service_similarity, thresholds.service_cs_count, thresholds.k);
  const IndexSet all_users = iota_set(q.rows());
  const QosMatrix cols_only = q.submatrix(all_users, services.merged);
  AxisFilter users = filter_axis(problem, cols_only, Axis::users, target_user,
                                 thresholds.user_distance_km, thresholds.user_similarity,
                                 thresholds.user_cs_count, thresholds.k);

  r.users = std::move(users.merged);
  r.services = std::move(services.merged);
  r.submatrix = q.submatrix(r.users, r.services);
  r.diagnostics = {users.context_size,        users.similarity_size,
                   services.context_size,     services.similarity_size,
                   users.context_sensitive,   services.context_sensitive,
                   users.fallback,            services.fallback};
  return r;
}

}  // namespace qos

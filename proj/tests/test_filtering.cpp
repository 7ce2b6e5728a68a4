#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "fixed_points.hpp"
#include "qos/error.hpp"
#include "qos/filtering.hpp"
#include "support.hpp"

using namespace qos;

namespace {

IndexSet all_of(std::size_t n) {
  IndexSet s(n);
  std::iota(s.begin(), s.end(), std::size_t{0});
  return s;
}

bool contains(const IndexSet& s, std::size_t e) { return std::binary_search(s.begin(), s.end(), e); }

struct Example {
  QosMatrix q = test::example_log();
  Contexts users = test::example_user_contexts();
  Contexts services = test::example_service_contexts();
  FilterProblem problem() const {
    FilterProblem p;
    p.train = &q;
    p.user_contexts = &users;
    p.service_contexts = &services;
    p.min_neighbors = 0;
    return p;
  }
};

FilterThresholds example_thresholds() {
  FilterThresholds t;
  t.user_distance_km = 1500;
  t.user_similarity = 0.85;
  t.service_distance_km = 8200;
  t.service_similarity = 0.83;
  t.k = 0.5;
  return t;
}

}  // namespace

TEST_CASE("order statistic k-rule") {
  CHECK(order_statistic({1, 2, 3, 4, 5}, 0.5, true) == 3.0);
  CHECK(order_statistic({5, 1, 4, 2, 3}, 0.5, false) == 3.0);
  CHECK(order_statistic({1, 2, 3, 4}, 0.5, true) == 3.0);  // position 2 of (4,3,2,1)
  CHECK(order_statistic({1, 2, 3, 4}, 1.0, false) == 4.0);
  CHECK(order_statistic({1, 2, 3, 4}, 0.0, false) == 1.0);
  CHECK_THROWS_AS(order_statistic({}, 0.5, true), PipelineError);
}

TEST_CASE("context chain joins transitively") {
  // 0.036 degrees of longitude on the equator is just over 4 km.
  Contexts ctx{GeoContext::make(0, 0), GeoContext::make(0, 0.036), GeoContext::make(0, 0.072)};
  CHECK(haversine_km(*ctx[0], *ctx[1]) == doctest::Approx(4.003).epsilon(1e-3));
  CHECK(haversine_km(*ctx[0], *ctx[2]) > 8.0);
  const IndexSet all = all_of(3);
  CHECK(cluster_by_context(all, 0, ctx, 5.0) == IndexSet{0, 1, 2});
  CHECK(cluster_by_context(all, 0, ctx, 0.0) == IndexSet{0});
  CHECK(cluster_by_context(all, 2, ctx, 1e5) == IndexSet{0, 1, 2});

  ctx[1].reset();
  CHECK(cluster_by_context(all, 0, ctx, 5.0) == IndexSet{0});
  CHECK(cluster_by_context(all, 1, ctx, 1e5) == IndexSet{1});
}

TEST_CASE("similarity chain joins transitively") {
  // Unit rows at 5, 35 and 65 degrees: neighbours 0.866 apart, ends 0.5.
  auto row = [](double deg) {
    const double r = deg * M_PI / 180.0;
    return std::vector<double>{std::cos(r), std::sin(r)};
  };
  const QosMatrix q = QosMatrix::from_raw({row(5), row(35), row(65)});
  CHECK(cosine_users(q, 0, 2) == doctest::Approx(0.5));
  const IndexSet all = all_of(3);
  CHECK(cluster_by_similarity(all, 0, q, Axis::users, 0.8) == IndexSet{0, 1, 2});
  CHECK(cluster_by_similarity(all, 0, q, Axis::users, 0.0) == IndexSet{0, 1, 2});
  CHECK(cluster_by_similarity(all, 0, q, Axis::users, 0.87) == IndexSet{0});
  CHECK(cluster_by_similarity(IndexSet{0, 2}, 0, q, Axis::users, 0.8) == IndexSet{0});
}

TEST_CASE("context-sensitive merge boundaries") {
  const IndexSet c{0, 1, 2, 5};
  const IndexSet s{0, 1, 3, 4};
  CHECK(context_sensitive_merge(c, s, 2.0) == IndexSet{0, 1});
  CHECK(context_sensitive_merge(c, s, 2.5) == s);
  CHECK(context_sensitive_merge(IndexSet{7}, s, 0.5) == s);
  CHECK(context_sensitive_merge(IndexSet{7}, s, 0.0) == IndexSet{});
}

TEST_CASE("thresholds follow the k-rule") {
  Example ex;
  const FilterProblem p = ex.problem();
  const FilterThresholds t = compute_thresholds(p, 0, 3, 0.5);
  // Independent Python evaluation on the example log.
  CHECK(t.user_similarity == doctest::Approx(0.6838920955425253).epsilon(1e-12));
  CHECK(t.service_similarity == doctest::Approx(0.7633688435776129).epsilon(1e-12));
  CHECK(t.user_distance_km == doctest::Approx(8126.591095902672).epsilon(1e-9));
  CHECK(t.service_distance_km == doctest::Approx(8140.263612645919).epsilon(1e-9));

  double lambda_max = 0.0;
  for (std::size_t i = 1; i < 10; ++i) lambda_max = std::max(lambda_max, cosine_users(ex.q, 0, i));
  CHECK(compute_thresholds(p, 0, 3, 1.0).user_similarity == doctest::Approx(lambda_max));

  // Median of the contextual distances to the target at k = 0.5.
  std::vector<double> d;
  for (std::size_t i = 1; i < 10; ++i) d.push_back(haversine_km(*ex.users[0], *ex.users[i]));
  std::sort(d.begin(), d.end());
  CHECK(t.user_distance_km == d[4]);

  CHECK_THROWS_AS(compute_thresholds(p, 0, 3, 1.5), InputError);
  CHECK_THROWS_AS(compute_thresholds(p, 10, 3, 0.5), InputError);
}

TEST_CASE("worked example: user-intensive filter") {
  Example ex;
  const FilterResult r = user_intensive_filter(ex.problem(), 0, 3, example_thresholds());
  CHECK(r.users == IndexSet{0, 1, 4, 5, 8, 9});
  CHECK(r.services == IndexSet{0, 1, 3, 4, 6, 7, 8, 9});
  CHECK(r.diagnostics.user_context_size == 4);
  CHECK(r.submatrix.rows() == 6);
  CHECK(r.submatrix(0, 0) == 5.98);
  CHECK(r.submatrix(*r.local_user(9), *r.local_service(9)) == 0.49);
  CHECK_FALSE(r.local_user(2).has_value());

  FilterThresholds fixed = example_thresholds();
  fixed.user_cs_count = 2.0;
  const FilterResult f = user_intensive_filter(ex.problem(), 0, 3, fixed);
  CHECK(f.users == IndexSet{0, 1});
  CHECK(f.services == IndexSet{3, 9});
  CHECK(f.diagnostics.user_context_sensitive);
}

TEST_CASE("worked example: service-intensive filter") {
  Example ex;
  const FilterResult r = service_intensive_filter(ex.problem(), 0, 3, example_thresholds());
  CHECK(r.services == IndexSet{2, 3, 4, 6, 8, 9});
  CHECK(r.users == IndexSet{0});
  CHECK(r.mode == FilterMode::service_intensive);

  // The default floor tops the lone user up with the closest rows by cosine.
  FilterProblem p = ex.problem();
  p.min_neighbors = 5;
  const FilterResult topped = service_intensive_filter(p, 0, 3, example_thresholds());
  CHECK(topped.users.size() == 5);
  CHECK(contains(topped.users, 0));
  CHECK(topped.diagnostics.user_fallback);
}

TEST_CASE("passing thresholds keep the whole log") {
  Example ex;
  FilterThresholds t;
  t.user_distance_km = t.service_distance_km = 1e5;
  t.user_similarity = t.service_similarity = 0.0;
  for (auto* f : {&user_intensive_filter, &service_intensive_filter}) {
    const FilterResult r = (*f)(ex.problem(), 0, 3, t);
    CHECK(r.users == all_of(10));
    CHECK(r.services == all_of(10));
    CHECK(r.submatrix == ex.q);
  }
}

TEST_CASE("context-free runs use the similarity set") {
  Example ex;
  FilterProblem p = ex.problem();
  p.use_context = false;
  FilterThresholds t = example_thresholds();
  t.user_cs_count = 2.0;
  const FilterResult r = user_intensive_filter(p, 0, 3, t);
  CHECK(r.users == IndexSet{0, 1, 4, 5, 8, 9});
  CHECK(r.diagnostics.user_context_size == 0);
}

TEST_CASE("cold target row") {
  QosMatrix q = test::random_matrix(12, 10, 0.7, 5);
  for (std::size_t j = 0; j < 10; ++j) q(4, j) = 0.0;
  const Contexts none(12);
  const Contexts snone(10);
  FilterProblem p;
  p.train = &q;
  p.user_contexts = &none;
  p.service_contexts = &snone;
  p.min_neighbors = 0;
  FilterThresholds t = compute_thresholds(p, 4, 2, 0.5);
  CHECK(cluster_by_similarity(all_of(12), 4, q, Axis::users, t.user_similarity) == IndexSet{4});
  p.min_neighbors = 5;
  const FilterResult r = user_intensive_filter(p, 4, 2, t);
  CHECK(r.users.size() == 5);
  CHECK(contains(r.users, 4));
  CHECK(r.diagnostics.user_fallback);
}

TEST_CASE("clustering fixed points on random instances") {
  test::FixedPointReport total;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto in = oracle::random_instance(seed);
    const auto r = test::check_fixed_points(in, 0.5);
    CAPTURE(seed);
    CHECK(r.context_failures == 0);
    CHECK(r.similarity_failures == 0);
    CHECK(r.oracle_mismatches == 0);
    total.add(r);
  }
  CHECK(total.members_checked > 100);
}

TEST_CASE("monotonicity in thresholds") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto in = oracle::random_instance(100 + seed);
    const IndexSet all = all_of(in.q.rows());
    IndexSet prev;
    for (double d : {0.0, 200.0, 800.0, 2000.0, 5000.0, 20000.0}) {
      const IndexSet c = cluster_by_context(all, in.target_user, in.users, d);
      CHECK(std::includes(c.begin(), c.end(), prev.begin(), prev.end()));
      prev = c;
    }
    prev = all;
    for (double s : {0.0, 0.3, 0.6, 0.8, 0.95, 1.01}) {
      const IndexSet c = cluster_by_similarity(all, in.target_user, in.q, Axis::users, s);
      CHECK(std::includes(prev.begin(), prev.end(), c.begin(), c.end()));
      prev = c;
    }
  }
}

TEST_CASE("filters keep their targets and re-clustering is idempotent") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto in = oracle::random_instance(300 + seed);
    FilterProblem p;
    p.train = &in.q;
    p.user_contexts = &in.users;
    p.service_contexts = &in.services;
    const auto t = compute_thresholds(p, in.target_user, in.target_service, 0.5);
    for (auto* f : {&user_intensive_filter, &service_intensive_filter}) {
      const FilterResult r = (*f)(p, in.target_user, in.target_service, t);
      CHECK(contains(r.users, in.target_user));
      CHECK(contains(r.services, in.target_service));
      CHECK(std::is_sorted(r.users.begin(), r.users.end()));
      CHECK(r.users.size() >= std::min<std::size_t>(5, in.q.rows()));
    }
    // A closure restricted to its own output is unchanged.
    const IndexSet all = all_of(in.q.rows());
    const IndexSet c = cluster_by_context(all, in.target_user, in.users, t.user_distance_km);
    CHECK(cluster_by_context(c, in.target_user, in.users, t.user_distance_km) == c);
    const IndexSet s =
        cluster_by_similarity(all, in.target_user, in.q, Axis::users, t.user_similarity);
    CHECK(cluster_by_similarity(s, in.target_user, in.q, Axis::users, t.user_similarity) == s);
    const IndexSet m = context_sensitive_merge(c, s, 0.5 * double(s.size()));
    CHECK(context_sensitive_merge(m, m, 0.5 * double(m.size())) == m);
  }
}

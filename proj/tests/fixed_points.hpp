#pragma once

// Fixed-point checks for the three clustering steps: every member of a
// produced cluster, used as the target with the same candidates and
// thresholds, must reproduce the cluster.

#include <cstddef>
#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qos/filtering.hpp"

namespace qos::test {

struct FixedPointReport {
  std::size_t members_checked = 0;
  std::size_t context_failures = 0;
  std::size_t similarity_failures = 0;
  std::size_t merge_failures = 0;
  std::size_t oracle_mismatches = 0;  // closures differing from the sweep oracle
  std::string first_failure;

  bool ok() const {
    return context_failures + similarity_failures + merge_failures + oracle_mismatches == 0;
  }
  void add(const FixedPointReport& o) {
    members_checked += o.members_checked;
    context_failures += o.context_failures;
    similarity_failures += o.similarity_failures;
    merge_failures += o.merge_failures;
    oracle_mismatches += o.oracle_mismatches;
    if (first_failure.empty()) first_failure = o.first_failure;
  }
};

inline FixedPointReport check_fixed_points(const oracle::ClusterInstance& in, double k) {
  FilterProblem p;
  p.train = &in.q;
  p.user_contexts = &in.users;
  p.service_contexts = &in.services;
  const FilterThresholds th = compute_thresholds(p, in.target_user, in.target_service, k);

  FixedPointReport r;
  auto note = [&r](const std::string& what) {
    if (r.first_failure.empty()) r.first_failure = what;
  };

  for (Axis axis : {Axis::users, Axis::services}) {
    const bool users = axis == Axis::users;
    const std::size_t n = users ? in.q.rows() : in.q.cols();
    const std::size_t t = users ? in.target_user : in.target_service;
    const Contexts& ctx = users ? in.users : in.services;
    const double dth = users ? th.user_distance_km : th.service_distance_km;
    const double sth = users ? th.user_similarity : th.service_similarity;
    IndexSet all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});

    auto context_of = [&](std::size_t target) { return cluster_by_context(all, target, ctx, dth); };
    auto similar_of = [&](std::size_t target) {
      return cluster_by_similarity(all, target, in.q, axis, sth);
    };
    auto merged_of = [&](std::size_t target) {
      const IndexSet s = similar_of(target);
      return context_sensitive_merge(context_of(target), s, k * double(s.size()));
    };

    const IndexSet c = context_of(t);
    const IndexSet s = similar_of(t);
    const IndexSet m = merged_of(t);

    const IndexSet c_ref =
        ctx[t] ? oracle::closure(n, t, [&](std::size_t a, std::size_t b) {
          return ctx[a] && ctx[b] && haversine_km(*ctx[a], *ctx[b]) <= dth;
        })
               : IndexSet{t};
    // Thresholds are attained similarity values, so the oracle brackets the
    // comparison by a rounding margin on both sides.
    auto similar_ref = [&](double margin) {
      return oracle::closure(n, t, [&](std::size_t a, std::size_t b) {
        const auto va = users ? oracle::row_of(in.q, a) : oracle::col_of(in.q, a);
        const auto vb = users ? oracle::row_of(in.q, b) : oracle::col_of(in.q, b);
        const bool empty = std::all_of(va.begin(), va.end(), [](double v) { return v == 0.0; }) ||
                           std::all_of(vb.begin(), vb.end(), [](double v) { return v == 0.0; });
        return !empty && oracle::cosine(va, vb) >= sth + margin;
      });
    };
    const IndexSet strict = similar_ref(1e-12);
    const IndexSet loose = similar_ref(-1e-12);
    const bool s_ok = std::includes(s.begin(), s.end(), strict.begin(), strict.end()) &&
                      std::includes(loose.begin(), loose.end(), s.begin(), s.end());
    if (c != c_ref) {
      ++r.oracle_mismatches;
      note("context closure differs from oracle");
    }
    if (!s_ok) {
      ++r.oracle_mismatches;
      note("similarity closure differs from oracle");
    }

    const std::string side = users ? "user" : "service";
    for (std::size_t e : c) {
      ++r.members_checked;
      if (context_of(e) != c) {
        ++r.context_failures;
        note(side + " context cluster not fixed at member " + std::to_string(e));
      }
    }
    for (std::size_t e : s) {
      ++r.members_checked;
      if (similar_of(e) != s) {
        ++r.similarity_failures;
        note(side + " similarity cluster not fixed at member " + std::to_string(e));
      }
    }
    for (std::size_t e : m) {
      ++r.members_checked;
      if (merged_of(e) != m) {
        ++r.merge_failures;
        note(side + " merged cluster not fixed at member " + std::to_string(e));
      }
    }
  }
  return r;
}

}  // namespace qos::test

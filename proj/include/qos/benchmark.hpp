#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qos/data.hpp"
#include "qos/hierarchy.hpp"
#include "qos/variants.hpp"

namespace qos {

// Mean absolute error over (predicted, actual) pairs. Throws InputError when
// empty.
double mae(std::span<const std::pair<double, double>> predictions);

// Relative MAE reduction of method 1 over method 2, in percent. Throws
// InputError when mae2 is 0.
double improvement(double mae1, double mae2);

struct ExperimentOptions {
  std::vector<double> densities{0.10, 0.20, 0.30};
  std::size_t episodes = 5;
  std::size_t test_k = 50;
  // Time slices evaluated on multi-slice datasets (0 = all).
  std::size_t max_slices = 0;
  std::uint64_t seed = 42;
};

struct ExperimentReport {
  std::string variant;
  DatasetKind dataset = DatasetKind::ws1;
  QosKind qos = QosKind::response_time;
  std::vector<double> densities;
  std::size_t episodes = 0;
  std::size_t test_k = 0;
  std::vector<std::vector<double>> episode_mae;             // [density][episode]
  std::vector<double> mean_mae;                             // [density]
  std::vector<std::vector<std::uint64_t>> split_hashes;     // [density][episode], slices folded
  double wall_seconds = 0.0;
};

// The split and test cells used for one (density, episode, slice). Every
// variant run under the same options sees exactly these.
struct EpisodePlan {
  Split split;
  std::vector<Cell> targets;
};
EpisodePlan plan_episode(const QosMatrix& matrix, double density, std::size_t episode,
                         std::size_t slice, const ExperimentOptions& options);

ExperimentReport run_experiment(const Dataset& dataset, const VariantSpec& variant,
                                const ExperimentOptions& options, const PipelineConfig& config);

// All named variants on identical splits and targets, in reporting order.
std::vector<ExperimentReport> run_ablation_suite(const Dataset& dataset,
                                                 const ExperimentOptions& options,
                                                 const PipelineConfig& config);

struct SweepPoint {
  std::string value;
  ExperimentReport report;
};

// Parameters a sweep may vary.
const std::vector<std::string>& sweep_parameters();

// Re-runs the experiment once per value of `parameter`, all else fixed.
std::vector<SweepPoint> run_sweep(const Dataset& dataset, const VariantSpec& variant,
                                  const ExperimentOptions& options, const PipelineConfig& config,
                                  const std::string& parameter,
                                  const std::vector<std::string>& values);

// Deterministic report tables (no timings).
std::string summary_csv(const std::vector<ExperimentReport>& reports);
std::string episodes_csv(const std::vector<ExperimentReport>& reports);
std::string sweep_csv(const std::string& parameter, const std::vector<SweepPoint>& points);

// Structured document with timings and the resolved configuration.
std::string report_json(const std::vector<ExperimentReport>& reports,
                        const std::string& resolved_config);

}  // namespace qos

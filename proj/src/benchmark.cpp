#include "qos/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "qos/config.hpp"
#include "qos/error.hpp"
#include "qos/parallel.hpp"
#include "qos/rng.hpp"

namespace qos {

double mae(std::span<const std::pair<double, double>> predictions) {
  if (predictions.empty()) throw InputError("MAE of an empty prediction set");
  double sum = 0.0;
  for (const auto& [pred, actual] : predictions) sum += std::abs(actual - pred);
  return sum / static_cast<double>(predictions.size());
}

double improvement(double mae1, double mae2) {
  if (mae2 == 0.0) throw InputError("improvement is undefined when the reference MAE is 0");
  return (mae2 - mae1) / mae2 * 100.0;
}

namespace {

std::uint64_t density_key(double density) {
  return static_cast<std::uint64_t>(std::llround(density * 1e6));
}

std::size_t slice_count(const Dataset& dataset, const ExperimentOptions& options) {
  const std::size_t n = dataset.matrices.size();
  return options.max_slices == 0 ? n : std::min(n, options.max_slices);
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

EpisodePlan plan_episode(const QosMatrix& matrix, double density, std::size_t episode,
                         std::size_t slice, const ExperimentOptions& options) {
  const std::uint64_t episode_seed = options.seed + episode;
  EpisodePlan plan;
  plan.split = make_split(matrix, density,
                          derive_seed(episode_seed, "split", slice, density_key(density)));
  const std::size_t k = std::min(options.test_k, plan.split.test_cells.size());
  if (k == 0) throw PipelineError("split leaves no test cells");
  plan.targets = sample_test_instances(
      plan.split, k, derive_seed(episode_seed, "targets", slice, density_key(density)));
  return plan;
}

ExperimentReport run_experiment(const Dataset& dataset, const VariantSpec& variant,
                                const ExperimentOptions& options, const PipelineConfig& config) {
  variant.validate();
  if (dataset.matrices.empty()) throw InputError("dataset holds no QoS matrix");
  if (options.episodes < 1) throw InputError("episodes must be >= 1");
  for (double d : options.densities)
    if (!(d > 0.0 && d < 1.0)) throw InputError("densities must lie in (0, 1)");

  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.variant = variant.name;
  report.dataset = dataset.kind;
  report.qos = dataset.qos;
  report.densities = options.densities;
  report.episodes = options.episodes;
  report.test_k = options.test_k;

  const std::size_t slices = slice_count(dataset, options);
  for (double density : options.densities) {
    std::vector<double> maes;
    std::vector<std::uint64_t> hashes;
    for (std::size_t episode = 0; episode < options.episodes; ++episode) {
      double slice_sum = 0.0;
      std::uint64_t hash = 0;
      for (std::size_t slice = 0; slice < slices; ++slice) {
        const EpisodePlan plan =
            plan_episode(dataset.matrices[slice], density, episode, slice, options);
        hash = splitmix64(hash ^ plan.split.hash());
        const PredictionProblem problem = PredictionProblem::make(dataset, slice, plan.split);
        PipelineConfig cfg = config;
        cfg.seed = derive_seed(options.seed + episode, "pipeline", slice, density_key(density));

        std::vector<std::pair<double, double>> pairs(plan.targets.size());
        parallel_for(plan.targets.size(), [&](std::size_t i) {
          const Cell t = plan.targets[i];
          const PredictionTrace trace = predict_one(problem, t, variant, cfg);
          pairs[i] = {trace.final_value, (*problem.full)(t.row, t.col)};
        });
        slice_sum += mae(pairs);
      }
      maes.push_back(slice_sum / static_cast<double>(slices));
      hashes.push_back(hash);
    }
    double total = 0.0;
    for (double m : maes) total += m;
    report.mean_mae.push_back(total / static_cast<double>(maes.size()));
    report.episode_mae.push_back(std::move(maes));
    report.split_hashes.push_back(std::move(hashes));
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<ExperimentReport> run_ablation_suite(const Dataset& dataset,
                                                 const ExperimentOptions& options,
                                                 const PipelineConfig& config) {
  std::vector<ExperimentReport> out;
  for (const auto& v : named_variants()) out.push_back(run_experiment(dataset, v, options, config));
  return out;
}

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> params{"k",           "t_d",         "nrl1.epochs",
                                               "nrl2.epochs", "nrl1.hidden", "lambda_size"};
  return params;
}

std::vector<SweepPoint> run_sweep(const Dataset& dataset, const VariantSpec& variant,
                                  const ExperimentOptions& options, const PipelineConfig& config,
                                  const std::string& parameter,
                                  const std::vector<std::string>& values) {
  const auto& allowed = sweep_parameters();
  if (std::find(allowed.begin(), allowed.end(), parameter) == allowed.end()) {
    std::string names;
    for (const auto& p : allowed) names += (names.empty() ? "" : ", ") + p;
    throw InputError("cannot sweep '" + parameter + "' (sweepable: " + names + ")");
  }
  if (values.empty()) throw InputError("sweep of '" + parameter + "' has no values");
  std::vector<SweepPoint> points;
  for (const auto& value : values) {
    RunConfig rc{config, options};
    apply_setting(rc, parameter, value);
    points.push_back({value, run_experiment(dataset, variant, rc.experiment, rc.pipeline)});
  }
  return points;
}

std::string summary_csv(const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  out << "variant,dataset,qos,density,episodes,test_k,mean_mae\n";
  for (const auto& r : reports) {
    for (std::size_t d = 0; d < r.densities.size(); ++d) {
      out << r.variant << ',' << to_string(r.dataset) << ',' << to_string(r.qos) << ','
          << fmt("%.4f", r.densities[d]) << ',' << r.episodes << ',' << r.test_k << ','
          << fmt("%.10g", r.mean_mae[d]) << '\n';
    }
  }
  return out.str();
}

std::string episodes_csv(const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  out << "variant,density,episode,mae\n";
  for (const auto& r : reports) {
    for (std::size_t d = 0; d < r.densities.size(); ++d) {
      for (std::size_t e = 0; e < r.episode_mae[d].size(); ++e) {
        out << r.variant << ',' << fmt("%.4f", r.densities[d]) << ',' << e << ','
            << fmt("%.10g", r.episode_mae[d][e]) << '\n';
      }
    }
  }
  return out.str();
}

std::string sweep_csv(const std::string& parameter, const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out << "parameter,value,variant,density,mean_mae\n";
  for (const auto& p : points) {
    for (std::size_t d = 0; d < p.report.densities.size(); ++d) {
      out << parameter << ",\"" << p.value << "\"," << p.report.variant << ','
          << fmt("%.4f", p.report.densities[d]) << ',' << fmt("%.10g", p.report.mean_mae[d])
          << '\n';
    }
  }
  return out.str();
}

std::string report_json(const std::vector<ExperimentReport>& reports,
                        const std::string& resolved_config) {
  nlohmann::json doc;
  nlohmann::json cfg = nlohmann::json::object();
  std::istringstream lines(resolved_config);
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) cfg[line.substr(0, eq)] = line.substr(eq + 3);
  }
  doc["config"] = cfg;
  doc["reports"] = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json j;
    j["variant"] = r.variant;
    j["dataset"] = std::string(to_string(r.dataset));
    j["qos"] = std::string(to_string(r.qos));
    j["densities"] = r.densities;
    j["episodes"] = r.episodes;
    j["test_k"] = r.test_k;
    j["episode_mae"] = r.episode_mae;
    j["mean_mae"] = r.mean_mae;
    j["split_hashes"] = r.split_hashes;
    j["wall_seconds"] = r.wall_seconds;
    doc["reports"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

}  // namespace qos

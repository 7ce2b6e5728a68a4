#include "qos/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "qos/benchmark.hpp"
#include "qos/config.hpp"
#include "qos/error.hpp"
#include "qos/parallel.hpp"
#include "qos/rng.hpp"
#include "qos/synth.hpp"

namespace qos {

namespace fs = std::filesystem;

namespace {

struct DataArgs {
  std::string root;
  std::string dataset = "ws1";
  std::string qos = "rt";
  std::string subset;  // "150x1000"
};

struct RunArgs {
  std::string config_file;
  std::vector<std::string> settings;  // key=value overrides
  std::string densities;
  std::size_t episodes = 0;
  std::size_t test_k = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t threads = 0;
  std::string out_dir = ".";
};

void add_data_options(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--root", d.root, "Dataset directory")->required();
  cmd->add_option("--dataset", d.dataset, "ws1 or ws2")->capture_default_str();
  cmd->add_option("--qos", d.qos, "rt or tp")->capture_default_str();
  cmd->add_option("--subset", d.subset, "Random USERSxSERVICES sub-block, e.g. 150x1000");
}

void add_run_options(CLI::App* cmd, RunArgs& r) {
  cmd->add_option("--config", r.config_file, "key = value configuration file");
  cmd->add_option("--set", r.settings, "Override one config key (key=value), repeatable");
  cmd->add_option("--density", r.densities, "Training density or comma-separated list");
  cmd->add_option("--episodes", r.episodes, "Episodes per density");
  cmd->add_option("--test-k", r.test_k, "Test targets per episode");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&r](std::uint64_t s) { r.seed = s; r.seed_set = true; }, "Base seed");
  cmd->add_option("--threads", r.threads, "Worker thread cap (0 = all cores)");
  cmd->add_option("--out", r.out_dir, "Output directory")->capture_default_str();
}

std::pair<std::size_t, std::size_t> parse_subset(const std::string& text) {
  const auto x = text.find('x');
  std::size_t a = 0, b = 0;
  if (x == std::string::npos || std::sscanf(text.c_str(), "%zux%zu", &a, &b) != 2 || a == 0 ||
      b == 0) {
    throw InputError("bad --subset '" + text + "' (expected USERSxSERVICES, e.g. 150x1000)");
  }
  return {a, b};
}

Dataset load(const DataArgs& d, std::uint64_t seed) {
  Dataset ds = load_dataset(d.root, parse_dataset_kind(d.dataset), parse_qos_kind(d.qos));
  if (!d.subset.empty()) {
    const auto [nu, ns] = parse_subset(d.subset);
    ds = ds.sub_block(nu, ns, derive_seed(seed, "subset"));
  }
  return ds;
}

RunConfig resolve(const RunArgs& r) {
  RunConfig c = r.config_file.empty() ? RunConfig{} : load_config(r.config_file);
  for (const auto& kv : r.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
    apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!r.densities.empty()) apply_setting(c, "densities", r.densities);
  if (r.episodes) apply_setting(c, "episodes", std::to_string(r.episodes));
  if (r.test_k) apply_setting(c, "test_k", std::to_string(r.test_k));
  if (r.seed_set) apply_setting(c, "seed", std::to_string(r.seed));
  set_thread_cap(r.threads);
  return c;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
}

void write_reports(const fs::path& dir, const std::vector<ExperimentReport>& reports,
                   const RunConfig& config) {
  fs::create_directories(dir);
  const std::string resolved = format_config(config);
  write_file(dir / "summary.csv", summary_csv(reports));
  write_file(dir / "episodes.csv", episodes_csv(reports));
  write_file(dir / "config.txt", resolved);
  write_file(dir / "report.json", report_json(reports, resolved));
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

int cmd_inspect(const DataArgs& d, std::ostream& out) {
  const Dataset ds = load(d, 42);
  std::size_t observed = 0;
  std::size_t total = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& m : ds.matrices) {
    observed += m.observed_count();
    total += m.rows() * m.cols();
    for (double v : m.data()) {
      if (v <= 0.0) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  std::size_t user_ctx = 0, service_ctx = 0;
  for (const auto& u : ds.users) user_ctx += u.context.has_value();
  for (const auto& s : ds.services) service_ctx += s.context.has_value();

  out << ds.n_users() << " users, " << ds.n_services() << " services";
  if (ds.matrices.size() > 1) out << ", " << ds.matrices.size() << " time slices";
  out << "\n";
  out << "qos: " << to_string(ds.qos) << "\n";
  out << "observed: " << observed << " of " << total << " ("
      << fmt("%.2f", total ? 100.0 * static_cast<double>(observed) / static_cast<double>(total) : 0.0)
      << "%)\n";
  if (observed) out << "range: " << fmt("%.4g", lo) << " .. " << fmt("%.4g", hi) << "\n";
  out << "context: users " << user_ctx << "/" << ds.n_users() << ", services " << service_ctx
      << "/" << ds.n_services() << "\n";
  out << "context-free: " << (ds.context_free() ? "yes" : "no") << "\n";
  return 0;
}

int cmd_predict(const DataArgs& d, const RunArgs& r, std::size_t user, std::size_t service,
                const std::string& variant_name, std::size_t slice, bool trace_flag,
                std::ostream& out) {
  const RunConfig c = resolve(r);
  const Dataset ds = load(d, c.experiment.seed);
  if (slice >= ds.matrices.size()) throw InputError("--slice outside the dataset");
  if (c.experiment.densities.size() != 1) throw InputError("predict takes a single --density");
  const double density = c.experiment.densities[0];
  const QosMatrix& m = ds.matrices[slice];
  if (user >= m.rows() || service >= m.cols()) {
    throw InputError("target (" + std::to_string(user) + ", " + std::to_string(service) +
                     ") is outside the " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + " matrix");
  }
  const EpisodePlan plan = plan_episode(m, density, 0, slice, c.experiment);
  if (plan.split.in_train(user, service)) {
    throw InputError("target (" + std::to_string(user) + ", " + std::to_string(service) +
                     ") is in the training split at this density and seed; its value is known");
  }
  const PredictionProblem problem = PredictionProblem::make(ds, slice, plan.split);
  PipelineConfig cfg = c.pipeline;
  const PredictionTrace trace =
      predict_one(problem, {static_cast<std::uint32_t>(user), static_cast<std::uint32_t>(service)},
                  find_variant(variant_name), cfg);
  out << "prediction " << fmt("%.10g", trace.final_value) << "\n";
  if (m.observed(user, service)) out << "actual " << fmt("%.10g", trace.actual) << "\n";
  out << "branch " << to_string(trace.branch) << "\n";
  if (trace_flag) {
    fs::create_directories(r.out_dir);
    const fs::path file = fs::path(r.out_dir) / "trace.jsonl";
    std::ofstream t(file, std::ios::app);
    if (!t) throw InputError("cannot write " + file.string());
    t << trace.to_json_line() << "\n";
    out << "trace " << file.string() << "\n";
  }
  return 0;
}

int cmd_experiment(const DataArgs& d, const RunArgs& r, const std::string& variant_name,
                   std::ostream& out) {
  const RunConfig c = resolve(r);
  const Dataset ds = load(d, c.experiment.seed);
  const auto report = run_experiment(ds, find_variant(variant_name), c.experiment, c.pipeline);
  write_reports(r.out_dir, {report}, c);
  out << summary_csv({report});
  return 0;
}

int cmd_ablation(const DataArgs& d, RunArgs r, std::ostream& out) {
  if (r.densities.empty()) r.densities = "0.3";
  const RunConfig c = resolve(r);
  const Dataset ds = load(d, c.experiment.seed);
  const auto reports = run_ablation_suite(ds, c.experiment, c.pipeline);
  write_reports(r.out_dir, reports, c);
  out << summary_csv(reports);
  return 0;
}

int cmd_sweep(const DataArgs& d, RunArgs r, const std::string& variant_name,
              const std::string& sweep, std::ostream& out) {
  const auto eq = sweep.find('=');
  if (eq == std::string::npos) throw InputError("--sweep expects param=v1,v2,...");
  const std::string param = sweep.substr(0, eq);
  std::vector<std::string> values;
  // Hidden-layer lists use ',' inside a value, so they are separated by ';'.
  const char sep = sweep.find(';', eq) != std::string::npos ? ';' : ',';
  std::istringstream in(sweep.substr(eq + 1));
  std::string v;
  while (std::getline(in, v, sep))
    if (!v.empty()) values.push_back(v);
  if (r.densities.empty()) r.densities = "0.3";
  const RunConfig c = resolve(r);
  const Dataset ds = load(d, c.experiment.seed);
  const auto points = run_sweep(ds, find_variant(variant_name), c.experiment, c.pipeline, param,
                                values);
  std::vector<ExperimentReport> reports;
  for (const auto& p : points) reports.push_back(p.report);
  fs::create_directories(r.out_dir);
  const std::string table = sweep_csv(param, points);
  write_file(fs::path(r.out_dir) / "sweep.csv", table);
  write_file(fs::path(r.out_dir) / "config.txt", format_config(c));
  write_file(fs::path(r.out_dir) / "report.json", report_json(reports, format_config(c)));
  out << table;
  return 0;
}

int cmd_split(const DataArgs& d, const RunArgs& r, std::size_t episode, std::size_t slice,
              std::ostream& out) {
  const RunConfig c = resolve(r);
  const Dataset ds = load(d, c.experiment.seed);
  if (slice >= ds.matrices.size()) throw InputError("--slice outside the dataset");
  if (c.experiment.densities.size() != 1) throw InputError("split takes a single --density");
  const EpisodePlan plan =
      plan_episode(ds.matrices[slice], c.experiment.densities[0], episode, slice, c.experiment);
  fs::create_directories(r.out_dir);
  const fs::path file = fs::path(r.out_dir) / "split.txt";
  std::ofstream s(file);
  if (!s) throw InputError("cannot write " + file.string());
  write_split(s, plan.split);
  out << "split " << file.string() << " train " << plan.split.train_count() << " validation "
      << plan.split.validation_cells.size() << " test " << plan.split.test_cells.size() << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"QoS prediction with hybrid filtering and hierarchical regression", "qospred"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "qospred 1.0");

  DataArgs data;
  RunArgs run;
  std::string variant = "CAHPHF";
  std::size_t user = 0, service = 0, slice = 0, episode = 0;
  bool trace = false;
  std::string sweep;
  SynthSpec synth;
  std::string synth_dataset = "ws1";

  auto* inspect = app.add_subcommand("inspect", "Summarise a dataset");
  add_data_options(inspect, data);

  auto* predict = app.add_subcommand("predict", "Predict one held-out cell");
  add_data_options(predict, data);
  add_run_options(predict, run);
  predict->add_option("--user", user, "Target user index")->required();
  predict->add_option("--service", service, "Target service index")->required();
  predict->add_option("--variant", variant, "Pipeline variant")->capture_default_str();
  predict->add_option("--slice", slice, "Time slice (ws2)");
  predict->add_flag("--trace", trace, "Append a JSON trace line to <out>/trace.jsonl");

  auto* experiment = app.add_subcommand("experiment", "Episodes over densities for one variant");
  add_data_options(experiment, data);
  add_run_options(experiment, run);
  experiment->add_option("--variant", variant, "Pipeline variant")->capture_default_str();

  auto* ablation = app.add_subcommand("ablation", "All variants on paired splits");
  add_data_options(ablation, data);
  add_run_options(ablation, run);

  auto* sweep_cmd = app.add_subcommand("sweep", "Vary one parameter over a list");
  add_data_options(sweep_cmd, data);
  add_run_options(sweep_cmd, run);
  sweep_cmd->add_option("--variant", variant, "Pipeline variant")->capture_default_str();
  sweep_cmd->add_option("--sweep", sweep, "param=v1,v2,... (use ';' between layer lists)")
      ->required();

  auto* split = app.add_subcommand("split", "Export the train/validation/test split");
  add_data_options(split, data);
  add_run_options(split, run);
  split->add_option("--episode", episode, "Episode index");
  split->add_option("--slice", slice, "Time slice (ws2)");

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic WS-DREAM style dataset");
  synth_cmd->add_option("--out", run.out_dir, "Output directory")->required();
  synth_cmd->add_option("--dataset", synth_dataset, "ws1 or ws2")->capture_default_str();
  synth_cmd->add_option("--users", synth.users)->capture_default_str();
  synth_cmd->add_option("--services", synth.services)->capture_default_str();
  synth_cmd->add_option("--slices", synth.slices)->capture_default_str();
  synth_cmd->add_option("--observed", synth.observed_fraction)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();

  auto* defaults = app.add_subcommand("config", "Print the default configuration");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << "qospred 1.0\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*inspect) return cmd_inspect(data, out);
    if (*predict) {
      if (run.densities.empty()) run.densities = "0.1";
      return cmd_predict(data, run, user, service, variant, slice, trace, out);
    }
    if (*experiment) return cmd_experiment(data, run, variant, out);
    if (*ablation) return cmd_ablation(data, run, out);
    if (*sweep_cmd) return cmd_sweep(data, run, variant, sweep, out);
    if (*split) {
      if (run.densities.empty()) run.densities = "0.1";
      return cmd_split(data, run, episode, slice, out);
    }
    if (*synth_cmd) {
      synth.kind = parse_dataset_kind(synth_dataset);
      write_synthetic(run.out_dir, synth);
      out << "wrote " << synth_dataset << " dataset to " << run.out_dir << "\n";
      return 0;
    }
    if (*defaults) {
      out << format_config(RunConfig{});
      return 0;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const PipelineError& e) {
    err << "pipeline error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "pipeline error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace qos

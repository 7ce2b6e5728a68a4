#include "qos/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <json.hpp>

#include "qos/error.hpp"
#include "qos/parallel.hpp"
#include "qos/rng.hpp"

namespace qos {

std::string_view to_string(ControllerMode m) { return m == ControllerMode::fast ? "fast" : "exact"; }

ControllerMode parse_controller_mode(std::string_view text) {
  if (text == "fast") return ControllerMode::fast;
  if (text == "exact") return ControllerMode::exact;
  throw InputError("unknown controller mode '" + std::string(text) + "' (expected fast or exact)");
}

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::nrl2: return "NRL-2";
    case Branch::mae_ag: return "MAE-Ag";
    case Branch::none: return "none";
  }
  return "?";
}

MlpConfig default_nrl1_config() {
  MlpConfig c;
  c.hidden_sizes = {256, 128};
  c.max_epochs = 50;
  return c;
}

MlpConfig default_nrl2_config() {
  MlpConfig c;
  c.hidden_sizes = {2};
  c.max_epochs = 1000;
  return c;
}

const QosMatrix& HierarchyInputs::matrix(std::size_t block) const {
  switch (block) {
    case 0: return filled->cf_ui;
    case 1: return filled->mf_ui;
    case 2: return filled->cf_si;
    default: return filled->mf_si;
  }
}

namespace {

struct LocalCell {
  std::size_t row;
  std::size_t col;
};

LocalCell to_local(const FilterResult& f, Cell c) {
  const auto r = f.local_user(c.row);
  const auto s = f.local_service(c.col);
  if (!r || !s) throw PipelineError("cell outside its filtered submatrix");
  return {*r, *s};
}

std::vector<Cell> sample_cells(std::vector<Cell> pool, std::size_t n, std::uint64_t seed) {
  n = std::min(n, pool.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  std::sort(pool.begin(), pool.end());
  return pool;
}

double mean_or(std::span<const double> v, double fallback) {
  if (v.empty()) return fallback;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

const QosMatrix& cf_of_side(const HierarchyInputs& in, std::size_t block) {
  return block < 2 ? in.filled->cf_ui : in.filled->cf_si;
}

}  // namespace

ColumnFit fit_column(const QosMatrix& m, std::size_t label_col,
                     std::span<const std::size_t> held_rows,
                     std::span<const std::size_t> predict_rows, const MlpConfig& config) {
  if (label_col >= m.cols()) throw PipelineError("label column outside the matrix");
  std::vector<char> excluded(m.rows(), 0);
  for (auto r : held_rows) excluded.at(r) = 1;
  for (auto r : predict_rows) excluded.at(r) = 1;

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < m.rows(); ++r)
    if (!excluded[r]) rows.push_back(r);
  const std::size_t features = m.cols() - 1;

  std::vector<double> labels;
  labels.reserve(rows.size());
  for (auto r : rows) labels.push_back(m(r, label_col));

  ColumnFit fit;
  if (rows.size() < 2 || features == 0) {
    fit.degenerate = true;
    const double fallback = mean_or(labels, m.observed_mean());
    fit.values.assign(predict_rows.size(), fallback);
    return fit;
  }

  auto copy_features = [&](std::size_t r, std::span<double> out) {
    const auto src = m.row(r);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(label_col), out.begin());
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(label_col) + 1, src.end(),
              out.begin() + static_cast<std::ptrdiff_t>(label_col));
  };
  Grid inputs(rows.size(), features);
  for (std::size_t i = 0; i < rows.size(); ++i) copy_features(rows[i], inputs.row(i));

  const Mlp model = train(config, inputs, labels);
  std::vector<double> x(features);
  for (auto r : predict_rows) {
    copy_features(r, x);
    fit.values.push_back(model.predict(x));
  }
  return fit;
}

Nrl1Output run_nrl1(const HierarchyInputs& in, const MlpConfig& config, std::uint64_t seed) {
  MlpConfig cfg = config;
  cfg.seed = derive_seed(seed, "nrl1");
  Nrl1Output out;
  parallel_for(kBlocks, [&](std::size_t b) {
    const LocalCell t = to_local(in.side(b), in.target);
    const std::size_t row = t.row;
    const ColumnFit fit = fit_column(in.matrix(b), t.col, {}, std::span(&row, 1), cfg);
    out.degenerate[b] = fit.degenerate;
    out.phi[b] = fit.degenerate ? cf_of_side(in, b)(t.row, t.col) : std::max(0.0, fit.values[0]);
  });
  return out;
}

std::vector<Cell> controller_intersection(const HierarchyInputs& in) {
  std::vector<std::size_t> users;
  std::vector<std::size_t> services;
  std::set_intersection(in.ui->users.begin(), in.ui->users.end(), in.si->users.begin(),
                        in.si->users.end(), std::back_inserter(users));
  std::set_intersection(in.ui->services.begin(), in.ui->services.end(), in.si->services.begin(),
                        in.si->services.end(), std::back_inserter(services));
  std::vector<Cell> cells;
  for (auto u : users) {
    if (u == in.target.row) continue;
    for (auto s : services) {
      if (in.train->observed(u, s)) {
        cells.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(s)});
      }
    }
  }
  return cells;
}

BlockPredictor nr_block_predictor(const HierarchyInputs& in, const MlpConfig& config,
                                  ControllerMode mode, std::uint64_t seed) {
  return [in, config, mode, seed](std::size_t block, std::span<const Cell> cells) {
    const FilterResult& side = in.side(block);
    const QosMatrix& m = in.matrix(block);
    const std::size_t target_row = to_local(side, in.target).row;
    std::vector<double> out(cells.size());

    // Jobs: (column, positions in `cells`).
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> jobs;
    if (mode == ControllerMode::fast) {
      std::map<std::size_t, std::vector<std::size_t>> by_col;
      for (std::size_t i = 0; i < cells.size(); ++i) by_col[to_local(side, cells[i]).col].push_back(i);
      jobs.assign(by_col.begin(), by_col.end());
    } else {
      for (std::size_t i = 0; i < cells.size(); ++i)
        jobs.push_back({to_local(side, cells[i]).col, {i}});
    }

    parallel_for(jobs.size(), [&](std::size_t j) {
      const auto& [col, positions] = jobs[j];
      std::vector<std::size_t> rows;
      for (auto p : positions) rows.push_back(to_local(side, cells[p]).row);
      MlpConfig cfg = config;
      const std::uint64_t key = mode == ControllerMode::fast ? col : rows[0] * m.cols() + col;
      cfg.seed = derive_seed(seed, "controller-nr", block, key);
      const ColumnFit fit = fit_column(m, col, std::span(&target_row, 1), rows, cfg);
      for (std::size_t i = 0; i < positions.size(); ++i)
        out[positions[i]] = std::max(0.0, fit.values[i]);
    });
    return out;
  };
}

BlockPredictor fill_block_predictor(const HierarchyInputs& in, const PipelineConfig& config,
                                    std::uint64_t seed) {
  return [in, config, seed](std::size_t block, std::span<const Cell> cells) {
    const FilterResult& side = in.side(block);
    QosMatrix masked = side.submatrix;
    std::vector<LocalCell> local;
    for (const Cell& c : cells) {
      local.push_back(to_local(side, c));
      masked(local.back().row, local.back().col) = 0.0;
    }
    QosMatrix refilled;
    if (block % 2 == 0) {
      refilled = cf_fill(masked, side.mode, nullptr, config.deviation);
    } else {
      MfConfig mf = config.mf;
      mf.seed = derive_seed(seed, "mf-refill", block);
      refilled = mf_fill(masked, mf);
    }
    std::vector<double> out;
    for (const auto& lc : local) out.push_back(refilled(lc.row, lc.col));
    return out;
  };
}

ControllerDataset controller(const HierarchyInputs& in, const PipelineConfig& config,
                             AggregatorTag aggregator, const BlockPredictor& predict,
                             std::uint64_t seed) {
  if (config.t_d < 1) throw InputError("t_d must be >= 1");
  ControllerDataset ds;
  const std::vector<Cell> common = controller_intersection(in);
  ds.intersection_size = common.size();

  switch (aggregator) {
    case AggregatorTag::mae_ag_only: ds.branch = Branch::mae_ag; break;
    case AggregatorTag::nrl2_only:
      ds.branch = common.empty() ? Branch::mae_ag : Branch::nrl2;
      if (common.empty()) ds.notes.push_back("empty intersection, MAE-Ag used");
      break;
    default: ds.branch = choose_branch(common.size(), config.t_d); break;
  }

  if (ds.branch == Branch::nrl2) {
    ds.lambda_cells = sample_cells(common, config.lambda_size, derive_seed(seed, "lambda"));
    if (ds.lambda_cells.size() < config.lambda_size) {
      ds.notes.push_back("intersection holds " + std::to_string(common.size()) +
                         " cells, fewer than lambda_size");
    }
    std::array<std::vector<double>, kBlocks> values;
    for (std::size_t b = 0; b < kBlocks; ++b) values[b] = predict(b, ds.lambda_cells);
    for (std::size_t i = 0; i < ds.lambda_cells.size(); ++i) {
      const Cell c = ds.lambda_cells[i];
      ds.lambda.push_back({values[0][i], values[1][i], values[2][i], values[3][i],
                           (*in.train)(c.row, c.col)});
    }
    return ds;
  }

  for (std::size_t b = 0; b < kBlocks; ++b) {
    const FilterResult& side = in.side(b);
    std::vector<Cell> pool;
    for (std::size_t r = 0; r < side.users.size(); ++r) {
      if (side.users[r] == in.target.row) continue;
      for (std::size_t s = 0; s < side.services.size(); ++s) {
        if (side.submatrix.observed(r, s)) {
          pool.push_back({static_cast<std::uint32_t>(side.users[r]),
                          static_cast<std::uint32_t>(side.services[s])});
        }
      }
    }
    ds.block_cells[b] = sample_cells(std::move(pool), config.lambda_size,
                                     derive_seed(seed, "block-sample", b));
    if (ds.block_cells[b].size() < config.lambda_size) {
      ds.notes.push_back("block " + std::to_string(b + 1) + " sampled " +
                         std::to_string(ds.block_cells[b].size()) + " cells");
    }
    if (ds.block_cells[b].empty()) continue;
    const auto values = predict(b, ds.block_cells[b]);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const Cell c = ds.block_cells[b][i];
      ds.blocks[b].emplace_back(values[i], (*in.train)(c.row, c.col));
    }
  }
  return ds;
}

double run_nrl2(std::span<const std::array<double, kBlocks + 1>> lambda, const Nrl1Output& nrl1,
                const MlpConfig& config) {
  if (lambda.empty()) throw PipelineError("second-level training set is empty");
  for (double p : nrl1.phi)
    if (!std::isfinite(p)) throw PipelineError("non-finite first-level prediction");
  Grid inputs(lambda.size(), kBlocks);
  std::vector<double> targets(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    for (std::size_t b = 0; b < kBlocks; ++b) inputs(i, b) = lambda[i][b];
    targets[i] = lambda[i][kBlocks];
  }
  const Mlp model = train(config, inputs, targets);
  return std::max(0.0, model.predict(nrl1.phi));
}

MaeAggregate mae_aggregate(const std::array<std::vector<std::pair<double, double>>, kBlocks>& blocks,
                           const Nrl1Output& nrl1) {
  MaeAggregate out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < kBlocks; ++b) {
    if (blocks[b].empty()) {
      out.mae[b] = std::numeric_limits<double>::infinity();
      continue;
    }
    double sum = 0.0;
    for (const auto& [pred, actual] : blocks[b]) sum += std::abs(actual - pred);
    out.mae[b] = sum / static_cast<double>(blocks[b].size());
    if (out.mae[b] < best) {
      best = out.mae[b];
      out.block = b;
    }
  }
  out.value = nrl1.phi[out.block];
  return out;
}

PredictionProblem PredictionProblem::make(const Dataset& dataset, std::size_t matrix_index,
                                          const Split& split) {
  if (matrix_index >= dataset.matrices.size()) throw InputError("matrix index out of range");
  const QosMatrix& full = dataset.matrices[matrix_index];
  if (split.rows != full.rows() || split.cols != full.cols()) {
    throw InputError("split shape does not match the matrix");
  }
  PredictionProblem p;
  p.full = &full;
  p.train = split.masked(full);
  p.user_contexts = dataset.user_contexts();
  p.service_contexts = dataset.service_contexts();
  p.context_free = dataset.context_free();
  return p;
}

std::string PredictionTrace::to_json_line() const {
  auto finite_or_null = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json j;
  j["target"] = {target.row, target.col};
  j["variant"] = variant;
  j["actual"] = actual;
  j["phi"] = nrl1.phi;
  j["phi_degenerate"] = nrl1.degenerate;
  j["branch"] = std::string(to_string(branch));
  j["intersection"] = intersection_size;
  j["lambda"] = lambda_count;
  if (branch == Branch::mae_ag) {
    nlohmann::json maes = nlohmann::json::array();
    for (double m : block_mae) maes.push_back(finite_or_null(m));
    j["block_mae"] = maes;
    j["chosen_block"] = chosen_block + 1;
  }
  j["final"] = final_value;
  auto diag = [](const FilterDiagnostics& d) {
    return nlohmann::json{{"users", {d.user_context_size, d.user_similarity_size}},
                          {"services", {d.service_context_size, d.service_similarity_size}},
                          {"context_sensitive", {d.user_context_sensitive, d.service_context_sensitive}},
                          {"fallback", {d.user_fallback, d.service_fallback}}};
  };
  j["filter_ui"] = diag(ui_diagnostics);
  j["filter_si"] = diag(si_diagnostics);
  j["cf_mean_fallbacks"] = cf_mean_fallbacks;
  j["notes"] = notes;
  return j.dump();
}

namespace {

void predict_single(const FilterProblem& fp, const FilterThresholds& th,
                    Cell t, const VariantSpec& v, const PipelineConfig& config, std::uint64_t base,
                    PredictionTrace& trace) {
  const bool ui = v.filtering == FilteringTag::user_intensive;
  const FilterResult f = ui ? user_intensive_filter(fp, t.row, t.col, th)
                            : service_intensive_filter(fp, t.row, t.col, th);
  (ui ? trace.ui_diagnostics : trace.si_diagnostics) = f.diagnostics;
  const LocalCell lt = to_local(f, t);

  CfDiagnostics cfd;
  QosMatrix m;
  switch (v.fill) {
    case FillTag::cf: m = cf_fill(f, &cfd, config.deviation); break;
    case FillTag::mf: {
      MfConfig mf = config.mf;
      mf.seed = derive_seed(base, "mf", ui ? 0 : 1);
      m = mf_fill(f, mf);
      break;
    }
    default: m = f.submatrix; break;
  }

  double value = 0.0;
  if (v.predictor == PredictorTag::nr) {
    MlpConfig cfg = config.nrl1;
    cfg.seed = derive_seed(base, "nrl1");
    const std::size_t row = lt.row;
    const ColumnFit fit = fit_column(m, lt.col, {}, std::span(&row, 1), cfg);
    if (fit.degenerate) {
      trace.nrl1.degenerate[0] = true;
      trace.notes.push_back("degenerate regression, cf value used");
      value = (v.fill == FillTag::cf ? m : cf_fill(f, &cfd, config.deviation))(lt.row, lt.col);
    } else {
      value = fit.values[0];
    }
  } else {
    value = m(lt.row, lt.col);
  }
  trace.cf_mean_fallbacks = cfd.mean_fallbacks;
  trace.nrl1.phi[0] = value;
  trace.final_value = std::max(0.0, value);
}

}  // namespace

PredictionTrace predict_one(const PredictionProblem& problem, Cell target,
                            const VariantSpec& variant, const PipelineConfig& config) {
  variant.validate();
  const QosMatrix& train = problem.train;
  if (target.row >= train.rows() || target.col >= train.cols()) {
    throw InputError("target (" + std::to_string(target.row) + ", " + std::to_string(target.col) +
                     ") is outside the " + std::to_string(train.rows()) + "x" +
                     std::to_string(train.cols()) + " matrix");
  }
  if (train.observed(target.row, target.col)) {
    throw InputError("target (" + std::to_string(target.row) + ", " + std::to_string(target.col) +
                     ") is part of the training data; pick a held-out cell");
  }

  PredictionTrace trace;
  trace.target = target;
  trace.variant = variant.name;
  if (problem.full) trace.actual = (*problem.full)(target.row, target.col);

  const std::uint64_t base = derive_seed(config.seed, "target", target.row, target.col);
  FilterProblem fp;
  fp.train = &train;
  fp.user_contexts = &problem.user_contexts;
  fp.service_contexts = &problem.service_contexts;
  fp.use_context = variant.context_filter && !problem.context_free;
  fp.min_neighbors = config.min_neighbors;
  const FilterThresholds th = compute_thresholds(fp, target.row, target.col, config.k);

  if (variant.predictor != PredictorTag::hierarchical) {
    predict_single(fp, th, target, variant, config, base, trace);
    return trace;
  }

  const FilterResult ui = user_intensive_filter(fp, target.row, target.col, th);
  const FilterResult si = service_intensive_filter(fp, target.row, target.col, th);
  trace.ui_diagnostics = ui.diagnostics;
  trace.si_diagnostics = si.diagnostics;

  FilledMatrices filled;
  std::array<CfDiagnostics, 2> cfd;
  parallel_for(kBlocks, [&](std::size_t b) {
    const FilterResult& side = b < 2 ? ui : si;
    if (b % 2 == 0) {
      (b == 0 ? filled.cf_ui : filled.cf_si) = cf_fill(side, &cfd[b / 2], config.deviation);
    } else {
      MfConfig mf = config.mf;
      mf.seed = derive_seed(base, "mf", b / 2);
      (b == 1 ? filled.mf_ui : filled.mf_si) = mf_fill(side, mf);
    }
  });
  trace.cf_mean_fallbacks = cfd[0].mean_fallbacks + cfd[1].mean_fallbacks;

  HierarchyInputs in{&train, &ui, &si, &filled, target};
  if (variant.fill_values_as_level1) {
    for (std::size_t b = 0; b < kBlocks; ++b) {
      const LocalCell lt = to_local(in.side(b), target);
      trace.nrl1.phi[b] = in.matrix(b)(lt.row, lt.col);
    }
  } else {
    trace.nrl1 = run_nrl1(in, config.nrl1, base);
    for (std::size_t b = 0; b < kBlocks; ++b) {
      if (trace.nrl1.degenerate[b]) {
        trace.notes.push_back("block " + std::to_string(b + 1) + " degenerate, cf value used");
      }
    }
  }

  const BlockPredictor predictor =
      variant.fill_values_as_level1
          ? fill_block_predictor(in, config, base)
          : nr_block_predictor(in, config.nrl1, config.controller_mode, base);
  const ControllerDataset ds = controller(in, config, variant.aggregator, predictor, base);
  trace.branch = ds.branch;
  trace.intersection_size = ds.intersection_size;
  trace.notes.insert(trace.notes.end(), ds.notes.begin(), ds.notes.end());

  if (ds.branch == Branch::nrl2) {
    trace.lambda_count = ds.lambda.size();
    MlpConfig cfg = config.nrl2;
    cfg.seed = derive_seed(base, "nrl2");
    trace.final_value = run_nrl2(ds.lambda, trace.nrl1, cfg);
  } else {
    for (const auto& blk : ds.blocks) trace.lambda_count += blk.size();
    const MaeAggregate agg = mae_aggregate(ds.blocks, trace.nrl1);
    trace.block_mae = agg.mae;
    trace.chosen_block = agg.block;
    trace.final_value = agg.value;
  }
  return trace;
}

}  // namespace qos

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qos/data.hpp"
#include "qos/fill.hpp"
#include "qos/filtering.hpp"
#include "qos/neural.hpp"
#include "qos/variants.hpp"

namespace qos {

enum class ControllerMode { fast, exact };
std::string_view to_string(ControllerMode m);
ControllerMode parse_controller_mode(std::string_view text);

enum class Branch { nrl2, mae_ag, none };
std::string_view to_string(Branch b);

MlpConfig default_nrl1_config();
MlpConfig default_nrl2_config();

struct PipelineConfig {
  double k = 0.5;
  std::size_t min_neighbors = 5;
  std::size_t t_d = 200;          // controller branch threshold
  std::size_t lambda_size = 200;  // cells sampled for the second level
  ControllerMode controller_mode = ControllerMode::fast;
  MlpConfig nrl1 = default_nrl1_config();
  MlpConfig nrl2 = default_nrl2_config();
  MfConfig mf;
  DeviationMode deviation = DeviationMode::signed_mean;
  std::uint64_t seed = 42;
};

// Blocks, in order: cf_ui, mf_ui, cf_si, mf_si.
inline constexpr std::size_t kBlocks = 4;

struct Nrl1Output {
  std::array<double, kBlocks> phi{};
  std::array<bool, kBlocks> degenerate{};  // fallback value used instead of a network
};

// Everything the second level needs about one target.
struct HierarchyInputs {
  const QosMatrix* train = nullptr;       // global training log
  const FilterResult* ui = nullptr;       // user-intensive filter
  const FilterResult* si = nullptr;       // service-intensive filter
  const FilledMatrices* filled = nullptr;
  Cell target;                            // global indices

  const FilterResult& side(std::size_t block) const { return block < 2 ? *ui : *si; }
  const QosMatrix& matrix(std::size_t block) const;
};

// Produces level-one values for a set of global cells of one block; cells
// are treated as unknown while predicting them.
using BlockPredictor =
    std::function<std::vector<double>(std::size_t block, std::span<const Cell> cells)>;

struct ControllerDataset {
  Branch branch = Branch::none;
  std::size_t intersection_size = 0;
  // NRL-2 branch: (phi1..phi4, actual) per cell.
  std::vector<std::array<double, kBlocks + 1>> lambda;
  std::vector<Cell> lambda_cells;
  // MAE-Ag branch: (phi_b, actual) per cell of each block.
  std::array<std::vector<std::pair<double, double>>, kBlocks> blocks;
  std::array<std::vector<Cell>, kBlocks> block_cells;
  std::vector<std::string> notes;
};

// Result of fitting one column of a filled matrix.
struct ColumnFit {
  std::vector<double> values;  // one per predicted row
  bool degenerate = false;     // under 2 training rows or no feature columns
};

// Trains a regressor on `m` with label column `label_col`, features = every
// other column, training rows = all rows not in `held_rows` or
// `predict_rows`, then predicts each of `predict_rows`. Degenerate fits
// return the mean of the available labels.
ColumnFit fit_column(const QosMatrix& m, std::size_t label_col,
                     std::span<const std::size_t> held_rows,
                     std::span<const std::size_t> predict_rows, const MlpConfig& config);

// Four first-level regressors, one per filled matrix, each trained on every
// row except the target's with the target column as label. A block with a
// degenerate fit takes the cf value of the target on the same side. Values
// are clamped to >= 0.
Nrl1Output run_nrl1(const HierarchyInputs& in, const MlpConfig& config, std::uint64_t seed);

// Pure branch rule.
inline Branch choose_branch(std::size_t intersection_size, std::size_t t_d) {
  return intersection_size >= t_d ? Branch::nrl2 : Branch::mae_ag;
}

// Training-observed cells lying in both filtered sets, excluding the target
// row (the target cell is never observed).
std::vector<Cell> controller_intersection(const HierarchyInputs& in);

// NR-based block predictor (fast: one fit per distinct column with all the
// requested rows held out; exact: one fit per cell).
BlockPredictor nr_block_predictor(const HierarchyInputs& in, const MlpConfig& config,
                                  ControllerMode mode, std::uint64_t seed);

// Fill-based block predictor: refills the block's submatrix with the
// requested cells removed and reads the filled values.
BlockPredictor fill_block_predictor(const HierarchyInputs& in, const PipelineConfig& config,
                                    std::uint64_t seed);

ControllerDataset controller(const HierarchyInputs& in, const PipelineConfig& config,
                             AggregatorTag aggregator, const BlockPredictor& predict,
                             std::uint64_t seed);

// Second-level regressor on (phi1..phi4) -> actual; result clamped to >= 0.
double run_nrl2(std::span<const std::array<double, kBlocks + 1>> lambda, const Nrl1Output& nrl1,
                const MlpConfig& config);

struct MaeAggregate {
  double value = 0.0;
  std::size_t block = 0;
  std::array<double, kBlocks> mae{};
};

// Returns phi of the block with the smallest MAE on its samples (lowest index
// on ties). Empty blocks never win unless all are empty, in which case block
// 0 is returned.
MaeAggregate mae_aggregate(const std::array<std::vector<std::pair<double, double>>, kBlocks>& blocks,
                           const Nrl1Output& nrl1);

// Training view of one matrix of a dataset under a split.
struct PredictionProblem {
  const QosMatrix* full = nullptr;
  QosMatrix train;
  Contexts user_contexts;
  Contexts service_contexts;
  bool context_free = true;

  static PredictionProblem make(const Dataset& dataset, std::size_t matrix_index,
                                const Split& split);
};

struct PredictionTrace {
  Cell target;
  std::string variant;
  double actual = 0.0;  // 0 when unknown
  Nrl1Output nrl1;
  Branch branch = Branch::none;
  std::size_t intersection_size = 0;
  std::size_t lambda_count = 0;
  std::array<double, kBlocks> block_mae{};
  std::size_t chosen_block = 0;
  double final_value = 0.0;
  FilterDiagnostics ui_diagnostics;
  FilterDiagnostics si_diagnostics;
  std::size_t cf_mean_fallbacks = 0;
  std::vector<std::string> notes;

  // One-line JSON record.
  std::string to_json_line() const;
};

// Runs the configured variant for one target. Throws InputError if the
// target is part of the training log.
PredictionTrace predict_one(const PredictionProblem& problem, Cell target,
                            const VariantSpec& variant, const PipelineConfig& config);

}  // namespace qos

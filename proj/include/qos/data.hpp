#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qos/geo.hpp"
#include "qos/matrix.hpp"

namespace qos {

enum class DatasetKind { ws1, ws2 };
enum class QosKind { response_time, throughput };

std::string_view to_string(DatasetKind kind);
std::string_view to_string(QosKind kind);
DatasetKind parse_dataset_kind(std::string_view text);
QosKind parse_qos_kind(std::string_view text);

struct Entity {
  std::string id;
  std::optional<GeoContext> context;
};

struct Dataset {
  DatasetKind kind = DatasetKind::ws1;
  QosKind qos = QosKind::response_time;
  std::vector<Entity> users;
  std::vector<Entity> services;
  // One matrix per time slice (WS-DREAM-1 has a single slice).
  std::vector<QosMatrix> matrices;

  std::size_t n_users() const { return users.size(); }
  std::size_t n_services() const { return services.size(); }

  // True when no user or no service carries a location; context-aware
  // filtering is then bypassed.
  bool context_free() const;

  std::vector<std::optional<GeoContext>> user_contexts() const;
  std::vector<std::optional<GeoContext>> service_contexts() const;

  // Random n_users x n_services sub-block (indices kept in ascending order).
  Dataset sub_block(std::size_t n_users, std::size_t n_services, std::uint64_t seed) const;
};

// Loads a WS-DREAM style directory.
//   ws1: {rt,tp}Matrix.txt (one user per row) plus userlist.txt / wslist.txt
//        metadata with latitude/longitude columns.
//   ws2: {rt,tp}data.txt with "user service slice value" lines; no metadata.
// Values <= 0 (failed invocations) become 0. Throws InputError naming the
// file and line on malformed input.
Dataset load_dataset(const std::filesystem::path& root, DatasetKind which, QosKind qos);

// Numeric grid, whitespace separated, one row per line.
std::vector<std::vector<double>> read_grid(const std::filesystem::path& file);

// Header-carrying delimited metadata file (tab separated when the header has
// tabs, whitespace otherwise). Latitude/longitude columns are found by
// case-insensitive header match; rows whose coordinates are missing or
// unparseable get no context.
std::vector<Entity> read_metadata(const std::filesystem::path& file);

// Train/validation/test partition of the observed cells of one matrix.
struct Split {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double density = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> train_mask;  // row-major, 1 = kept for training
  std::vector<Cell> validation_cells;
  std::vector<Cell> test_cells;

  bool in_train(std::size_t i, std::size_t j) const { return train_mask[i * cols + j] != 0; }
  std::size_t train_count() const;

  // The source matrix with every non-training entry zeroed.
  QosMatrix masked(const QosMatrix& full) const;

  // Stable content hash, used to check that paired runs share splits.
  std::uint64_t hash() const;

  friend bool operator==(const Split&, const Split&) = default;
};

// Keeps round(density * observed) cells for training and divides the rest
// 1:2 between validation and test, uniformly at random under `seed`.
Split make_split(const QosMatrix& matrix, double density, std::uint64_t seed);

// k distinct test cells, uniform without replacement.
std::vector<Cell> sample_test_instances(const Split& split, std::size_t k, std::uint64_t seed);

void write_split(std::ostream& out, const Split& split);
Split read_split(std::istream& in);

}  // namespace qos

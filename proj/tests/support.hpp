#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "qos/hierarchy.hpp"
#include "qos/matrix.hpp"
#include "qos/rng.hpp"

namespace qos::test {

// Random matrix with about `observed` of the cells set to values in [lo, hi).
inline QosMatrix random_matrix(std::size_t rows, std::size_t cols, double observed,
                               std::uint64_t seed, double lo = 0.1, double hi = 5.0) {
  Rng rng(seed);
  QosMatrix q(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (rng.uniform() < observed) q(i, j) = rng.uniform(lo, hi);
  return q;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("qospred-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Small networks so a full pipeline runs in well under a second.
inline PipelineConfig tiny_pipeline() {
  PipelineConfig c;
  c.nrl1.hidden_sizes = {8};
  c.nrl1.max_epochs = 15;
  c.nrl2.hidden_sizes = {2};
  c.nrl2.max_epochs = 60;
  c.mf.epochs = 60;
  c.t_d = 40;
  c.lambda_size = 40;
  return c;
}

inline std::vector<std::string> tiny_settings() {
  return {"nrl1.hidden=8", "nrl1.epochs=15", "nrl2.epochs=60", "mf.epochs=60",
          "t_d=40",        "lambda_size=40"};
}

}  // namespace qos::test

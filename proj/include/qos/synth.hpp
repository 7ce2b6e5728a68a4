#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "qos/data.hpp"

namespace qos {

// Parameters of a WS-DREAM-shaped synthetic log: users and services sit in
// a handful of geographic regions; QoS combines a low-rank user x service
// affinity with a distance penalty and multiplicative noise.
struct SynthSpec {
  DatasetKind kind = DatasetKind::ws1;
  std::size_t users = 60;
  std::size_t services = 120;
  std::size_t slices = 4;            // ws2 only
  double observed_fraction = 0.9;    // the rest are failed invocations
  std::size_t regions = 5;
  std::size_t rank = 3;
  double noise = 0.1;                // log-normal sigma
  std::uint64_t seed = 1;
};

// In-memory dataset for one QoS kind. ws2 datasets carry no locations.
Dataset synthesize(const SynthSpec& spec, QosKind qos);

// Writes rt and tp files in the on-disk layout load_dataset reads.
void write_synthetic(const std::filesystem::path& dir, const SynthSpec& spec);

}  // namespace qos

#include "qos/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "qos/error.hpp"
#include "qos/rng.hpp"

namespace qos {

namespace {

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

struct World {
  std::vector<GeoContext> user_loc;
  std::vector<GeoContext> service_loc;
  std::vector<std::vector<double>> user_f;
  std::vector<std::vector<double>> service_f;
  std::vector<double> service_base;
  std::vector<double> user_bandwidth;
};

World make_world(const SynthSpec& spec) {
  if (spec.users < 2 || spec.services < 2) throw InputError("synthetic log needs >= 2 users and services");
  if (!(spec.observed_fraction > 0.0 && spec.observed_fraction <= 1.0)) {
    throw InputError("observed fraction must lie in (0, 1]");
  }
  Rng rng(derive_seed(spec.seed, "world"));
  std::vector<GeoContext> centers;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, spec.regions); ++r) {
    centers.push_back({rng.uniform(-50.0, 60.0), rng.uniform(-170.0, 170.0)});
  }
  auto place = [&](std::size_t region) {
    const GeoContext& c = centers[region % centers.size()];
    return GeoContext{round3(std::clamp(c.latitude + rng.normal() * 3.0, -89.0, 89.0)),
                      round3(std::clamp(c.longitude + rng.normal() * 3.0, -179.0, 179.0))};
  };
  World w;
  auto factors = [&](std::size_t region) {
    std::vector<double> f(spec.rank);
    for (std::size_t k = 0; k < spec.rank; ++k) {
      f[k] = 0.2 + rng.uniform() * 0.8 + (k == region % spec.rank ? 0.6 : 0.0);
    }
    return f;
  };
  for (std::size_t i = 0; i < spec.users; ++i) {
    const std::size_t region = static_cast<std::size_t>(rng.index(centers.size()));
    w.user_loc.push_back(place(region));
    w.user_f.push_back(factors(region));
    w.user_bandwidth.push_back(std::exp(rng.normal() * 0.4));
  }
  for (std::size_t j = 0; j < spec.services; ++j) {
    const std::size_t region = static_cast<std::size_t>(rng.index(centers.size()));
    w.service_loc.push_back(place(region));
    w.service_f.push_back(factors(region));
    w.service_base.push_back(std::exp(rng.normal() * 0.5));
  }
  return w;
}

// Raw matrices (failed invocations as -1) for one QoS kind and slice.
QosMatrix make_slice(const SynthSpec& spec, const World& w, QosKind qos, std::size_t slice) {
  Rng rng(derive_seed(spec.seed, qos == QosKind::response_time ? "rt" : "tp", slice));
  Rng fail(derive_seed(spec.seed, "failures", slice));
  const double drift = 1.0 + 0.1 * std::sin(static_cast<double>(slice));
  QosMatrix m(spec.users, spec.services);
  for (std::size_t i = 0; i < spec.users; ++i) {
    for (std::size_t j = 0; j < spec.services; ++j) {
      const bool failed = fail.uniform() >= spec.observed_fraction;
      double affinity = 0.0;
      for (std::size_t k = 0; k < spec.rank; ++k) affinity += w.user_f[i][k] * w.service_f[j][k];
      affinity /= static_cast<double>(spec.rank);
      const double km = haversine_km(w.user_loc[i], w.service_loc[j]);
      const double noise = std::exp(rng.normal() * spec.noise);
      double v = 0.0;
      if (qos == QosKind::response_time) {
        v = w.service_base[j] * (0.15 + affinity) * (1.0 + km / 6000.0) * noise * drift;
      } else {
        v = 40.0 * w.user_bandwidth[i] * affinity / (1.0 + km / 6000.0) * noise / drift;
      }
      v = std::max(0.001, round3(v));
      m(i, j) = failed ? 0.0 : v;
    }
  }
  return m;
}

void write_list(const std::filesystem::path& file, const char* header, const char* id_prefix,
                const std::vector<GeoContext>& locs) {
  std::ofstream out(file);
  if (!out) throw InputError("cannot write " + file.string());
  out << header << "\n";
  out << "==========================================================\n";
  for (std::size_t i = 0; i < locs.size(); ++i) {
    char line[160];
    std::snprintf(line, sizeof line, "%zu\t%s%zu\t%.3f\t%.3f\n", i, id_prefix, i,
                  locs[i].latitude, locs[i].longitude);
    out << line;
  }
}

}  // namespace

Dataset synthesize(const SynthSpec& spec, QosKind qos) {
  const World w = make_world(spec);
  Dataset ds;
  ds.kind = spec.kind;
  ds.qos = qos;
  const bool ws1 = spec.kind == DatasetKind::ws1;
  for (std::size_t i = 0; i < spec.users; ++i) {
    ds.users.push_back({std::to_string(i), ws1 ? std::optional(w.user_loc[i]) : std::nullopt});
  }
  for (std::size_t j = 0; j < spec.services; ++j) {
    ds.services.push_back(
        {std::to_string(j), ws1 ? std::optional(w.service_loc[j]) : std::nullopt});
  }
  const std::size_t slices = ws1 ? 1 : std::max<std::size_t>(1, spec.slices);
  for (std::size_t t = 0; t < slices; ++t) ds.matrices.push_back(make_slice(spec, w, qos, t));
  return ds;
}

void write_synthetic(const std::filesystem::path& dir, const SynthSpec& spec) {
  std::filesystem::create_directories(dir);
  for (QosKind qos : {QosKind::response_time, QosKind::throughput}) {
    const Dataset ds = synthesize(spec, qos);
    const std::string prefix(to_string(qos));
    if (spec.kind == DatasetKind::ws1) {
      std::ofstream out(dir / (prefix + "Matrix.txt"));
      if (!out) throw InputError("cannot write into " + dir.string());
      const QosMatrix& m = ds.matrices[0];
      char buf[32];
      for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
          const double v = m(i, j);
          if (v > 0.0) std::snprintf(buf, sizeof buf, "%.3f", v);
          else std::snprintf(buf, sizeof buf, "-1");
          out << (j ? "\t" : "") << buf;
        }
        out << '\n';
      }
    } else {
      std::ofstream out(dir / (prefix + "data.txt"));
      if (!out) throw InputError("cannot write into " + dir.string());
      char buf[96];
      for (std::size_t t = 0; t < ds.matrices.size(); ++t) {
        const QosMatrix& m = ds.matrices[t];
        for (std::size_t i = 0; i < m.rows(); ++i) {
          for (std::size_t j = 0; j < m.cols(); ++j) {
            if (m(i, j) <= 0.0) continue;
            std::snprintf(buf, sizeof buf, "%zu %zu %zu %.3f\n", i, j, t, m(i, j));
            out << buf;
          }
        }
      }
    }
  }
  if (spec.kind == DatasetKind::ws1) {
    const World w = make_world(spec);
    write_list(dir / "userlist.txt", "[User ID]\t[IP Address]\t[Latitude]\t[Longitude]", "10.0.0.",
               w.user_loc);
    write_list(dir / "wslist.txt", "[Service ID]\t[WSDL Address]\t[Latitude]\t[Longitude]",
               "http://svc/", w.service_loc);
  }
}

}  // namespace qos

#include "qos/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "qos/error.hpp"

namespace qos {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw InputError("config key '" + std::string(key) + "': cannot use '" + std::string(value) +
                   "' (expected " + expected + ")");
}

double to_double(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad_value(key, value, "a number");
  return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    bad_value(key, value, "a non-negative integer");
  }
  return out;
}

std::vector<double> to_doubles(std::string_view key, std::string_view value) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(value)};
  while (std::getline(in, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) bad_value(key, value, "a comma-separated list of numbers");
  return out;
}

bool set_mlp(MlpConfig& m, std::string_view field, std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (field == "hidden") m.hidden_sizes = parse_layers(v);
  else if (field == "epochs") m.max_epochs = to_uint(key, v);
  else if (field == "learning_rate") m.learning_rate = to_double(key, v);
  else if (field == "momentum") m.momentum = to_double(key, v);
  else if (field == "min_gradient") m.min_gradient = to_double(key, v);
  else if (field == "activation") m.activation = parse_activation(v);
  else if (field == "batch_size") m.batch_size = to_uint(key, v);
  else if (field == "target_scaling") m.target_scaling = parse_target_scaling(v);
  else return false;
  return true;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc() ? p : buf);
}

std::vector<std::size_t> parse_layers(std::string_view text) {
  const std::string t = trim(text);
  std::vector<std::size_t> out;
  if (t.empty() || t == "none") return out;
  std::size_t start = 0;
  while (start <= t.size()) {
    std::size_t end = t.find_first_of(",x", start);
    if (end == std::string::npos) end = t.size();
    const std::string item = trim(std::string_view(t).substr(start, end - start));
    std::size_t n = 0;
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), n);
    if (ec != std::errc() || p != item.data() + item.size() || n == 0) {
      throw InputError("bad hidden layer list '" + t + "' (expected e.g. 256,128 or 256x128)");
    }
    out.push_back(n);
    start = end + 1;
  }
  return out;
}

std::string format_layers(const std::vector<std::size_t>& layers) {
  if (layers.empty()) return "none";
  std::string out;
  for (auto n : layers) out += (out.empty() ? "" : ",") + std::to_string(n);
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k{"seed", "k", "min_neighbors", "t_d", "lambda_size",
                               "controller_mode", "deviation_mode"};
    for (const char* net : {"nrl1", "nrl2"}) {
      for (const char* f : {"hidden", "epochs", "learning_rate", "momentum", "min_gradient",
                            "activation", "batch_size", "target_scaling"}) {
        k.push_back(std::string(net) + "." + f);
      }
    }
    for (const char* f : {"mf.rank", "mf.learning_rate", "mf.regularization", "mf.epochs",
                          "densities", "episodes", "test_k", "max_slices"}) {
      k.emplace_back(f);
    }
    return k;
  }();
  return keys;
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  PipelineConfig& p = c.pipeline;
  ExperimentOptions& e = c.experiment;
  const std::string v = trim(value);
  if (key == "seed") {
    p.seed = to_uint(key, v);
    e.seed = p.seed;
  } else if (key == "k") {
    p.k = to_double(key, v);
    if (!(p.k >= 0.0 && p.k <= 1.0)) bad_value(key, v, "a value in [0, 1]");
  } else if (key == "min_neighbors") {
    p.min_neighbors = to_uint(key, v);
  } else if (key == "t_d") {
    p.t_d = to_uint(key, v);
    if (p.t_d < 1) bad_value(key, v, "an integer >= 1");
  } else if (key == "lambda_size") {
    p.lambda_size = to_uint(key, v);
    if (p.lambda_size < 1) bad_value(key, v, "an integer >= 1");
  } else if (key == "controller_mode") {
    p.controller_mode = parse_controller_mode(v);
  } else if (key == "deviation_mode") {
    p.deviation = parse_deviation_mode(v);
  } else if (key.starts_with("nrl1.") && set_mlp(p.nrl1, key.substr(5), key, v)) {
    p.nrl1.validate();
  } else if (key.starts_with("nrl2.") && set_mlp(p.nrl2, key.substr(5), key, v)) {
    p.nrl2.validate();
  } else if (key == "mf.rank") {
    p.mf.rank = to_uint(key, v);
  } else if (key == "mf.learning_rate") {
    p.mf.learning_rate = to_double(key, v);
  } else if (key == "mf.regularization") {
    p.mf.regularization = to_double(key, v);
  } else if (key == "mf.epochs") {
    p.mf.epochs = to_uint(key, v);
  } else if (key == "densities") {
    e.densities = to_doubles(key, v);
    for (double d : e.densities)
      if (!(d > 0.0 && d < 1.0)) bad_value(key, v, "densities in (0, 1)");
  } else if (key == "episodes") {
    e.episodes = to_uint(key, v);
    if (e.episodes < 1) bad_value(key, v, "an integer >= 1");
  } else if (key == "test_k") {
    e.test_k = to_uint(key, v);
    if (e.test_k < 1) bad_value(key, v, "an integer >= 1");
  } else if (key == "max_slices") {
    e.max_slices = to_uint(key, v);
  } else {
    throw InputError("unknown config key '" + std::string(key) + "'");
  }
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InputError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    try {
      apply_setting(c, key, std::string_view(t).substr(eq + 1));
    } catch (const InputError& err) {
      throw InputError(source + ":" + std::to_string(lineno) + ": " + err.what());
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open config file " + file.string());
  return parse_config(in, file.string());
}

std::string format_config(const RunConfig& c) {
  const PipelineConfig& p = c.pipeline;
  const ExperimentOptions& e = c.experiment;
  std::ostringstream out;
  auto put = [&](const std::string& key, const std::string& value) {
    out << key << " = " << value << '\n';
  };
  put("seed", std::to_string(p.seed));
  put("k", format_number(p.k));
  put("min_neighbors", std::to_string(p.min_neighbors));
  put("t_d", std::to_string(p.t_d));
  put("lambda_size", std::to_string(p.lambda_size));
  put("controller_mode", std::string(to_string(p.controller_mode)));
  put("deviation_mode", std::string(to_string(p.deviation)));
  for (const auto& [net, m] : {std::pair{"nrl1", &p.nrl1}, std::pair{"nrl2", &p.nrl2}}) {
    const std::string n(net);
    put(n + ".hidden", format_layers(m->hidden_sizes));
    put(n + ".epochs", std::to_string(m->max_epochs));
    put(n + ".learning_rate", format_number(m->learning_rate));
    put(n + ".momentum", format_number(m->momentum));
    put(n + ".min_gradient", format_number(m->min_gradient));
    put(n + ".activation", std::string(to_string(m->activation)));
    put(n + ".batch_size", std::to_string(m->batch_size));
    put(n + ".target_scaling", std::string(to_string(m->target_scaling)));
  }
  put("mf.rank", std::to_string(p.mf.rank));
  put("mf.learning_rate", format_number(p.mf.learning_rate));
  put("mf.regularization", format_number(p.mf.regularization));
  put("mf.epochs", std::to_string(p.mf.epochs));
  std::string dens;
  for (double d : e.densities) dens += (dens.empty() ? "" : ",") + format_number(d);
  put("densities", dens);
  put("episodes", std::to_string(e.episodes));
  put("test_k", std::to_string(e.test_k));
  put("max_slices", std::to_string(e.max_slices));
  return out.str();
}

}  // namespace qos

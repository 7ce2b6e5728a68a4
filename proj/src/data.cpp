#include "qos/data.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "qos/error.hpp"
#include "qos/rng.hpp"

namespace qos {

namespace fs = std::filesystem;

std::string_view to_string(DatasetKind kind) { return kind == DatasetKind::ws1 ? "ws1" : "ws2"; }
std::string_view to_string(QosKind kind) { return kind == QosKind::response_time ? "rt" : "tp"; }

DatasetKind parse_dataset_kind(std::string_view text) {
  if (text == "ws1") return DatasetKind::ws1;
  if (text == "ws2") return DatasetKind::ws2;
  throw InputError("unknown dataset '" + std::string(text) + "' (expected ws1 or ws2)");
}

QosKind parse_qos_kind(std::string_view text) {
  if (text == "rt") return QosKind::response_time;
  if (text == "tp") return QosKind::throughput;
  throw InputError("unknown QoS parameter '" + std::string(text) + "' (expected rt or tp)");
}

bool Dataset::context_free() const {
  auto any_context = [](const std::vector<Entity>& es) {
    return std::any_of(es.begin(), es.end(), [](const Entity& e) { return e.context.has_value(); });
  };
  return !any_context(users) || !any_context(services);
}

std::vector<std::optional<GeoContext>> Dataset::user_contexts() const {
  std::vector<std::optional<GeoContext>> out;
  out.reserve(users.size());
  for (const auto& u : users) out.push_back(u.context);
  return out;
}

std::vector<std::optional<GeoContext>> Dataset::service_contexts() const {
  std::vector<std::optional<GeoContext>> out;
  out.reserve(services.size());
  for (const auto& s : services) out.push_back(s.context);
  return out;
}

Dataset Dataset::sub_block(std::size_t nu, std::size_t ns, std::uint64_t seed) const {
  if (nu == 0 || ns == 0 || nu > n_users() || ns > n_services()) {
    throw InputError("sub-block " + std::to_string(nu) + "x" + std::to_string(ns) +
                     " does not fit a " + std::to_string(n_users()) + "x" +
                     std::to_string(n_services()) + " dataset");
  }
  Rng rng(derive_seed(seed, "sub-block"));
  auto pick = [&rng](std::size_t total, std::size_t want) {
    std::vector<std::size_t> idx(total);
    for (std::size_t i = 0; i < total; ++i) idx[i] = i;
    rng.shuffle(std::span<std::size_t>(idx));
    idx.resize(want);
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  const auto ui = pick(n_users(), nu);
  const auto si = pick(n_services(), ns);
  Dataset out;
  out.kind = kind;
  out.qos = qos;
  for (auto i : ui) out.users.push_back(users[i]);
  for (auto j : si) out.services.push_back(services[j]);
  for (const auto& m : matrices) out.matrices.push_back(m.submatrix(ui, si));
  return out;
}

namespace {

std::string where(const fs::path& file, std::size_t line) {
  return file.string() + ":" + std::to_string(line);
}

std::optional<double> parse_double(std::string_view tok) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string normalize_header(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

bool is_rule_line(std::string_view line) {
  line = trim(line);
  return !line.empty() && std::all_of(line.begin(), line.end(), [](char c) {
    return c == '=' || c == '-' || c == '*' || std::isspace(static_cast<unsigned char>(c));
  });
}

bool is_missing_token(std::string_view tok) {
  const std::string t = normalize_header(tok);
  return t.empty() || t == "null" || t == "na" || t == "nan" || t == "none";
}

std::ifstream open_or_throw(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open " + file.string());
  return in;
}

QosMatrix grid_to_matrix(const fs::path& file) {
  auto rows = read_grid(file);
  try {
    return QosMatrix::from_raw(rows);
  } catch (const InputError& e) {
    throw InputError(file.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<std::vector<double>> read_grid(const fs::path& file) {
  auto in = open_or_throw(file);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    std::vector<double> row;
    row.reserve(toks.size());
    for (auto tok : toks) {
      auto v = parse_double(tok);
      if (!v) {
        throw InputError(where(file, lineno) + ": unparseable value '" + std::string(tok) + "'");
      }
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError(where(file, lineno) + ": expected " + std::to_string(rows.front().size()) +
                       " values, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Entity> read_metadata(const fs::path& file) {
  auto in = open_or_throw(file);
  std::string line;
  std::size_t lineno = 0;
  bool tabbed = false;
  std::optional<std::size_t> lat_col, lon_col;
  std::size_t id_col = 0;
  bool have_header = false;
  std::vector<Entity> out;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || is_rule_line(line)) continue;
    if (!have_header) {
      have_header = true;
      tabbed = line.find('\t') != std::string::npos;
      const auto cols = tabbed ? split_tabs(line) : split_ws(line);
      bool id_found = false;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const std::string h = normalize_header(cols[c]);
        if (h.find("latitude") != std::string::npos || h == "lat") lat_col = c;
        else if (h.find("longitude") != std::string::npos || h == "lon" || h == "lng") lon_col = c;
        else if (!id_found && h.size() >= 2 && h.ends_with("id")) {
          id_col = c;
          id_found = true;
        }
      }
      continue;
    }
    const auto fields = tabbed ? split_tabs(line) : split_ws(line);
    if (fields.size() <= id_col) {
      throw InputError(where(file, lineno) + ": row has no id field");
    }
    Entity e;
    e.id = std::string(trim(fields[id_col]));
    if (lat_col && lon_col) {
      const bool present = *lat_col < fields.size() && *lon_col < fields.size() &&
                           !is_missing_token(fields[*lat_col]) &&
                           !is_missing_token(fields[*lon_col]);
      if (present) {
        auto lat = parse_double(trim(fields[*lat_col]));
        auto lon = parse_double(trim(fields[*lon_col]));
        if (!lat || !lon) {
          throw InputError(where(file, lineno) + ": unparseable latitude/longitude");
        }
        try {
          e.context = GeoContext::make(*lat, *lon);
        } catch (const InputError& err) {
          throw InputError(where(file, lineno) + ": " + err.what());
        }
      }
    }
    out.push_back(std::move(e));
  }
  if (!have_header) throw InputError(file.string() + ": empty metadata file");
  return out;
}

Dataset load_dataset(const fs::path& root, DatasetKind which, QosKind qos) {
  Dataset ds;
  ds.kind = which;
  ds.qos = qos;
  const std::string prefix = qos == QosKind::response_time ? "rt" : "tp";

  if (which == DatasetKind::ws1) {
    QosMatrix m = grid_to_matrix(root / (prefix + "Matrix.txt"));
    ds.users = read_metadata(root / "userlist.txt");
    ds.services = read_metadata(root / "wslist.txt");
    if (ds.users.size() != m.rows()) {
      throw InputError("userlist.txt lists " + std::to_string(ds.users.size()) +
                       " users but " + prefix + "Matrix.txt has " + std::to_string(m.rows()) +
                       " rows");
    }
    if (ds.services.size() != m.cols()) {
      throw InputError("wslist.txt lists " + std::to_string(ds.services.size()) +
                       " services but " + prefix + "Matrix.txt has " +
                       std::to_string(m.cols()) + " columns");
    }
    ds.matrices.push_back(std::move(m));
    return ds;
  }

  const fs::path file = root / (prefix + "data.txt");
  auto in = open_or_throw(file);
  struct Entry {
    std::size_t u, s, t;
    double v;
  };
  std::vector<Entry> entries;
  std::size_t nu = 0, ns = 0, nt = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 4) {
      throw InputError(where(file, lineno) + ": expected 'user service slice value'");
    }
    std::size_t idx[3];
    for (int k = 0; k < 3; ++k) {
      auto [ptr, ec] = std::from_chars(toks[k].data(), toks[k].data() + toks[k].size(), idx[k]);
      if (ec != std::errc() || ptr != toks[k].data() + toks[k].size()) {
        throw InputError(where(file, lineno) + ": unparseable index '" + std::string(toks[k]) + "'");
      }
    }
    auto v = parse_double(toks[3]);
    if (!v || !std::isfinite(*v)) {
      throw InputError(where(file, lineno) + ": unparseable value '" + std::string(toks[3]) + "'");
    }
    entries.push_back({idx[0], idx[1], idx[2], *v});
    nu = std::max(nu, idx[0] + 1);
    ns = std::max(ns, idx[1] + 1);
    nt = std::max(nt, idx[2] + 1);
  }
  if (entries.empty()) throw InputError(file.string() + ": no entries");
  ds.matrices.assign(nt, QosMatrix(nu, ns));
  for (const auto& e : entries) ds.matrices[e.t](e.u, e.s) = e.v > 0.0 ? e.v : 0.0;
  for (std::size_t i = 0; i < nu; ++i) ds.users.push_back({std::to_string(i), std::nullopt});
  for (std::size_t j = 0; j < ns; ++j) ds.services.push_back({std::to_string(j), std::nullopt});
  return ds;
}

std::size_t Split::train_count() const {
  return static_cast<std::size_t>(std::count(train_mask.begin(), train_mask.end(), 1));
}

QosMatrix Split::masked(const QosMatrix& full) const {
  QosMatrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (in_train(i, j)) out(i, j) = full(i, j);
  return out;
}

std::uint64_t Split::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(rows);
  mix(cols);
  mix(std::bit_cast<std::uint64_t>(density));
  mix(seed);
  for (auto b : train_mask) mix(b);
  for (const auto& c : validation_cells) mix((std::uint64_t{c.row} << 32) | c.col);
  mix(0xffffffffffffffffULL);
  for (const auto& c : test_cells) mix((std::uint64_t{c.row} << 32) | c.col);
  return h;
}

Split make_split(const QosMatrix& matrix, double density, std::uint64_t seed) {
  if (!(density > 0.0 && density < 1.0)) {
    throw InputError("density must lie in (0, 1), got " + std::to_string(density));
  }
  std::vector<Cell> cells = matrix.observed_cells();
  if (cells.empty()) throw InputError("matrix has no observed entries to split");

  Rng rng(seed);
  rng.shuffle(std::span<Cell>(cells));

  const std::size_t n = cells.size();
  const auto n_train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(density * static_cast<double>(n))));
  const std::size_t rest = n - n_train;
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(rest) / 3.0));

  Split s;
  s.rows = matrix.rows();
  s.cols = matrix.cols();
  s.density = density;
  s.seed = seed;
  s.train_mask.assign(s.rows * s.cols, 0);
  for (std::size_t k = 0; k < n_train; ++k) s.train_mask[cells[k].row * s.cols + cells[k].col] = 1;
  s.validation_cells.assign(cells.begin() + n_train, cells.begin() + n_train + n_val);
  s.test_cells.assign(cells.begin() + n_train + n_val, cells.end());
  std::sort(s.validation_cells.begin(), s.validation_cells.end());
  std::sort(s.test_cells.begin(), s.test_cells.end());
  return s;
}

std::vector<Cell> sample_test_instances(const Split& split, std::size_t k, std::uint64_t seed) {
  if (k > split.test_cells.size()) {
    throw InputError("cannot sample " + std::to_string(k) + " test instances from " +
                     std::to_string(split.test_cells.size()));
  }
  std::vector<Cell> pool = split.test_cells;
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

void write_split(std::ostream& out, const Split& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", s.density);
  out << "qos-split 1\n";
  out << "rows " << s.rows << "\ncols " << s.cols << "\ndensity " << buf << "\nseed " << s.seed
      << "\n";
  out << "train " << s.train_count() << "\n";
  for (std::size_t i = 0; i < s.rows; ++i)
    for (std::size_t j = 0; j < s.cols; ++j)
      if (s.in_train(i, j)) out << i << ' ' << j << '\n';
  out << "validation " << s.validation_cells.size() << "\n";
  for (const auto& c : s.validation_cells) out << c.row << ' ' << c.col << '\n';
  out << "test " << s.test_cells.size() << "\n";
  for (const auto& c : s.test_cells) out << c.row << ' ' << c.col << '\n';
}

Split read_split(std::istream& in) {
  auto expect = [&in](const char* key) {
    std::string k;
    if (!(in >> k) || k != key) throw InputError(std::string("split file: expected '") + key + "'");
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "qos-split" || version != 1) {
    throw InputError("split file: bad header");
  }
  Split s;
  std::string density_text;
  expect("rows");
  in >> s.rows;
  expect("cols");
  in >> s.cols;
  expect("density");
  in >> density_text;
  expect("seed");
  in >> s.seed;
  if (!in) throw InputError("split file: malformed preamble");
  auto d = parse_double(density_text);
  if (!d) throw InputError("split file: bad density");
  s.density = *d;
  s.train_mask.assign(s.rows * s.cols, 0);

  auto read_cells = [&](const char* key, std::vector<Cell>* cells) {
    expect(key);
    std::size_t n = 0;
    if (!(in >> n)) throw InputError(std::string("split file: bad count for ") + key);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t r = 0, c = 0;
      if (!(in >> r >> c) || r >= s.rows || c >= s.cols) {
        throw InputError(std::string("split file: bad cell in ") + key);
      }
      if (cells) {
        cells->push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c)});
      } else {
        s.train_mask[r * s.cols + c] = 1;
      }
    }
  };
  read_cells("train", nullptr);
  read_cells("validation", &s.validation_cells);
  read_cells("test", &s.test_cells);
  return s;
}

}  // namespace qos

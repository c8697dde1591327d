#pragma once

#include "format.hpp"
#include "inference.hpp"
#include "model.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace dplqr::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

//! Which CSV columns feed y, x and z. Entries are header names; a name that
//! is not in the header but is a non-negative integer is taken as a
//! zero-based column index.
struct ColumnRoles
{
  std::string y;
  std::vector<std::string> x;
  std::vector<std::string> z;
};

//! Per-column min-max map of the z block onto [0,1].
struct Scaling
{
  Vector z_min;
  Vector z_max;

  static Scaling fit(const Matrix& z)
  {
    Scaling s;
    for (std::size_t j = 0; j < z.cols(); ++j) {
      double lo = HUGE_VAL;
      double hi = -HUGE_VAL;
      for (std::size_t i = 0; i < z.rows(); ++i) {
        lo = std::min(lo, z(i, j));
        hi = std::max(hi, z(i, j));
      }
      s.z_min.push_back(lo);
      s.z_max.push_back(hi);
    }
    return s;
  }

  void apply(Matrix& z) const
  {
    if (z.rows() > 0 && z.cols() != z_min.size())
      throw DimensionError("scaling: column count mismatch");
    for (std::size_t i = 0; i < z.rows(); ++i)
      for (std::size_t j = 0; j < z.cols(); ++j) {
        const double range = z_max[j] - z_min[j];
        z(i, j) = range > 0.0 ? (z(i, j) - z_min[j]) / range : z(i, j) - z_min[j];
      }
  }
};

// ---------------------------------------------------------------------------
// CSV

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers; //!< 1-based file line of each row
};

inline std::vector<std::string> split_csv_line(const std::string& line)
{
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ','))
    cells.push_back(cell);
  if (!line.empty() && line.back() == ',')
    cells.emplace_back();
  for (auto& c : cells) {
    const auto b = c.find_first_not_of(" \t\r");
    const auto e = c.find_last_not_of(" \t\r");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return cells;
}

inline CsvTable read_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    if (!have_header) {
      if (lineno == 1 && line.starts_with("\xEF\xBB\xBF"))
        line.erase(0, 3);
      t.header = split_csv_line(line);
      have_header = true;
      continue;
    }
    t.rows.push_back(split_csv_line(line));
    t.line_numbers.push_back(lineno);
  }
  if (!have_header)
    throw DataError("'" + path + "' has no header row");
  return t;
}

inline double parse_cell(const std::string& cell, std::size_t line, const std::string& column)
{
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+')
    ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty())
    throw DataError("missing value at line " + std::to_string(line) + ", column '" +
                    column + "'");
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw DataError("non-numeric value '" + cell + "' at line " + std::to_string(line) +
                    ", column '" + column + "'");
  }
  return v;
}

inline std::size_t resolve_column(const std::vector<std::string>& header,
                                  const std::string& name)
{
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name)
      return j;
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), idx);
  if (!name.empty() && ec == std::errc() && ptr == name.data() + name.size() &&
      idx < header.size())
    return idx;
  throw DataError("unknown column '" + name + "'");
}

//! Loads a dataset routed by `roles`. When `with_response` is false the y
//! role is ignored and y is filled with zeros. Header-only files are an
//! error unless `allow_empty`.
inline Dataset load_csv(const std::string& path, const ColumnRoles& roles,
                        bool with_response = true, bool allow_empty = false)
{
  const CsvTable t = read_csv(path);
  if (t.rows.empty() && !allow_empty)
    throw DataError("'" + path + "' contains no data rows");

  std::size_t y_col = 0;
  if (with_response) {
    if (roles.y.empty())
      throw ConfigError("no response column given");
    y_col = resolve_column(t.header, roles.y);
  }
  std::vector<std::size_t> x_cols;
  std::vector<std::size_t> z_cols;
  for (const auto& c : roles.x)
    x_cols.push_back(resolve_column(t.header, c));
  for (const auto& c : roles.z)
    z_cols.push_back(resolve_column(t.header, c));
  if (x_cols.empty() && z_cols.empty())
    throw ConfigError("no covariate columns given");

  const std::size_t n = t.rows.size();
  Dataset d{Vector(n, 0.0), Matrix(n, x_cols.size()), Matrix(n, z_cols.size())};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = t.rows[i];
    const std::size_t line = t.line_numbers[i];
    if (row.size() != t.header.size()) {
      throw DataError("line " + std::to_string(line) + " has " + std::to_string(row.size()) +
                      " cells, header has " + std::to_string(t.header.size()));
    }
    if (with_response)
      d.y[i] = parse_cell(row[y_col], line, t.header[y_col]);
    for (std::size_t k = 0; k < x_cols.size(); ++k)
      d.x(i, k) = parse_cell(row[x_cols[k]], line, t.header[x_cols[k]]);
    for (std::size_t k = 0; k < z_cols.size(); ++k)
      d.z(i, k) = parse_cell(row[z_cols[k]], line, t.header[z_cols[k]]);
  }
  return d;
}

// ---------------------------------------------------------------------------
// JSON

inline json to_json(const TrainConfig& c)
{
  return json{{"depth", c.depth},
              {"width", c.width},
              {"epochs", c.epochs},
              {"minibatch", c.minibatch},
              {"early_stop_patience", c.early_stop_patience},
              {"learning_rate", c.learning_rate},
              {"seed", c.seed},
              {"validation_fraction", c.validation_fraction},
              {"init_output_bias", c.init_output_bias},
              {"restore_best", c.restore_best},
              {"polish_output_bias", c.polish_output_bias}};
}

//! Reads the fields present in `j` on top of `base`.
inline TrainConfig train_config_from_json(const json& j, TrainConfig base = {})
{
  try {
    if (j.contains("depth"))
      base.depth = j.at("depth").get<std::size_t>();
    if (j.contains("width"))
      base.width = j.at("width").get<std::size_t>();
    if (j.contains("epochs"))
      base.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("minibatch"))
      base.minibatch = j.at("minibatch").get<std::size_t>();
    if (j.contains("early_stop_patience"))
      base.early_stop_patience = j.at("early_stop_patience").get<std::size_t>();
    if (j.contains("learning_rate"))
      base.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("seed"))
      base.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("validation_fraction"))
      base.validation_fraction = j.at("validation_fraction").get<double>();
    if (j.contains("init_output_bias"))
      base.init_output_bias = j.at("init_output_bias").get<bool>();
    if (j.contains("restore_best"))
      base.restore_best = j.at("restore_best").get<bool>();
    if (j.contains("polish_output_bias"))
      base.polish_output_bias = j.at("polish_output_bias").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("training configuration: ") + e.what());
  }
  return base;
}

inline json to_json(const NetworkParams& p)
{
  json layers = json::array();
  for (const auto& w : p.layers)
    layers.push_back(w.entries());
  return json{{"widths", p.widths}, {"layers", layers}};
}

inline NetworkParams network_from_json(const json& j)
{
  NetworkParams p;
  p.widths = j.at("widths").get<std::vector<std::size_t>>();
  validate_widths(p.widths);
  const auto& layers = j.at("layers");
  if (layers.size() + 1 != p.widths.size())
    throw DataError("model file: layer count does not match widths");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    auto entries = layers[k].get<std::vector<double>>();
    p.layers.emplace_back(p.widths[k + 1], p.widths[k] + 1, std::move(entries));
  }
  validate(p);
  return p;
}

inline json to_json(const TrainHistory& h)
{
  return json{{"stopped_epoch", h.stopped_epoch},
              {"best_epoch", h.best_epoch},
              {"train_loss", h.train_loss},
              {"val_loss", h.val_loss}};
}

//! Everything needed to predict from raw CSV rows.
struct ModelFile
{
  PlqrFit fit;
  ColumnRoles roles;
  std::optional<Scaling> scaling;
};

inline json to_json(const ModelFile& m)
{
  json j;
  j["schema_version"] = kSchemaVersion;
  j["tau"] = m.fit.tau;
  j["mode"] = to_string(m.fit.mode);
  j["theta"] = m.fit.theta;
  j["network"] = to_json(m.fit.network);
  j["config"] = to_json(m.fit.config);
  j["roles"] = json{{"y", m.roles.y}, {"x", m.roles.x}, {"z", m.roles.z}};
  if (m.scaling)
    j["scaling"] = json{{"z_min", m.scaling->z_min}, {"z_max", m.scaling->z_max}};
  else
    j["scaling"] = nullptr;
  return j;
}

inline ModelFile model_from_json(const json& j)
{
  try {
    if (!j.contains("schema_version"))
      throw DataError("model file: missing schema_version");
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion)
      throw DataError("model file: unsupported schema_version " + std::to_string(version));
    ModelFile m;
    m.fit.tau = QuantileLevel(j.at("tau").get<double>()).value();
    m.fit.mode = parse_mode(j.at("mode").get<std::string>());
    m.fit.theta = j.at("theta").get<Vector>();
    m.fit.network = network_from_json(j.at("network"));
    if (j.contains("config"))
      m.fit.config = train_config_from_json(j.at("config"));
    const auto& r = j.at("roles");
    m.roles.y = r.value("y", std::string());
    m.roles.x = r.at("x").get<std::vector<std::string>>();
    m.roles.z = r.at("z").get<std::vector<std::string>>();
    if (j.contains("scaling") && !j.at("scaling").is_null()) {
      Scaling s;
      s.z_min = j.at("scaling").at("z_min").get<Vector>();
      s.z_max = j.at("scaling").at("z_max").get<Vector>();
      if (s.z_min.size() != m.roles.z.size() || s.z_max.size() != m.roles.z.size())
        throw DataError("model file: scaling does not match the z columns");
      m.scaling = std::move(s);
    }
    const std::size_t in = m.fit.mode == Mode::dnqr ? m.roles.x.size() + m.roles.z.size()
                                                    : m.roles.z.size();
    if (m.fit.network.input_dim() != in)
      throw DataError("model file: network input width does not match the z columns");
    if (m.fit.mode != Mode::dnqr && m.fit.theta.size() != m.roles.x.size())
      throw DataError("model file: theta length does not match the x columns");
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

inline json to_json(const CovarianceEstimate& c)
{
  json intervals = json::array();
  for (const auto& iv : c.intervals)
    intervals.push_back(json::array({iv.lower, iv.upper}));
  auto mat = [](const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i)
      rows.push_back(Vector(m.row(i).begin(), m.row(i).end()));
    return rows;
  };
  return json{{"f0_hat", c.f0_hat},     {"omega_hat", mat(c.omega_hat)},
              {"sigma_hat", mat(c.sigma_hat)}, {"level", c.level},
              {"n", c.n},               {"intervals", intervals}};
}

inline json read_json_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out)
    throw IoError("write to '" + path + "' failed");
}

inline void write_json_file(const std::string& path, const json& j)
{
  write_text_file(path, j.dump(2) + "\n");
}

} // namespace dplqr::io

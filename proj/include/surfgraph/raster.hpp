#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "random.hpp"

namespace surfgraph {

// Shared lon/lat grid description. Grid point (row, col) sits at
// x = origin_lon + col * cell_size, y = origin_lat + (n_rows - 1 - row) * cell_size,
// so row 0 is the northern edge.
struct GridSpec {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  double origin_lon = 0.0;
  double origin_lat = 0.0;
  double cell_size = 1.0;

  std::size_t size() const { return n_rows * n_cols; }
  std::size_t index(std::size_t row, std::size_t col) const { return row * n_cols + col; }
  double x(std::size_t col) const { return origin_lon + static_cast<double>(col) * cell_size; }
  double y(std::size_t row) const {
    return origin_lat + static_cast<double>(n_rows - 1 - row) * cell_size;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// One study year of saturated thickness (meters) on a regular grid.
// Immutable once constructed; the constructor enforces the value invariants.
class HeightField {
 public:
  static constexpr double kDefaultNodata = -9999.0;

  HeightField(std::string year_label, GridSpec grid, std::vector<double> values,
              std::vector<bool> nodata, double nodata_value = kDefaultNodata)
      : year_label_(std::move(year_label)),
        grid_(grid),
        values_(std::move(values)),
        nodata_(std::move(nodata)),
        nodata_value_(nodata_value) {
    if (grid_.n_rows == 0 || grid_.n_cols == 0) throw ValidationError("grid dimensions must be positive");
    if (!(grid_.cell_size > 0.0) || !std::isfinite(grid_.cell_size)) {
      throw ValidationError("cell_size must be positive");
    }
    if (values_.size() != grid_.size() || nodata_.size() != grid_.size()) {
      throw ValidationError("value array has " + std::to_string(values_.size()) + " entries, expected " +
                            std::to_string(grid_.size()));
    }
    bool any_valid = false;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (nodata_[i]) continue;
      if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
        throw ValidationError("cell " + std::to_string(i) + " is not a finite nonnegative thickness");
      }
      any_valid = true;
    }
    if (!any_valid) throw ValidationError("all cells are nodata");
  }

  const std::string& year_label() const { return year_label_; }
  const GridSpec& grid() const { return grid_; }
  std::size_t n_rows() const { return grid_.n_rows; }
  std::size_t n_cols() const { return grid_.n_cols; }
  double nodata_value() const { return nodata_value_; }

  double value(std::size_t row, std::size_t col) const { return values_[grid_.index(row, col)]; }
  bool is_nodata(std::size_t row, std::size_t col) const { return nodata_[grid_.index(row, col)]; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<bool>& nodata_mask() const { return nodata_; }

  double max_value() const { return extreme(true); }
  double min_value() const { return extreme(false); }

  friend bool operator==(const HeightField&, const HeightField&) = default;

 private:
  double extreme(bool want_max) const {
    double best = want_max ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (nodata_[i]) continue;
      best = want_max ? std::max(best, values_[i]) : std::min(best, values_[i]);
    }
    return best;
  }

  std::string year_label_;
  GridSpec grid_;
  std::vector<double> values_;
  std::vector<bool> nodata_;
  double nodata_value_;
};

// Chronologically ordered study years on one shared grid.
class Dataset {
 public:
  const std::vector<HeightField>& fields() const { return fields_; }
  std::size_t size() const { return fields_.size(); }
  const HeightField& operator[](std::size_t i) const { return fields_[i]; }
  const GridSpec& grid() const { return fields_.front().grid(); }
  double global_min() const { return global_min_; }
  double global_max() const { return global_max_; }

  std::vector<std::string> year_labels() const {
    std::vector<std::string> out;
    for (const auto& f : fields_) out.push_back(f.year_label());
    return out;
  }

  std::optional<std::size_t> find(std::string_view year_label) const {
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      if (fields_[i].year_label() == year_label) return i;
    }
    return std::nullopt;
  }

  // First `count` years, revalidated as a dataset of their own.
  Dataset prefix(std::size_t count) const;

 private:
  friend Dataset validate_dataset(std::vector<HeightField> fields);
  Dataset() = default;

  std::vector<HeightField> fields_;
  double global_min_ = 0.0;
  double global_max_ = 0.0;
};

inline Dataset validate_dataset(std::vector<HeightField> fields) {
  if (fields.size() < 2) throw ValidationError("at least 2 study years required");
  const GridSpec& ref = fields.front().grid();
  std::set<std::string> labels;
  for (const auto& f : fields) {
    if (!(f.grid() == ref)) {
      throw ValidationError("grid mismatch: year '" + f.year_label() + "' differs from year '" +
                            fields.front().year_label() + "' in shape, origin or cell_size");
    }
    if (!labels.insert(f.year_label()).second) {
      throw ValidationError("duplicate year_label '" + f.year_label() + "'");
    }
  }
  Dataset ds;
  ds.global_min_ = std::numeric_limits<double>::infinity();
  ds.global_max_ = -std::numeric_limits<double>::infinity();
  for (const auto& f : fields) {
    ds.global_min_ = std::min(ds.global_min_, f.min_value());
    ds.global_max_ = std::max(ds.global_max_, f.max_value());
  }
  ds.fields_ = std::move(fields);
  return ds;
}

inline Dataset Dataset::prefix(std::size_t count) const {
  if (count > fields_.size()) {
    throw ValidationError("dataset has " + std::to_string(fields_.size()) + " years, " +
                          std::to_string(count) + " requested");
  }
  return validate_dataset(std::vector<HeightField>(fields_.begin(), fields_.begin() + count));
}

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> split_tokens(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

inline std::optional<double> to_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

// Parses an ESRI ASCII grid. Header keys are case-insensitive; the first data
// line becomes row 0. Each data line must hold exactly ncols values.
inline HeightField parse_ascii_grid(std::istream& in, const std::string& year_label) {
  std::optional<double> ncols, nrows, xll, yll, cellsize, nodata;
  bool x_center = false;
  bool y_center = false;

  std::vector<double> values;
  std::vector<bool> mask;
  std::size_t data_rows = 0;
  std::size_t line_no = 0;
  bool in_data = false;
  std::string line;

  auto require_header = [&](std::size_t at) {
    const char* missing = !ncols ? "ncols" : !nrows ? "nrows" : !xll ? "xllcorner" : !yll ? "yllcorner"
                                                                  : !cellsize ? "cellsize" : nullptr;
    if (missing) throw ParseError(std::string("malformed header: missing '") + missing + "'", at, 0);
    auto positive_int = [&](double v, const char* key) {
      if (v < 1 || v != std::floor(v) || v > 1e8) {
        throw ParseError(std::string("malformed header: '") + key + "' must be a positive integer", at, 0);
      }
      return static_cast<std::size_t>(v);
    };
    positive_int(*ncols, "ncols");
    positive_int(*nrows, "nrows");
    if (!(*cellsize > 0.0)) throw ParseError("malformed header: 'cellsize' must be positive", at, 0);
    values.reserve(static_cast<std::size_t>(*ncols * *nrows));
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto tokens = detail::split_tokens(line);
    if (tokens.empty()) continue;

    if (!in_data) {
      const bool is_key = std::isalpha(static_cast<unsigned char>(tokens[0].text[0])) &&
                          !detail::to_double(tokens[0].text);
      if (is_key) {
        const std::string key = detail::lower(tokens[0].text);
        if (tokens.size() != 2) throw ParseError("malformed header: expected '<key> <value>'", line_no, 1);
        auto v = detail::to_double(tokens[1].text);
        if (!v) throw ParseError("malformed header: non-numeric value for '" + key + "'", line_no, tokens[1].column);
        std::optional<double>* slot = nullptr;
        if (key == "ncols") slot = &ncols;
        else if (key == "nrows") slot = &nrows;
        else if (key == "xllcorner" || key == "xllcenter") { slot = &xll; x_center = key == "xllcenter"; }
        else if (key == "yllcorner" || key == "yllcenter") { slot = &yll; y_center = key == "yllcenter"; }
        else if (key == "cellsize") slot = &cellsize;
        else if (key == "nodata_value") slot = &nodata;
        else throw ParseError("malformed header: unknown key '" + std::string(tokens[0].text) + "'", line_no, 1);
        if (slot->has_value()) throw ParseError("malformed header: duplicate key '" + key + "'", line_no, 1);
        *slot = *v;
        continue;
      }
      require_header(line_no);
      in_data = true;
    }

    const auto cols = static_cast<std::size_t>(*ncols);
    if (data_rows == static_cast<std::size_t>(*nrows)) {
      throw ParseError("wrong cell count: more than " + std::to_string(data_rows) + " data lines", line_no, 0);
    }
    if (tokens.size() != cols) {
      throw ParseError("wrong cell count: data line has " + std::to_string(tokens.size()) + " values, expected " +
                           std::to_string(cols),
                       line_no, 0);
    }
    for (const auto& tok : tokens) {
      auto v = detail::to_double(tok.text);
      if (!v) throw ParseError("non-numeric token '" + std::string(tok.text) + "'", line_no, tok.column);
      const bool is_nodata = nodata && *v == *nodata;
      if (!is_nodata && (!std::isfinite(*v) || *v < 0.0)) {
        throw ParseError("thickness must be finite and nonnegative, got '" + std::string(tok.text) + "'", line_no,
                         tok.column);
      }
      values.push_back(is_nodata ? 0.0 : *v);
      mask.push_back(is_nodata);
    }
    ++data_rows;
  }

  if (!in_data) {
    require_header(line_no);
  }
  if (data_rows != static_cast<std::size_t>(*nrows)) {
    throw ParseError("wrong cell count: " + std::to_string(data_rows) + " data lines, expected " +
                         std::to_string(static_cast<std::size_t>(*nrows)),
                     line_no, 0);
  }
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return !b; })) {
    throw ParseError("all cells are nodata", 0, 0);
  }

  GridSpec grid;
  grid.n_rows = static_cast<std::size_t>(*nrows);
  grid.n_cols = static_cast<std::size_t>(*ncols);
  grid.cell_size = *cellsize;
  grid.origin_lon = x_center ? *xll - *cellsize / 2 : *xll;
  grid.origin_lat = y_center ? *yll - *cellsize / 2 : *yll;
  return HeightField(year_label, grid, std::move(values), std::move(mask),
                     nodata.value_or(HeightField::kDefaultNodata));
}

inline HeightField parse_ascii_grid(std::string_view text, const std::string& year_label) {
  std::istringstream in{std::string(text)};
  return parse_ascii_grid(in, year_label);
}

inline std::string to_ascii_grid(const HeightField& field) {
  auto num = [](double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  const GridSpec& g = field.grid();
  std::string out;
  out += "ncols " + std::to_string(g.n_cols) + "\n";
  out += "nrows " + std::to_string(g.n_rows) + "\n";
  out += "xllcorner " + num(g.origin_lon) + "\n";
  out += "yllcorner " + num(g.origin_lat) + "\n";
  out += "cellsize " + num(g.cell_size) + "\n";
  out += "NODATA_value " + num(field.nodata_value()) + "\n";
  for (std::size_t r = 0; r < g.n_rows; ++r) {
    for (std::size_t c = 0; c < g.n_cols; ++c) {
      if (c) out += ' ';
      out += num(field.is_nodata(r, c) ? field.nodata_value() : field.value(r, c));
    }
    out += '\n';
  }
  return out;
}

inline HeightField read_ascii_grid(const std::filesystem::path& path, const std::string& year_label) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open grid file " + path.string());
  return parse_ascii_grid(in, year_label);
}

// Deterministic stand-in terrain: a sum of Gaussian bumps with random centers,
// widths and amplitudes, rescaled so the peak equals max_height.
inline HeightField synthesize_field(std::uint64_t seed, std::size_t n_rows, std::size_t n_cols,
                                    std::size_t n_bumps, double max_height, std::string year_label = "synthetic") {
  if (n_rows < 8 || n_cols < 8) throw ValidationError("synthetic fields need at least 8x8 cells");
  if (!(max_height > 0.0)) throw ValidationError("max_height must be positive");

  GridSpec grid{n_rows, n_cols, 0.0, 0.0, 1.0};
  std::vector<double> values(grid.size(), 0.0);
  Rng rng(mix_seed(seed));
  const double extent = static_cast<double>(std::min(n_rows, n_cols));
  const double min_sigma = std::max(2.0, extent / 8.0);
  const double max_sigma = std::max(3.0, extent / 3.0);

  for (std::size_t b = 0; b < n_bumps; ++b) {
    const double cr = rng.uniform(0.0, static_cast<double>(n_rows - 1));
    const double cc = rng.uniform(0.0, static_cast<double>(n_cols - 1));
    const double sigma = rng.uniform(min_sigma, max_sigma);
    const double amp = rng.uniform(0.3, 1.0);
    for (std::size_t r = 0; r < n_rows; ++r) {
      for (std::size_t c = 0; c < n_cols; ++c) {
        const double dr = static_cast<double>(r) - cr;
        const double dc = static_cast<double>(c) - cc;
        values[grid.index(r, c)] += amp * std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
      }
    }
  }

  const double peak = *std::max_element(values.begin(), values.end());
  if (peak > 0.0) {
    for (double& v : values) v = std::clamp(v / peak * max_height, 0.0, max_height);
  }
  return HeightField(std::move(year_label), grid, std::move(values), std::vector<bool>(grid.size(), false));
}

// Manifest: {"years": [{"year_label": "...", "path": "..."}, ...]} or the bare
// array. Relative paths resolve against the manifest's directory.
inline Dataset load_dataset_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open dataset manifest " + manifest_path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("dataset manifest is not valid JSON: " + std::string(e.what()));
  }
  const nlohmann::json& entries = doc.is_object() ? doc.value("years", nlohmann::json::array()) : doc;
  if (!entries.is_array()) throw ValidationError("dataset manifest must list year entries");
  std::vector<HeightField> fields;
  for (const auto& e : entries) {
    if (!e.is_object() || !e.contains("year_label") || !e.contains("path")) {
      throw ValidationError("dataset manifest entries need 'year_label' and 'path'");
    }
    std::filesystem::path p = e.at("path").get<std::string>();
    if (p.is_relative()) p = manifest_path.parent_path() / p;
    fields.push_back(read_ascii_grid(p, e.at("year_label").get<std::string>()));
  }
  return validate_dataset(std::move(fields));
}

// Writes one .asc per year plus manifest.json into dir.
inline std::filesystem::path write_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  nlohmann::json years = nlohmann::json::array();
  for (const auto& f : dataset.fields()) {
    const std::string name = f.year_label() + ".asc";
    std::ofstream out(dir / name, std::ios::binary);
    out << to_ascii_grid(f);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    years.push_back({{"year_label", f.year_label()}, {"path", name}});
  }
  const auto manifest = dir / "manifest.json";
  std::ofstream out(manifest, std::ios::binary);
  out << nlohmann::json{{"years", years}}.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + manifest.string());
  return manifest;
}

// Study-year labels used for synthetic datasets: 2010, 2012, ...
inline Dataset synthesize_dataset(std::uint64_t seed, std::size_t n_years, std::size_t n_rows = 64,
                                  std::size_t n_cols = 64, std::size_t n_bumps = 6, double max_height = 100.0) {
  std::vector<HeightField> fields;
  for (std::size_t i = 0; i < n_years; ++i) {
    fields.push_back(synthesize_field(seed + i, n_rows, n_cols, n_bumps, max_height,
                                      std::to_string(2010 + 2 * i)));
  }
  return validate_dataset(std::move(fields));
}

}  // namespace surfgraph

#pragma once

// CSV ingest, flat key=value config files, and the fixed numeric text format
// used by every output table.

#include "mlport/core.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace mlport::io {

/// Ten significant digits; "-" is written by callers for infeasible cells.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string format_cell(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? format_number(*v) : std::string("-");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// CSV

/// RFC-4180 records. Quoted fields may hold commas, doubled quotes and line
/// breaks; CRLF and LF line endings are both accepted. Blank lines are skipped.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  std::size_t i = 0;
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;  // UTF-8 BOM

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    was_quoted = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };

  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || was_quoted) {
          throw ParseFailure(ErrorKind::ParseError, rows.size() + 1, row.size() + 1, "stray quote");
        }
        quoted = true;
        was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        end_row();
        break;
      default:
        if (was_quoted) {
          throw ParseFailure(ErrorKind::ParseError, rows.size() + 1, row.size() + 1, "text after closing quote");
        }
        field.push_back(c);
    }
  }
  if (quoted) throw ParseFailure(ErrorKind::ParseError, rows.size() + 1, row.size() + 1, "unterminated quote");
  if (!field.empty() || !row.empty() || was_quoted) end_row();
  return rows;
}

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

struct IngestOptions {
  std::string rf_column;                 // subtracted from every asset, then dropped
  std::optional<double> drop_above;      // rows with any return above this are dropped
};

struct IngestReport {
  std::vector<std::string> dropped_periods;
};

/// Header: period label column, then asset labels. Rows keep file order.
/// Coordinates in errors are 1-based file records and columns.
inline ReturnsMatrix parse_returns_csv(const std::string& text, const IngestOptions& opts = {},
                                       IngestReport* report = nullptr) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw ParseFailure(ErrorKind::ParseError, 1, 1, "empty file");
  const auto& header = rows.front();
  if (header.size() < 2) throw ParseFailure(ErrorKind::ParseError, 1, header.size(), "need a period column and at least one asset");

  std::vector<std::string> labels;
  std::map<std::string, std::size_t> seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string label = trim(header[c]);
    if (label.empty()) throw ParseFailure(ErrorKind::MissingValue, 1, c + 1, "empty asset label");
    if (!seen.emplace(label, c).second) {
      throw ParseFailure(ErrorKind::DuplicateAssetLabel, 1, c + 1, "duplicate asset label '" + label + "'");
    }
    labels.push_back(label);
  }
  std::optional<std::size_t> rf_index;
  if (!opts.rf_column.empty()) {
    auto it = seen.find(opts.rf_column);
    if (it == seen.end()) throw Error(ErrorKind::ConfigError, "risk-free column '" + opts.rf_column + "' not in header");
    rf_index = it->second - 1;
  }
  const std::size_t width = labels.size();
  if (rows.size() < 2) throw ParseFailure(ErrorKind::ParseError, 2, 1, "no data rows");

  std::vector<std::vector<double>> values;
  std::vector<std::string> periods;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != width + 1) {
      throw ParseFailure(ErrorKind::ParseError, r + 1, row.size() < width + 1 ? row.size() + 1 : width + 2,
                         "expected " + std::to_string(width + 1) + " fields, found " + std::to_string(row.size()));
    }
    const std::string period = trim(row[0]);
    if (period.empty()) throw ParseFailure(ErrorKind::MissingValue, r + 1, 1, "empty period label");
    std::vector<double> line(width);
    for (std::size_t c = 0; c < width; ++c) {
      const std::string cell = trim(row[c + 1]);
      if (cell.empty()) throw ParseFailure(ErrorKind::MissingValue, r + 1, c + 2, "missing value");
      const auto v = detail::parse_number(cell[0] == '+' ? cell.substr(1) : cell);
      if (!v || !std::isfinite(*v)) throw ParseFailure(ErrorKind::ParseError, r + 1, c + 2, "not a finite decimal '" + cell + "'");
      line[c] = *v;
    }
    if (!periods.empty() && !detail::period_less(periods.back(), period)) {
      throw ParseFailure(ErrorKind::ParseError, r + 1, 1, "period '" + period + "' does not increase");
    }
    periods.push_back(period);
    values.push_back(std::move(line));
  }

  std::vector<std::string> assets;
  for (std::size_t c = 0; c < width; ++c) {
    if (!rf_index || c != *rf_index) assets.push_back(labels[c]);
  }
  if (assets.empty()) throw Error(ErrorKind::ConfigError, "no asset columns besides the risk-free column");

  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < values.size(); ++r) {
    bool drop = false;
    if (opts.drop_above) {
      for (std::size_t c = 0; c < width; ++c) {
        if ((!rf_index || c != *rf_index) && values[r][c] > *opts.drop_above) drop = true;
      }
    }
    if (drop) {
      if (report) report->dropped_periods.push_back(periods[r]);
    } else {
      keep.push_back(r);
    }
  }
  if (keep.empty()) throw Error(ErrorKind::InvalidArgument, "every row was dropped by the return filter");

  Eigen::MatrixXd data(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(assets.size()));
  std::vector<std::string> kept_periods;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto& line = values[keep[i]];
    const double rf = rf_index ? line[*rf_index] : 0.0;
    Eigen::Index out_c = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (rf_index && c == *rf_index) continue;
      data(static_cast<Eigen::Index>(i), out_c++) = line[c] - rf;
    }
    kept_periods.push_back(periods[keep[i]]);
  }
  return ReturnsMatrix(std::move(data), std::move(assets), std::move(kept_periods));
}

inline ReturnsMatrix ingest_csv(const std::filesystem::path& path, const IngestOptions& opts = {},
                                IngestReport* report = nullptr) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::IoError, "input '" + path.string() + "' does not exist");
  return parse_returns_csv(read_file(path), opts, report);
}

// ---------------------------------------------------------------------------
// Flat key=value configuration

/// One `key = value` per line; `#` starts a comment; later keys override.
inline std::map<std::string, std::string> parse_config(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseFailure(ErrorKind::ConfigError, number, 1, "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseFailure(ErrorKind::ConfigError, number, 1, "empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Population files

/// {"mu": [...], "sigma": [[...], ...], "r_bar": 1.0}; r_bar may instead be
/// given through "alpha" and "r_f".
inline PopulationSpec population_from_json(const nlohmann::json& j) {
  try {
    const auto mu_v = j.at("mu").get<std::vector<double>>();
    const auto sigma_v = j.at("sigma").get<std::vector<std::vector<double>>>();
    const auto m = static_cast<Eigen::Index>(mu_v.size());
    Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(mu_v.data(), m);
    if (static_cast<Eigen::Index>(sigma_v.size()) != m) throw Error(ErrorKind::ConfigError, "sigma row count differs from mu");
    Eigen::MatrixXd sigma(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto& row = sigma_v[static_cast<std::size_t>(r)];
      if (static_cast<Eigen::Index>(row.size()) != m) throw Error(ErrorKind::ConfigError, "sigma is not square");
      for (Eigen::Index c = 0; c < m; ++c) sigma(r, c) = row[static_cast<std::size_t>(c)];
    }
    if (j.contains("alpha")) {
      return PopulationSpec::from_risk_aversion(mu, sigma, j.at("alpha").get<double>(), j.value("r_f", 0.0));
    }
    return PopulationSpec(mu, sigma, j.value("r_bar", 1.0));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("population file: ") + e.what());
  }
}

inline nlohmann::json population_to_json(const PopulationSpec& pop) {
  nlohmann::json j;
  j["mu"] = std::vector<double>(pop.mu().data(), pop.mu().data() + pop.m());
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < pop.m(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(pop.m()));
    for (Eigen::Index c = 0; c < pop.m(); ++c) row[static_cast<std::size_t>(c)] = pop.sigma()(r, c);
    rows.push_back(row);
  }
  j["sigma"] = rows;
  j["r_bar"] = pop.r_bar();
  return j;
}

inline PopulationSpec load_population(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::IoError, "population '" + path.string() + "' does not exist");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("population file: ") + e.what());
  }
  return population_from_json(j);
}

}  // namespace mlport::io

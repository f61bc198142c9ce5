#include "bartsens/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace bartsens {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool is_missing_token(const std::string& s) {
  if (s.empty()) return true;
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(c)));
  return lower == "na" || lower == "nan" || lower == "null";
}

}  // namespace

ObservationSet ingest_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ingest_csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("ingest_csv: empty file '" + path + "'");
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);

  std::unordered_map<std::string, int> column_of;
  for (std::size_t j = 0; j < header.size(); ++j) column_of[header[j]] = static_cast<int>(j);

  auto require_column = [&](const std::string& name) {
    auto it = column_of.find(name);
    if (it == column_of.end())
      throw std::runtime_error("ingest_csv: missing required column '" + name + "'");
    return it->second;
  };

  const int g_col = require_column(schema.treatment);
  const int b_col = require_column(schema.outcome);
  int label_col = -1;
  if (!schema.label.empty()) label_col = require_column(schema.label);

  std::vector<std::string> cov_names;
  std::vector<int> cov_cols;
  if (schema.covariates.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      int jj = static_cast<int>(j);
      if (jj == g_col || jj == b_col || jj == label_col) continue;
      cov_names.push_back(header[j]);
      cov_cols.push_back(jj);
    }
  } else {
    for (const std::string& name : schema.covariates) {
      cov_cols.push_back(require_column(name));
      cov_names.push_back(name);
    }
  }
  if (cov_names.empty()) throw std::runtime_error("ingest_csv: no covariate columns");

  // Missing values are legal only for covariates paired with an indicator.
  std::vector<int> missing_indicator_col(cov_cols.size(), -1);
  for (std::size_t k = 0; k < cov_names.size(); ++k) {
    auto it = column_of.find(cov_names[k] + schema.missing_suffix);
    if (it != column_of.end()) missing_indicator_col[k] = it->second;
  }

  ObservationSet out;
  out.covariate_names = cov_names;
  std::vector<double> values;
  std::vector<std::int8_t> g, b;
  std::vector<std::string> labels;

  int row_number = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() < header.size()) {
      throw std::runtime_error("ingest_csv: row " + std::to_string(row_number) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(header.size()));
    }
    auto parse_binary = [&](int col, const std::string& what) -> std::int8_t {
      const std::string cell = trim(cells[col]);
      if (cell == "0") return 0;
      if (cell == "1") return 1;
      throw std::runtime_error("ingest_csv: row " + std::to_string(row_number) + ": " + what +
                               " value '" + cell + "' is not 0/1");
    };
    g.push_back(parse_binary(g_col, "treatment (" + schema.treatment + ")"));
    b.push_back(parse_binary(b_col, "outcome (" + schema.outcome + ")"));
    if (label_col >= 0) labels.push_back(trim(cells[label_col]));

    for (std::size_t k = 0; k < cov_cols.size(); ++k) {
      const std::string cell = trim(cells[cov_cols[k]]);
      if (is_missing_token(cell)) {
        if (missing_indicator_col[k] < 0) {
          throw std::runtime_error("ingest_csv: row " + std::to_string(row_number) +
                                   ": missing value in '" + cov_names[k] +
                                   "' without a paired " + cov_names[k] + schema.missing_suffix +
                                   " column");
        }
        values.push_back(0.0);
        ++out.imputed_count;
        continue;
      }
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0' || !std::isfinite(v)) {
        throw std::runtime_error("ingest_csv: row " + std::to_string(row_number) +
                                 ": unparseable numeric '" + cell + "' in column '" +
                                 cov_names[k] + "'");
      }
      values.push_back(v);
    }
  }

  const int n = static_cast<int>(g.size());
  if (n == 0) throw std::runtime_error("ingest_csv: no data rows in '" + path + "'");
  out.X.rows = n;
  out.X.cols = static_cast<int>(cov_names.size());
  out.X.values = std::move(values);
  out.G = std::move(g);
  out.B = std::move(b);
  out.labels = std::move(labels);
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows,
               const std::vector<std::string>& comment_lines) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "'");
  for (const auto& c : comment_lines) out << "# " << c << "\n";
  for (std::size_t j = 0; j < header.size(); ++j)
    out << header[j] << (j + 1 < header.size() ? "," : "");
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << row[j] << (j + 1 < row.size() ? "," : "");
    out << "\n";
  }
}

}  // namespace bartsens

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lmqc/errors.hpp"

namespace lmqc {

/// Flat key = value configuration with '#' comments and dotted keys.
class ParamMap {
public:
  ParamMap() = default;

  static ParamMap parse(std::istream& is) {
    ParamMap out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
      };
      if (trim(line).empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ParameterError("config line " + std::to_string(lineno) + ": empty key");
      out.values_[key] = value;
    }
    return out;
  }

  static ParamMap parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file " + path);
    return parse(is);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ParameterError("missing config key '" + key + "'");
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ParameterError("config key '" + key + "': not a number: " + it->second);
    }
  }

  long get_int(const std::string& key, long fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    const auto r = static_cast<long>(v);
    if (static_cast<double>(r) != v)
      throw ParameterError("config key '" + key + "': expected an integer");
    return r;
  }

  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::istringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        out.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ParameterError("config key '" + key + "': bad list entry: " + tok);
      }
    }
    if (out.empty()) throw ParameterError("config key '" + key + "': empty list");
    return out;
  }

  const std::map<std::string, std::string>& items() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

/// Rectangular numeric result table with an ordered metadata block.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  void add_row(std::vector<double> row) {
    if (row.size() != columns.size())
      throw ParameterError("ResultTable: row width does not match columns");
    rows.push_back(std::move(row));
  }

  void set_meta(const std::string& key, const std::string& value) {
    for (auto& [k, v] : metadata)
      if (k == key) {
        v = value;
        return;
      }
    metadata.emplace_back(key, value);
  }

  void set_meta(const std::string& key, double value) {
    std::ostringstream ss;
    ss.precision(12);
    ss << value;
    set_meta(key, ss.str());
  }

  std::string meta(const std::string& key) const {
    for (const auto& [k, v] : metadata)
      if (k == key) return v;
    throw ParameterError("ResultTable: missing metadata key " + key);
  }

  double meta_double(const std::string& key) const { return std::stod(meta(key)); }

  void write_csv(std::ostream& os) const {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) os << ',';
      os << columns[c];
    }
    os << '\n';
    os.precision(12);
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) os << ',';
        os << row[c];
      }
      os << '\n';
    }
  }

  void write_csv_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    write_csv(os);
  }

  void write_metadata(std::ostream& os) const {
    for (const auto& [k, v] : metadata) os << k << " = " << v << '\n';
  }

  void write_metadata_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    write_metadata(os);
  }
};

/// Minimal SVG line chart: first column is the x axis, remaining columns are
/// traces. Convenience output; the CSV stays the contract.
inline void write_svg_plot(const ResultTable& t, const std::string& path) {
  if (t.columns.size() < 2 || t.rows.empty()) throw ParameterError("plot: nothing to draw");
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  const double w = 720, h = 440, ml = 60, mr = 20, mt = 20, mb = 40;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& r : t.rows) {
    xmin = std::min(xmin, r[0]);
    xmax = std::max(xmax, r[0]);
    for (std::size_t c = 1; c < r.size(); ++c) {
      ymin = std::min(ymin, r[c]);
      ymax = std::max(ymax, r[c]);
    }
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };
  const char* colors[] = {"#1f77b4", "#ff7f0e", "#d62728", "#2ca02c", "#9467bd"};
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
     << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  os << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
     << "' stroke='black'/>\n";
  os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
     << "' stroke='black'/>\n";
  os << "<text x='" << (w / 2) << "' y='" << h - 8 << "' text-anchor='middle' font-size='13'>"
     << t.columns[0] << "</text>\n";
  for (std::size_t c = 1; c < t.columns.size() && c <= 5; ++c) {
    os << "<polyline fill='none' stroke='" << colors[(c - 1) % 5] << "' stroke-width='1.5' points='";
    for (const auto& r : t.rows) os << px(r[0]) << ',' << py(r[c]) << ' ';
    os << "'/>\n";
    os << "<text x='" << w - mr - 5 << "' y='" << mt + 16 * c
       << "' text-anchor='end' font-size='12' fill='" << colors[(c - 1) % 5] << "'>"
       << t.columns[c] << "</text>\n";
  }
  os << "</svg>\n";
}

} // namespace lmqc

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "budgetwise/errors.hpp"
#include "budgetwise/simkit.hpp"

namespace budgetwise {

inline constexpr const char* kCsvHeader = "setting,task,target,method,budget,mean_risk,se,replications";

/// Full-precision decimal rendering (17 significant digits round-trips).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// One row per curve point; missing cells leave mean_risk and se empty.
inline std::string curves_to_csv(const std::string& setting, const std::string& task,
                                 const std::string& target,
                                 const std::vector<RiskCurve>& curves) {
  std::string out(kCsvHeader);
  out.push_back('\n');
  for (const auto& curve : curves) {
    for (const auto& pt : curve.points) {
      out += setting;
      out.push_back(',');
      out += task;
      out.push_back(',');
      out += target;
      out.push_back(',');
      out += curve.method;
      out.push_back(',');
      out += format_double(pt.budget);
      out.push_back(',');
      if (!std::isnan(pt.mean_risk)) {
        out += format_double(pt.mean_risk);
        out.push_back(',');
        out += format_double(pt.se);
      } else {
        out.push_back(',');
      }
      out.push_back(',');
      out += std::to_string(pt.replications);
      out.push_back('\n');
    }
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file `" + path + "`");
  out << content;
  if (!out) throw ConfigError("failed writing output file `" + path + "`");
}

struct CsvRow {
  std::string setting;
  std::string task;
  std::string target;
  std::string method;
  double budget;
  std::optional<double> mean_risk;
  std::optional<double> se;
  int replications;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_csv_double(const std::string& s, int row, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("CSV row " + std::to_string(row) + ": bad " + what + " value `" + s + "`");
  }
}

}  // namespace detail

/// Parses a risk-curve CSV, validating the schema. Row numbers in error
/// messages are 1-based and count the header.
inline std::vector<CsvRow> parse_risk_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("CSV row 1: empty file");
  {
    std::string header = line;
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != kCsvHeader) {
      throw ConfigError("CSV row 1: header must be `" + std::string(kCsvHeader) + "`");
    }
  }
  std::vector<CsvRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = detail::split_csv_line(line);
    if (f.size() != 8) {
      throw ConfigError("CSV row " + std::to_string(lineno) + ": expected 8 fields, got " +
                        std::to_string(f.size()));
    }
    CsvRow row;
    row.setting = f[0];
    row.task = f[1];
    row.target = f[2];
    row.method = f[3];
    row.budget = detail::parse_csv_double(f[4], lineno, "budget");
    if (!f[5].empty()) row.mean_risk = detail::parse_csv_double(f[5], lineno, "mean_risk");
    if (!f[6].empty()) row.se = detail::parse_csv_double(f[6], lineno, "se");
    try {
      row.replications = std::stoi(f[7]);
    } catch (const std::exception&) {
      throw ConfigError("CSV row " + std::to_string(lineno) + ": bad replications value `" +
                        f[7] + "`");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<CsvRow> load_risk_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open CSV file `" + path + "`");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_risk_csv(buf.str());
}

}  // namespace budgetwise

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "budgetwise/csv.hpp"
#include "budgetwise/errors.hpp"

namespace budgetwise {

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Series {
  std::string method;
  std::vector<CsvRow> points;  // rows with a mean_risk, budget-ordered
};

/// Splits rows into per-method series, keeping first-appearance order and
/// dropping rows whose mean_risk is missing.
inline std::vector<Series> collect_series(const std::vector<CsvRow>& rows) {
  std::vector<Series> series;
  for (const auto& row : rows) {
    if (!row.mean_risk) continue;
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const Series& s) { return s.method == row.method; });
    if (it == series.end()) {
      series.push_back(Series{row.method, {}});
      it = series.end() - 1;
    }
    it->points.push_back(row);
  }
  for (auto& s : series) {
    std::stable_sort(s.points.begin(), s.points.end(),
                     [](const CsvRow& a, const CsvRow& b) { return a.budget < b.budget; });
  }
  return series;
}

inline const char* series_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

}  // namespace detail

/// Renders risk-vs-budget curves with +-2 SE bands into a standalone SVG.
/// The y axis switches to log scale when the spread of plotted risks exceeds
/// a factor of 50. The `theory` series is drawn dashed without a band.
inline std::string render_risk_svg(const std::vector<CsvRow>& rows) {
  const std::vector<detail::Series> series = detail::collect_series(rows);
  if (series.empty()) throw ConfigError("CSV has no plottable rows (all mean_risk empty)");

  const double width = 800.0, height = 600.0;
  const double left = 80.0, right = 160.0, top = 40.0, bottom = 60.0;

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  bool all_positive = true;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      const double lo = *p.mean_risk - 2.0 * p.se.value_or(0.0);
      const double hi = *p.mean_risk + 2.0 * p.se.value_or(0.0);
      xmin = std::min(xmin, p.budget);
      xmax = std::max(xmax, p.budget);
      ymin = std::min(ymin, *p.mean_risk);
      ymax = std::max(ymax, hi);
      if (lo <= 0.0) all_positive = false;
      (void)lo;
    }
  }
  if (xmax <= xmin) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  const bool log_y = all_positive && ymin > 0.0 && ymax / ymin > 50.0;
  if (!log_y) {
    ymin = std::min(ymin, 0.0);
    if (ymax <= ymin) ymax = ymin + 1.0;
  }

  auto sx = [&](double x) {
    return left + (x - xmin) / (xmax - xmin) * (width - left - right);
  };
  auto sy = [&](double y) {
    double t;
    if (log_y) {
      t = (std::log10(y) - std::log10(ymin)) / (std::log10(ymax) - std::log10(ymin));
    } else {
      t = (y - ymin) / (ymax - ymin);
    }
    return height - bottom - t * (height - top - bottom);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\">\n";
  svg += "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";

  // axes
  svg += "<line x1=\"" + detail::fmt(left) + "\" y1=\"" + detail::fmt(height - bottom) +
         "\" x2=\"" + detail::fmt(width - right) + "\" y2=\"" + detail::fmt(height - bottom) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + detail::fmt(left) + "\" y1=\"" + detail::fmt(top) + "\" x2=\"" +
         detail::fmt(left) + "\" y2=\"" + detail::fmt(height - bottom) + "\" stroke=\"black\"/>\n";

  // x ticks
  for (int i = 0; i <= 5; ++i) {
    const double x = xmin + (xmax - xmin) * i / 5.0;
    svg += "<line x1=\"" + detail::fmt(sx(x)) + "\" y1=\"" + detail::fmt(height - bottom) +
           "\" x2=\"" + detail::fmt(sx(x)) + "\" y2=\"" + detail::fmt(height - bottom + 5) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + detail::fmt(sx(x)) + "\" y=\"" + detail::fmt(height - bottom + 20) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + detail::fmt(x) + "</text>\n";
  }
  // y ticks
  if (log_y) {
    const int lo = static_cast<int>(std::floor(std::log10(ymin)));
    const int hi = static_cast<int>(std::ceil(std::log10(ymax)));
    for (int e = lo; e <= hi; ++e) {
      const double y = std::pow(10.0, e);
      if (y < ymin || y > ymax) continue;
      svg += "<line x1=\"" + detail::fmt(left - 5) + "\" y1=\"" + detail::fmt(sy(y)) +
             "\" x2=\"" + detail::fmt(left) + "\" y2=\"" + detail::fmt(sy(y)) +
             "\" stroke=\"black\"/>\n";
      svg += "<text x=\"" + detail::fmt(left - 8) + "\" y=\"" + detail::fmt(sy(y) + 4) +
             "\" font-size=\"12\" text-anchor=\"end\">1e" + std::to_string(e) + "</text>\n";
    }
  } else {
    for (int i = 0; i <= 5; ++i) {
      const double y = ymin + (ymax - ymin) * i / 5.0;
      svg += "<line x1=\"" + detail::fmt(left - 5) + "\" y1=\"" + detail::fmt(sy(y)) +
             "\" x2=\"" + detail::fmt(left) + "\" y2=\"" + detail::fmt(sy(y)) +
             "\" stroke=\"black\"/>\n";
      svg += "<text x=\"" + detail::fmt(left - 8) + "\" y=\"" + detail::fmt(sy(y) + 4) +
             "\" font-size=\"12\" text-anchor=\"end\">" + detail::fmt(y) + "</text>\n";
    }
  }
  svg += "<text x=\"" + detail::fmt((left + width - right) / 2) + "\" y=\"" +
         detail::fmt(height - 15) + "\" font-size=\"14\" text-anchor=\"middle\">budget</text>\n";
  svg += "<text x=\"20\" y=\"" + detail::fmt((top + height - bottom) / 2) +
         "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
         detail::fmt((top + height - bottom) / 2) + ")\">risk</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = detail::series_color(i);
    const bool theory = s.method == "theory";

    if (!theory && s.points.size() > 1) {
      std::string band = "<path d=\"";
      for (std::size_t j = 0; j < s.points.size(); ++j) {
        const auto& p = s.points[j];
        double hi = *p.mean_risk + 2.0 * p.se.value_or(0.0);
        if (log_y) hi = std::min(std::max(hi, ymin), ymax);
        band += (j == 0 ? "M" : "L") + detail::fmt(sx(p.budget)) + " " + detail::fmt(sy(hi));
      }
      for (std::size_t j = s.points.size(); j-- > 0;) {
        const auto& p = s.points[j];
        double lo = *p.mean_risk - 2.0 * p.se.value_or(0.0);
        if (log_y) lo = std::min(std::max(lo, ymin), ymax);
        if (!log_y && lo < ymin) lo = ymin;
        band += "L" + detail::fmt(sx(p.budget)) + " " + detail::fmt(sy(lo));
      }
      band += "Z\" fill=\"" + std::string(color) + "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
      svg += band;
    }

    std::string line = "<polyline points=\"";
    for (const auto& p : s.points) {
      line += detail::fmt(sx(p.budget)) + "," + detail::fmt(sy(*p.mean_risk)) + " ";
    }
    line += "\" fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"";
    if (theory) line += " stroke-dasharray=\"6 4\"";
    line += "/>\n";
    svg += line;
    if (s.points.size() == 1) {
      const auto& p = s.points.front();
      svg += "<circle cx=\"" + detail::fmt(sx(p.budget)) + "\" cy=\"" +
             detail::fmt(sy(*p.mean_risk)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }

    // legend entry
    const double ly = top + 20.0 * static_cast<double>(i);
    svg += "<line x1=\"" + detail::fmt(width - right + 10) + "\" y1=\"" + detail::fmt(ly) +
           "\" x2=\"" + detail::fmt(width - right + 40) + "\" y2=\"" + detail::fmt(ly) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"" +
           (theory ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    svg += "<text x=\"" + detail::fmt(width - right + 45) + "\" y=\"" + detail::fmt(ly + 4) +
           "\" font-size=\"12\">" + s.method + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

/// Gnuplot-script alternative to the native SVG backend.
inline std::string render_risk_gnuplot(const std::vector<CsvRow>& rows,
                                       const std::string& csv_path,
                                       const std::string& out_path) {
  const std::vector<detail::Series> series = detail::collect_series(rows);
  if (series.empty()) throw ConfigError("CSV has no plottable rows (all mean_risk empty)");
  double ymin = 1e300, ymax = -1e300;
  bool all_positive = true;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      ymin = std::min(ymin, *p.mean_risk);
      ymax = std::max(ymax, *p.mean_risk);
      if (*p.mean_risk - 2.0 * p.se.value_or(0.0) <= 0.0) all_positive = false;
    }
  }
  const bool log_y = all_positive && ymin > 0.0 && ymax / ymin > 50.0;

  std::string out;
  out += "set datafile separator ','\n";
  out += "set terminal svg size 800,600\n";
  out += "set output '" + out_path + "'\n";
  out += "set xlabel 'budget'\nset ylabel 'risk'\n";
  if (log_y) out += "set logscale y\n";
  out += "plot ";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    if (i > 0) out += ", \\\n     ";
    out += "'" + csv_path + "' using 5:(strcol(4) eq '" + s.method + "' ? $6 : 1/0) with lines";
    if (s.method == "theory") out += " dashtype 2";
    out += " title '" + s.method + "'";
  }
  out += "\n";
  return out;
}

}  // namespace budgetwise

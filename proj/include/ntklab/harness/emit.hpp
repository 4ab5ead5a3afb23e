#pragma once

// Text table, per-width plot data, and a minimal SVG line chart.

#include "ntklab/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ntklab {

namespace detail {

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// "min-max; *mean*", the asterisks standing in for bold.
inline std::string cell(const Stat3& s, int digits) {
  return fixed(s.min, digits) + "-" + fixed(s.max, digits) + "; *" + fixed(s.mean, digits) + "*";
}

}  // namespace detail

/// Columns: S, m, T, kappa_H, |D|, ||W_T-W_0||_F.
inline std::string emit_table(const std::vector<SweepRow>& rows) {
  std::vector<std::vector<std::string>> lines{
      {"S", "m", "T", "kappa_H", "|D|", "||W_T-W_0||_F"}};
  for (const auto& r : rows) {
    lines.push_back({std::to_string(r.S), std::to_string(r.m), detail::cell(r.T, 0),
                     detail::cell(r.kappa_H, 2), detail::cell(r.D_count, 0),
                     detail::cell(r.w_displacement, 2)});
  }
  std::vector<std::size_t> width(lines.front().size(), 0);
  for (const auto& l : lines)
    for (std::size_t c = 0; c < l.size(); ++c) width[c] = std::max(width[c], l[c].size());
  std::ostringstream out;
  for (const auto& l : lines) {
    for (std::size_t c = 0; c < l.size(); ++c) {
      out << (c ? " | " : "") << l[c];
      if (c + 1 < l.size()) out << std::string(width[c] - l[c].size(), ' ');
    }
    out << '\n';
  }
  return out.str();
}

inline double theory_kappa_d(Index m, Index n, Index S) {
  return std::cbrt(static_cast<double>(m) / (static_cast<double>(n) * static_cast<double>(S)));
}

inline constexpr const char* kPlotCsvHeader =
    "m,kappa_H_mean,kappa_D_mean,kappa_W_mean,theory_kappa_D";

/// One CSV text per width S, rows in increasing m.
inline std::map<Index, std::string> emit_plot_data(const std::vector<SweepRow>& rows, Index n) {
  std::map<Index, std::vector<const SweepRow*>> by_s;
  for (const auto& r : rows) by_s[r.S].push_back(&r);
  std::map<Index, std::string> out;
  for (auto& [S, group] : by_s) {
    std::sort(group.begin(), group.end(), [](auto* a, auto* b) { return a->m < b->m; });
    std::ostringstream csv;
    csv << kPlotCsvHeader << '\n';
    for (const SweepRow* r : group) {
      const double md = static_cast<double>(r->m);
      csv << r->m << ',' << format_number(r->kappa_H.mean) << ','
          << format_number(r->D_count.mean / (md * static_cast<double>(S))) << ','
          << format_number(r->w_displacement.mean / std::sqrt(md)) << ','
          << format_number(theory_kappa_d(r->m, n, S)) << '\n';
    }
    out[S] = csv.str();
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw std::invalid_argument("csv: no column named " + name);
  }
};

/// Numeric CSV with a header line. Every row must have the header's arity.
inline CsvTable parse_numeric_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ls(l);
    while (std::getline(ls, field, ',')) out.push_back(field);
    if (!l.empty() && l.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(in, line) || line.empty()) throw std::invalid_argument("csv: missing header");
  t.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != t.header.size())
      throw std::invalid_argument("csv: wrong field count on line " + std::to_string(lineno));
    std::vector<double> row;
    for (const auto& f : fields) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(f, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != f.size())
        throw std::invalid_argument("csv: non-numeric field '" + f + "' on line " + std::to_string(lineno));
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

struct SvgOptions {
  std::string title;
  std::string x_column = "m";
  std::vector<std::string> series;    // solid polylines
  std::vector<std::string> overlays;  // dashed (theory) polylines
  int width = 480;
  int height = 320;
};

/// Line chart of the chosen CSV columns against x_column.
inline std::string emit_svg(const std::string& csv_text, const SvgOptions& opt) {
  const CsvTable t = parse_numeric_csv(csv_text);
  const std::size_t xc = t.column(opt.x_column);
  std::vector<std::pair<std::size_t, bool>> cols;
  for (const auto& s : opt.series) cols.emplace_back(t.column(s), false);
  for (const auto& s : opt.overlays) cols.emplace_back(t.column(s), true);

  const double left = 60, right = 20, top = 30, bottom = 40;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!t.rows.empty()) {
    xmin = xmax = t.rows.front()[xc];
    ymin = std::numeric_limits<double>::infinity();
    ymax = -ymin;
    for (const auto& r : t.rows) {
      xmin = std::min(xmin, r[xc]);
      xmax = std::max(xmax, r[xc]);
      for (const auto& [c, dashed] : cols) {
        ymin = std::min(ymin, r[c]);
        ymax = std::max(ymax, r[c]);
      }
    }
    if (cols.empty()) ymin = 0, ymax = 1;
    ymin = std::min(ymin, 0.0);
    if (xmax == xmin) xmin -= 1, xmax += 1;
    if (ymax == ymin) ymax += 1;
  }
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };
  auto f2 = [](double v) { return detail::fixed(v, 2); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
      << opt.height << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << f2(left + pw / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
      << opt.title << "</text>\n";
  svg << "<line x1=\"" << f2(left) << "\" y1=\"" << f2(top + ph) << "\" x2=\"" << f2(left + pw)
      << "\" y2=\"" << f2(top + ph) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << f2(left) << "\" y1=\"" << f2(top) << "\" x2=\"" << f2(left) << "\" y2=\""
      << f2(top + ph) << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << f2(left + pw / 2) << "\" y=\"" << opt.height - 8
      << "\" text-anchor=\"middle\" font-size=\"12\">" << opt.x_column << "</text>\n";
  for (double v : {xmin, xmax})
    svg << "<text x=\"" << f2(px(v)) << "\" y=\"" << f2(top + ph + 14)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << format_number(v) << "</text>\n";
  for (double v : {ymin, ymax})
    svg << "<text x=\"" << f2(left - 4) << "\" y=\"" << f2(py(v) + 3)
        << "\" text-anchor=\"end\" font-size=\"10\">" << format_number(v) << "</text>\n";

  std::size_t color = 0;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const auto [c, dashed] = cols[k];
    const char* stroke = dashed ? "#2ca02c" : palette[color++ % 5];
    if (t.rows.size() == 1) {
      svg << "<circle cx=\"" << f2(px(t.rows[0][xc])) << "\" cy=\"" << f2(py(t.rows[0][c]))
          << "\" r=\"3\" fill=\"" << stroke << "\"/>\n";
    } else if (t.rows.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\""
          << (dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
      for (std::size_t i = 0; i < t.rows.size(); ++i)
        svg << (i ? " " : "") << f2(px(t.rows[i][xc])) << ',' << f2(py(t.rows[i][c]));
      svg << "\"/>\n";
    }
    svg << "<text x=\"" << f2(left + pw - 4) << "\" y=\"" << f2(top + 12 + 12 * static_cast<double>(k))
        << "\" text-anchor=\"end\" font-size=\"10\" fill=\"" << stroke << "\">" << t.header[c]
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace ntklab

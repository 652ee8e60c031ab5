#pragma once

// Minimal SVG line charts from experiment CSV tables.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sectornet/errors.hpp"
#include "sectornet/io.hpp"

namespace sectornet {

struct ChartSpec {
  std::string title;
  std::string x;
  std::vector<std::string> y;       // one series per y column and group
  std::vector<std::string> group;   // columns whose values split series
  std::string x_label;
  std::string y_label;
};

/// Column presets for the tables the CLI writes.
inline ChartSpec chart_preset(const std::string& kind) {
  if (kind == "gain-sweep") return {"mean mu gain vs K", "k", {"mean_g_mu"}, {"nodes", "range", "phi"}, "K", "g_mu"};
  if (kind == "theta-cdf") return {"CDF of theta_th", "theta", {"cdf"}, {"nodes"}, "theta_th (deg)", "CDF"};
  if (kind == "lb-sweep") return {"approximation bound vs K", "k", {"mean_lb"}, {"nodes", "range", "phi"}, "K", "LB"};
  if (kind == "gain-cdf") return {"CDF of mu gain", "g_mu", {"cdf"}, {"k"}, "g_mu", "CDF"};
  if (kind == "grid-capacity")
    return {"grid backlog vs arrival rate", "alpha", {"final_backlog"}, {"policy"}, "alpha", "final backlog"};
  if (kind == "mwm-timing")
    return {"scheduling time", "alpha", {"component_micros", "whole_graph_micros"}, {}, "alpha", "micros"};
  if (kind == "trace") return {"total backlog", "slot", {"total_backlog"}, {}, "slot", "packets"};
  throw Error(ErrorCode::Precondition, "unknown chart kind " + kind);
}

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

namespace detail {

inline double parse_cell(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw Error(ErrorCode::MalformedCsv, "not a number: '" + s + "'");
  return v;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

/// Splits the table into series; non-finite points are dropped.
inline std::vector<Series> extract_series(const Table& t, const ChartSpec& spec) {
  auto col = [&](const std::string& name) {
    const int c = t.column(name);
    if (c < 0) throw Error(ErrorCode::MalformedCsv, "missing column " + name);
    return c;
  };
  const int xc = col(spec.x);
  std::vector<int> gc;
  for (const auto& g : spec.group) gc.push_back(col(g));
  std::vector<Series> out;
  std::map<std::string, std::size_t> index;
  for (const auto& yname : spec.y) {
    const int yc = col(yname);
    for (const auto& row : t.rows) {
      std::string key;
      for (std::size_t i = 0; i < gc.size(); ++i) key += (i ? " " : "") + spec.group[i] + "=" + row[gc[i]];
      if (spec.y.size() > 1 || key.empty()) key = key.empty() ? yname : yname + " " + key;
      auto [it, fresh] = index.try_emplace(key, out.size());
      if (fresh) out.push_back({key, {}});
      const double x = detail::parse_cell(row[xc]);
      const double y = detail::parse_cell(row[yc]);
      if (std::isfinite(x) && std::isfinite(y)) out[it->second].points.push_back({x, y});
    }
  }
  std::erase_if(out, [](const Series& s) { return s.points.empty(); });
  if (out.empty()) throw Error(ErrorCode::MalformedCsv, "no plottable points");
  return out;
}

inline std::string render_svg(const std::vector<Series>& series, const ChartSpec& spec) {
  require(!series.empty(), ErrorCode::MalformedCsv, "nothing to plot");
  constexpr double W = 640, H = 420, L = 70, R = 180, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    require(!s.points.empty(), ErrorCode::MalformedCsv, "empty series " + s.name);
    for (auto [x, y] : s.points) {
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::ostringstream o;
  o.precision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << detail::xml_escape(spec.title)
    << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">" << xv
      << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << yv
      << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << detail::xml_escape(spec.x_label.empty() ? spec.x : spec.x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << detail::xml_escape(spec.y_label) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = palette[i % std::size(palette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[i].points.size(); ++k) {
      const auto [x, y] = series[i].points[k];
      o << (k ? " " : "") << px(x) << ',' << py(y);
    }
    o << "\"/>\n";
    const double ly = T + 14 + 16.0 * static_cast<double>(i);
    o << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">"
      << detail::xml_escape(series[i].name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline std::string chart_from_csv(const std::string& csv_text, const ChartSpec& spec) {
  const auto t = parse_csv(csv_text);
  if (t.rows.empty()) throw Error(ErrorCode::MalformedCsv, "table has no rows");
  return render_svg(extract_series(t, spec), spec);
}

}  // namespace sectornet

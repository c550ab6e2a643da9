#pragma once

// Minimal static SVG line and stem plots for run artifacts.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace etmas::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

inline const char* palette(std::size_t k) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  return colors[k % 8];
}

namespace detail {

struct Frame {
  double x0, x1, y0, y1;
  double w = 720, h = 360, left = 64, right = 150, top = 36, bottom = 44;

  [[nodiscard]] double px(double x) const { return left + (x - x0) / (x1 - x0) * (w - left - right); }
  [[nodiscard]] double py(double y) const { return top + (y1 - y) / (y1 - y0) * (h - top - bottom); }
};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

inline Frame frame_for(const std::vector<Series>& series, bool include_zero) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) {
      if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1;
  if (!std::isfinite(y0)) y0 = 0, y1 = 1;
  if (include_zero) y0 = std::min(y0, 0.0);
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  return Frame{x0, x1, y0 - pad, y1 + pad};
}

inline void axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.w << "\" height=\"" << f.h << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << f.w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << escape(title) << "</text>\n";
  const double xl = f.left, xr = f.w - f.right, yt = f.top, yb = f.h - f.bottom;
  os << "<rect x=\"" << xl << "\" y=\"" << yt << "\" width=\"" << xr - xl << "\" height=\"" << yb - yt
     << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = f.x0 + (f.x1 - f.x0) * k / 5.0;
    const double yv = f.y0 + (f.y1 - f.y0) * k / 5.0;
    os << "<text x=\"" << f.px(xv) << "\" y=\"" << yb + 14 << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    os << "<text x=\"" << xl - 4 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
    os << "<line x1=\"" << xl << "\" x2=\"" << xr << "\" y1=\"" << f.py(yv) << "\" y2=\"" << f.py(yv)
       << "\" stroke=\"#eee\"/>\n";
  }
  os << "<text x=\"" << (xl + xr) / 2 << "\" y=\"" << f.h - 8 << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
  os << "<text x=\"14\" y=\"" << (yt + yb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << (yt + yb) / 2
     << ")\">" << escape(ylabel) << "</text>\n";
}

inline void legend(std::ostringstream& os, const Frame& f, const std::vector<Series>& series) {
  double y = f.top + 10;
  for (const auto& s : series) {
    const double x = f.w - f.right + 12;
    os << "<line x1=\"" << x << "\" x2=\"" << x + 20 << "\" y1=\"" << y << "\" y2=\"" << y << "\" stroke=\"" << s.color
       << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
    os << "<text x=\"" << x + 26 << "\" y=\"" << y + 4 << "\">" << escape(s.label) << "</text>\n";
    y += 16;
  }
}

}  // namespace detail

/// Polyline plot; series are decimated to at most ~2000 points each.
inline std::string line_plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                             const std::string& ylabel) {
  const auto f = detail::frame_for(series, false);
  std::ostringstream os;
  detail::axes(os, f, title, xlabel, ylabel);
  for (const auto& s : series) {
    const std::size_t stride = std::max<std::size_t>(1, s.x.size() / 2000);
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.4\""
       << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
    for (std::size_t k = 0; k < s.x.size(); k += stride) {
      if (std::isfinite(s.y[k])) os << detail::num(f.px(s.x[k])) << "," << detail::num(f.py(s.y[k])) << " ";
    }
    os << "\"/>\n";
  }
  detail::legend(os, f, series);
  os << "</svg>\n";
  return os.str();
}

/// Stems from zero at each (x, y): release instants against interval length.
inline std::string stem_plot(const Series& s, const std::string& title, const std::string& xlabel,
                             const std::string& ylabel) {
  const auto f = detail::frame_for({s}, true);
  std::ostringstream os;
  detail::axes(os, f, title, xlabel, ylabel);
  const double base = f.py(0.0);
  for (std::size_t k = 0; k < s.x.size(); ++k) {
    const double x = f.px(s.x[k]);
    const double y = f.py(s.y[k]);
    os << "<line x1=\"" << detail::num(x) << "\" x2=\"" << detail::num(x) << "\" y1=\"" << detail::num(base) << "\" y2=\""
       << detail::num(y) << "\" stroke=\"" << s.color << "\" stroke-width=\"0.8\"/>"
       << "<circle cx=\"" << detail::num(x) << "\" cy=\"" << detail::num(y) << "\" r=\"1.6\" fill=\"" << s.color << "\"/>\n";
  }
  detail::legend(os, f, {s});
  os << "</svg>\n";
  return os.str();
}

}  // namespace etmas::svg

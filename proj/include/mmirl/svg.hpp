#ifndef MMIRL_SVG_HPP_
#define MMIRL_SVG_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmirl {

/// Minimal native SVG line charts: stacked panels sharing an x axis, with
/// axes, ticks, legends and a title. No external plotting dependency.
struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgPanel {
  std::string y_label;
  std::vector<SvgSeries> series;
};

namespace svg_detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Range {
  double lo = 0.0, hi = 1.0;
};

inline Range nice_range(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::max(1e-9, std::abs(lo) * 0.1 + 0.5);
    return {lo - pad, hi + pad};
  }
  const double pad = (hi - lo) * 0.06;
  return {lo - pad, hi + pad};
}

inline std::vector<double> ticks(const Range& r, int target = 5) {
  const double span = r.hi - r.lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> out;
  const double first = std::ceil(r.lo / step) * step;
  for (double t = first; t <= r.hi + 1e-12 * span; t += step) out.push_back(t);
  return out;
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f6fb2", "#d1495b", "#3c8d53", "#8d6a9f", "#c97b2d", "#4f7178"};
  return colors[i % 6];
}

}  // namespace svg_detail

inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::string& x_label, std::span<const SvgPanel> panels) {
  using namespace svg_detail;
  if (panels.empty()) throw std::invalid_argument("write_svg_chart: no panels");
  const int width = 760;
  const int panel_h = 230;
  const int margin_l = 64, margin_r = 16, margin_top = 34, margin_gap = 34;
  const int height = margin_top + static_cast<int>(panels.size()) * (panel_h + margin_gap) + 14;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
         " " + std::to_string(height) + "\">\n";
  out += "<style>text{font-family:sans-serif;font-size:11px;fill:#222}.t{font-size:14px}"
         ".ax{stroke:#444;stroke-width:1}.grid{stroke:#ddd;stroke-width:0.5}</style>\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text class=\"t\" x=\"" + std::to_string(width / 2) + "\" y=\"20\" text-anchor=\"middle\">" +
         title + "</text>\n";

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const SvgPanel& panel = panels[p];
    const int top = margin_top + static_cast<int>(p) * (panel_h + margin_gap);
    const int bottom = top + panel_h;
    const int left = margin_l, right = width - margin_r;

    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const auto& s : panel.series) {
      for (double v : s.x) {
        xlo = std::min(xlo, v);
        xhi = std::max(xhi, v);
      }
      for (double v : s.y) {
        ylo = std::min(ylo, v);
        yhi = std::max(yhi, v);
      }
    }
    if (panel.series.empty() || xlo > xhi) {
      xlo = 0.0;
      xhi = 1.0;
      ylo = 0.0;
      yhi = 1.0;
    }
    const Range xr = nice_range(xlo, xhi);
    const Range yr = nice_range(ylo, yhi);
    auto xpix = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * (right - left); };
    auto ypix = [&](double v) { return bottom - (v - yr.lo) / (yr.hi - yr.lo) * (panel_h - 18); };

    // grid + ticks
    for (double t : ticks(yr)) {
      const double yy = ypix(t);
      out += "<line class=\"grid\" x1=\"" + std::to_string(left) + "\" y1=\"" + fmt(yy) +
             "\" x2=\"" + std::to_string(right) + "\" y2=\"" + fmt(yy) + "\"/>\n";
      out += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + fmt(yy + 3) +
             "\" text-anchor=\"end\">" + fmt(t) + "</text>\n";
    }
    for (double t : ticks(xr, 7)) {
      const double xx = xpix(t);
      out += "<line class=\"grid\" x1=\"" + fmt(xx) + "\" y1=\"" + std::to_string(top) + "\" x2=\"" +
             fmt(xx) + "\" y2=\"" + std::to_string(bottom) + "\"/>\n";
      out += "<text x=\"" + fmt(xx) + "\" y=\"" + std::to_string(bottom + 14) +
             "\" text-anchor=\"middle\">" + fmt(t) + "</text>\n";
    }
    // axes
    out += "<line class=\"ax\" x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(top) +
           "\" x2=\"" + std::to_string(left) + "\" y2=\"" + std::to_string(bottom) + "\"/>\n";
    out += "<line class=\"ax\" x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(bottom) +
           "\" x2=\"" + std::to_string(right) + "\" y2=\"" + std::to_string(bottom) + "\"/>\n";
    // labels
    out += "<text transform=\"translate(14," + std::to_string((top + bottom) / 2) +
           ") rotate(-90)\" text-anchor=\"middle\">" + panel.y_label + "</text>\n";
    if (p + 1 == panels.size())
      out += "<text x=\"" + std::to_string((left + right) / 2) + "\" y=\"" +
             std::to_string(bottom + 28) + "\" text-anchor=\"middle\">" + x_label + "</text>\n";

    // series
    for (std::size_t s = 0; s < panel.series.size(); ++s) {
      const SvgSeries& sr = panel.series[s];
      std::string pts;
      for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i) {
        if (!std::isfinite(sr.y[i])) continue;
        pts += fmt(xpix(sr.x[i])) + "," + fmt(ypix(sr.y[i])) + " ";
      }
      out += "<polyline fill=\"none\" stroke=\"" + std::string(palette(s)) +
             "\" stroke-width=\"1.4\" points=\"" + pts + "\"/>\n";
    }
    // legend
    for (std::size_t s = 0; s < panel.series.size(); ++s) {
      const int ly = top + 12 + static_cast<int>(s) * 14;
      out += "<line x1=\"" + std::to_string(right - 120) + "\" y1=\"" + std::to_string(ly - 4) +
             "\" x2=\"" + std::to_string(right - 100) + "\" y2=\"" + std::to_string(ly - 4) +
             "\" stroke=\"" + palette(s) + "\" stroke-width=\"2\"/>\n";
      out += "<text x=\"" + std::to_string(right - 95) + "\" y=\"" + std::to_string(ly) + "\">" +
             panel.series[s].label + "</text>\n";
    }
  }
  out += "</svg>\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("svg: cannot open '" + path + "'");
  f << out;
}

}  // namespace mmirl

#endif  // MMIRL_SVG_HPP_

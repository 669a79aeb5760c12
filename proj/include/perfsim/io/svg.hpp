#ifndef PERFSIM_IO_SVG_HPP
#define PERFSIM_IO_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "perfsim/errors.hpp"
#include "perfsim/io/csv.hpp"

namespace perfsim::io {

// Minimal self-contained SVG line/scatter plots.  Output depends only on
// the data, so replots are byte-identical.

struct plot_series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
  double stroke_width = 1.5;
  std::string dash;        // e.g. "6,4" for dashed
  bool points_only = false;
  double point_radius = 2.2;
};

struct plot_spec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<plot_series> series;
  bool equal_aspect = false;  // for spatial scatter plots
  double width = 720.0;
  double height = 480.0;
};

namespace detail {

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#7f7f7f",
                                 "#9467bd", "#ff7f0e", "#8c564b"};
  return colors[i % 7];
}

struct axis_ticks {
  std::vector<double> at;
  std::vector<std::string> label;
};

inline axis_ticks make_ticks(double lo, double hi) {
  axis_ticks t;
  const double span = hi - lo;
  if (!(span > 0.0)) {
    t.at.push_back(lo);
    t.label.push_back(format_double(lo));
    return t;
  }
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = mag * (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0);
  const int decimals = std::max(0, -static_cast<int>(std::floor(std::log10(step))));
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    t.at.push_back(v);
    t.label.emplace_back(buf);
  }
  return t;
}

inline std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

}  // namespace detail

inline void write_plot_svg(const std::string& path, plot_spec spec) {
  for (std::size_t i = 0; i < spec.series.size(); ++i)
    if (spec.series[i].color.empty()) spec.series[i].color = detail::palette(i);

  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  bool any = false;
  for (const auto& s : spec.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!any) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        any = true;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
  if (!any) throw input_error("plot '" + path + "' has no finite data");
  if (xmax == xmin) { xmax += 1.0; xmin -= 1.0; }
  if (ymax == ymin) { ymax += 1.0; ymin -= 1.0; }
  const double xpad = 0.03 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
  xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

  const double ml = 64.0, mr = 16.0, mt = spec.title.empty() ? 16.0 : 40.0, mb = 48.0;
  double pw = spec.width - ml - mr, ph = spec.height - mt - mb;
  if (spec.equal_aspect) {
    const double sc = std::min(pw / (xmax - xmin), ph / (ymax - ymin));
    pw = sc * (xmax - xmin);
    ph = sc * (ymax - ymin);
  }
  const double W = ml + pw + mr, H = mt + ph + mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };
  auto fmt = [](double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  auto out = open_output(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(W) << "\" height=\""
      << fmt(H) << "\" viewBox=\"0 0 " << fmt(W) << ' ' << fmt(H) << "\">\n";
  out << "<rect width=\"" << fmt(W) << "\" height=\"" << fmt(H) << "\" fill=\"white\"/>\n";
  if (!spec.title.empty())
    out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">"
        << detail::escape_xml(spec.title) << "</text>\n";

  const auto xt = detail::make_ticks(xmin, xmax);
  const auto yt = detail::make_ticks(ymin, ymax);
  out << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double v : xt.at)
    out << "<line x1=\"" << fmt(px(v)) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(px(v))
        << "\" y2=\"" << fmt(mt + ph) << "\"/>\n";
  for (double v : yt.at)
    out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(py(v)) << "\" x2=\"" << fmt(ml + pw)
        << "\" y2=\"" << fmt(py(v)) << "\"/>\n";
  out << "</g>\n";
  out << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
  for (std::size_t i = 0; i < xt.at.size(); ++i)
    out << "<text x=\"" << fmt(px(xt.at[i])) << "\" y=\"" << fmt(mt + ph + 16)
        << "\" text-anchor=\"middle\">" << xt.label[i] << "</text>\n";
  for (std::size_t i = 0; i < yt.at.size(); ++i)
    out << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(py(yt.at[i]) + 4)
        << "\" text-anchor=\"end\">" << yt.label[i] << "</text>\n";
  if (!spec.x_label.empty())
    out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(mt + ph + 36)
        << "\" text-anchor=\"middle\" font-size=\"13\">" << detail::escape_xml(spec.x_label)
        << "</text>\n";
  if (!spec.y_label.empty())
    out << "<text x=\"16\" y=\"" << fmt(mt + ph / 2) << "\" text-anchor=\"middle\" "
           "font-size=\"13\" transform=\"rotate(-90 16 "
        << fmt(mt + ph / 2) << ")\">" << detail::escape_xml(spec.y_label) << "</text>\n";
  out << "</g>\n";

  for (const auto& s : spec.series) {
    if (s.points_only) {
      out << "<g fill=\"" << s.color << "\" fill-opacity=\"0.85\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        out << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i])) << "\" r=\""
            << fmt(s.point_radius) << "\"/>\n";
      }
      out << "</g>\n";
    } else {
      // Break the polyline at non-finite values rather than bridging them.
      out << "<g fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\""
          << fmt(s.stroke_width) << '"';
      if (!s.dash.empty()) out << " stroke-dasharray=\"" << s.dash << '"';
      out << ">\n";
      std::string pts;
      auto flush = [&]() {
        if (!pts.empty()) {
          out << "<polyline points=\"" << pts << "\"/>\n";
          pts.clear();
        }
      };
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
          flush();
          continue;
        }
        if (!pts.empty()) pts += ' ';
        pts += fmt(px(s.x[i])) + ',' + fmt(py(s.y[i]));
      }
      flush();
      out << "</g>\n";
    }
  }

  // Legend, top-right inside the frame.
  double ly = mt + 16.0;
  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (const auto& s : spec.series) {
    if (s.name.empty()) continue;
    const double lx = ml + pw - 150.0;
    if (s.points_only) {
      out << "<circle cx=\"" << fmt(lx + 12) << "\" cy=\"" << fmt(ly - 4) << "\" r=\"3\" fill=\""
          << s.color << "\"/>\n";
    } else {
      const std::string dash_attr =
          s.dash.empty() ? std::string() : " stroke-dasharray=\"" + s.dash + "\"";
      out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(lx + 24)
          << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
          << dash_attr << "/>\n";
    }
    out << "<text x=\"" << fmt(lx + 30) << "\" y=\"" << fmt(ly) << "\">"
        << detail::escape_xml(s.name) << "</text>\n";
    ly += 18.0;
  }
  out << "</g>\n</svg>\n";
}

}  // namespace perfsim::io

#endif  // PERFSIM_IO_SVG_HPP

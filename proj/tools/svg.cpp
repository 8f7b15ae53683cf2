#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>

namespace snseg::cli {

namespace {

constexpr double kWidth = 960.0;
constexpr double kPanelHeight = 180.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 24.0;
constexpr double kGap = 36.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
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

struct Panel {
  double y0;  // top edge in pixels
  double lo;
  double hi;
  int n;

  [[nodiscard]] double px(double t) const {
    const double span = n > 1 ? n - 1 : 1;
    return kLeft + (t - 1.0) / span * (kWidth - kLeft - kRight);
  }
  [[nodiscard]] double py(double v) const {
    const double range = hi > lo ? hi - lo : 1.0;
    return y0 + kPanelHeight - (v - lo) / range * kPanelHeight;
  }
};

Panel make_panel(double y0, std::span<const double> values, double extra) {
  double lo = extra, hi = extra;
  if (!values.empty()) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = std::isnan(extra) ? *mn : std::min(*mn, extra);
    hi = std::isnan(extra) ? *mx : std::max(*mx, extra);
  }
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  return {y0, lo - pad, hi + pad, static_cast<int>(values.size())};
}

void frame(std::string& svg, const Panel& p, const std::string& title) {
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(p.y0) + "\" width=\"" + num(kWidth - kLeft - kRight) +
         "\" height=\"" + num(kPanelHeight) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg += "<text x=\"" + num(kLeft) + "\" y=\"" + num(p.y0 - 6) + "\" font-size=\"13\">" + escape(title) + "</text>\n";
  svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(p.y0 + 10) +
         "\" font-size=\"11\" text-anchor=\"end\">" + label(p.hi) + "</text>\n";
  svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(p.y0 + kPanelHeight) +
         "\" font-size=\"11\" text-anchor=\"end\">" + label(p.lo) + "</text>\n";
}

void polyline(std::string& svg, const Panel& p, std::span<const double> values, const char* colour) {
  svg += "<polyline fill=\"none\" stroke=\"";
  svg += colour;
  svg += "\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) svg += ' ';
    svg += num(p.px(static_cast<double>(i + 1))) + ',' + num(p.py(values[i]));
  }
  svg += "\"/>\n";
}

void verticals(std::string& svg, const Panel& p, const std::vector<int>& cps) {
  for (int k : cps)
    svg += "<line x1=\"" + num(p.px(k)) + "\" y1=\"" + num(p.y0) + "\" x2=\"" + num(p.px(k)) + "\" y2=\"" +
           num(p.y0 + kPanelHeight) + "\" stroke=\"red\" stroke-width=\"1.5\"/>\n";
}

}  // namespace

std::string render_svg(const PlotData& data) {
  const TimeSeriesMatrix& ts = *data.series;
  const int panels = std::min(ts.p(), kMaxSeriesPanels);
  const double height = kTop + (panels + 1) * (kPanelHeight + kGap);
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                    num(height) + "\" font-family=\"sans-serif\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  double y = kTop;
  for (int j = 0; j < panels; ++j) {
    const auto col = ts.column(j);
    const Panel p = make_panel(y, col, std::nan(""));
    std::string title = j < static_cast<int>(data.names.size()) ? data.names[static_cast<std::size_t>(j)]
                                                                 : "series " + std::to_string(j + 1);
    if (j == panels - 1 && ts.p() > panels)
      title += " (first " + std::to_string(panels) + " of " + std::to_string(ts.p()) + " columns shown)";
    frame(svg, p, title);
    polyline(svg, p, col, "#222");
    verticals(svg, p, data.est_cp);
    y += kPanelHeight + kGap;
  }

  const Panel sp = make_panel(y, data.stat, data.threshold);
  frame(svg, sp, "max statistic by split point, threshold " + label(data.threshold));
  polyline(svg, sp, data.stat, "#222");
  verticals(svg, sp, data.est_cp);
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(sp.py(data.threshold)) + "\" x2=\"" +
         num(kWidth - kRight) + "\" y2=\"" + num(sp.py(data.threshold)) +
         "\" stroke=\"blue\" stroke-width=\"1.5\"/>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace snseg::cli

#include "macdisp/svg.hpp"

#include <algorithm>
#include <cstdio>

namespace macdisp {

namespace {

constexpr double kNatsToBits = 1.4426950408889634074;
constexpr double kW = 720, kH = 540;
constexpr double kL = 72, kR = 76, kT = 54, kB = 64;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

}  // namespace

std::string render_plot(const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        const std::vector<PlotSeries>& series) {
  double xmax = 1e-9, ymax = 1e-9;
  for (const auto& s : series)
    for (const auto& p : s.points) {
      xmax = std::max(xmax, p[0]);
      ymax = std::max(ymax, p[1]);
    }
  xmax *= 1.05;
  ymax *= 1.05;
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  auto px = [&](double x) { return kL + x / xmax * pw; };
  auto py = [&](double y) { return kH - kB - y / ymax * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"540\" "
         "viewBox=\"0 0 720 540\">\n";
  svg += "<rect width=\"720\" height=\"540\" fill=\"white\"/>\n";
  svg += "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + esc(title) + "</text>\n";

  // frame and ticks; bottom/left in bits, top/right in nats
  svg += "<rect x=\"" + num(kL) + "\" y=\"" + num(kT) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = xmax * k / 5.0, yv = ymax * k / 5.0;
    const double gx = px(xv), gy = py(yv);
    svg += "<line x1=\"" + num(gx) + "\" y1=\"" + num(kH - kB) + "\" x2=\"" + num(gx) +
           "\" y2=\"" + num(kH - kB + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(gx) + "\" y=\"" + num(kH - kB + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           num(xv * kNatsToBits) + "</text>\n";
    svg += "<text x=\"" + num(gx) + "\" y=\"" + num(kT - 6) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\" "
           "fill=\"#555555\">" + num(xv) + "</text>\n";
    svg += "<line x1=\"" + num(kL - 5) + "\" y1=\"" + num(gy) + "\" x2=\"" + num(kL) +
           "\" y2=\"" + num(gy) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(kL - 8) + "\" y=\"" + num(gy + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           num(yv * kNatsToBits) + "</text>\n";
    svg += "<text x=\"" + num(kW - kR + 8) + "\" y=\"" + num(gy + 4) +
           "\" text-anchor=\"start\" font-family=\"sans-serif\" font-size=\"10\" "
           "fill=\"#555555\">" + num(yv) + "</text>\n";
  }
  svg += "<text x=\"" + num(kL + pw / 2) + "\" y=\"" + num(kH - 14) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         esc(x_label) + " [bits]</text>\n";
  svg += "<text x=\"18\" y=\"" + num(kT + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 18 " + num(kT + ph / 2) + ")\">" +
         esc(y_label) + " [bits]</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % 6];
    std::string pts;
    for (const auto& p : series[s].points)
      pts += num(px(p[0])) + "," + num(py(p[1])) + " ";
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.8\"/>\n";
    const double ly = kT + 16 + 16 * double(s);
    svg += "<line x1=\"" + num(kW - kR - 150) + "\" y1=\"" + num(ly) + "\" x2=\"" +
           num(kW - kR - 126) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"1.8\"/>\n";
    svg += "<text x=\"" + num(kW - kR - 120) + "\" y=\"" + num(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + esc(series[s].label) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace macdisp

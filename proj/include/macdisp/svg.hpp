#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace macdisp {

struct PlotSeries {
  std::string label;
  std::vector<Eigen::Vector2d> points;  // nats on both axes
};

// Self-contained SVG polyline chart (no external assets, no timestamps).
// Bottom/left axes are graduated in bits, top/right in nats.
std::string render_plot(const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        const std::vector<PlotSeries>& series);

}  // namespace macdisp

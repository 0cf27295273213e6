#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fregmice {

struct ChartSeries {
  std::string label;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  bool points = false;  // markers instead of a polyline
};

/// Self-contained SVG document; output depends only on the inputs.
std::string svg_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<ChartSeries>& series, int width = 640, int height = 400);

}  // namespace fregmice

#pragma once

#include <string>
#include <vector>

namespace gcsim {

struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
};

// Standalone SVG line chart; data stays in the CSVs, this is for eyeballing.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<SvgSeries>& series);

}  // namespace gcsim

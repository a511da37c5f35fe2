#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace camtrap::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal static line/point chart; enough for effort curves, activity
/// histograms, and variogram plots. NaN y values break the polyline.
void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

}  // namespace camtrap::svg

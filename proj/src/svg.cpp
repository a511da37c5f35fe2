#include "camtrap/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "camtrap/error.hpp"

namespace camtrap::svg {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 64, kRight = 24, kTop = 36, kBottom = 48;

const char* kColors[] = {"#1b6ca8", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#16777a"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw ValidationError("svg: series '" + s.label + "' has mismatched x/y lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (!(x_min <= x_max)) {  // nothing plottable
    x_min = 0;
    x_max = 1;
    y_min = 0;
    y_max = 1;
  }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * pw; };
  const auto py = [&](double y) { return kTop + ph - (y - y_min) / (y_max - y_min) * ph; };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("svg: cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << num(kWidth) << ' '
      << num(kHeight) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";

  // axes and ticks
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + ph) << "\" x2=\""
      << num(kLeft + pw) << "\" y2=\"" << num(kTop + ph) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(kTop + ph) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 5.0;
    const double fy = y_min + (y_max - y_min) * i / 5.0;
    out << "<line x1=\"" << num(px(fx)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\""
        << num(px(fx)) << "\" y2=\"" << num(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(kTop + ph + 18)
        << "\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
    out << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(fy)) << "\" x2=\""
        << num(kLeft) << "\" y2=\"" << num(py(fy)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(fy) + 4)
        << "\" text-anchor=\"end\">" << num(fy) << "</text>\n";
  }
  out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 10)
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << num(kTop + ph / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << num(kTop + ph / 2) << ")\">"
      << y_label << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
    std::string points;
    const auto flush = [&]() {
      if (!points.empty()) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
            << points << "\"/>\n";
        points.clear();
      }
    };
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      points += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
      out << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
          << "\" r=\"2\" fill=\"" << color << "\"/>\n";
    }
    flush();
    out << "<text x=\"" << num(kLeft + pw - 6) << "\" y=\"" << num(kTop + 14 + 16 * static_cast<double>(k))
        << "\" text-anchor=\"end\" fill=\"" << color << "\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace camtrap::svg

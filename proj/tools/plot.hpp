#pragma once

#include <string>
#include <vector>

namespace condreg::cli {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Line plot with markers as a standalone SVG file. Returns false (and
/// writes nothing useful) when there is nothing finite to draw or the file
/// cannot be written; never throws.
bool write_svg_plot(const std::string& path, const PlotSpec& spec, const std::vector<Series>& series) noexcept;

}  // namespace condreg::cli

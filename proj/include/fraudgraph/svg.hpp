#pragma once

#include <string>
#include <vector>

namespace fraudgraph {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

// Standalone SVG line plot, no external renderer required.
void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series);

// Overlaid histograms of one or more value sets.
void write_histogram(const std::string& path, const std::string& title,
                     const std::string& x_label,
                     const std::vector<std::pair<std::string, std::vector<double>>>& groups,
                     int n_bins = 40);

}  // namespace fraudgraph

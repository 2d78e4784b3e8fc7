#pragma once

#include <string>
#include <vector>

namespace hhimerge::svg {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Standalone SVG scatter plot with square axes and a dashed 45-degree line.
std::string scatter_with_diagonal(const std::vector<Point>& points, const std::string& title,
                                  const std::string& x_label, const std::string& y_label);

}  // namespace hhimerge::svg

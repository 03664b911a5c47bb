#pragma once

#include <string>
#include <vector>

#include "gldp/vi.hpp"

namespace gldp::cli {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    bool markers = false;
};

/// Line plot. Non-finite points (and non-positive ones on log axes) are skipped.
std::string svg_line_plot(const PlotSpec& spec, const std::vector<Series>& series);

/// Heat map of a t-by-x field, t increasing upwards.
std::string svg_heat_map(const std::string& title, const Field2D& field, const std::vector<double>& t,
                         const std::vector<double>& x);

}  // namespace gldp::cli

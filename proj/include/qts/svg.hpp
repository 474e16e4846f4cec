// svg.hpp: minimal line plots: polylines, axes, dashed overlays and markers.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qts::cli {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
    std::string color = "#1f77b4";
};

struct Marker {
    double x;
    std::string label;
};

struct Plot {
    std::string title;
    std::string x_label = "t";
    std::string y_label;
    bool log_x = false;
    std::vector<Series> series;
    std::vector<Marker> markers; // dashed vertical lines
};

/// SVG document for the plot. Non-finite points break a polyline.
std::string render_svg(const Plot& plot);
void write_svg(const std::filesystem::path& path, const Plot& plot);

} // namespace qts::cli

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pulsechain::svgplot {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> yerr; // empty: no error bars
    bool line = true;         // false: markers only
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    bool log_y = false;
};

/// Deterministic static SVG output. Throws if no series has data.
void write_chart(const ChartSpec& spec, const std::filesystem::path& path);

} // namespace pulsechain::svgplot

#pragma once

#include <string>
#include <vector>

#include "gsemtmo/image.hpp"

namespace gsemtmo {

// Just enough raster plotting for loss curves, tone curves and score
// histograms. Axis endpoints are printed with a small built-in digit font;
// no external plotting dependency.
struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

ImageF plot_lines(const std::vector<PlotSeries>& series, int width = 720, int height = 480,
                  bool log_x = false);

// Score histogram with a median marker and CI whiskers.
ImageF plot_histogram(const std::vector<double>& values, int bins, double median, double ci_lo,
                      double ci_hi, int width = 720, int height = 480);

}  // namespace gsemtmo

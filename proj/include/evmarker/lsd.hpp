#pragma once

#include <vector>

#include "evmarker/geometry.hpp"
#include "evmarker/raster.hpp"

namespace evm::lsd {

/// Parameters of the line segment detector. Defaults are the published
/// canonical values.
struct Params {
    double scale = 0.8;        // Gaussian subsampling factor
    double sigma_scale = 0.6;  // sigma = sigma_scale / scale
    double quant = 2.0;        // gradient quantization error bound
    double ang_th = 22.5;      // angle tolerance, degrees
    double log_eps = 0.0;      // detection threshold, -log10(NFA)
    double density_th = 0.7;   // minimal density of aligned points in the rectangle
    int n_bins = 1024;         // bins for the gradient pseudo-ordering
};

struct Segment {
    Point2 p1;
    Point2 p2;
    double width = 0.0;
    double p = 0.0;       // angle precision as a probability
    double log_nfa = 0.0;
};

/// Detects line segments in a grayscale image (values nominally in
/// [0, 255]). Coordinates have their origin at the center of pixel (0, 0).
std::vector<Segment> detect(const Raster<double>& image, const Params& params = {});

}  // namespace evm::lsd

#pragma once

#include <cstdint>
#include <vector>

#include "evmarker/event_model.hpp"
#include "evmarker/raster.hpp"

namespace evm {

/// Minimum timestamp per pixel for one polarity. `valid` marks pixels that
/// received at least one event.
struct TimeImage {
    Raster<std::int64_t> values;
    Mask valid;
    std::int64_t t_min = 0;
    std::int64_t t_max = 0;
    std::size_t valid_count = 0;

    bool empty() const { return valid_count == 0; }
};

/// Timestamps mapped to [0,1]; `flipped` holds 1 - v on valid pixels.
struct NormImage {
    Raster<double> values;
    Mask valid;
    bool flipped = false;
    std::size_t valid_count = 0;

    bool empty() const { return valid_count == 0; }
};

struct RefinedImage {
    Raster<double> values;
    Mask valid;
    std::size_t valid_count = 0;

    bool empty() const { return valid_count == 0; }
};

struct SmoothImage {
    Raster<double> values;
    Mask valid;
    std::size_t valid_count = 0;

    bool empty() const { return valid_count == 0; }
};

/// Separable, normalized n x n Gaussian. `taps` is the 1-D factor; the 2-D
/// weight at (i, j) is taps[i] * taps[j].
struct GaussianKernel {
    int size = 0;
    double sigma = 0.0;
    std::vector<double> taps;

    static GaussianKernel make(int size, double sigma);

    int radius() const { return size / 2; }
    double weight(int i, int j) const { return taps[static_cast<std::size_t>(i)] * taps[static_cast<std::size_t>(j)]; }
};

TimeImage build_time_image(const EventPacket& packet, Polarity polarity);

NormImage normalize(const TimeImage& img, bool flip);

/// Single simultaneous hole-fill / isolated-pixel removal pass over the
/// clipped 8-neighbourhood. Both sets are computed from the input mask.
RefinedImage refine(const NormImage& img);

/// Mask-normalized Gaussian smoothing: (I * g) / (M * g) on valid pixels,
/// zero elsewhere. Zero padding outside the image.
SmoothImage smooth(const RefinedImage& img, const GaussianKernel& kernel);

}  // namespace evm

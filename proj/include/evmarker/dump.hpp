#pragma once

#include <cstdint>
#include <string>

#include "evmarker/pipeline.hpp"
#include "evmarker/raster.hpp"

namespace evm {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

void write_png(const std::string& path, const Raster<std::uint8_t>& gray);
void write_png(const std::string& path, const Raster<Rgb>& rgb);

/// Values in [0, 1] to gray, invalid pixels black.
Raster<std::uint8_t> to_gray(const Raster<double>& values, const Mask& valid);

/// Writes numbered PNGs for one packet into `dir` (created if missing):
/// normalized and smoothed images, segment and candidate overlays, and per
/// unwarped candidate the on/off images with response overlays and the
/// reconstructed marker. Returns the number of files written.
int dump_stages(const std::string& dir, std::size_t packet_index, const PacketTrace& trace,
                const PipelineConfig& cfg);

}  // namespace evm

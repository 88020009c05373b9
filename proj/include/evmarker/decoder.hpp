#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "evmarker/candidates.hpp"
#include "evmarker/dictionary.hpp"
#include "evmarker/event_image.hpp"
#include "evmarker/geometry.hpp"

namespace evm {

/// 3x3 projective map, row-major, normalized so that m[8] == 1 when nonzero.
struct Homography {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    Point2 apply(Point2 p) const;
    std::optional<Homography> inverse() const;
};

/// Four-point DLT. Empty when three source or destination points are
/// collinear or the system is singular.
std::optional<Homography> compute_homography(const Quad& src, const Quad& dst);

/// Corners of the canonical s_c x s_c square: TL, TR, BR, BL.
Quad canonical_square(int side);

/// Source corners in TL, TR, BR, BL order of the unwarped frame: the off
/// segment goes to the left edge, the on segment to the right edge. Empty if
/// the quad is not convex or its area is below min_area.
std::optional<Quad> order_corners(const Candidate& c, double min_area);

struct UnwarpedImage {
    Raster<double> values;
    Mask valid;
    Polarity polarity = Polarity::Off;
};

/// Inverse mapping with mask-weighted bilinear interpolation. `to_canonical`
/// maps image points into the canonical square.
UnwarpedImage unwarp(const NormImage& norm, const Homography& to_canonical, int side, Polarity polarity);

enum class ShiftPolarity { Off, On, Both, None };

struct DecoderParams {
    int s_c = 160;
    int n_d = 20;
    double sigma_d = 3.35;
    double theta = 0.55;
    ShiftPolarity shift_polarity = ShiftPolarity::Both;
    double shift_px = -1.0;  // negative: n_d / 4
    double min_area = 312.5;  // l_min^2 / 2

    int n_cells() const { return s_c / n_d; }
    double shift() const { return shift_px < 0.0 ? n_d / 4.0 : shift_px; }
    double shift_for(Polarity p) const {
        const bool on = shift_polarity == ShiftPolarity::Both || shift_polarity == ShiftPolarity::On;
        const bool off = shift_polarity == ShiftPolarity::Both || shift_polarity == ShiftPolarity::Off;
        return (p == Polarity::On ? on : off) ? shift() : 0.0;
    }
};

/// Response per cell of the n_cells x n_cells grid: Gaussian-weighted sum of
/// valid unwarped values centered on the midpoint of the cell's left edge,
/// moved left by `shift`, divided by the total kernel weight. Kernel support
/// is the square of radius n_d / 2.
Raster<double> cell_response_map(const UnwarpedImage& u, int n_d, double sigma_d, double shift);

struct CellResponses {
    Raster<double> on;
    Raster<double> off;
};

CellResponses cell_responses(const UnwarpedImage& u_on, const UnwarpedImage& u_off, const DecoderParams& params);

/// f = floor((r / max r) / theta) clamped to {0, 1}; all zero when max r == 0.
Raster<std::uint8_t> threshold_responses(const Raster<double>& r, double theta);

/// Code cells from transition flags. f_on(j, i) / f_off(j, i) flag the left
/// edge of inner cell (row i, column j); the border column seeds each row
/// with black.
BitGrid decode_bits(const Raster<std::uint8_t>& f_on, const Raster<std::uint8_t>& f_off);

/// Inner N_m x N_m block of an n_cells x n_cells response map.
Raster<double> inner_cells(const Raster<double>& r);

struct Detection {
    int marker_id = -1;
    int rotation_deg = 0;
    Quad corners{};  // image space, clockwise from the marker's own top-left
    std::int64_t t_mid = 0;
};

struct UnwarpedCandidate {
    Quad source{};  // TL, TR, BR, BL of the unwarped frame, image space
    Homography to_canonical;
    UnwarpedImage on;
    UnwarpedImage off;
};

struct DecodeTrace {
    CellResponses responses;
    Raster<std::uint8_t> f_on;
    Raster<std::uint8_t> f_off;
    BitGrid bits;
};

std::optional<UnwarpedCandidate> unwarp_candidate(const Candidate& c, const NormImage& norm_on,
                                                  const NormImage& norm_off, const DecoderParams& params);

std::optional<Detection> decode_unwarped(const UnwarpedCandidate& u, const MarkerDictionary& dict,
                                         const DecoderParams& params, std::int64_t t_mid,
                                         DecodeTrace* trace = nullptr);

/// unwarp_candidate followed by decode_unwarped.
std::optional<Detection> decode_candidate(const Candidate& c, const NormImage& norm_on, const NormImage& norm_off,
                                          const MarkerDictionary& dict, const DecoderParams& params,
                                          std::int64_t t_mid);

}  // namespace evm

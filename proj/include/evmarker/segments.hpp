#pragma once

#include <optional>
#include <span>
#include <vector>

#include "evmarker/event_image.hpp"
#include "evmarker/event_model.hpp"
#include "evmarker/geometry.hpp"
#include "evmarker/lsd.hpp"

namespace evm {

struct LineSegment {
    Point2 p1;
    Point2 p2;
    Polarity polarity = Polarity::Off;
    std::optional<double> age;

    double length() const { return (p2 - p1).norm(); }
    Point2 direction() const { return p2 - p1; }
    LineSegment translated(Point2 offset) const {
        LineSegment s = *this;
        s.p1 = p1 + offset;
        s.p2 = p2 + offset;
        return s;
    }
};

/// LSD on the smoothed image scaled to [0, 255]; keeps segments of length
/// >= l_min with endpoints clamped into the image.
std::vector<LineSegment> detect_segments(const SmoothImage& img, double l_min, Polarity polarity,
                                         const lsd::Params& params = {});

/// Pixels on the segment: one per step along the dominant axis between the
/// rounded endpoints, minor coordinate rounded. No bounds clipping.
std::vector<PixelCoord> segment_pixels(const LineSegment& l);

/// Mean normalized timestamp over the valid in-image pixels of the segment.
std::optional<double> segment_age(const LineSegment& l, const NormImage& norm);

struct AgeSample {
    double offset = 0.0;
    double age = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares age = slope * offset + intercept.
std::optional<LinearFit> fit_age_line(std::span<const AgeSample> samples);

/// Offset along the normal where the fitted age reaches `target_age`. Fails
/// with fewer than two samples, |slope| < 1e-6, or |offset| > max_shift.
std::optional<double> target_offset(std::span<const AgeSample> samples, double target_age, double max_shift);

struct AgeCorrectionParams {
    double target_age = 0.5;
    double max_shift = 20.0;
};

/// Age samples obtained by sliding the segment in 1 px steps along its unit
/// normal while at least half of its pixels stay valid, offset 0 included.
std::vector<AgeSample> collect_age_samples(const LineSegment& l, const NormImage& norm);

/// Translates `l` along its normal so that its age becomes 0.5.
std::optional<LineSegment> correct_age(const LineSegment& l, const NormImage& norm,
                                       const AgeCorrectionParams& params = {});

}  // namespace evm

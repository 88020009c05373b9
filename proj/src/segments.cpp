#include "evmarker/segments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace evm {

std::vector<LineSegment> detect_segments(const SmoothImage& img, double l_min, Polarity polarity,
                                         const lsd::Params& params) {
    std::vector<LineSegment> out;
    if (img.empty()) return out;

    Raster<double> gray(img.values.width, img.values.height, 0.0);
    for (std::size_t i = 0; i < gray.size(); ++i) gray.data[i] = 255.0 * img.values.data[i];

    const double xmax = img.values.width - 1, ymax = img.values.height - 1;
    for (const lsd::Segment& s : lsd::detect(gray, params)) {
        LineSegment l;
        l.p1 = {std::clamp(s.p1.x, 0.0, xmax), std::clamp(s.p1.y, 0.0, ymax)};
        l.p2 = {std::clamp(s.p2.x, 0.0, xmax), std::clamp(s.p2.y, 0.0, ymax)};
        l.polarity = polarity;
        if (l.length() >= l_min) out.push_back(l);
    }
    return out;
}

std::vector<PixelCoord> segment_pixels(const LineSegment& l) {
    const int x1 = round_half_up(l.p1.x), y1 = round_half_up(l.p1.y);
    const int x2 = round_half_up(l.p2.x), y2 = round_half_up(l.p2.y);
    const int dx = x2 - x1, dy = y2 - y1;
    const int steps = std::max(std::abs(dx), std::abs(dy));

    std::vector<PixelCoord> pixels;
    pixels.reserve(static_cast<std::size_t>(steps) + 1);
    if (steps == 0) {
        pixels.push_back({x1, y1});
        return pixels;
    }
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        pixels.push_back({x1 + round_half_up(dx * t), y1 + round_half_up(dy * t)});
    }
    return pixels;
}

std::optional<double> segment_age(const LineSegment& l, const NormImage& norm) {
    double sum = 0.0;
    int count = 0;
    for (const PixelCoord& p : segment_pixels(l)) {
        if (!norm.valid.contains(p.x, p.y) || !norm.valid(p.x, p.y)) continue;
        sum += norm.values(p.x, p.y);
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / count;
}

std::optional<LinearFit> fit_age_line(std::span<const AgeSample> samples) {
    if (samples.size() < 2) return std::nullopt;
    const double n = static_cast<double>(samples.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& s : samples) {
        sx += s.offset;
        sy += s.age;
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& s : samples) {
        sxx += (s.offset - mx) * (s.offset - mx);
        sxy += (s.offset - mx) * (s.age - my);
    }
    if (sxx == 0.0) return std::nullopt;
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

std::optional<double> target_offset(std::span<const AgeSample> samples, double target_age, double max_shift) {
    const auto fit = fit_age_line(samples);
    if (!fit || std::fabs(fit->slope) < 1e-6) return std::nullopt;
    const double t = (target_age - fit->intercept) / fit->slope;
    if (!std::isfinite(t) || std::fabs(t) > max_shift) return std::nullopt;
    return t;
}

namespace {

Point2 unit_normal(const LineSegment& l) {
    const Point2 u{l.p2.y - l.p1.y, l.p1.x - l.p2.x};
    return u * (1.0 / u.norm());
}

/// Valid-pixel count and total pixel count; out-of-image pixels are invalid.
std::pair<int, int> support(const LineSegment& l, const NormImage& norm) {
    int valid = 0, total = 0;
    for (const PixelCoord& p : segment_pixels(l)) {
        ++total;
        if (norm.valid.contains(p.x, p.y) && norm.valid(p.x, p.y)) ++valid;
    }
    return {valid, total};
}

}  // namespace

std::vector<AgeSample> collect_age_samples(const LineSegment& l, const NormImage& norm) {
    std::vector<AgeSample> samples;
    const auto age0 = segment_age(l, norm);
    if (!age0 || l.length() == 0.0) return samples;
    samples.push_back({0.0, *age0});

    const Point2 u = unit_normal(l);
    const int max_steps = norm.values.width + norm.values.height;
    for (int d : {-1, 1}) {
        for (int s = 1; s <= max_steps; ++s) {
            const LineSegment moved = l.translated(u * static_cast<double>(s * d));
            const auto [valid, total] = support(moved, norm);
            if (2 * valid < total) break;
            samples.push_back({static_cast<double>(s * d), *segment_age(moved, norm)});
        }
    }
    return samples;
}

std::optional<LineSegment> correct_age(const LineSegment& l, const NormImage& norm, const AgeCorrectionParams& params) {
    if (l.length() == 0.0) return std::nullopt;
    const auto samples = collect_age_samples(l, norm);
    auto t = target_offset(samples, params.target_age, params.max_shift);
    if (!t) return std::nullopt;

    // Keep both endpoints inside the image.
    const Point2 u = unit_normal(l);
    const double xmax = norm.values.width - 1, ymax = norm.values.height - 1;
    double lo = -params.max_shift, hi = params.max_shift;
    auto limit = [&](double coord, double dir, double upper) {
        if (std::fabs(dir) < 1e-12) return;
        double a = (0.0 - coord) / dir, b = (upper - coord) / dir;
        if (a > b) std::swap(a, b);
        lo = std::max(lo, a);
        hi = std::min(hi, b);
    };
    limit(l.p1.x, u.x, xmax);
    limit(l.p2.x, u.x, xmax);
    limit(l.p1.y, u.y, ymax);
    limit(l.p2.y, u.y, ymax);
    if (lo > hi) return std::nullopt;

    LineSegment out = l.translated(u * std::clamp(*t, lo, hi));
    out.age = segment_age(out, norm);
    return out;
}

}  // namespace evm

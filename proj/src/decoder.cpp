#include "evmarker/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace evm {

Point2 Homography::apply(Point2 p) const {
    const double x = m[0] * p.x + m[1] * p.y + m[2];
    const double y = m[3] * p.x + m[4] * p.y + m[5];
    const double w = m[6] * p.x + m[7] * p.y + m[8];
    return {x / w, y / w};
}

namespace {

using Mat3 = Eigen::Matrix3d;

Mat3 to_eigen(const Homography& h) {
    Mat3 a;
    a << h.m[0], h.m[1], h.m[2], h.m[3], h.m[4], h.m[5], h.m[6], h.m[7], h.m[8];
    return a;
}

std::optional<Homography> from_eigen(const Mat3& a) {
    if (!a.allFinite()) return std::nullopt;
    Mat3 n = a;
    if (std::fabs(n(2, 2)) > 1e-15) n /= n(2, 2);
    Homography h;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) h.m[static_cast<std::size_t>(3 * r + c)] = n(r, c);
    return h;
}

/// Similarity taking the points to zero mean and mean distance sqrt(2).
Mat3 normalizer(const Quad& q) {
    double cx = 0.0, cy = 0.0;
    for (const auto& p : q) {
        cx += p.x / 4.0;
        cy += p.y / 4.0;
    }
    double mean_dist = 0.0;
    for (const auto& p : q) mean_dist += std::hypot(p.x - cx, p.y - cy) / 4.0;
    const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
    Mat3 t;
    t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
    return t;
}

bool has_collinear_triple(const Quad& q) {
    double scale = 0.0;
    for (const auto& a : q)
        for (const auto& b : q) scale = std::max(scale, (a - b).norm());
    if (scale == 0.0) return true;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            for (int k = j + 1; k < 4; ++k) {
                const double area = (q[j] - q[i]).cross(q[k] - q[i]);
                if (std::fabs(area) < 1e-9 * scale * scale) return true;
            }
    return false;
}

double signed_area(const Quad& q) {
    double a = 0.0;
    for (int i = 0; i < 4; ++i) a += q[i].cross(q[(i + 1) % 4]);
    return a / 2.0;
}

bool is_convex(const Quad& q) {
    int sign = 0;
    for (int i = 0; i < 4; ++i) {
        const Point2 e1 = q[(i + 1) % 4] - q[i];
        const Point2 e2 = q[(i + 2) % 4] - q[(i + 1) % 4];
        const double z = e1.cross(e2);
        if (z == 0.0) return false;
        const int s = z > 0.0 ? 1 : -1;
        if (sign == 0) sign = s;
        else if (s != sign) return false;
    }
    return true;
}

}  // namespace

std::optional<Homography> Homography::inverse() const {
    const Mat3 a = to_eigen(*this);
    const double det = a.determinant();
    if (!std::isfinite(det) || std::fabs(det) < 1e-300) return std::nullopt;
    return from_eigen(a.inverse());
}

std::optional<Homography> compute_homography(const Quad& src, const Quad& dst) {
    if (has_collinear_triple(src) || has_collinear_triple(dst)) return std::nullopt;

    const Mat3 ts = normalizer(src), td = normalizer(dst);
    Eigen::Matrix<double, 8, 8> a;
    Eigen::Matrix<double, 8, 1> b;
    for (int i = 0; i < 4; ++i) {
        const Eigen::Vector3d s = ts * Eigen::Vector3d(src[i].x, src[i].y, 1.0);
        const Eigen::Vector3d d = td * Eigen::Vector3d(dst[i].x, dst[i].y, 1.0);
        const double x = s.x(), y = s.y(), u = d.x(), v = d.y();
        a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
        a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
        b(2 * i) = u;
        b(2 * i + 1) = v;
    }
    const Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::Matrix<double, 8, 1> h = lu.solve(b);

    Mat3 hn;
    hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
    const Mat3 full = td.inverse() * hn * ts;
    return from_eigen(full);
}

Quad canonical_square(int side) {
    const double s = side - 1;
    return {Point2{0, 0}, Point2{s, 0}, Point2{s, s}, Point2{0, s}};
}

std::optional<Quad> order_corners(const Candidate& c, double min_area) {
    const LineSegment& off = c.off_seg;
    const LineSegment& on = c.on_seg;
    const double l_off = off.length(), l_on = on.length();
    if (l_off == 0.0 || l_on == 0.0) return std::nullopt;

    // Shared axis along the segments, oriented so that going from the off
    // edge to the on edge is a clockwise turn from it (image y points down).
    Point2 d_off = off.direction() * (1.0 / l_off);
    Point2 d_on = on.direction() * (1.0 / l_on);
    if (d_off.dot(d_on) < 0.0) d_on = d_on * -1.0;
    Point2 axis = d_off + d_on;
    const Point2 across = (on.p1 + on.p2) * 0.5 - (off.p1 + off.p2) * 0.5;
    const Point2 down{-across.y, across.x};
    if (axis.dot(down) < 0.0) axis = axis * -1.0;

    auto top_bottom = [&](const LineSegment& s) {
        return axis.dot(s.p1) <= axis.dot(s.p2) ? std::pair{s.p1, s.p2} : std::pair{s.p2, s.p1};
    };
    const auto [off_top, off_bottom] = top_bottom(off);
    const auto [on_top, on_bottom] = top_bottom(on);

    const Quad q{off_top, on_top, on_bottom, off_bottom};
    if (!is_convex(q) || std::fabs(signed_area(q)) < min_area) return std::nullopt;
    return q;
}

UnwarpedImage unwarp(const NormImage& norm, const Homography& to_canonical, int side, Polarity polarity) {
    UnwarpedImage out;
    out.values = Raster<double>(side, side, 0.0);
    out.valid = Mask(side, side, 0);
    out.polarity = polarity;
    const auto inv = to_canonical.inverse();
    if (!inv) return out;
    const Homography& h = *inv;
    const int w = norm.values.width, hgt = norm.values.height;

    for (int v = 0; v < side; ++v) {
        for (int u = 0; u < side; ++u) {
            const Point2 s = h.apply({static_cast<double>(u), static_cast<double>(v)});
            if (!std::isfinite(s.x) || !std::isfinite(s.y)) continue;
            const double fx0 = std::floor(s.x), fy0 = std::floor(s.y);
            if (fx0 < -1.0 || fy0 < -1.0 || fx0 > w || fy0 > hgt) continue;
            const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
            const double ax = s.x - fx0, ay = s.y - fy0;
            const double wts[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
            const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
            const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
            double wsum = 0.0, vsum = 0.0;
            for (int k = 0; k < 4; ++k) {
                if (xs[k] < 0 || ys[k] < 0 || xs[k] >= w || ys[k] >= hgt) continue;
                if (!norm.valid(xs[k], ys[k])) continue;
                wsum += wts[k];
                vsum += wts[k] * norm.values(xs[k], ys[k]);
            }
            if (wsum > 0.5) {
                out.values(u, v) = std::clamp(vsum / wsum, 0.0, 1.0);
                out.valid(u, v) = 1;
            }
        }
    }
    return out;
}

Raster<double> cell_response_map(const UnwarpedImage& u, int n_d, double sigma_d, double shift) {
    if (n_d <= 0 || u.values.width % n_d != 0 || u.values.height != u.values.width)
        throw std::invalid_argument("unwarped side must be a multiple of the cell size");
    const int n_cells = u.values.width / n_d;
    const int radius = n_d / 2;
    const double inv2s2 = 1.0 / (2.0 * sigma_d * sigma_d);

    Raster<double> r(n_cells, n_cells, 0.0);
    for (int i = 0; i < n_cells; ++i) {
        for (int j = 0; j < n_cells; ++j) {
            const double cx = j * n_d - shift;
            const double cy = i * n_d + n_d / 2.0;
            const int x0 = static_cast<int>(std::ceil(cx - radius)), x1 = static_cast<int>(std::floor(cx + radius));
            const int y0 = static_cast<int>(std::ceil(cy - radius)), y1 = static_cast<int>(std::floor(cy + radius));
            double total = 0.0, acc = 0.0;
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double dx = x - cx, dy = y - cy;
                    const double g = std::exp(-(dx * dx + dy * dy) * inv2s2);
                    total += g;
                    if (u.valid.contains(x, y) && u.valid(x, y)) acc += g * u.values(x, y);
                }
            r(j, i) = total > 0.0 ? acc / total : 0.0;
        }
    }
    return r;
}

CellResponses cell_responses(const UnwarpedImage& u_on, const UnwarpedImage& u_off, const DecoderParams& params) {
    return {cell_response_map(u_on, params.n_d, params.sigma_d, params.shift_for(Polarity::On)),
            cell_response_map(u_off, params.n_d, params.sigma_d, params.shift_for(Polarity::Off))};
}

Raster<std::uint8_t> threshold_responses(const Raster<double>& r, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("threshold must be in (0, 1]");
    Raster<std::uint8_t> f(r.width, r.height, 0);
    const double max_r = r.data.empty() ? 0.0 : *std::max_element(r.data.begin(), r.data.end());
    if (!(max_r > 0.0)) return f;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double level = std::floor((r.data[i] / max_r) / theta);
        f.data[i] = level >= 1.0 ? 1 : 0;
    }
    return f;
}

BitGrid decode_bits(const Raster<std::uint8_t>& f_on, const Raster<std::uint8_t>& f_off) {
    if (f_on.width != f_on.height || f_on.width != f_off.width || f_on.height != f_off.height)
        throw std::invalid_argument("transition maps must be square and of equal size");
    const int n = f_on.width;
    BitGrid b(n);
    for (int i = 0; i < n; ++i) {
        std::uint8_t prev = 0;
        for (int j = 0; j < n; ++j) {
            const bool flip = (prev == 0 && f_on(j, i)) || (prev == 1 && f_off(j, i));
            prev = flip ? static_cast<std::uint8_t>(1 - prev) : prev;
            b(i, j) = prev;
        }
    }
    return b;
}

Raster<double> inner_cells(const Raster<double>& r) {
    const int n = r.width - 2;
    Raster<double> inner(n, n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) inner(j, i) = r(j + 1, i + 1);
    return inner;
}

std::optional<UnwarpedCandidate> unwarp_candidate(const Candidate& c, const NormImage& norm_on,
                                                  const NormImage& norm_off, const DecoderParams& params) {
    const auto src = order_corners(c, params.min_area);
    if (!src) return std::nullopt;
    const auto h = compute_homography(*src, canonical_square(params.s_c));
    if (!h) return std::nullopt;
    UnwarpedCandidate u;
    u.source = *src;
    u.to_canonical = *h;
    u.on = unwarp(norm_on, *h, params.s_c, Polarity::On);
    u.off = unwarp(norm_off, *h, params.s_c, Polarity::Off);
    return u;
}

std::optional<Detection> decode_unwarped(const UnwarpedCandidate& u, const MarkerDictionary& dict,
                                         const DecoderParams& params, std::int64_t t_mid, DecodeTrace* trace) {
    if (params.n_cells() - 2 != dict.code_size()) return std::nullopt;
    CellResponses r = cell_responses(u.on, u.off, params);
    auto f_on = threshold_responses(inner_cells(r.on), params.theta);
    auto f_off = threshold_responses(inner_cells(r.off), params.theta);
    BitGrid bits = decode_bits(f_on, f_off);
    const auto hit = dict.lookup(bits);
    if (trace) *trace = DecodeTrace{std::move(r), std::move(f_on), std::move(f_off), std::move(bits)};
    if (!hit) return std::nullopt;

    Detection d;
    d.marker_id = hit->id;
    d.rotation_deg = hit->rotation_deg;
    d.t_mid = t_mid;
    const int k = hit->rotation_deg / 90;
    for (int m = 0; m < 4; ++m) d.corners[static_cast<std::size_t>(m)] = u.source[static_cast<std::size_t>((k + m) % 4)];
    return d;
}

std::optional<Detection> decode_candidate(const Candidate& c, const NormImage& norm_on, const NormImage& norm_off,
                                          const MarkerDictionary& dict, const DecoderParams& params,
                                          std::int64_t t_mid) {
    const auto u = unwarp_candidate(c, norm_on, norm_off, params);
    if (!u) return std::nullopt;
    return decode_unwarped(*u, dict, params, t_mid);
}

}  // namespace evm

// Line Segment Detector: gradient pseudo-ordering, region growing on
// gradient orientation, rectangle approximation and a-contrario validation
// through the number of false alarms (NFA).

#include "evmarker/lsd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace evm::lsd {
namespace {

constexpr double kNotDef = -1024.0;
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kThreeHalvesPi = 1.5 * std::numbers::pi;
constexpr std::uint8_t kNotUsed = 0;
constexpr std::uint8_t kUsed = 1;

struct Rect {
    double x1, y1, x2, y2;  // endpoints of the central line
    double width;
    double x, y;            // center
    double theta;
    double dx, dy;          // (cos theta, sin theta)
    double prec;            // tolerance angle
    double p;               // probability of an aligned point
};

double dist(double x1, double y1, double x2, double y2) { return std::hypot(x2 - x1, y2 - y1); }

double angle_diff(double a, double b) {
    a -= b;
    while (a <= -kPi) a += kTwoPi;
    while (a > kPi) a -= kTwoPi;
    return a < 0.0 ? -a : a;
}

double angle_diff_signed(double a, double b) {
    a -= b;
    while (a <= -kPi) a += kTwoPi;
    while (a > kPi) a -= kTwoPi;
    return a;
}

/// Normalized Gaussian of `n` taps centered at `mean` (in tap units).
std::vector<double> gaussian_taps(int n, double sigma, double mean) {
    std::vector<double> k(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = (i - mean) / sigma;
        k[static_cast<std::size_t>(i)] = std::exp(-0.5 * v * v);
        sum += k[static_cast<std::size_t>(i)];
    }
    if (sum > 0.0)
        for (double& v : k) v /= sum;
    return k;
}

/// Gaussian antialiasing filter followed by subsampling, applied separably
/// with symmetric boundary handling.
Raster<double> gaussian_sampler(const Raster<double>& in, double scale, double sigma_scale) {
    const int nx = static_cast<int>(std::ceil(in.width * scale));
    const int ny = static_cast<int>(std::ceil(in.height * scale));
    const double sigma = scale < 1.0 ? sigma_scale / scale : sigma_scale;
    const double prec = 3.0;
    const int h = static_cast<int>(std::ceil(sigma * std::sqrt(2.0 * prec * std::log(10.0))));
    const int n = 1 + 2 * h;

    auto reflect = [](int j, int size) {
        const int dbl = 2 * size;
        while (j < 0) j += dbl;
        while (j >= dbl) j -= dbl;
        if (j >= size) j = dbl - 1 - j;
        return j;
    };

    Raster<double> aux(nx, in.height, 0.0);
    for (int x = 0; x < nx; ++x) {
        const double xx = x / scale;
        const int xc = static_cast<int>(std::floor(xx + 0.5));
        const auto k = gaussian_taps(n, sigma, h + xx - xc);
        for (int y = 0; y < in.height; ++y) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += in(reflect(xc - h + i, in.width), y) * k[static_cast<std::size_t>(i)];
            aux(x, y) = sum;
        }
    }
    Raster<double> out(nx, ny, 0.0);
    for (int y = 0; y < ny; ++y) {
        const double yy = y / scale;
        const int yc = static_cast<int>(std::floor(yy + 0.5));
        const auto k = gaussian_taps(n, sigma, h + yy - yc);
        for (int x = 0; x < nx; ++x) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += aux(x, reflect(yc - h + i, in.height)) * k[static_cast<std::size_t>(i)];
            out(x, y) = sum;
        }
    }
    return out;
}

struct GradientField {
    Raster<double> angles;
    Raster<double> modgrad;
    std::vector<PixelCoord> ordered;  // pixels by decreasing gradient magnitude (binned)
};

GradientField level_line_angles(const Raster<double>& in, double threshold, int n_bins) {
    const int p = in.width, q = in.height;
    GradientField f;
    f.angles = Raster<double>(p, q, kNotDef);
    f.modgrad = Raster<double>(p, q, 0.0);

    double max_grad = 0.0;
    for (int x = 0; x < p - 1; ++x)
        for (int y = 0; y < q - 1; ++y) {
            const double com1 = in(x + 1, y + 1) - in(x, y);
            const double com2 = in(x + 1, y) - in(x, y + 1);
            const double gx = com1 + com2;
            const double gy = com1 - com2;
            const double norm = std::sqrt((gx * gx + gy * gy) / 4.0);
            f.modgrad(x, y) = norm;
            if (norm > threshold) {
                f.angles(x, y) = std::atan2(gx, -gy);
                max_grad = std::max(max_grad, norm);
            }
        }
    if (max_grad <= 0.0) return f;

    std::vector<std::vector<PixelCoord>> bins(static_cast<std::size_t>(n_bins));
    for (int x = 0; x < p - 1; ++x)
        for (int y = 0; y < q - 1; ++y) {
            auto i = static_cast<std::size_t>(f.modgrad(x, y) * n_bins / max_grad);
            if (i >= bins.size()) i = bins.size() - 1;
            bins[i].push_back({x, y});
        }
    f.ordered.reserve(static_cast<std::size_t>(p) * q);
    for (auto it = bins.rbegin(); it != bins.rend(); ++it) f.ordered.insert(f.ordered.end(), it->begin(), it->end());
    return f;
}

bool is_aligned(int x, int y, const Raster<double>& angles, double theta, double prec) {
    const double a = angles(x, y);
    if (a == kNotDef) return false;
    theta -= a;
    if (theta < 0.0) theta = -theta;
    if (theta > kThreeHalvesPi) {
        theta -= kTwoPi;
        if (theta < 0.0) theta = -theta;
    }
    return theta <= prec;
}

double nfa(int n, int k, double p, double log_nt) {
    constexpr double tolerance = 0.1;
    if (n < 0 || k < 0 || k > n || p <= 0.0 || p >= 1.0) throw std::logic_error("lsd: invalid NFA arguments");
    if (n == 0 || k == 0) return -log_nt;
    if (n == k) return -log_nt - n * std::log10(p);

    const double p_term = p / (1.0 - p);
    const double log1term = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                            k * std::log(p) + (n - k) * std::log(1.0 - p);
    double term = std::exp(log1term);
    if (term == 0.0) {
        if (k > n * p) return -log1term / std::numbers::ln10 - log_nt;
        return -log_nt;
    }
    double bin_tail = term;
    for (int i = k + 1; i <= n; ++i) {
        const double bin_term = static_cast<double>(n - i + 1) / i;
        const double mult_term = bin_term * p_term;
        term *= mult_term;
        bin_tail += term;
        if (bin_term < 1.0) {
            const double err = term * ((1.0 - std::pow(mult_term, n - i + 1)) / (1.0 - mult_term) - 1.0);
            if (err < tolerance * std::fabs(-std::log10(bin_tail) - log_nt) * bin_tail) break;
        }
    }
    return -std::log10(bin_tail) - log_nt;
}

double rect_nfa(const Rect& r, const Raster<double>& angles, double log_nt) {
    const double hw = r.width / 2.0;
    const double half_len = dist(r.x1, r.y1, r.x2, r.y2) / 2.0;
    const double cx = (r.x1 + r.x2) / 2.0, cy = (r.y1 + r.y2) / 2.0;
    const double ext = half_len * std::fabs(r.dx) + hw * std::fabs(r.dy);
    const double eyt = half_len * std::fabs(r.dy) + hw * std::fabs(r.dx);
    constexpr double eps = 1e-10;

    const int xmin = std::max(0, static_cast<int>(std::ceil(cx - ext - eps)));
    const int xmax = std::min(angles.width - 1, static_cast<int>(std::floor(cx + ext + eps)));
    const int ymin = std::max(0, static_cast<int>(std::ceil(cy - eyt - eps)));
    const int ymax = std::min(angles.height - 1, static_cast<int>(std::floor(cy + eyt + eps)));

    int pts = 0, alg = 0;
    for (int y = ymin; y <= ymax; ++y)
        for (int x = xmin; x <= xmax; ++x) {
            const double ox = x - cx, oy = y - cy;
            const double l = ox * r.dx + oy * r.dy;
            const double w = -ox * r.dy + oy * r.dx;
            if (std::fabs(l) > half_len + eps || std::fabs(w) > hw + eps) continue;
            ++pts;
            if (is_aligned(x, y, angles, r.theta, r.prec)) ++alg;
        }
    return nfa(pts, alg, r.p, log_nt);
}

double region_theta(const std::vector<PixelCoord>& reg, double x, double y, const Raster<double>& modgrad,
                    double reg_angle, double prec) {
    double ixx = 0.0, iyy = 0.0, ixy = 0.0;
    for (const auto& pt : reg) {
        const double w = modgrad(pt.x, pt.y);
        ixx += (pt.y - y) * (pt.y - y) * w;
        iyy += (pt.x - x) * (pt.x - x) * w;
        ixy -= (pt.x - x) * (pt.y - y) * w;
    }
    const double lambda = 0.5 * (ixx + iyy - std::sqrt((ixx - iyy) * (ixx - iyy) + 4.0 * ixy * ixy));
    double theta = std::fabs(ixx) > std::fabs(iyy) ? std::atan2(lambda - ixx, ixy) : std::atan2(ixy, lambda - iyy);
    if (angle_diff(theta, reg_angle) > prec) theta += kPi;
    return theta;
}

Rect region_to_rect(const std::vector<PixelCoord>& reg, const Raster<double>& modgrad, double reg_angle, double prec,
                    double p) {
    double x = 0.0, y = 0.0, sum = 0.0;
    for (const auto& pt : reg) {
        const double w = modgrad(pt.x, pt.y);
        x += pt.x * w;
        y += pt.y * w;
        sum += w;
    }
    x /= sum;
    y /= sum;
    const double theta = region_theta(reg, x, y, modgrad, reg_angle, prec);
    const double dx = std::cos(theta), dy = std::sin(theta);
    double l_min = 0.0, l_max = 0.0, w_min = 0.0, w_max = 0.0;
    for (const auto& pt : reg) {
        const double l = (pt.x - x) * dx + (pt.y - y) * dy;
        const double w = -(pt.x - x) * dy + (pt.y - y) * dx;
        l_max = std::max(l_max, l);
        l_min = std::min(l_min, l);
        w_max = std::max(w_max, w);
        w_min = std::min(w_min, w);
    }
    Rect r{};
    r.x1 = x + l_min * dx;
    r.y1 = y + l_min * dy;
    r.x2 = x + l_max * dx;
    r.y2 = y + l_max * dy;
    r.width = std::max(1.0, w_max - w_min);
    r.x = x;
    r.y = y;
    r.theta = theta;
    r.dx = dx;
    r.dy = dy;
    r.prec = prec;
    r.p = p;
    return r;
}

void region_grow(int x, int y, const Raster<double>& angles, std::vector<PixelCoord>& reg, double& reg_angle,
                 Mask& used, double prec) {
    reg.clear();
    reg.push_back({x, y});
    reg_angle = angles(x, y);
    double sumdx = std::cos(reg_angle), sumdy = std::sin(reg_angle);
    used(x, y) = kUsed;

    for (std::size_t i = 0; i < reg.size(); ++i) {
        const PixelCoord c = reg[i];
        for (int xx = c.x - 1; xx <= c.x + 1; ++xx)
            for (int yy = c.y - 1; yy <= c.y + 1; ++yy) {
                if (!angles.contains(xx, yy) || used(xx, yy) == kUsed) continue;
                if (!is_aligned(xx, yy, angles, reg_angle, prec)) continue;
                used(xx, yy) = kUsed;
                reg.push_back({xx, yy});
                sumdx += std::cos(angles(xx, yy));
                sumdy += std::sin(angles(xx, yy));
                reg_angle = std::atan2(sumdy, sumdx);
            }
    }
}

double rect_density(const Rect& r, std::size_t reg_size) {
    return static_cast<double>(reg_size) / (dist(r.x1, r.y1, r.x2, r.y2) * r.width);
}

bool reduce_region_radius(std::vector<PixelCoord>& reg, const Raster<double>& modgrad, double reg_angle, double prec,
                          double p, Rect& rec, Mask& used, double density_th) {
    double density = rect_density(rec, reg.size());
    if (density >= density_th) return true;

    const double xc = reg[0].x, yc = reg[0].y;
    double rad = std::max(dist(xc, yc, rec.x1, rec.y1), dist(xc, yc, rec.x2, rec.y2));
    while (density < density_th) {
        rad *= 0.75;
        for (std::size_t i = 0; i < reg.size(); ++i) {
            if (dist(xc, yc, reg[i].x, reg[i].y) > rad) {
                used(reg[i].x, reg[i].y) = kNotUsed;
                reg[i] = reg.back();
                reg.pop_back();
                --i;
            }
        }
        if (reg.size() < 2) return false;
        rec = region_to_rect(reg, modgrad, reg_angle, prec, p);
        density = rect_density(rec, reg.size());
    }
    return true;
}

bool refine(std::vector<PixelCoord>& reg, const Raster<double>& modgrad, double reg_angle, double prec, double p,
            Rect& rec, Mask& used, const Raster<double>& angles, double density_th) {
    double density = rect_density(rec, reg.size());
    if (density >= density_th) return true;

    // Re-grow from the seed with a tolerance fitted to the angles near it.
    const double xc = reg[0].x, yc = reg[0].y;
    const double ang_c = angles(reg[0].x, reg[0].y);
    double sum = 0.0, s_sum = 0.0;
    int n = 0;
    for (const auto& pt : reg) {
        used(pt.x, pt.y) = kNotUsed;
        if (dist(xc, yc, pt.x, pt.y) < rec.width) {
            const double ang_d = angle_diff_signed(angles(pt.x, pt.y), ang_c);
            sum += ang_d;
            s_sum += ang_d * ang_d;
            ++n;
        }
    }
    const double mean_angle = sum / n;
    const double tau = 2.0 * std::sqrt((s_sum - 2.0 * mean_angle * sum) / n + mean_angle * mean_angle);

    const PixelCoord seed = reg[0];
    region_grow(seed.x, seed.y, angles, reg, reg_angle, used, tau);
    if (reg.size() < 2) return false;
    rec = region_to_rect(reg, modgrad, reg_angle, prec, p);
    density = rect_density(rec, reg.size());
    if (density < density_th) return reduce_region_radius(reg, modgrad, reg_angle, prec, p, rec, used, density_th);
    return true;
}

double rect_improve(Rect& rec, const Raster<double>& angles, double log_nt, double log_eps) {
    constexpr double delta = 0.5;
    constexpr double delta_2 = delta / 2.0;
    double log_nfa = rect_nfa(rec, angles, log_nt);
    if (log_nfa > log_eps) return log_nfa;

    auto try_steps = [&](auto&& step) {
        Rect r = rec;
        for (int n = 0; n < 5; ++n) {
            if (!step(r)) continue;
            const double candidate = rect_nfa(r, angles, log_nt);
            if (candidate > log_nfa) {
                log_nfa = candidate;
                rec = r;
            }
        }
    };
    auto finer_precision = [](Rect& r) {
        r.p /= 2.0;
        r.prec = r.p * kPi;
        return true;
    };

    try_steps(finer_precision);
    if (log_nfa > log_eps) return log_nfa;

    try_steps([](Rect& r) {
        if (r.width - delta < 0.5) return false;
        r.width -= delta;
        return true;
    });
    if (log_nfa > log_eps) return log_nfa;

    try_steps([](Rect& r) {
        if (r.width - delta < 0.5) return false;
        r.x1 += -r.dy * delta_2;
        r.y1 += r.dx * delta_2;
        r.x2 += -r.dy * delta_2;
        r.y2 += r.dx * delta_2;
        r.width -= delta;
        return true;
    });
    if (log_nfa > log_eps) return log_nfa;

    try_steps([](Rect& r) {
        if (r.width - delta < 0.5) return false;
        r.x1 -= -r.dy * delta_2;
        r.y1 -= r.dx * delta_2;
        r.x2 -= -r.dy * delta_2;
        r.y2 -= r.dx * delta_2;
        r.width -= delta;
        return true;
    });
    if (log_nfa > log_eps) return log_nfa;

    try_steps(finer_precision);
    return log_nfa;
}

}  // namespace

std::vector<Segment> detect(const Raster<double>& image, const Params& params) {
    if (image.empty()) return {};
    if (params.scale <= 0.0 || params.sigma_scale <= 0.0 || params.quant < 0.0 || params.ang_th <= 0.0 ||
        params.ang_th >= 180.0 || params.density_th < 0.0 || params.density_th > 1.0 || params.n_bins <= 0)
        throw std::invalid_argument("lsd: invalid parameters");

    const double prec = kPi * params.ang_th / 180.0;
    const double p = params.ang_th / 180.0;
    const double rho = params.quant / std::sin(prec);

    const Raster<double> scaled =
        params.scale != 1.0 ? gaussian_sampler(image, params.scale, params.sigma_scale) : image;
    const GradientField field = level_line_angles(scaled, rho, params.n_bins);
    const Raster<double>& angles = field.angles;

    const double log_nt = 5.0 * (std::log10(static_cast<double>(scaled.width)) +
                                 std::log10(static_cast<double>(scaled.height))) / 2.0 +
                          std::log10(11.0);
    const auto min_reg_size = static_cast<std::size_t>(-log_nt / std::log10(p));

    Mask used(scaled.width, scaled.height, kNotUsed);
    std::vector<PixelCoord> reg;
    reg.reserve(scaled.size());
    std::vector<Segment> out;

    for (const PixelCoord& seed : field.ordered) {
        if (used(seed.x, seed.y) != kNotUsed || angles(seed.x, seed.y) == kNotDef) continue;
        double reg_angle = 0.0;
        region_grow(seed.x, seed.y, angles, reg, reg_angle, used, prec);
        if (reg.size() < min_reg_size) continue;

        Rect rec = region_to_rect(reg, field.modgrad, reg_angle, prec, p);
        if (!refine(reg, field.modgrad, reg_angle, prec, p, rec, used, angles, params.density_th)) continue;

        const double log_nfa = rect_improve(rec, angles, log_nt, params.log_eps);
        if (log_nfa <= params.log_eps) continue;

        // The 2x2 gradient sits at a (0.5, 0.5) offset.
        Segment s;
        s.p1 = {(rec.x1 + 0.5) / params.scale, (rec.y1 + 0.5) / params.scale};
        s.p2 = {(rec.x2 + 0.5) / params.scale, (rec.y2 + 0.5) / params.scale};
        s.width = rec.width / params.scale;
        s.p = rec.p;
        s.log_nfa = log_nfa;
        out.push_back(s);
    }
    return out;
}

}  // namespace evm::lsd

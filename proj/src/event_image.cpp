#include "evmarker/event_image.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace evm {

GaussianKernel GaussianKernel::make(int size, double sigma) {
    if (size <= 0 || size % 2 == 0) throw std::invalid_argument("Gaussian kernel size must be odd and positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("Gaussian kernel sigma must be positive");
    GaussianKernel k;
    k.size = size;
    k.sigma = sigma;
    k.taps.resize(static_cast<std::size_t>(size));
    const int r = size / 2;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - r;
        k.taps[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += k.taps[static_cast<std::size_t>(i)];
    }
    for (double& t : k.taps) t /= sum;
    return k;
}

TimeImage build_time_image(const EventPacket& packet, Polarity polarity) {
    const SensorGeometry& g = packet.geometry;
    TimeImage img;
    img.values = Raster<std::int64_t>(g.width, g.height, 0);
    img.valid = Mask(g.width, g.height, 0);
    img.t_min = std::numeric_limits<std::int64_t>::max();
    img.t_max = std::numeric_limits<std::int64_t>::min();

    for (const Event& e : packet.events) {
        if (e.polarity != polarity) continue;
        auto& v = img.values(e.x, e.y);
        auto& m = img.valid(e.x, e.y);
        if (!m) {
            m = 1;
            v = e.t;
            ++img.valid_count;
        } else {
            v = std::min(v, e.t);
        }
    }
    if (img.valid_count == 0) {
        img.t_min = img.t_max = 0;
        return img;
    }
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        if (!img.valid.data[i]) continue;
        img.t_min = std::min(img.t_min, img.values.data[i]);
        img.t_max = std::max(img.t_max, img.values.data[i]);
    }
    return img;
}

NormImage normalize(const TimeImage& img, bool flip) {
    NormImage out;
    out.values = Raster<double>(img.values.width, img.values.height, 0.0);
    out.valid = img.valid;
    out.flipped = flip;
    out.valid_count = img.valid_count;
    if (img.empty()) return out;

    const double range = static_cast<double>(img.t_max - img.t_min);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        if (!img.valid.data[i]) continue;
        double v = range > 0.0 ? static_cast<double>(img.values.data[i] - img.t_min) / range : 0.5;
        out.values.data[i] = flip ? 1.0 - v : v;
    }
    return out;
}

RefinedImage refine(const NormImage& img) {
    const int w = img.values.width, h = img.values.height;
    RefinedImage out;
    out.values = img.values;
    out.valid = img.valid;

    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - 1), y1 = std::min(h - 1, y + 1);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - 1), x1 = std::min(w - 1, x + 1);
            int neighbours = 0, valid = 0;
            double sum = 0.0;
            for (int yy = y0; yy <= y1; ++yy)
                for (int xx = x0; xx <= x1; ++xx) {
                    if (xx == x && yy == y) continue;
                    ++neighbours;
                    if (img.valid(xx, yy)) {
                        ++valid;
                        sum += img.values(xx, yy);
                    }
                }
            // 2*count > |B| is the strict-majority test without fractions.
            if (!img.valid(x, y) && 2 * valid > neighbours) {
                out.values(x, y) = sum / valid;
                out.valid(x, y) = 1;
            } else if (img.valid(x, y) && 2 * (neighbours - valid) > neighbours) {
                out.values(x, y) = 0.0;
                out.valid(x, y) = 0;
            }
        }
    }
    out.valid_count = static_cast<std::size_t>(std::count(out.valid.data.begin(), out.valid.data.end(), 1));
    return out;
}

SmoothImage smooth(const RefinedImage& img, const GaussianKernel& kernel) {
    const int w = img.values.width, h = img.values.height;
    if (kernel.size > std::min(w, h)) throw std::invalid_argument("smoothing kernel larger than image");
    const int r = kernel.radius();

    // Horizontal then vertical pass over the value and mask planes.
    Raster<double> num_h(w, h, 0.0), den_h(w, h, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double n = 0.0, d = 0.0;
            const int k0 = std::max(-r, -x), k1 = std::min(r, w - 1 - x);
            for (int k = k0; k <= k1; ++k) {
                if (!img.valid(x + k, y)) continue;
                const double t = kernel.taps[static_cast<std::size_t>(k + r)];
                n += t * img.values(x + k, y);
                d += t;
            }
            num_h(x, y) = n;
            den_h(x, y) = d;
        }
    }

    SmoothImage out;
    out.values = Raster<double>(w, h, 0.0);
    out.valid = img.valid;
    out.valid_count = img.valid_count;
    for (int y = 0; y < h; ++y) {
        const int k0 = std::max(-r, -y), k1 = std::min(r, h - 1 - y);
        for (int x = 0; x < w; ++x) {
            if (!img.valid(x, y)) continue;
            double n = 0.0, d = 0.0;
            for (int k = k0; k <= k1; ++k) {
                const double t = kernel.taps[static_cast<std::size_t>(k + r)];
                n += t * num_h(x, y + k);
                d += t * den_h(x, y + k);
            }
            assert(d > 0.0);
            out.values(x, y) = n / d;
        }
    }
    return out;
}

}  // namespace evm

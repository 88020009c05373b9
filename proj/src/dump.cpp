#include "evmarker/dump.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <vector>

#include <png.h>

namespace evm {

namespace {

void write_png_rows(const std::string& path, int w, int h, int color_type, const std::vector<std::uint8_t>& buf) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!fp) throw std::runtime_error("cannot write " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng error writing " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = buf.size() / static_cast<std::size_t>(h);
    for (int y = 0; y < h; ++y)
        png_write_row(png, const_cast<png_bytep>(buf.data() + static_cast<std::size_t>(y) * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void draw_line(Raster<Rgb>& img, Point2 a, Point2 b, Rgb c) {
    const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::fabs(b.x - a.x), std::fabs(b.y - a.y)))));
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        const int x = round_half_up(a.x + (b.x - a.x) * t), y = round_half_up(a.y + (b.y - a.y) * t);
        if (img.contains(x, y)) img(x, y) = c;
    }
}

Raster<Rgb> gray_to_rgb(const Raster<std::uint8_t>& g, double scale = 1.0) {
    Raster<Rgb> out(g.width, g.height);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto v = static_cast<std::uint8_t>(g.data[i] * scale);
        out.data[i] = {v, v, v};
    }
    return out;
}

// Unwarped image with a heat square at each cell's sampling point.
Raster<Rgb> response_overlay(const UnwarpedImage& u, const Raster<double>& r, int n_d, double shift) {
    Raster<Rgb> img = gray_to_rgb(to_gray(u.values, u.valid), 0.6);
    const double max_r = r.data.empty() ? 0.0 : *std::max_element(r.data.begin(), r.data.end());
    const int half = std::max(1, n_d / 6);
    for (int i = 0; i < r.height; ++i)
        for (int j = 0; j < r.width; ++j) {
            const double level = max_r > 0.0 ? r(j, i) / max_r : 0.0;
            const Rgb c{static_cast<std::uint8_t>(255 * level), static_cast<std::uint8_t>(64 * (1 - level)),
                        static_cast<std::uint8_t>(255 * (1 - level))};
            const int cx = round_half_up(j * n_d - shift), cy = i * n_d + n_d / 2;
            for (int y = cy - half; y <= cy + half; ++y)
                for (int x = cx - half; x <= cx + half; ++x)
                    if (img.contains(x, y)) img(x, y) = c;
        }
    return img;
}

}  // namespace

void write_png(const std::string& path, const Raster<std::uint8_t>& gray) {
    write_png_rows(path, gray.width, gray.height, PNG_COLOR_TYPE_GRAY, gray.data);
}

void write_png(const std::string& path, const Raster<Rgb>& rgb) {
    std::vector<std::uint8_t> buf;
    buf.reserve(rgb.size() * 3);
    for (const Rgb& p : rgb.data) {
        buf.push_back(p.r);
        buf.push_back(p.g);
        buf.push_back(p.b);
    }
    write_png_rows(path, rgb.width, rgb.height, PNG_COLOR_TYPE_RGB, buf);
}

Raster<std::uint8_t> to_gray(const Raster<double>& values, const Mask& valid) {
    Raster<std::uint8_t> out(values.width, values.height, 0);
    for (std::size_t i = 0; i < values.size(); ++i)
        if (valid.data[i]) out.data[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(values.data[i], 0.0, 1.0)));
    return out;
}

int dump_stages(const std::string& dir, std::size_t packet_index, const PacketTrace& trace,
                const PipelineConfig& cfg) {
    std::filesystem::create_directories(dir);
    char prefix[64];
    std::snprintf(prefix, sizeof prefix, "p%05zu_", packet_index);
    const std::string base = (std::filesystem::path(dir) / prefix).string();
    int written = 0;
    auto put = [&](const std::string& name, const auto& img) {
        if (img.empty()) return;
        write_png(base + name + ".png", img);
        ++written;
    };

    put("01_norm_on", to_gray(trace.norm_on.values, trace.norm_on.valid));
    put("01_norm_off", to_gray(trace.norm_off.values, trace.norm_off.valid));
    put("02_smooth_on", to_gray(trace.smooth_on.values, trace.smooth_on.valid));
    put("02_smooth_off", to_gray(trace.smooth_off.values, trace.smooth_off.valid));

    // on segments red, off segments blue; raw dim, age corrected bright
    Raster<Rgb> seg(cfg.W, cfg.H);
    for (const auto& l : trace.raw_on) draw_line(seg, l.p1, l.p2, {110, 0, 0});
    for (const auto& l : trace.raw_off) draw_line(seg, l.p1, l.p2, {0, 0, 110});
    for (const auto& l : trace.seg_on) draw_line(seg, l.p1, l.p2, {255, 40, 40});
    for (const auto& l : trace.seg_off) draw_line(seg, l.p1, l.p2, {60, 60, 255});
    put("03_segments", seg);

    Raster<Rgb> cand = seg;
    for (const auto& u : trace.unwarped)
        for (int k = 0; k < 4; ++k) draw_line(cand, u.source[k], u.source[(k + 1) % 4], {255, 255, 255});
    put("04_candidates", cand);

    const DecoderParams dp = cfg.decoder_params();
    for (std::size_t i = 0; i < trace.unwarped.size(); ++i) {
        char tag[32];
        std::snprintf(tag, sizeof tag, "05_c%02zu_", i);
        const auto& u = trace.unwarped[i];
        if (i < trace.decodes.size()) {
            const DecodeTrace& d = trace.decodes[i];
            put(std::string(tag) + "unwarped_on", response_overlay(u.on, d.responses.on, dp.n_d, dp.shift_for(Polarity::On)));
            put(std::string(tag) + "unwarped_off",
                response_overlay(u.off, d.responses.off, dp.n_d, dp.shift_for(Polarity::Off)));

            const int n = d.bits.n, cell = dp.n_d;
            Raster<std::uint8_t> marker((n + 2) * cell, (n + 2) * cell, 0);
            for (int y = cell; y < (n + 1) * cell; ++y)
                for (int x = cell; x < (n + 1) * cell; ++x)
                    marker(x, y) = d.bits(y / cell - 1, x / cell - 1) ? 255 : 0;
            put(std::string(tag) + "marker", marker);
        } else {
            put(std::string(tag) + "unwarped_on", to_gray(u.on.values, u.on.valid));
            put(std::string(tag) + "unwarped_off", to_gray(u.off.values, u.off.valid));
        }
    }
    return written;
}

}  // namespace evm

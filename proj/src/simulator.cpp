#include "evmarker/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace evm {

const MarkerDictionary& sim_dictionary(const SimConfig& cfg) { return cfg.dict ? *cfg.dict : builtin_dictionary(); }

Quad marker_corners(const SimConfig& cfg, double t_ms) {
    const Point2 tl = cfg.start + cfg.velocity * t_ms;
    const double s = cfg.marker_side_px;
    return {tl, tl + Point2{s, 0}, tl + Point2{s, s}, tl + Point2{0, s}};
}

bool marker_fully_visible(const Quad& q, const SensorGeometry& g) {
    return std::all_of(q.begin(), q.end(), [&](const Point2& p) {
        return p.x >= -0.5 && p.y >= -0.5 && p.x <= g.width - 0.5 && p.y <= g.height - 0.5;
    });
}

namespace {

struct Scene {
    const BitGrid& cells;
    double side;
    double cell;
    Point2 start;
    Point2 velocity;

    // 0 = black, 1 = white
    int color(double px, double py, double t_ms) const {
        const double u = px - (start.x + velocity.x * t_ms);
        const double v = py - (start.y + velocity.y * t_ms);
        if (u < 0.0 || v < 0.0 || u >= side || v >= side) return 1;
        const int col = std::min(cells.n - 1, static_cast<int>(u / cell));
        const int row = std::min(cells.n - 1, static_cast<int>(v / cell));
        return cells(row, col);
    }
};

}  // namespace

SimResult simulate_cells(const BitGrid& cells, const SimConfig& cfg) {
    validate_geometry(cfg.geometry);
    if (cells.n <= 0) throw std::invalid_argument("empty marker pattern");
    if (!(cfg.marker_side_px > 0.0)) throw std::invalid_argument("marker side must be positive");
    if (cfg.window_us <= 0) throw std::invalid_argument("window must be positive");

    const Scene scene{cells, cfg.marker_side_px, cfg.marker_side_px / cells.n, cfg.start, cfg.velocity};
    const double duration = cfg.duration_ms;
    const std::int64_t duration_us = static_cast<std::int64_t>(std::llround(duration * 1000.0));

    SimResult out;
    std::vector<double> times;
    times.reserve(2 * (cells.n + 1));
    for (int py = 0; py < cfg.geometry.height; ++py) {
        for (int px = 0; px < cfg.geometry.width; ++px) {
            times.clear();
            for (int k = 0; k <= cells.n; ++k) {
                const double line = k * scene.cell;
                if (cfg.velocity.x != 0.0) times.push_back((px - cfg.start.x - line) / cfg.velocity.x);
                if (cfg.velocity.y != 0.0) times.push_back((py - cfg.start.y - line) / cfg.velocity.y);
            }
            std::sort(times.begin(), times.end());
            times.erase(std::unique(times.begin(), times.end(),
                                    [](double a, double b) { return std::fabs(a - b) < 1e-9; }),
                        times.end());
            for (std::size_t i = 0; i < times.size(); ++i) {
                const double t = times[i];
                if (t < 0.0 || t >= duration) continue;
                const double before = i == 0 ? t - 1.0 : 0.5 * (times[i - 1] + t);
                const double after = i + 1 == times.size() ? t + 1.0 : 0.5 * (t + times[i + 1]);
                const int c0 = scene.color(px, py, before), c1 = scene.color(px, py, after);
                if (c0 == c1) continue;
                const Polarity p = c1 == 0 ? Polarity::Off : Polarity::On;
                const std::int64_t t_us = std::min(duration_us - 1, static_cast<std::int64_t>(std::llround(t * 1000.0)));
                for (int b = 0; b < cfg.events_per_crossing; ++b) out.events.push_back({t_us, px, py, p});
            }
        }
    }
    out.is_noise.assign(out.events.size(), 0);

    std::mt19937_64 rng(cfg.seed);
    if (cfg.timestamp_jitter_us > 0.0) {
        std::normal_distribution<double> jitter(0.0, cfg.timestamp_jitter_us);
        for (Event& e : out.events)
            e.t = std::max<std::int64_t>(0, e.t + static_cast<std::int64_t>(std::llround(jitter(rng))));
    }

    const double pixels = static_cast<double>(cfg.geometry.width) * cfg.geometry.height;
    const auto n_noise = std::llround(cfg.noise_rate * pixels * duration / 1000.0) +
                         std::llround(cfg.noise_fraction * static_cast<double>(out.events.size()));
    if (n_noise > 0 && duration_us > 0) {
        std::uniform_int_distribution<std::int64_t> t_dist(0, duration_us - 1);
        std::uniform_int_distribution<int> x_dist(0, cfg.geometry.width - 1), y_dist(0, cfg.geometry.height - 1);
        std::bernoulli_distribution on(0.5);
        for (long long i = 0; i < n_noise; ++i) {
            const std::int64_t t = t_dist(rng);
            const int x = x_dist(rng), y = y_dist(rng);
            out.events.push_back({t, x, y, on(rng) ? Polarity::On : Polarity::Off});
            out.is_noise.push_back(1);
        }
    }

    std::vector<std::size_t> order(out.events.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return out.events[a].t < out.events[b].t; });
    std::vector<Event> events(order.size());
    std::vector<std::uint8_t> noise(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        events[i] = out.events[order[i]];
        noise[i] = out.is_noise[order[i]];
    }
    out.events = std::move(events);
    out.is_noise = std::move(noise);

    for (std::int64_t t0 = 0; t0 < duration_us; t0 += cfg.window_us) {
        TruthFrame f;
        f.t_mid = t0 + cfg.window_us / 2;
        f.marker_id = cfg.marker_id;
        f.corners = marker_corners(cfg, static_cast<double>(f.t_mid) / 1000.0);
        f.fully_visible = marker_fully_visible(f.corners, cfg.geometry);
        out.truth.push_back(f);
    }
    return out;
}

SimResult simulate(const SimConfig& cfg) { return simulate_cells(marker_cells(cfg.marker_id, sim_dictionary(cfg)), cfg); }

const char* to_string(ExpectedOutcome e) {
    switch (e) {
        case ExpectedOutcome::Detect: return "detect";
        case ExpectedOutcome::NoDetection: return "no-detection";
        case ExpectedOutcome::Unreliable: return "unreliable";
    }
    return "?";
}

SimConfig sweep_config(int marker_id, Point2 direction, double speed, const SuiteOptions& opts,
                       const SensorGeometry& geometry) {
    const double dn = direction.norm();
    if (dn == 0.0 || !(speed > 0.0)) throw std::invalid_argument("sweep needs a direction and a positive speed");
    const Point2 d = direction * (1.0 / dn);
    const double s = opts.marker_side_px;
    const Point2 center{(geometry.width - 1) / 2.0, (geometry.height - 1) / 2.0};

    // Distance the center must travel before the marker is fully outside the
    // frame, measured along d.
    const double reach_x = std::fabs(d.x) > 1e-12 ? ((geometry.width - 1) / 2.0 + s / 2.0) / std::fabs(d.x) : 1e300;
    const double reach_y = std::fabs(d.y) > 1e-12 ? ((geometry.height - 1) / 2.0 + s / 2.0) / std::fabs(d.y) : 1e300;
    const double reach = std::min(reach_x, reach_y);

    // Center crossing on a frame mid-time.
    const double window_ms = 10.0;
    const double t_c = std::ceil((reach / speed - window_ms / 2.0) / window_ms) * window_ms + window_ms / 2.0;

    SimConfig cfg;
    cfg.geometry = geometry;
    cfg.marker_id = marker_id;
    cfg.marker_side_px = s;
    cfg.velocity = d * speed;
    cfg.start = center - d * (speed * t_c) - Point2{s / 2.0, s / 2.0};
    cfg.duration_ms = 2.0 * t_c;
    cfg.noise_fraction = opts.noise_fraction;
    cfg.timestamp_jitter_us = opts.timestamp_jitter_us;
    return cfg;
}

std::vector<SuiteCase> motion_suite(const MarkerDictionary& dict, const SuiteOptions& opts) {
    struct Dir {
        const char* name;
        Point2 d;
    };
    const Dir dirs[] = {{"right", {1, 0}}, {"left", {-1, 0}}, {"down", {0, 1}}, {"up", {0, -1}}};

    std::vector<SuiteCase> suite;
    auto add = [&](std::string name, SimConfig cfg, ExpectedOutcome e) {
        cfg.seed = opts.seed * 1'000'003ULL + suite.size();
        suite.push_back({std::move(name), cfg, e});
    };
    for (int id = 0; id < static_cast<int>(dict.size()); ++id) {
        for (const Dir& dir : dirs)
            for (double v : opts.speeds) {
                const std::string name = "id" + std::to_string(id) + "_" + dir.name + "_v" + std::to_string(v).substr(0, 4);
                add(name, sweep_config(id, dir.d, v, opts), ExpectedOutcome::Detect);
            }
    }
    if (opts.include_failure_cases) {
        for (int id = 0; id < static_cast<int>(dict.size()); ++id)
            add("id" + std::to_string(id) + "_diagonal_v2.00", sweep_config(id, {1, 1}, 2.0, opts),
                ExpectedOutcome::Unreliable);
        for (int id = 0; id < static_cast<int>(dict.size()); ++id) {
            SimConfig cfg;
            cfg.marker_id = id;
            cfg.marker_side_px = opts.marker_side_px;
            cfg.start = {(cfg.geometry.width - opts.marker_side_px) / 2.0,
                         (cfg.geometry.height - opts.marker_side_px) / 2.0};
            cfg.velocity = {0.05, 0.0};
            cfg.duration_ms = 200.0;
            cfg.noise_fraction = opts.noise_fraction;
            cfg.timestamp_jitter_us = opts.timestamp_jitter_us;
            add("id" + std::to_string(id) + "_slow_v0.05", cfg, ExpectedOutcome::NoDetection);
        }
    }
    for (SuiteCase& c : suite) c.config.dict = &dict;
    return suite;
}

}  // namespace evm

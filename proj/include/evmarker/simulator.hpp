#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evmarker/dictionary.hpp"
#include "evmarker/event_model.hpp"
#include "evmarker/geometry.hpp"

namespace evm {

/// A square marker translating at constant velocity in front of a white
/// background. Pixel centers sit at integer coordinates; the marker covers
/// [x, x + side) x [y, y + side) with (x, y) = start + velocity * t.
struct SimConfig {
    SensorGeometry geometry;
    int marker_id = 0;
    const MarkerDictionary* dict = nullptr;  // null: builtin dictionary
    double marker_side_px = 88.0;
    Point2 start{20.0, 20.0};  // marker top-left at t = 0
    Point2 velocity{1.0, 0.0};  // px/ms
    double duration_ms = 100.0;
    double timestamp_jitter_us = 0.0;  // std-dev
    double noise_rate = 0.0;            // events per pixel per second
    double noise_fraction = 0.0;        // extra noise, as a fraction of the signal event count
    int events_per_crossing = 1;
    std::int64_t window_us = 10'000;  // ground-truth frame length
    std::uint64_t seed = 1;
};

struct TruthFrame {
    std::int64_t t_mid = 0;
    int marker_id = -1;
    Quad corners{};  // TL, TR, BR, BL at t_mid
    bool fully_visible = false;

    friend bool operator==(const TruthFrame&, const TruthFrame&) = default;
};

struct SimResult {
    std::vector<Event> events;       // sorted by t
    std::vector<std::uint8_t> is_noise;  // parallel to events
    std::vector<TruthFrame> truth;   // one per window in [0, duration)
};

const MarkerDictionary& sim_dictionary(const SimConfig& cfg);

/// Marker corners at time t (ms).
Quad marker_corners(const SimConfig& cfg, double t_ms);

/// All four corners inside the sensor area [-0.5, W-0.5] x [-0.5, H-0.5].
bool marker_fully_visible(const Quad& q, const SensorGeometry& g);

/// Renders `cells` (0 = black, 1 = white, one entry per marker cell) instead
/// of a dictionary marker. cfg.marker_id is only copied into the truth.
SimResult simulate_cells(const BitGrid& cells, const SimConfig& cfg);

SimResult simulate(const SimConfig& cfg);

enum class ExpectedOutcome { Detect, NoDetection, Unreliable };

const char* to_string(ExpectedOutcome e);

struct SuiteCase {
    std::string name;
    SimConfig config;
    ExpectedOutcome expected = ExpectedOutcome::Detect;
};

struct SuiteOptions {
    std::vector<double> speeds{1.0, 2.0, 4.0};  // px/ms
    double marker_side_px = 88.0;
    double noise_fraction = 0.0;
    double timestamp_jitter_us = 0.0;
    bool include_failure_cases = true;  // diagonal and slow-motion configs
    std::uint64_t seed = 1;
};

/// Straight pass through the sensor center, starting and ending with the
/// marker just outside the frame. The center crossing falls on a frame
/// mid-time. `direction` is normalized internally.
SimConfig sweep_config(int marker_id, Point2 direction, double speed, const SuiteOptions& opts,
                       const SensorGeometry& geometry = {});

/// Lateral sweeps (right, left, down, up) at every speed for every marker,
/// then a 45 degree diagonal per marker and a 0.05 px/ms creep per marker.
std::vector<SuiteCase> motion_suite(const MarkerDictionary& dict, const SuiteOptions& opts = {});

}  // namespace evm

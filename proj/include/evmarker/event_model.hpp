#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace evm {

enum class Polarity : std::uint8_t { Off = 0, On = 1 };

struct Event {
    std::int64_t t = 0;  // microseconds
    int x = 0;
    int y = 0;
    Polarity polarity = Polarity::Off;

    friend bool operator==(const Event&, const Event&) = default;
};

struct SensorGeometry {
    int width = 128;
    int height = 128;

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
    friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

/// Events falling in the half-open window [t_start, t_end).
struct EventPacket {
    std::vector<Event> events;
    std::int64_t t_start = 0;
    std::int64_t t_end = 0;
    SensorGeometry geometry;

    std::int64_t t_mid() const { return t_start + (t_end - t_start) / 2; }
};

class EventStreamError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws EventStreamError on geometry below 8x8.
void validate_geometry(const SensorGeometry& geometry);

/// Splits a time-sorted stream into contiguous windows of `window_us`.
/// The first window starts at the first timestamp rounded down to a multiple
/// of the window. Empty windows between events become empty packets.
std::vector<EventPacket> packetize(std::span<const Event> stream, std::int64_t window_us,
                                   const SensorGeometry& geometry);

struct NoiseFilterParams {
    int support_radius = 1;
    std::int64_t support_window_us = 2000;
};

/// Background-activity filter. An event survives iff an earlier event of the
/// packet (any polarity) lies within Chebyshev distance `support_radius` and
/// at most `support_window_us` before it. Order is preserved.
EventPacket noise_filter(const EventPacket& packet, const NoiseFilterParams& params = {});

}  // namespace evm

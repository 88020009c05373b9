#include "evmarker/event_model.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace evm {

void validate_geometry(const SensorGeometry& geometry) {
    if (geometry.width < 8 || geometry.height < 8)
        throw EventStreamError("sensor geometry must be at least 8x8, got " +
                               std::to_string(geometry.width) + "x" + std::to_string(geometry.height));
}

namespace {

std::int64_t floor_to_multiple(std::int64_t t, std::int64_t window) {
    std::int64_t q = t / window;
    if (t % window != 0 && t < 0) --q;
    return q * window;
}

}  // namespace

std::vector<EventPacket> packetize(std::span<const Event> stream, std::int64_t window_us,
                                   const SensorGeometry& geometry) {
    if (window_us <= 0) throw EventStreamError("packet window must be positive");
    validate_geometry(geometry);

    std::vector<EventPacket> packets;
    if (stream.empty()) return packets;

    for (std::size_t i = 0; i < stream.size(); ++i) {
        const Event& e = stream[i];
        if (!geometry.contains(e.x, e.y))
            throw EventStreamError("event " + std::to_string(i) + " at (" + std::to_string(e.x) + "," +
                                   std::to_string(e.y) + ") is outside the sensor");
        if (i > 0 && e.t < stream[i - 1].t)
            throw EventStreamError("event stream is not sorted by timestamp at index " + std::to_string(i));
    }

    const std::int64_t first = floor_to_multiple(stream.front().t, window_us);
    const std::int64_t last = stream.back().t;
    const std::size_t count = static_cast<std::size_t>((last - first) / window_us) + 1;
    packets.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        packets[k].t_start = first + static_cast<std::int64_t>(k) * window_us;
        packets[k].t_end = packets[k].t_start + window_us;
        packets[k].geometry = geometry;
    }
    for (const Event& e : stream) {
        const auto k = static_cast<std::size_t>((e.t - first) / window_us);
        packets[k].events.push_back(e);
    }
    return packets;
}

EventPacket noise_filter(const EventPacket& packet, const NoiseFilterParams& params) {
    const SensorGeometry& g = packet.geometry;
    constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::min();
    // Most recent timestamp per pixel; the latest earlier event is the best
    // candidate for temporal support.
    std::vector<std::int64_t> last(static_cast<std::size_t>(g.width) * g.height, kNever);

    EventPacket out;
    out.t_start = packet.t_start;
    out.t_end = packet.t_end;
    out.geometry = g;
    out.events.reserve(packet.events.size());

    const int r = params.support_radius;
    for (const Event& e : packet.events) {
        const int x0 = std::max(0, e.x - r), x1 = std::min(g.width - 1, e.x + r);
        const int y0 = std::max(0, e.y - r), y1 = std::min(g.height - 1, e.y + r);
        bool supported = false;
        for (int y = y0; y <= y1 && !supported; ++y) {
            const std::int64_t* row = last.data() + static_cast<std::size_t>(y) * g.width;
            for (int x = x0; x <= x1; ++x) {
                if (row[x] != kNever && e.t - row[x] <= params.support_window_us) {
                    supported = true;
                    break;
                }
            }
        }
        if (supported) out.events.push_back(e);
        last[static_cast<std::size_t>(e.y) * g.width + e.x] = e.t;
    }
    return out;
}

}  // namespace evm

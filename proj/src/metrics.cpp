#include "evmarker/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace evm {

std::optional<double> DetectionMetrics::frame_rate() const {
    if (visible_frames == 0) return std::nullopt;
    return 100.0 * static_cast<double>(detected_frames) / static_cast<double>(visible_frames);
}

std::optional<double> DetectionMetrics::pass_rate() const {
    if (passes == 0) return std::nullopt;
    return 100.0 * static_cast<double>(detected_passes) / static_cast<double>(passes);
}

DetectionMetrics& DetectionMetrics::operator+=(const DetectionMetrics& o) {
    visible_frames += o.visible_frames;
    detected_frames += o.detected_frames;
    passes += o.passes;
    detected_passes += o.detected_passes;
    detections += o.detections;
    wrong_id += o.wrong_id;
    return *this;
}

DetectionMetrics evaluate(std::span<const ReportRecord> records, std::span<const TruthFrame> truth) {
    std::map<std::int64_t, std::size_t> frame_of;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (!frame_of.emplace(truth[i].t_mid, i).second)
            throw std::invalid_argument("duplicate truth frame at t_mid " + std::to_string(truth[i].t_mid));

    std::vector<std::uint8_t> hit(truth.size(), 0);
    DetectionMetrics m;
    for (const ReportRecord& r : records) {
        const auto it = frame_of.find(r.t_mid);
        if (it == frame_of.end())
            throw std::invalid_argument("detection at t_mid " + std::to_string(r.t_mid) + " has no truth frame");
        ++m.detections;
        if (r.marker_id == truth[it->second].marker_id) hit[it->second] = 1;
        else ++m.wrong_id;
    }

    bool in_pass = false, pass_hit = false;
    for (std::size_t i = 0; i <= truth.size(); ++i) {
        const bool visible = i < truth.size() && truth[i].fully_visible;
        if (visible) {
            ++m.visible_frames;
            if (hit[i]) ++m.detected_frames;
            if (!in_pass) {
                in_pass = true;
                pass_hit = false;
                ++m.passes;
            }
            pass_hit = pass_hit || hit[i];
        } else if (in_pass) {
            in_pass = false;
            if (pass_hit) ++m.detected_passes;
        }
    }
    return m;
}

namespace {

template <typename F>
MeanStd mean_std(std::span<const PacketResult> rs, F field) {
    MeanStd out;
    if (rs.empty()) return out;
    double sum = 0.0;
    for (const auto& r : rs) sum += field(r.timings);
    out.mean = sum / static_cast<double>(rs.size());
    double var = 0.0;
    for (const auto& r : rs) var += (field(r.timings) - out.mean) * (field(r.timings) - out.mean);
    out.stddev = rs.size() > 1 ? std::sqrt(var / static_cast<double>(rs.size() - 1)) : 0.0;
    return out;
}

}  // namespace

TimingSummary summarize_timings(std::span<const PacketResult> results) {
    TimingSummary s;
    s.packets = results.size();
    s.event_image = mean_std(results, [](const StageTimings& t) { return t.event_image_us; });
    s.segments = mean_std(results, [](const StageTimings& t) { return t.segments_us; });
    s.unwarp = mean_std(results, [](const StageTimings& t) { return t.unwarp_us; });
    s.decode = mean_std(results, [](const StageTimings& t) { return t.decode_us; });
    s.total = mean_std(results, [](const StageTimings& t) { return t.total_us; });
    s.packets_per_second = s.total.mean > 0.0 ? 1e6 / s.total.mean : 0.0;
    return s;
}

std::string format_rate(std::optional<double> rate) {
    if (!rate) return "N/A";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", *rate);
    return buf;
}

std::string format_summary(const TimingSummary& s) {
    char buf[1024];
    auto ms = [](const MeanStd& m) { return std::pair{m.mean / 1000.0, m.stddev / 1000.0}; };
    const auto [a, as] = ms(s.event_image);
    const auto [b, bs] = ms(s.segments);
    const auto [c, cs] = ms(s.unwarp);
    const auto [d, ds] = ms(s.decode);
    const auto [t, ts] = ms(s.total);
    std::snprintf(buf, sizeof buf,
                  "packets                        %zu\n"
                  "event image                    %.3f +- %.3f ms\n"
                  "segments + age + candidates    %.3f +- %.3f ms\n"
                  "candidate unwarping            %.3f +- %.3f ms\n"
                  "decode + lookup                %.3f +- %.3f ms\n"
                  "total                          %.3f +- %.3f ms\n"
                  "throughput                     %.1f packets/s\n",
                  s.packets, a, as, b, bs, c, cs, d, ds, t, ts, s.packets_per_second);
    return buf;
}

}  // namespace evm

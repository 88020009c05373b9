#pragma once

#include <optional>
#include <span>
#include <string>

#include "evmarker/io.hpp"
#include "evmarker/pipeline.hpp"
#include "evmarker/simulator.hpp"

namespace evm {

struct DetectionMetrics {
    std::size_t visible_frames = 0;
    std::size_t detected_frames = 0;  // visible frames with a correct-id detection
    std::size_t passes = 0;           // maximal runs of visible frames
    std::size_t detected_passes = 0;
    std::size_t detections = 0;
    std::size_t wrong_id = 0;

    /// Percentages; empty when the denominator is zero.
    std::optional<double> frame_rate() const;
    std::optional<double> pass_rate() const;

    DetectionMetrics& operator+=(const DetectionMetrics& o);
};

/// Throws std::invalid_argument when a record's t_mid matches no truth frame.
DetectionMetrics evaluate(std::span<const ReportRecord> records, std::span<const TruthFrame> truth);

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

struct TimingSummary {
    std::size_t packets = 0;
    MeanStd event_image, segments, unwarp, decode, total;  // microseconds
    double packets_per_second = 0.0;
};

TimingSummary summarize_timings(std::span<const PacketResult> results);

/// "12.3%" or "N/A".
std::string format_rate(std::optional<double> rate);
std::string format_summary(const TimingSummary& s);

}  // namespace evm

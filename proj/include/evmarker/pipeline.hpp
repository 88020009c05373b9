#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evmarker/candidates.hpp"
#include "evmarker/decoder.hpp"
#include "evmarker/dictionary.hpp"
#include "evmarker/event_image.hpp"
#include "evmarker/event_model.hpp"
#include "evmarker/segments.hpp"

namespace evm {

struct PipelineConfig {
    int W = 128;
    int H = 128;
    int n_s = 3;
    double sigma_s = 0.8;
    double l_min = 25.0;
    int s_c = 160;
    int n_d = 20;
    double sigma_d = 3.35;
    double theta = 0.55;
    std::int64_t window_us = 10'000;
    bool noise_filter = true;
    int noise_radius = 1;
    std::int64_t noise_window_us = 2000;
    bool flip = true;  // run segment detection on the flipped image
    ShiftPolarity shift_polarity = ShiftPolarity::Both;
    std::size_t candidate_cap = 64;
    double max_shift = 20.0;

    SensorGeometry geometry() const { return {W, H}; }
    NoiseFilterParams noise_params() const { return {noise_radius, noise_window_us}; }
    CandidateParams candidate_params() const;
    DecoderParams decoder_params() const;
    AgeCorrectionParams age_params() const;

    /// Throws std::invalid_argument on inconsistent values.
    void validate() const;
};

/// Wall-clock microseconds per stage group: event image (filter through
/// smoothing), segments (detection, age correction, pairing), unwarping, and
/// decoding with the dictionary lookup.
struct StageTimings {
    double event_image_us = 0.0;
    double segments_us = 0.0;
    double unwarp_us = 0.0;
    double decode_us = 0.0;
    double total_us = 0.0;

    double stage_sum() const { return event_image_us + segments_us + unwarp_us + decode_us; }
};

struct PacketResult {
    std::size_t packet_index = 0;
    std::int64_t t_mid = 0;
    std::vector<Detection> detections;
    StageTimings timings;
};

/// Intermediate products kept for stage dumps and tests.
struct PacketTrace {
    EventPacket filtered;
    NormImage norm_on, norm_off;      // unflipped, used for age and unwarping
    SmoothImage smooth_on, smooth_off;  // segment detection input
    std::vector<LineSegment> raw_on, raw_off;
    std::vector<LineSegment> seg_on, seg_off;  // age corrected
    std::vector<Candidate> candidates;
    std::vector<UnwarpedCandidate> unwarped;  // candidates that passed corner ordering
    std::vector<DecodeTrace> decodes;         // parallel to unwarped
};

PacketResult detect_packet(const EventPacket& packet, const PipelineConfig& cfg, const MarkerDictionary& dict,
                           PacketTrace* trace = nullptr);

/// detect_packet over every packet. `parallel` spreads packets over OpenMP
/// threads; results are identical to the serial run apart from timings.
std::vector<PacketResult> detect_packets(std::span<const EventPacket> packets, const PipelineConfig& cfg,
                                         const MarkerDictionary& dict, bool parallel = false);

/// packetize followed by detect_packets.
std::vector<PacketResult> detect_stream(std::span<const Event> events, const PipelineConfig& cfg,
                                        const MarkerDictionary& dict, bool parallel = false);

}  // namespace evm

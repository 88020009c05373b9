#include "evmarker/pipeline.hpp"

#include <chrono>
#include <stdexcept>
#include <unordered_set>

namespace evm {

CandidateParams PipelineConfig::candidate_params() const {
    CandidateParams p;
    p.cap = candidate_cap;
    return p;
}

DecoderParams PipelineConfig::decoder_params() const {
    DecoderParams p;
    p.s_c = s_c;
    p.n_d = n_d;
    p.sigma_d = sigma_d;
    p.theta = theta;
    p.shift_polarity = shift_polarity;
    p.min_area = l_min * l_min / 2.0;
    return p;
}

AgeCorrectionParams PipelineConfig::age_params() const {
    AgeCorrectionParams p;
    p.max_shift = max_shift;
    return p;
}

void PipelineConfig::validate() const {
    validate_geometry(geometry());
    if (n_s < 1 || n_s % 2 == 0) throw std::invalid_argument("n_s must be odd and positive");
    if (!(sigma_s > 0.0) || !(sigma_d > 0.0)) throw std::invalid_argument("sigmas must be positive");
    if (!(l_min > 0.0)) throw std::invalid_argument("l_min must be positive");
    if (n_d <= 0 || s_c <= 0 || s_c % n_d != 0) throw std::invalid_argument("s_c must be a positive multiple of n_d");
    if (s_c / n_d < 3) throw std::invalid_argument("need at least one inner cell");
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must be in (0, 1]");
    if (window_us <= 0) throw std::invalid_argument("window_us must be positive");
    if (noise_radius < 0 || noise_window_us < 0) throw std::invalid_argument("noise filter parameters must be >= 0");
    if (!(max_shift >= 0.0)) throw std::invalid_argument("max_shift must be >= 0");
}

namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

}  // namespace

PacketResult detect_packet(const EventPacket& packet, const PipelineConfig& cfg, const MarkerDictionary& dict,
                           PacketTrace* trace) {
    const auto t_begin = Clock::now();
    PacketResult res;
    res.t_mid = packet.t_mid();

    // event image
    auto t0 = Clock::now();
    EventPacket filtered = cfg.noise_filter ? noise_filter(packet, cfg.noise_params()) : packet;
    const TimeImage time_on = build_time_image(filtered, Polarity::On);
    const TimeImage time_off = build_time_image(filtered, Polarity::Off);
    NormImage norm_on = normalize(time_on, false);
    NormImage norm_off = normalize(time_off, false);
    const GaussianKernel kernel = GaussianKernel::make(cfg.n_s, cfg.sigma_s);
    SmoothImage smooth_on, smooth_off;
    if (!norm_on.empty() && !norm_off.empty()) {
        smooth_on = smooth(refine(normalize(time_on, cfg.flip)), kernel);
        smooth_off = smooth(refine(normalize(time_off, cfg.flip)), kernel);
    }
    res.timings.event_image_us = micros_since(t0);

    // segments, age correction, pairing
    t0 = Clock::now();
    std::vector<LineSegment> raw_on, raw_off, seg_on, seg_off;
    std::vector<Candidate> candidates;
    if (!smooth_on.empty() && !smooth_off.empty()) {
        raw_on = detect_segments(smooth_on, cfg.l_min, Polarity::On);
        if (!raw_on.empty()) raw_off = detect_segments(smooth_off, cfg.l_min, Polarity::Off);
        const AgeCorrectionParams age = cfg.age_params();
        for (const auto& l : raw_on)
            if (auto c = correct_age(l, norm_on, age)) seg_on.push_back(*c);
        for (const auto& l : raw_off)
            if (auto c = correct_age(l, norm_off, age)) seg_off.push_back(*c);
        candidates = form_candidates(seg_on, seg_off, cfg.candidate_params());
    }
    res.timings.segments_us = micros_since(t0);

    // unwarping
    t0 = Clock::now();
    const DecoderParams dp = cfg.decoder_params();
    std::vector<UnwarpedCandidate> unwarped;
    unwarped.reserve(candidates.size());
    for (const Candidate& c : candidates)
        if (auto u = unwarp_candidate(c, norm_on, norm_off, dp)) unwarped.push_back(std::move(*u));
    res.timings.unwarp_us = micros_since(t0);

    // decoding and lookup
    t0 = Clock::now();
    std::vector<DecodeTrace> decodes(trace ? unwarped.size() : 0);
    std::unordered_set<int> seen;
    for (std::size_t i = 0; i < unwarped.size(); ++i) {
        auto d = decode_unwarped(unwarped[i], dict, dp, res.t_mid, trace ? &decodes[i] : nullptr);
        if (d && seen.insert(d->marker_id).second) res.detections.push_back(*d);
    }
    res.timings.decode_us = micros_since(t0);
    res.timings.total_us = micros_since(t_begin);

    if (trace) {
        trace->filtered = std::move(filtered);
        trace->norm_on = std::move(norm_on);
        trace->norm_off = std::move(norm_off);
        trace->smooth_on = std::move(smooth_on);
        trace->smooth_off = std::move(smooth_off);
        trace->raw_on = std::move(raw_on);
        trace->raw_off = std::move(raw_off);
        trace->seg_on = std::move(seg_on);
        trace->seg_off = std::move(seg_off);
        trace->candidates = std::move(candidates);
        trace->unwarped = std::move(unwarped);
        trace->decodes = std::move(decodes);
    }
    return res;
}

std::vector<PacketResult> detect_packets(std::span<const EventPacket> packets, const PipelineConfig& cfg,
                                         const MarkerDictionary& dict, bool parallel) {
    std::vector<PacketResult> out(packets.size());
    const auto n = static_cast<std::ptrdiff_t>(packets.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] = detect_packet(packets[static_cast<std::size_t>(i)], cfg, dict);
            out[static_cast<std::size_t>(i)].packet_index = static_cast<std::size_t>(i);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] = detect_packet(packets[static_cast<std::size_t>(i)], cfg, dict);
            out[static_cast<std::size_t>(i)].packet_index = static_cast<std::size_t>(i);
        }
    }
    return out;
}

std::vector<PacketResult> detect_stream(std::span<const Event> events, const PipelineConfig& cfg,
                                        const MarkerDictionary& dict, bool parallel) {
    const auto packets = packetize(events, cfg.window_us, cfg.geometry());
    return detect_packets(packets, cfg, dict, parallel);
}

}  // namespace evm

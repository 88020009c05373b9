#include <gtest/gtest.h>

#include <filesystem>

#include "evmarker/dump.hpp"
#include "evmarker/pipeline.hpp"
#include "evmarker/simulator.hpp"

using namespace evm;

namespace {

std::vector<EventPacket> sweep_packets(int id, Point2 dir, double speed, const SuiteOptions& opts,
                                       std::vector<TruthFrame>* truth = nullptr) {
    const SimConfig sc = sweep_config(id, dir, speed, opts);
    const SimResult r = simulate(sc);
    if (truth) *truth = r.truth;
    return packetize(r.events, 10000, sc.geometry);
}

bool same_detections(const PacketResult& a, const PacketResult& b) {
    if (a.packet_index != b.packet_index || a.t_mid != b.t_mid || a.detections.size() != b.detections.size())
        return false;
    for (std::size_t i = 0; i < a.detections.size(); ++i) {
        const Detection &x = a.detections[i], &y = b.detections[i];
        if (x.marker_id != y.marker_id || x.rotation_deg != y.rotation_deg || x.corners != y.corners) return false;
    }
    return true;
}

}  // namespace

TEST(Pipeline, EmptyPacket) {
    EventPacket p;
    p.t_start = 20000;
    p.t_end = 30000;
    PacketTrace tr;
    const auto r = detect_packet(p, PipelineConfig{}, builtin_dictionary(), &tr);
    EXPECT_TRUE(r.detections.empty());
    EXPECT_EQ(r.t_mid, 25000);
    EXPECT_TRUE(tr.candidates.empty());
}

TEST(Pipeline, OnlyOnePolarityGivesNothing) {
    const auto packets = sweep_packets(3, {1, 0}, 1.0, SuiteOptions{});
    EventPacket p = packets[packets.size() / 2];
    std::erase_if(p.events, [](const Event& e) { return e.polarity == Polarity::Off; });
    PacketTrace tr;
    const auto r = detect_packet(p, PipelineConfig{}, builtin_dictionary(), &tr);
    EXPECT_TRUE(r.detections.empty());
    EXPECT_TRUE(tr.seg_off.empty());
    EXPECT_TRUE(tr.candidates.empty());
}

TEST(Pipeline, SingleCorrectDetection) {
    std::vector<TruthFrame> truth;
    const auto packets = sweep_packets(12, {1, 0}, 1.0, SuiteOptions{}, &truth);
    std::size_t visible = 0;
    for (std::size_t i = 0; i < packets.size(); ++i) {
        const auto r = detect_packet(packets[i], PipelineConfig{}, builtin_dictionary());
        if (!truth[i].fully_visible) continue;
        ++visible;
        ASSERT_EQ(r.detections.size(), 1u) << i;
        EXPECT_EQ(r.detections[0].marker_id, 12);
        EXPECT_EQ(r.detections[0].t_mid, truth[i].t_mid);
    }
    EXPECT_GT(visible, 0u);
}

TEST(Pipeline, DeterministicAndParallelMatchesSerial) {
    SuiteOptions opts;
    opts.noise_fraction = 0.05;
    opts.timestamp_jitter_us = 200;
    std::vector<EventPacket> packets;
    for (int id : {0, 5, 13})
        for (Point2 d : {Point2{1, 0}, Point2{0, -1}}) {
            auto p = sweep_packets(id, d, 2.0, opts);
            packets.insert(packets.end(), p.begin(), p.end());
        }
    const PipelineConfig cfg;
    const auto a = detect_packets(packets, cfg, builtin_dictionary(), false);
    const auto b = detect_packets(packets, cfg, builtin_dictionary(), false);
    const auto c = detect_packets(packets, cfg, builtin_dictionary(), true);
    ASSERT_EQ(a.size(), packets.size());
    ASSERT_EQ(c.size(), packets.size());
    std::size_t found = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].packet_index, i);
        EXPECT_TRUE(same_detections(a[i], b[i])) << i;
        EXPECT_TRUE(same_detections(a[i], c[i])) << i;
        found += a[i].detections.size();
    }
    EXPECT_GT(found, 0u);
}

TEST(Pipeline, StageTimesAddUpToTotal) {
    const auto packets = sweep_packets(6, {0, 1}, 1.0, SuiteOptions{});
    const PipelineConfig cfg;
    // warm-up so first-touch costs do not land in the glue
    detect_packets(packets, cfg, builtin_dictionary());
    double sum = 0, total = 0;
    for (int rep = 0; rep < 3; ++rep)
        for (const auto& r : detect_packets(packets, cfg, builtin_dictionary())) {
            EXPECT_LE(r.timings.stage_sum(), r.timings.total_us * 1.0001 + 1);
            sum += r.timings.stage_sum();
            total += r.timings.total_us;
        }
    ASSERT_GT(total, 0);
    EXPECT_GE(sum / total, 0.95) << sum << " / " << total;
}

TEST(Pipeline, RejectsBadConfig) {
    PipelineConfig c;
    c.n_d = 30;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = PipelineConfig{};
    c.window_us = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_NO_THROW(PipelineConfig{}.validate());
}

TEST(Dump, WritesStageImages) {
    const auto packets = sweep_packets(1, {1, 0}, 1.0, SuiteOptions{});
    const PipelineConfig cfg;
    PacketTrace tr;
    const std::size_t idx = packets.size() / 2;
    const auto r = detect_packet(packets[idx], cfg, builtin_dictionary(), &tr);
    ASSERT_FALSE(r.detections.empty());
    const auto dir = std::filesystem::temp_directory_path() / "evmarker_dump_test";
    std::filesystem::remove_all(dir);
    const int n = dump_stages(dir.string(), idx, tr, cfg);
    EXPECT_GE(n, 7);
    int on_disk = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        EXPECT_EQ(e.path().extension(), ".png");
        EXPECT_GT(std::filesystem::file_size(e.path()), 0u);
        ++on_disk;
    }
    EXPECT_EQ(on_disk, n);
    char name[64];
    std::snprintf(name, sizeof name, "p%05zu_01_norm_on.png", idx);
    EXPECT_TRUE(std::filesystem::exists(dir / name));
    std::filesystem::remove_all(dir);
}

#include <gtest/gtest.h>

#include <random>

#include "evmarker/decoder.hpp"
#include "evmarker/pipeline.hpp"
#include "evmarker/simulator.hpp"
#include "oracles.hpp"

using namespace evm;

namespace {

double dist(Point2 a, Point2 b) { return (a - b).norm(); }

LineSegment seg(double x1, double y1, double x2, double y2, Polarity p) {
    LineSegment s{{x1, y1}, {x2, y2}};
    s.polarity = p;
    return s;
}

Raster<std::uint8_t> flags(int n, std::initializer_list<std::pair<int, int>> set) {
    Raster<std::uint8_t> f(n, n, 0);
    for (auto [j, i] : set) f(j, i) = 1;
    return f;
}

UnwarpedImage blank_unwarped(int side) {
    UnwarpedImage u;
    u.values = Raster<double>(side, side, 0.0);
    u.valid = Mask(side, side, 0);
    return u;
}

struct SweepFrame {
    TruthFrame truth;
    PacketResult result;
    PacketTrace trace;
};

std::vector<SweepFrame> visible_frames(int id, Point2 dir, double speed) {
    const PipelineConfig cfg;
    const SimConfig sc = sweep_config(id, dir, speed, SuiteOptions{});
    const SimResult r = simulate(sc);
    const auto packets = packetize(r.events, cfg.window_us, sc.geometry);
    std::vector<SweepFrame> out;
    for (std::size_t i = 0; i < packets.size(); ++i) {
        if (!r.truth[i].fully_visible) continue;
        SweepFrame f;
        f.truth = r.truth[i];
        f.result = detect_packet(packets[i], cfg, builtin_dictionary(), &f.trace);
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace

TEST(Homography, IdentityAndTranslation) {
    const Quad sq = canonical_square(160);
    EXPECT_EQ(sq[2], (Point2{159, 159}));
    const auto id = compute_homography(sq, sq);
    ASSERT_TRUE(id);
    for (int k = 0; k < 9; ++k) EXPECT_NEAR(id->m[k], (k % 4 == 0) ? 1.0 : 0.0, 1e-12);
    Quad moved = sq;
    for (auto& p : moved) p = p + Point2{7.5, -3};
    const auto t = compute_homography(sq, moved);
    ASSERT_TRUE(t);
    const Point2 q = t->apply({20, 30});
    EXPECT_NEAR(q.x, 27.5, 1e-9);
    EXPECT_NEAR(q.y, 27.0, 1e-9);
}

TEST(Homography, RandomQuadsMapCorners) {
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> u(-20, 20);
    const Quad dst = canonical_square(160);
    int checked = 0;
    while (checked < 100) {
        const Quad src{Point2{10 + u(rng), 10 + u(rng)}, Point2{100 + u(rng), 10 + u(rng)},
                       Point2{100 + u(rng), 100 + u(rng)}, Point2{10 + u(rng), 100 + u(rng)}};
        const auto h = compute_homography(src, dst);
        ASSERT_TRUE(h);
        const auto inv = h->inverse();
        ASSERT_TRUE(inv);
        for (int k = 0; k < 4; ++k) {
            EXPECT_LT(dist(h->apply(src[k]), dst[k]), 1e-9);
            EXPECT_LT(dist(inv->apply(dst[k]), src[k]), 1e-9);
        }
        ++checked;
    }
}

TEST(Homography, RejectsCollinear) {
    const Quad dst = canonical_square(160);
    EXPECT_FALSE(compute_homography(Quad{Point2{0, 0}, Point2{10, 0}, Point2{20, 0}, Point2{5, 9}}, dst));
    EXPECT_FALSE(compute_homography(Quad{Point2{0, 0}, Point2{0, 0}, Point2{20, 5}, Point2{5, 9}}, dst));
    EXPECT_FALSE(compute_homography(dst, Quad{Point2{0, 0}, Point2{1, 1}, Point2{2, 2}, Point2{0, 5}}));
}

TEST(OrderCorners, WorkedExample) {
    Candidate c{seg(40, 12, 40, 52, Polarity::On), seg(10, 10, 10, 50, Polarity::Off), 0};
    const auto q = order_corners(c, 312.5);
    ASSERT_TRUE(q);
    EXPECT_EQ((*q)[0], (Point2{10, 10}));
    EXPECT_EQ((*q)[1], (Point2{40, 12}));
    EXPECT_EQ((*q)[2], (Point2{40, 52}));
    EXPECT_EQ((*q)[3], (Point2{10, 50}));
    // endpoint order of the inputs does not matter
    Candidate s{seg(40, 52, 40, 12, Polarity::On), seg(10, 50, 10, 10, Polarity::Off), 0};
    EXPECT_EQ(order_corners(s, 312.5), q);
    const auto h = compute_homography(*q, canonical_square(160));
    ASSERT_TRUE(h);
    EXPECT_LT(dist(h->apply({10, 10}), {0, 0}), 1e-9);
    EXPECT_LT(dist(h->apply({40, 52}), {159, 159}), 1e-9);
}

TEST(OrderCorners, MirroredPairTurnsUpsideDown) {
    // off on the right: the frame is rotated by 180 degrees
    Candidate c{seg(10, 10, 10, 50, Polarity::On), seg(40, 12, 40, 52, Polarity::Off), 0};
    const auto q = order_corners(c, 312.5);
    ASSERT_TRUE(q);
    EXPECT_EQ((*q)[0], (Point2{40, 52}));
    EXPECT_EQ((*q)[1], (Point2{10, 50}));
}

TEST(OrderCorners, Rejections) {
    // crossing segments make a bow tie
    Candidate bow{seg(10, 10, 40, 50, Polarity::On), seg(40, 10, 10, 50, Polarity::Off), 0};
    EXPECT_FALSE(order_corners(bow, 1));
    Candidate thin{seg(12, 10, 12, 50, Polarity::On), seg(10, 10, 10, 50, Polarity::Off), 0};
    EXPECT_FALSE(order_corners(thin, 312.5));
    EXPECT_TRUE(order_corners(thin, 50));
}

TEST(Unwarp, IdentityCrop) {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> u(0, 1);
    NormImage n;
    n.values = Raster<double>(48, 48, 0.0);
    n.valid = Mask(48, 48, 0);
    for (std::size_t i = 0; i < n.values.size(); ++i)
        if (u(rng) < 0.5) {
            n.valid.data[i] = 1;
            n.values.data[i] = u(rng);
        }
    const UnwarpedImage w = unwarp(n, Homography{}, 40, Polarity::On);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x) {
            EXPECT_EQ(w.valid(x, y), n.valid(x, y));
            EXPECT_NEAR(w.values(x, y), n.valid(x, y) ? n.values(x, y) : 0.0, 1e-12);
        }
}

TEST(Unwarp, ConstantImageStaysConstant) {
    NormImage n;
    n.values = Raster<double>(128, 128, 0.3);
    n.valid = Mask(128, 128, 1);
    const Quad src{Point2{20.3, 15.2}, Point2{90.1, 22.7}, Point2{95.4, 101.9}, Point2{18.8, 96.5}};
    const auto h = compute_homography(src, canonical_square(160));
    ASSERT_TRUE(h);
    const UnwarpedImage w = unwarp(n, *h, 160, Polarity::Off);
    for (std::size_t i = 0; i < w.values.size(); ++i) {
        ASSERT_EQ(w.valid.data[i], 1);
        EXPECT_NEAR(w.values.data[i], 0.3, 1e-12);
    }
}

TEST(CellResponses, ZeroInput) {
    const auto r = cell_response_map(blank_unwarped(160), 20, 3.35, 5);
    EXPECT_EQ(r.width, 8);
    for (double v : r.data) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(cell_response_map(blank_unwarped(150), 20, 3.35, 5), std::invalid_argument);
}

TEST(CellResponses, PeakAtStripeCell) {
    UnwarpedImage u = blank_unwarped(160);
    for (int y = 0; y < 160; ++y)
        for (int x = 58; x <= 62; ++x) {
            u.valid(x, y) = 1;
            u.values(x, y) = 0.5;
        }
    for (double shift : {0.0, 2.0}) {
        const auto r = cell_response_map(u, 20, 3.35, shift);
        for (int i = 0; i < 8; ++i) {
            for (int j = 0; j < 8; ++j)
                if (j != 3) {
                    EXPECT_LT(r(j, i), r(3, i) / 10);
                }
            EXPECT_GT(r(3, i), 0.0);
        }
    }
    // brute force value at one cell, window of radius 10 around (60, 30)
    const auto r = cell_response_map(u, 20, 3.35, 0);
    double acc = 0, total = 0;
    for (int y = 20; y <= 40; ++y)
        for (int x = 50; x <= 70; ++x) {
            const double g = std::exp(-((x - 60.0) * (x - 60.0) + (y - 30.0) * (y - 30.0)) / (2 * 3.35 * 3.35));
            total += g;
            acc += g * u.values(x, y);
        }
    EXPECT_NEAR(r(3, 1), acc / total, 1e-12);
}

TEST(Threshold, Examples) {
    Raster<double> r(2, 1, 0.0);
    r(0, 0) = 0.54;
    r(1, 0) = 1.0;
    auto f = threshold_responses(r, 0.55);
    EXPECT_EQ(f(0, 0), 0);
    EXPECT_EQ(f(1, 0), 1);
    r(0, 0) = 0.55;
    EXPECT_EQ(threshold_responses(r, 0.55)(0, 0), 1);
    for (auto v : threshold_responses(Raster<double>(3, 3, 0.0), 0.55).data) EXPECT_EQ(v, 0);
    EXPECT_THROW(threshold_responses(r, 0.0), std::invalid_argument);
    EXPECT_THROW(threshold_responses(r, 1.5), std::invalid_argument);
}

TEST(Threshold, ScaleInvariant) {
    std::mt19937_64 rng(73);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
        Raster<double> r(6, 6, 0.0);
        for (auto& v : r.data) v = u(rng);
        Raster<double> s = r;
        for (auto& v : s.data) v *= 0.125;  // power of two keeps the ratios exact
        EXPECT_EQ(threshold_responses(r, 0.55), threshold_responses(s, 0.55));
    }
}

TEST(DecodeBits, Examples) {
    // row 0: on at 1, off at 3 -> 0 1 1 0; row 1: off only -> stays black
    const auto b = decode_bits(flags(4, {{1, 0}, {3, 0}}), flags(4, {{3, 0}, {2, 1}}));
    EXPECT_EQ(b.bits, (std::vector<std::uint8_t>{0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}));
    // both flags everywhere toggle every cell
    const auto all = decode_bits(Raster<std::uint8_t>(3, 3, 1), Raster<std::uint8_t>(3, 3, 1));
    for (int i = 0; i < 3; ++i) EXPECT_EQ(std::vector<int>({all(i, 0), all(i, 1), all(i, 2)}), std::vector<int>({1, 0, 1}));
}

TEST(DecodeBits, InvertsTransitionMaps) {
    std::mt19937_64 rng(79);
    for (int trial = 0; trial < 1000; ++trial) {
        BitGrid g(6);
        for (auto& v : g.bits) v = static_cast<std::uint8_t>(rng() & 1u);
        Raster<std::uint8_t> f_on, f_off;
        oracle::transition_maps(g, f_on, f_off);
        EXPECT_EQ(decode_bits(f_on, f_off), g);
    }
}

TEST(DecodeSim, DetectsMarkerSevenWithCorners) {
    const auto frames = visible_frames(7, {1, 0}, 1.0);
    ASSERT_FALSE(frames.empty());
    for (const auto& f : frames) {
        ASSERT_EQ(f.result.detections.size(), 1u) << f.truth.t_mid;
        const Detection& d = f.result.detections[0];
        EXPECT_EQ(d.marker_id, 7);
        for (int k = 0; k < 4; ++k) EXPECT_LT(dist(d.corners[k], f.truth.corners[k]), 3.0) << "corner " << k;
    }
}

TEST(DecodeSim, VerticalSweepTurnsByQuarter) {
    const auto h = visible_frames(7, {1, 0}, 1.0);
    const auto v = visible_frames(7, {0, 1}, 1.0);
    ASSERT_FALSE(h.empty());
    ASSERT_FALSE(v.empty());
    ASSERT_EQ(h[0].result.detections.size(), 1u);
    ASSERT_EQ(v[0].result.detections.size(), 1u);
    const int dr = (v[0].result.detections[0].rotation_deg - h[0].result.detections[0].rotation_deg + 360) % 360;
    EXPECT_TRUE(dr == 90 || dr == 270) << dr;
}

TEST(DecodeSim, StripesAtCellBoundaries) {
    const auto frames = visible_frames(2, {1, 0}, 1.0);
    ASSERT_FALSE(frames.empty());
    const auto& tr = frames[frames.size() / 2].trace;
    // the candidate that decoded, not an interior pair
    std::size_t c = 0;
    while (c < tr.decodes.size() && !builtin_dictionary().lookup(tr.decodes[c].bits)) ++c;
    ASSERT_LT(c, tr.unwarped.size());
    const int n_d = 20;
    for (const UnwarpedImage* u : {&tr.unwarped[c].on, &tr.unwarped[c].off}) {
        std::vector<double> profile(160, 0.0);
        for (int y = 0; y < 160; ++y)
            for (int x = 0; x < 160; ++x) profile[x] += u->valid(x, y);
        int stripes = 0;
        for (int k = 0; k <= 8; ++k) {
            double mass = 0, moment = 0;
            for (int x = std::max(0, k * n_d - n_d / 2); x < std::min(160, k * n_d + n_d / 2); ++x) {
                mass += profile[x];
                moment += profile[x] * x;
            }
            if (mass < 160 * 2 || k == 0 || k == 8) continue;  // skip near-empty and clipped windows
            ++stripes;
            EXPECT_NEAR(moment / mass, k * n_d, 2.0) << "boundary " << k;
        }
        EXPECT_GE(stripes, 2);
    }
}

TEST(DecodeSim, TransitionCellsRespondStrongly) {
    const auto frames = visible_frames(11, {1, 0}, 1.0);
    std::size_t used = 0;
    for (const auto& f : frames) {
        for (std::size_t c = 0; c < f.trace.decodes.size(); ++c) {
            const DecodeTrace& d = f.trace.decodes[c];
            if (!builtin_dictionary().lookup(d.bits)) continue;
            Raster<std::uint8_t> f_on, f_off;
            oracle::transition_maps(d.bits, f_on, f_off);
            for (auto [resp, ideal] : {std::pair{&d.responses.on, &f_on}, std::pair{&d.responses.off, &f_off}}) {
                const Raster<double> inner = inner_cells(*resp);
                double hit = 0, miss = 0;
                int nh = 0, nm = 0;
                for (std::size_t k = 0; k < inner.size(); ++k)
                    if (ideal->data[k]) {
                        hit += inner.data[k];
                        ++nh;
                    } else {
                        miss += inner.data[k];
                        ++nm;
                    }
                ASSERT_GT(nh, 0);
                EXPECT_GE(hit / nh, 3.0 * miss / nm);
            }
            ++used;
        }
    }
    EXPECT_GT(used, 0u);
}

TEST(DecodeUnwarped, WrongGridSizeIsNoDetection) {
    const MarkerDictionary d("five", 5, {1});
    UnwarpedCandidate u;
    u.on = blank_unwarped(160);
    u.off = blank_unwarped(160);
    EXPECT_FALSE(decode_unwarped(u, d, DecoderParams{}, 0));
}

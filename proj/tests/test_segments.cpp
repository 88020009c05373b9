#include <gtest/gtest.h>

#include <random>

#include "evmarker/pipeline.hpp"
#include "evmarker/segments.hpp"
#include "evmarker/simulator.hpp"
#include "oracles.hpp"

using namespace evm;

namespace {

SmoothImage square_image(int lo, int hi) {
    SmoothImage img;
    img.values = Raster<double>(128, 128, 0.0);
    img.valid = Mask(128, 128, 1);
    img.valid_count = img.valid.size();
    for (int y = lo; y < hi; ++y)
        for (int x = lo; x < hi; ++x) img.values(x, y) = 1.0;
    return img;
}

// v = (x - x0) / span on x0 <= x <= x0 + span, invalid elsewhere
NormImage ramp_image(int x0, int span) {
    NormImage n;
    n.values = Raster<double>(128, 128, 0.0);
    n.valid = Mask(128, 128, 0);
    for (int y = 0; y < 128; ++y)
        for (int x = x0; x <= x0 + span; ++x) {
            n.values(x, y) = static_cast<double>(x - x0) / span;
            n.valid(x, y) = 1;
            ++n.valid_count;
        }
    return n;
}

double angle_deg(Point2 d) {
    double a = std::atan2(d.y, d.x) * 180.0 / 3.141592653589793;
    if (a < 0) a += 180.0;
    return a;
}

}  // namespace

TEST(DetectSegments, BlankImageGivesNothing) {
    SmoothImage img;
    img.values = Raster<double>(64, 64, 0.5);
    img.valid = Mask(64, 64, 1);
    img.valid_count = img.valid.size();
    EXPECT_TRUE(detect_segments(img, 10, Polarity::On).empty());
}

TEST(DetectSegments, FindsStepEdge) {
    const auto segs = detect_segments(square_image(30, 90), 25, Polarity::Off);
    bool found = false;
    for (const auto& s : segs) {
        EXPECT_EQ(s.polarity, Polarity::Off);
        EXPECT_GE(s.length(), 25.0);
        // left edge of the square sits between columns 29 and 30
        const bool vertical = std::fabs(angle_deg(s.direction()) - 90.0) < 2.0;
        const bool near = std::fabs((s.p1.x + s.p2.x) / 2 - 29.5) < 2.0;
        if (vertical && near && s.length() > 50) found = true;
    }
    EXPECT_TRUE(found);
}

TEST(DetectSegments, MinLengthFilter) {
    const auto all = detect_segments(square_image(50, 70), 0, Polarity::On);
    const auto none = detect_segments(square_image(50, 70), 40, Polarity::On);
    EXPECT_FALSE(all.empty());
    EXPECT_TRUE(none.empty());
}

TEST(SegmentPixels, Examples) {
    const LineSegment a{{0, 0}, {3, 1}};
    EXPECT_EQ(segment_pixels(a), (std::vector<PixelCoord>{{0, 0}, {1, 0}, {2, 1}, {3, 1}}));
    const LineSegment b{{2.4, 2.6}, {2.4, 2.6}};
    EXPECT_EQ(segment_pixels(b), (std::vector<PixelCoord>{{2, 3}}));
    const LineSegment c{{5, 1}, {5, -2}};
    EXPECT_EQ(segment_pixels(c), (std::vector<PixelCoord>{{5, 1}, {5, 0}, {5, -1}, {5, -2}}));
}

TEST(SegmentPixels, StaysOnTheLine) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-10, 60);
    for (int trial = 0; trial < 200; ++trial) {
        const LineSegment l{{u(rng), u(rng)}, {u(rng), u(rng)}};
        const auto px = segment_pixels(l);
        const Point2 a{static_cast<double>(round_half_up(l.p1.x)), static_cast<double>(round_half_up(l.p1.y))};
        const Point2 b{static_cast<double>(round_half_up(l.p2.x)), static_cast<double>(round_half_up(l.p2.y))};
        const int steps = static_cast<int>(std::max(std::fabs(b.x - a.x), std::fabs(b.y - a.y)));
        EXPECT_EQ(px.size(), static_cast<std::size_t>(steps) + 1);
        const auto cover = oracle::supercover(a, b, 0.5 + 1e-9);
        for (std::size_t i = 0; i < px.size(); ++i) {
            EXPECT_TRUE(cover.count(px[i])) << px[i].x << "," << px[i].y;
            if (i > 0) {
                EXPECT_LE(std::abs(px[i].x - px[i - 1].x), 1);
                EXPECT_LE(std::abs(px[i].y - px[i - 1].y), 1);
            }
        }
    }
}

TEST(SegmentAge, MeanOfValidPixels) {
    const NormImage n = ramp_image(20, 60);
    const auto a = segment_age(LineSegment{{35, 10}, {35, 50}}, n);
    ASSERT_TRUE(a);
    EXPECT_NEAR(*a, 0.25, 1e-12);
    // horizontal: pixels 10..30, valid 20..30
    const auto b = segment_age(LineSegment{{10, 5}, {30, 5}}, n);
    ASSERT_TRUE(b);
    EXPECT_NEAR(*b, (0.0 + 10.0) / 2 / 60.0, 1e-12);
    EXPECT_FALSE(segment_age(LineSegment{{2, 5}, {12, 5}}, n));
    EXPECT_FALSE(segment_age(LineSegment{{-20, -5}, {-2, -5}}, n));
}

TEST(FitAgeLine, WorkedExample) {
    const std::vector<AgeSample> s{{-1, 0.3}, {0, 0.4}, {1, 0.5}};
    const auto f = fit_age_line(s);
    ASSERT_TRUE(f);
    EXPECT_NEAR(f->slope, 0.1, 1e-12);
    EXPECT_NEAR(f->intercept, 0.4, 1e-12);
    const auto t = target_offset(s, 0.5, 20);
    ASSERT_TRUE(t);
    EXPECT_NEAR(*t, 1.0, 1e-12);
}

TEST(FitAgeLine, Failures) {
    const std::vector<AgeSample> one{{0, 0.4}};
    EXPECT_FALSE(fit_age_line(one));
    const std::vector<AgeSample> flat{{-1, 0.4}, {0, 0.4}, {1, 0.4}};
    EXPECT_FALSE(target_offset(flat, 0.5, 20));
    const std::vector<AgeSample> far{{-1, 0.0}, {0, 0.001}, {1, 0.002}};
    EXPECT_FALSE(target_offset(far, 0.5, 20));
}

TEST(FitAgeLine, MatchesClosedForm) {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<AgeSample> s;
        for (int i = -5; i <= 7; ++i) s.push_back({static_cast<double>(i), u(rng)});
        // normal equations, independent expansion
        double n = s.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto& q : s) {
            sx += q.offset;
            sy += q.age;
            sxx += q.offset * q.offset;
            sxy += q.offset * q.age;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const auto f = fit_age_line(s);
        ASSERT_TRUE(f);
        EXPECT_NEAR(f->slope, slope, 1e-12);
        EXPECT_NEAR(f->intercept, (sy - slope * sx) / n, 1e-12);
    }
}

TEST(CorrectAge, LinearRampReachesHalf) {
    const NormImage n = ramp_image(20, 60);  // age 0.5 at x = 50
    for (double x0 : {31.0, 35.0, 50.0, 64.0, 69.0}) {
        const auto c = correct_age(LineSegment{{x0, 20}, {x0, 80}}, n);
        ASSERT_TRUE(c) << x0;
        EXPECT_NEAR(c->p1.x, 50.0, 0.02);
        EXPECT_NEAR(c->p2.x, 50.0, 0.02);
        EXPECT_NEAR(c->p1.y, 20.0, 1e-9);
        ASSERT_TRUE(c->age);
        EXPECT_NEAR(*c->age, 0.5, 0.02);
    }
}

TEST(CorrectAge, SampleWalkStopsAtHalfValid) {
    const NormImage n = ramp_image(20, 60);
    const auto s = collect_age_samples(LineSegment{{35, 20}, {35, 80}}, n);
    double lo = 0, hi = 0;
    for (auto& q : s) {
        lo = std::min(lo, q.offset);
        hi = std::max(hi, q.offset);
    }
    EXPECT_EQ(lo, -15.0);
    EXPECT_EQ(hi, 45.0);
    EXPECT_EQ(s.size(), 61u);
}

TEST(CorrectAge, RejectsFlatAndFar) {
    NormImage flat = ramp_image(20, 60);
    for (auto& v : flat.values.data) v = 0.3;
    EXPECT_FALSE(correct_age(LineSegment{{35, 20}, {35, 80}}, flat));
    EXPECT_FALSE(correct_age(LineSegment{{25, 20}, {25, 80}}, ramp_image(20, 60)));  // needs 25 px
    const NormImage n = ramp_image(0, 120);  // age 0.5 at x = 60
    EXPECT_FALSE(correct_age(LineSegment{{10, 20}, {10, 80}}, n, {0.5, 20}));
    EXPECT_TRUE(correct_age(LineSegment{{10, 20}, {10, 80}}, n, {0.5, 60}));
}

TEST(CorrectAge, SimulatedEdgesLandOnHalf) {
    // 2 px/ms: at 1 px/ms a packet holds only 10 distinct columns, so ages
    // come in steps of 1/9 and 0.5 falls between two of them
    SuiteOptions opts;
    const PipelineConfig cfg;
    std::size_t checked = 0, good = 0;
    for (Point2 dir : {Point2{1, 0}, Point2{0, 1}}) {
        const SimConfig sc = sweep_config(5, dir, 2.0, opts);
        const SimResult r = simulate(sc);
        const auto packets = packetize(r.events, cfg.window_us, sc.geometry);
        for (std::size_t i = 0; i < packets.size(); ++i) {
            if (!r.truth[i].fully_visible) continue;
            PacketTrace tr;
            detect_packet(packets[i], cfg, builtin_dictionary(), &tr);
            for (const auto* list : {&tr.seg_on, &tr.seg_off})
                for (const LineSegment& s : *list) {
                    // only edges across the motion have a time gradient along their normal
                    const Point2 d = s.direction() * (1.0 / s.length());
                    if (std::fabs(d.dot(dir)) > 0.1) continue;
                    ASSERT_TRUE(s.age);
                    ++checked;
                    if (std::fabs(*s.age - 0.5) <= 0.05) ++good;
                }
        }
    }
    ASSERT_GT(checked, 0u);
    EXPECT_EQ(good, checked);
}

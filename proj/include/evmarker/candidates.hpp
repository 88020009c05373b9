#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "evmarker/segments.hpp"

namespace evm {

/// An (on, off) segment pair hypothesized to be the trailing and leading
/// edges of one moving marker.
struct Candidate {
    LineSegment on_seg;
    LineSegment off_seg;
    double angle = 0.0;  // min_angle(on_seg, off_seg)
};

/// Angle between the undirected segment directions, in [0, pi/2]. Empty for
/// a degenerate segment.
std::optional<double> min_angle(const LineSegment& a, const LineSegment& b);

/// True iff an endpoint of `b` projects onto `a` within [0, length(a)],
/// measured from a.p1.
bool project(const LineSegment& a, const LineSegment& b);

struct CandidateParams {
    double max_angle = 0.5235987755982988;  // pi / 6
    std::size_t cap = 64;                  // 0 disables the cap
};

/// Pairs satisfying the length ratio, projection and angle predicates, in
/// (on, off) nested order. When the cap binds, the smallest angles are kept,
/// ties broken by that order.
std::vector<Candidate> form_candidates(std::span<const LineSegment> on_list, std::span<const LineSegment> off_list,
                                       const CandidateParams& params = {});

}  // namespace evm

#include "evmarker/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace evm {

std::optional<double> min_angle(const LineSegment& a, const LineSegment& b) {
    const Point2 da = a.direction(), db = b.direction();
    const double na = da.norm(), nb = db.norm();
    if (na == 0.0 || nb == 0.0) return std::nullopt;
    // |cos| folds the undirected angle into [0, pi/2]; atan2 keeps precision
    // near both ends of the range.
    const double c = std::fabs(da.dot(db));
    const double s = std::fabs(da.cross(db));
    return std::atan2(s, c);
}

bool project(const LineSegment& a, const LineSegment& b) {
    const Point2 d = a.direction();
    const double len = d.norm();
    if (len == 0.0) return false;
    const double s1 = d.dot(b.p1 - a.p1) / len;
    const double s2 = d.dot(b.p2 - a.p1) / len;
    return (0.0 <= s1 && s1 <= len) || (0.0 <= s2 && s2 <= len);
}

std::vector<Candidate> form_candidates(std::span<const LineSegment> on_list, std::span<const LineSegment> off_list,
                                       const CandidateParams& params) {
    std::vector<Candidate> out;
    for (const LineSegment& on : on_list) {
        const double l_on = on.length();
        for (const LineSegment& off : off_list) {
            const double l_off = off.length();
            if (!(l_on < 2.0 * l_off && l_off < 2.0 * l_on)) continue;
            if (!(project(on, off) || project(off, on))) continue;
            const auto gamma = min_angle(on, off);
            if (!gamma || *gamma > params.max_angle) continue;
            out.push_back({on, off, *gamma});
        }
    }
    if (params.cap > 0 && out.size() > params.cap) {
        std::stable_sort(out.begin(), out.end(),
                         [](const Candidate& a, const Candidate& b) { return a.angle < b.angle; });
        out.resize(params.cap);
    }
    return out;
}

}  // namespace evm

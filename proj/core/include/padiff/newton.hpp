#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "padiff/rational.hpp"
#include "padiff/series.hpp"

namespace padiff {

// Lower convex hull of points (-i, v(a_i)); slopes strictly increase from
// left to right and carry their horizontal widths as multiplicities.
struct NewtonPolygon {
    struct Slope {
        Rat slope;
        long width;
    };
    std::vector<std::pair<Rat, Rat>> vertices;  // x strictly increasing
    std::vector<Slope> slopes;

    long total_width() const {
        long w = 0;
        for (const auto& s : slopes) w += s.width;
        return w;
    }
    std::string str() const;
};

// Lower hull of exact points; input need not be sorted, ties on x keep the
// lowest y.
NewtonPolygon lower_hull(std::vector<std::pair<Rat, Rat>> points);

// Restrict the slope multiset to (lo, hi]; hi may be +infinity (keep all
// slopes > lo).  Vertices are kept in full.
NewtonPolygon restrict_slopes(const NewtonPolygon& np, const Rat& lo,
                              const std::optional<Rat>& hi);

// Newton polygon of a series with the slope multiset restricted to
// (slope_lo, slope_hi].  Throws WindowError if an in-window hull vertex
// touches a truncated window end, or an uncertified coefficient could cut
// below the hull.
NewtonPolygon newton_polygon(const TruncatedSeries& f, const LogVal& slope_lo,
                             const std::optional<LogVal>& slope_hi);

} // namespace padiff

#include "padiff/newton.hpp"

#include <algorithm>
#include <sstream>

#include "padiff/errors.hpp"

namespace padiff {

std::string NewtonPolygon::str() const {
    std::ostringstream os;
    os << "vertices:";
    for (auto& [x, y] : vertices)
        os << " (" << rat_to_string(x) << "," << rat_to_string(y) << ")";
    os << " slopes:";
    for (auto& s : slopes) os << " " << rat_to_string(s.slope) << "x" << s.width;
    return os.str();
}

NewtonPolygon lower_hull(std::vector<std::pair<Rat, Rat>> points) {
    NewtonPolygon np;
    if (points.empty()) return np;
    std::sort(points.begin(), points.end());
    // keep the lowest y per x
    std::vector<std::pair<Rat, Rat>> pts;
    for (auto& pt : points) {
        if (!pts.empty() && pts.back().first == pt.first) continue;  // sorted: first is lowest
        pts.push_back(pt);
    }
    auto cross = [](const std::pair<Rat, Rat>& o, const std::pair<Rat, Rat>& a,
                    const std::pair<Rat, Rat>& b) -> Rat {
        return (a.first - o.first) * (b.second - o.second) -
               (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<Rat, Rat>>& hull = np.vertices;
    for (auto& pt : pts) {
        while (hull.size() >= 2 &&
               cross(hull[hull.size() - 2], hull[hull.size() - 1], pt) <= 0)
            hull.pop_back();
        hull.push_back(pt);
    }
    for (size_t i = 1; i < hull.size(); ++i) {
        Rat dx = hull[i].first - hull[i - 1].first;
        Rat dy = hull[i].second - hull[i - 1].second;
        Rat slope = dy / dx;
        if (dx.get_den() != 1)
            throw PreconditionError("newton polygon: non-integral width");
        np.slopes.push_back({slope, static_cast<long>(dx.get_num().get_si())});
    }
    return np;
}

NewtonPolygon restrict_slopes(const NewtonPolygon& np, const Rat& lo,
                              const std::optional<Rat>& hi) {
    NewtonPolygon out;
    out.vertices = np.vertices;
    for (const auto& s : np.slopes)
        if (s.slope > lo && (!hi || s.slope <= *hi)) out.slopes.push_back(s);
    return out;
}

NewtonPolygon newton_polygon(const TruncatedSeries& f, const LogVal& slope_lo,
                             const std::optional<LogVal>& slope_hi) {
    if (slope_lo.is_infinity())
        throw PreconditionError("newton_polygon: infinite lower slope bound");
    Rat lo = slope_lo.value();
    std::optional<Rat> hi;
    if (slope_hi && !slope_hi->is_infinity()) hi = slope_hi->value();

    std::vector<std::pair<Rat, Rat>> certified, pessimistic;
    for (const auto& [e, c] : f.coeffs()) {
        std::pair<Rat, Rat> pt{Rat(-e), Rat(c.val_lower_bound())};
        pessimistic.push_back(pt);
        if (!c.is_zero_class()) certified.push_back(pt);
    }
    NewtonPolygon np = lower_hull(certified);
    NewtonPolygon pess = lower_hull(pessimistic);
    NewtonPolygon np_r = restrict_slopes(np, lo, hi);
    NewtonPolygon pess_r = restrict_slopes(pess, lo, hi);
    // The true polygon sits between the two; they must agree in-window.
    bool same = np_r.slopes.size() == pess_r.slopes.size();
    for (size_t i = 0; same && i < np_r.slopes.size(); ++i)
        same = np_r.slopes[i].slope == pess_r.slopes[i].slope &&
               np_r.slopes[i].width == pess_r.slopes[i].width;
    if (!same)
        throw WindowError("newton_polygon: uncertified coefficients reshape the "
                          "in-window hull");

    // In-window segments must not lean on a truncated window end.
    const Window& w = f.window();
    size_t seg = 0;
    for (size_t i = 1; i < np.vertices.size(); ++i, ++seg) {
        const Rat& s = np.slopes[seg].slope;
        if (!(s > lo && (!hi || s <= *hi))) continue;
        for (const Rat& x : {np.vertices[i - 1].first, np.vertices[i].first}) {
            long e = static_cast<long>(Rat(-x).get_num().get_si());
            if ((e == w.lo && !w.lo_exact()) || (e == w.hi && !w.hi_exact()))
                throw WindowError("newton_polygon: in-window vertex at the "
                                  "truncation boundary t^" + std::to_string(e));
        }
    }
    return np_r;
}

} // namespace padiff

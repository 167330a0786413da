#include "coxlab/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "coxlab/error.hpp"

namespace coxlab {

double Segment::length() const {
    return std::hypot(b.x - a.x, b.y - a.y);
}

std::vector<Point2> sample_poisson_block(RandomStream& stream, double intensity, const Box2& cube) {
    if (!(intensity >= 0.0)) throw Error(ErrorCode::RANGE, "intensity must be nonnegative");
    if (!(cube.width() > 0.0) || !(cube.height() > 0.0))
        throw Error(ErrorCode::RANGE, "cube must be nonempty");
    std::uint64_t count = stream.poisson(intensity * cube.area());
    std::vector<Point2> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        double x = stream.uniform(cube.xlo, cube.xhi);
        double y = stream.uniform(cube.ylo, cube.yhi);
        out.push_back(Point2{x, y});
    }
    return out;
}

std::vector<Point2> grid_points(double L, const Box2& window) {
    std::vector<Point2> out;
    std::int64_t ix_lo = std::int64_t(std::ceil(window.xlo / L));
    std::int64_t ix_hi = std::int64_t(std::floor(window.xhi / L));
    std::int64_t iy_lo = std::int64_t(std::ceil(window.ylo / L));
    std::int64_t iy_hi = std::int64_t(std::floor(window.yhi / L));
    for (std::int64_t ix = ix_lo; ix <= ix_hi; ++ix)
        for (std::int64_t iy = iy_lo; iy <= iy_hi; ++iy)
            out.push_back(Point2{double(ix) * L, double(iy) * L});
    return out;
}

std::vector<Point2> superimpose_grid(const std::vector<Point2>& points, double L, const Box2& window) {
    if (!(L >= 1.0)) throw Error(ErrorCode::RANGE, "L must be >= 1");
    std::vector<Point2> out = points;
    auto grid = grid_points(L, window);
    out.insert(out.end(), grid.begin(), grid.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool clip_segment(const Segment& s, const Box2& cube, Segment& out) {
    // Liang-Barsky against the closed box.
    double dx = s.b.x - s.a.x;
    double dy = s.b.y - s.a.y;
    double t0 = 0.0, t1 = 1.0;
    // p is the directed speed towards the boundary, q the slack (q >= 0
    // means the start point is inside that half-plane).
    auto clip1 = [&](double p, double q) {
        if (p == 0.0) return q >= 0.0;
        double t = q / p;
        if (p < 0.0) {
            if (t > t1) return false;
            if (t > t0) t0 = t;
        } else {
            if (t < t0) return false;
            if (t < t1) t1 = t;
        }
        return true;
    };
    if (!clip1(-dx, s.a.x - cube.xlo)) return false;
    if (!clip1(dx, cube.xhi - s.a.x)) return false;
    if (!clip1(-dy, s.a.y - cube.ylo)) return false;
    if (!clip1(dy, cube.yhi - s.a.y)) return false;
    if (t0 >= t1) return false;
    Point2 a{s.a.x + t0 * dx, s.a.y + t0 * dy};
    Point2 b{s.a.x + t1 * dx, s.a.y + t1 * dy};
    // Clamp roundoff drift onto the box.
    a.x = std::min(std::max(a.x, cube.xlo), cube.xhi);
    a.y = std::min(std::max(a.y, cube.ylo), cube.yhi);
    b.x = std::min(std::max(b.x, cube.xlo), cube.xhi);
    b.y = std::min(std::max(b.y, cube.ylo), cube.yhi);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    out = Segment{a, b};
    return true;
}

ClipResult clip_segments_to_cube(const std::vector<Segment>& edges, const Box2& cube) {
    ClipResult res;
    for (const auto& e : edges) {
        Segment c;
        if (!clip_segment(e, cube, c)) continue;
        // Segments lying on the xhi/yhi faces belong to the neighboring cube.
        if (c.a.x == c.b.x && c.a.x == cube.xhi) continue;
        if (c.a.y == c.b.y && c.a.y == cube.yhi) continue;
        res.segments.push_back(c);
    }
    std::sort(res.segments.begin(), res.segments.end(), [](const Segment& l, const Segment& r) {
        if (l.a != r.a) return l.a < r.a;
        return l.b < r.b;
    });
    for (const auto& s : res.segments) res.total_length += s.length();
    return res;
}

double distance_to_segment(const Point2& p, const Segment& s) {
    double dx = s.b.x - s.a.x;
    double dy = s.b.y - s.a.y;
    double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) {
        t = ((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2;
        t = std::min(1.0, std::max(0.0, t));
    }
    double qx = s.a.x + t * dx;
    double qy = s.a.y + t * dy;
    return std::hypot(p.x - qx, p.y - qy);
}

double min_distance_to_segments(const Point2& p, const std::vector<Segment>& segments) {
    if (segments.empty()) throw Error(ErrorCode::EMPTY_SET, "no segments");
    double best = distance_to_segment(p, segments.front());
    for (std::size_t i = 1; i < segments.size(); ++i)
        best = std::min(best, distance_to_segment(p, segments[i]));
    return best;
}

Circumcircle circumcircle(const Point2& a, const Point2& b, const Point2& c) {
    double bax = b.x - a.x, bay = b.y - a.y;
    double cax = c.x - a.x, cay = c.y - a.y;
    double d = 2.0 * (bax * cay - bay * cax);
    double b2 = bax * bax + bay * bay;
    double c2 = cax * cax + cay * cay;
    double ux = (cay * b2 - bay * c2) / d;
    double uy = (bax * c2 - cax * b2) / d;
    Circumcircle cc;
    cc.center = Point2{a.x + ux, a.y + uy};
    cc.radius = std::hypot(ux, uy);
    return cc;
}

}  // namespace coxlab

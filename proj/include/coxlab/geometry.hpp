#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "coxlab/rng.hpp"

namespace coxlab {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
    friend auto operator<=>(const Point2&, const Point2&) = default;  // lexicographic
};

struct Box2 {
    double xlo = 0.0, ylo = 0.0, xhi = 0.0, yhi = 0.0;

    double width() const { return xhi - xlo; }
    double height() const { return yhi - ylo; }
    double area() const { return width() * height(); }
    bool contains(const Point2& p) const {
        return p.x >= xlo && p.x <= xhi && p.y >= ylo && p.y <= yhi;
    }
};

struct Segment {
    Point2 a, b;

    double length() const;

    friend bool operator==(const Segment&, const Segment&) = default;
    friend auto operator<=>(const Segment&, const Segment&) = default;  // lexicographic
};

// Sign of the signed area of triangle (a, b, c): > 0 for counterclockwise.
// Filtered double evaluation with an exact rational fallback.
int orient2d(const Point2& a, const Point2& b, const Point2& c);

// > 0 iff d lies strictly inside the circle through a, b, c (a, b, c in
// counterclockwise order), < 0 strictly outside, 0 exactly cocircular.
int incircle_raw(const Point2& a, const Point2& b, const Point2& c, const Point2& d);

// incircle with cocircular ties broken by a symbolic perturbation that
// depends only on the coordinates of the four points (lexicographically
// smaller points are perturbed less), so the result is independent of the
// surrounding point set. Never returns 0 for four distinct points.
int incircle_perturbed(const Point2& a, const Point2& b, const Point2& c, const Point2& d);

struct Triangulation {
    std::vector<Point2> vertices;                      // lexicographically sorted, deduplicated
    std::vector<std::array<std::int32_t, 3>> triangles;  // ccw vertex indices
    std::vector<std::array<std::int32_t, 2>> edges;      // deduplicated, i < j, sorted
};

// Delaunay triangulation (Bowyer-Watson, walking point location). Cocircular
// degeneracies are resolved by incircle_perturbed, so the result is unique
// for a given point multiset. Throws DEGENERATE_INPUT for < 3 distinct
// points or an all-collinear input.
Triangulation delaunay_triangulate(const std::vector<Point2>& points);

// Poisson sample on an axis-aligned box: count ~ Poisson(intensity * area),
// positions iid uniform. Deterministic per stream.
std::vector<Point2> sample_poisson_block(RandomStream& stream, double intensity, const Box2& cube);

// Input points plus L Z^2 ∩ window (closed). Exact duplicates removed (the
// lexicographic dedup in delaunay_triangulate acts as the perturbation rule).
std::vector<Point2> superimpose_grid(const std::vector<Point2>& points, double L, const Box2& window);

// Grid points of L Z^2 inside the closed box.
std::vector<Point2> grid_points(double L, const Box2& window);

struct ClipResult {
    std::vector<Segment> segments;  // lexicographic by (a, b), a <= b within each segment
    double total_length = 0.0;      // summed in sorted order
};

// Intersections of segments with a closed box; zero-length clips dropped, and
// clips degenerate to the box's xhi/yhi faces dropped (owned by the adjacent
// cube), so cube tilings count boundary segments exactly once.
ClipResult clip_segments_to_cube(const std::vector<Segment>& edges, const Box2& cube);

// Clip one segment to the closed box; returns false if the intersection is
// empty or a single point.
bool clip_segment(const Segment& s, const Box2& cube, Segment& out);

// Exact Euclidean minimum distance from a point to a segment list.
// Throws EMPTY_SET for an empty list.
double min_distance_to_segments(const Point2& p, const std::vector<Segment>& segments);
double distance_to_segment(const Point2& p, const Segment& s);

// Circumcircle of a triangle (double arithmetic; diagnostics only).
struct Circumcircle {
    Point2 center;
    double radius = 0.0;
};
Circumcircle circumcircle(const Point2& a, const Point2& b, const Point2& c);

}  // namespace coxlab

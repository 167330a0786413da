#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "coxlab/error.hpp"
#include "coxlab/geometry.hpp"
#include "doctest.h"

using namespace coxlab;

TEST_CASE("orient2d on easy and adversarial cases") {
    CHECK(orient2d({0, 0}, {1, 0}, {0, 1}) > 0);
    CHECK(orient2d({0, 0}, {0, 1}, {1, 0}) < 0);
    CHECK(orient2d({0, 0}, {1, 1}, {2, 2}) == 0);
    // nearly collinear: sign must match exact rational arithmetic
    Point2 a{0.1, 0.1}, b{0.3, 0.3};
    // up to i = 52: beyond that 0.5 +- 2^-i rounds to 0.5 itself and the
    // stored points really are collinear
    for (int i = 1; i <= 52; ++i) {
        Point2 c{0.5, 0.5 + std::ldexp(1.0, -i)};
        CHECK(orient2d(a, b, c) > 0);
        Point2 d{0.5, 0.5 - std::ldexp(1.0, -i)};
        CHECK(orient2d(a, b, d) < 0);
    }
}

TEST_CASE("incircle_raw basics and exact cocircularity") {
    // unit circle through (1,0),(0,1),(-1,0); (0,0) inside, (0,-2) outside
    Point2 a{1, 0}, b{0, 1}, c{-1, 0};
    CHECK(incircle_raw(a, b, c, {0, 0}) > 0);
    CHECK(incircle_raw(a, b, c, {0, -2}) < 0);
    CHECK(incircle_raw(a, b, c, {0, -1}) == 0);
    // unit square corners are cocircular
    CHECK(incircle_raw({0, 0}, {1, 0}, {1, 1}, {0, 1}) == 0);
}

TEST_CASE("incircle_perturbed breaks every cocircular tie consistently") {
    Point2 q[4] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    // never 0, and antisymmetric under swapping two rows
    int s = incircle_perturbed(q[0], q[1], q[2], q[3]);
    CHECK(s != 0);
    CHECK(incircle_perturbed(q[1], q[0], q[2], q[3]) == -s);
    CHECK(incircle_perturbed(q[0], q[2], q[1], q[3]) == -s);
    // the tie rule favours keeping the lexicographically smallest point:
    // for the ccw triangle ((1,0),(1,1),(0,1)) the fourth corner (0,0)
    // is declared inside, forcing the diagonal through (0,0)-(1,1).
    CHECK(incircle_perturbed({1, 0}, {1, 1}, {0, 1}, {0, 0}) > 0);
    CHECK(incircle_perturbed({0, 0}, {1, 0}, {1, 1}, {0, 1}) < 0);
}

TEST_CASE("poisson block sampling has the right count statistics and support") {
    Box2 cube{2.0, -1.0, 4.0, 0.5};  // area 3
    StreamKey k;
    k.master_seed = 12;
    double intensity = 4.0;
    const int reps = 20000;
    double sum = 0;
    RandomStream s(k);
    for (int r = 0; r < reps; ++r) {
        auto pts = sample_poisson_block(s, intensity, cube);
        sum += double(pts.size());
        for (const auto& p : pts) CHECK(cube.contains(p));
    }
    double mean = sum / reps;
    double expect = intensity * cube.area();
    CHECK(std::abs(mean - expect) < 4.5 * std::sqrt(expect / reps));
}

TEST_CASE("grid points enumerate L Z^2 in a closed box") {
    auto g = grid_points(1.0, Box2{-1.0, -1.0, 2.0, 1.0});
    CHECK(g.size() == 4 * 3);  // x in {-1,0,1,2}, y in {-1,0,1}
    auto g2 = grid_points(0.5, Box2{0.0, 0.0, 1.0, 1.0});
    CHECK(g2.size() == 9);
    auto g3 = grid_points(3.0, Box2{0.1, 0.1, 0.2, 0.2});
    CHECK(g3.empty());
}

TEST_CASE("superimpose_grid merges and deduplicates") {
    std::vector<Point2> pts = {{0.5, 0.5}, {1.0, 1.0}};  // (1,1) collides with the grid
    auto merged = superimpose_grid(pts, 1.0, Box2{0.0, 0.0, 2.0, 2.0});
    CHECK(merged.size() == 1 + 9);  // 9 grid points + the non-colliding point
    CHECK(std::is_sorted(merged.begin(), merged.end()));
}

TEST_CASE("clip_segment agrees with a Monte Carlo length oracle") {
    Box2 cube{0.0, 0.0, 1.0, 1.0};
    StreamKey k;
    k.master_seed = 77;
    RandomStream s(k);
    for (int trial = 0; trial < 40; ++trial) {
        Segment seg{{s.uniform(-1, 2), s.uniform(-1, 2)}, {s.uniform(-1, 2), s.uniform(-1, 2)}};
        Segment clipped;
        double len = 0.0;
        if (clip_segment(seg, cube, clipped)) len = clipped.length();
        // oracle: fraction of points along seg inside the cube
        const int n = 200000;
        int inside = 0;
        for (int i = 0; i < n; ++i) {
            double t = (i + 0.5) / n;
            Point2 p{seg.a.x + t * (seg.b.x - seg.a.x), seg.a.y + t * (seg.b.y - seg.a.y)};
            if (cube.contains(p)) ++inside;
        }
        double mc = seg.length() * double(inside) / n;
        CHECK(len == doctest::Approx(mc).epsilon(1e-3).scale(seg.length()));
    }
}

TEST_CASE("cube tilings count each edge piece exactly once") {
    // clip a bundle of segments against a 4x4 tiling of the unit square;
    // the tile totals must add up to the whole-square total.
    StreamKey k;
    k.master_seed = 31;
    RandomStream s(k);
    std::vector<Segment> segs;
    for (int i = 0; i < 60; ++i)
        segs.push_back({{s.uniform(-0.2, 1.2), s.uniform(-0.2, 1.2)},
                        {s.uniform(-0.2, 1.2), s.uniform(-0.2, 1.2)}});
    // include axis-aligned segments lying exactly on tile boundaries
    segs.push_back({{0.25, 0.1}, {0.25, 0.9}});
    segs.push_back({{0.05, 0.5}, {0.95, 0.5}});
    double whole = clip_segments_to_cube(segs, Box2{0, 0, 1, 1}).total_length;
    double tiles = 0.0;
    for (int ix = 0; ix < 4; ++ix)
        for (int iy = 0; iy < 4; ++iy) {
            Box2 t{ix * 0.25, iy * 0.25, (ix + 1) * 0.25, (iy + 1) * 0.25};
            tiles += clip_segments_to_cube(segs, t).total_length;
        }
    // boundary segments on the outer xhi/yhi faces are dropped by both
    // sides alike, so totals agree up to rounding
    CHECK(tiles == doctest::Approx(whole).epsilon(1e-12));
}

TEST_CASE("distance to segments matches a dense-sampling oracle") {
    std::vector<Segment> segs = {{{0, 0}, {1, 0}}, {{2, 2}, {2, 3}}, {{-1, 1}, {0, 2}}};
    StreamKey k;
    k.master_seed = 9;
    RandomStream s(k);
    for (int t = 0; t < 50; ++t) {
        Point2 p{s.uniform(-2, 3), s.uniform(-2, 4)};
        double got = min_distance_to_segments(p, segs);
        double oracle = 1e300;
        for (const auto& sg : segs)
            for (int i = 0; i <= 4000; ++i) {
                double u = i / 4000.0;
                double dx = p.x - (sg.a.x + u * (sg.b.x - sg.a.x));
                double dy = p.y - (sg.a.y + u * (sg.b.y - sg.a.y));
                oracle = std::min(oracle, std::hypot(dx, dy));
            }
        CHECK(got <= oracle + 1e-12);
        CHECK(got >= oracle - 1e-3);
    }
}

TEST_CASE("min distance on an empty list throws EMPTY_SET") {
    try {
        min_distance_to_segments({0, 0}, {});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EMPTY_SET);
    }
}

TEST_CASE("circumcircle is equidistant from its three points") {
    Point2 a{0.2, 0.1}, b{1.7, -0.4}, c{0.9, 2.2};
    auto cc = circumcircle(a, b, c);
    for (const auto& p : {a, b, c})
        CHECK(std::hypot(p.x - cc.center.x, p.y - cc.center.y) == doctest::Approx(cc.radius));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <set>

#include "coxlab/error.hpp"
#include "coxlab/sampler.hpp"
#include "doctest.h"

using namespace coxlab;

namespace {

ValidatedParams make_params(Variant v, double M, double L, std::int64_t b_inv,
                            double lambda_del = 1.0, double rho = 1.0, double w0 = 0.0) {
    ModelParams p;
    p.variant = v;
    p.M = M;
    p.L = L;
    p.b_inv = b_inv;
    p.lambda_del = lambda_del;
    p.rho = rho;
    p.w0 = w0;
    p.eta = 1e-12;
    return validate_params(p);
}

std::set<std::pair<double, double>> point_set(const CoxConfiguration& c) {
    std::set<std::pair<double, double>> s;
    for (const auto& pt : c.points) s.insert({pt.pos.x, pt.pos.y});
    return s;
}

}  // namespace

TEST_CASE("driver mark counts follow Poisson(rho * lambda_max)") {
    auto p = make_params(Variant::CAPPED, 5.0, 1.0, 21, 1.0, 1.0);
    Driver d = sample_driver(p, BlockWindow{2}, 3.0, 123);
    double sum = 0;
    std::uint64_t sites = 0;
    for (std::int64_t bx = -2; bx < 2; ++bx)
        for (std::int64_t by = -2; by < 2; ++by)
            for (const auto& x : sites_of_block(BlockId{bx, by}, p)) {
                auto ms = d.marks(x);
                sum += double(ms.size());
                ++sites;
                CHECK(std::is_sorted(ms.begin(), ms.end()));
                for (const auto& m : ms) {
                    CHECK(m.v >= 0.0);
                    CHECK(m.v < 1.0);
                    CHECK(m.u >= 0.0);
                    CHECK(m.u < 1.0);
                    CHECK(m.t >= 0.0);
                    CHECK(m.t < 3.0);
                }
            }
    double mean = sum / double(sites);
    CHECK(std::abs(mean - 3.0) < 4.0 * std::sqrt(3.0 / double(sites)));
}

TEST_CASE("lambda_max = 0 gives empty mark lists") {
    ModelParams mp;
    mp.variant = Variant::CAPPED;
    mp.M = 5.0;
    mp.L = 1.0;
    mp.b_inv = 21;
    mp.lambda = 0.0;
    auto p = validate_params(mp);
    Driver d = sample_driver(p, BlockWindow{1}, 0.0, 5);
    for (const auto& x : sites_of_block(BlockId{0, 0}, p)) CHECK(d.marks(x).empty());
}

TEST_CASE("identical seeds give identical drivers; trials differ") {
    auto p = make_params(Variant::CAPPED, 5.0, 1.0, 21);
    Driver a = sample_driver(p, BlockWindow{1}, 2.0, 9, 0);
    Driver b = sample_driver(p, BlockWindow{1}, 2.0, 9, 0);
    Driver c = sample_driver(p, BlockWindow{1}, 2.0, 9, 1);
    bool any_diff = false;
    for (const auto& x : sites_of_block(BlockId{0, 0}, p)) {
        CHECK(a.marks(x) == b.marks(x));
        if (!(a.marks(x) == c.marks(x))) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("realize at lambda = 0 is empty; conditional mean matches lambda * mass") {
    auto p = make_params(Variant::CAPPED, 5.0, 1.0, 21, 1.0, 2.0);
    Environment env(p, BlockWindow{1}, 31);
    Driver d0 = sample_driver(p, BlockWindow{1}, 1.5, 1, 0);
    CHECK(realize(d0, env, 0.0).points.empty());

    // pick the heaviest site and average its point count over fresh drivers
    EnvironmentSite target;
    env.window().for_each([&](BlockId z) {
        for (const auto& s : env.block_nonempty_sites(z))
            if (s.mass > target.mass) target = s;
    });
    REQUIRE(target.mass > 0.0);
    const double lambda = 1.2;
    const int trials = 20000;
    std::uint64_t count = 0;
    for (int t = 0; t < trials; ++t) {
        Driver d = sample_driver(p, BlockWindow{1}, 1.5, 1, std::uint64_t(t));
        for (const auto& m : d.marks(target.site))
            if (m.t <= lambda && m.u <= target.mass) ++count;
    }
    double mean = double(count) / trials;
    double expect = lambda * target.mass;
    CHECK(std::abs(mean - expect) < 4.0 * std::sqrt(expect / trials));
}

TEST_CASE("every realized point lies in its site's cube and on the street") {
    auto p = make_params(Variant::DEL_GRID, 5.0, 1.0, 21, 1.0);
    Environment env(p, BlockWindow{1}, 8);
    Driver d = sample_driver(p, BlockWindow{1}, 2.0, 77);
    auto cfg = realize(d, env, 2.0);
    CHECK(cfg.points.size() > 0);
    double side = p.cube_side();
    for (const auto& pt : cfg.points) {
        Box2 cube{pt.site.x * side, pt.site.y * side, (pt.site.x + 1) * side,
                  (pt.site.y + 1) * side};
        CHECK(cube.contains(pt.pos));
        auto s = env.site(pt.site);
        CHECK(min_distance_to_segments(pt.pos, s.segments) < 1e-9);
    }
    // block-major deterministic ordering: per site, mark indices ascend
    for (std::size_t i = 1; i < cfg.points.size(); ++i)
        if (cfg.points[i].site == cfg.points[i - 1].site)
            CHECK(cfg.points[i].mark_index > cfg.points[i - 1].mark_index);
}

TEST_CASE("coupled nesting: lower lambda realizations are subsets") {
    auto p = make_params(Variant::CAPPED, 5.0, 1.0, 21, 1.0, 0.5);
    Environment env(p, BlockWindow{1}, 13);
    Driver d = sample_driver(p, BlockWindow{1}, 3.0, 21);
    auto c1 = realize(d, env, 0.5);
    auto c2 = realize(d, env, 1.7);
    auto c3 = realize(d, env, 3.0);
    auto s1 = point_set(c1), s2 = point_set(c2), s3 = point_set(c3);
    CHECK(c1.points.size() <= c2.points.size());
    CHECK(c2.points.size() <= c3.points.size());
    CHECK(std::includes(s2.begin(), s2.end(), s1.begin(), s1.end()));
    CHECK(std::includes(s3.begin(), s3.end(), s2.begin(), s2.end()));
    CHECK(s3.size() > s1.size());
}

TEST_CASE("with_inserted_mark adds exactly one point at the mapped position") {
    auto p = make_params(Variant::DEL_GRID, 5.0, 1.0, 21, 1.0, /*rho=*/5.0);
    Environment env(p, BlockWindow{1}, 8);
    EnvironmentSite target;
    env.window().for_each([&](BlockId z) {
        for (const auto& s : env.block_nonempty_sites(z))
            if (s.mass > target.mass) target = s;
    });
    REQUIRE(target.mass > 0.0);
    Driver d = sample_driver(p, BlockWindow{1}, 1.0, 3);
    auto base = realize(d, env, 1.0);
    Driver d2 = d.with_inserted_mark(target.site, 0.37, target.mass * 0.5);
    auto plus = realize(d2, env, 1.0);
    CHECK(plus.points.size() == base.points.size() + 1);
    Point2 expect = inverse_position(target, 0.37);
    bool found = false;
    for (const auto& pt : plus.points)
        if (pt.pos == expect) found = true;
    CHECK(found);
    // u above the site's mass: no extra point
    double above = std::nextafter(target.mass, 1e300);
    REQUIRE(above <= p.rho());
    Driver d3 = d.with_inserted_mark(target.site, 0.37, above);
    CHECK(realize(d3, env, 1.0).points.size() == base.points.size());
    // double insertion is additive
    Driver d4 = d2.with_inserted_mark(target.site, 0.9, target.mass * 0.25);
    CHECK(realize(d4, env, 1.0).points.size() == base.points.size() + 2);
    // input driver unchanged
    CHECK(realize(d, env, 1.0).points.size() == base.points.size());
    CHECK_THROWS_AS(d.with_inserted_mark(target.site, 1.5, 0.1), Error);
    CHECK_THROWS_AS(d.with_inserted_mark(target.site, 0.5, 6.0), Error);
}

TEST_CASE("surgical resampling changes only the named scope") {
    auto p = make_params(Variant::CAPPED, 5.0, 1.0, 21, 1.0, 0.5);
    Environment env(p, BlockWindow{2}, 4);
    Driver d = sample_driver(p, BlockWindow{2}, 2.0, 55);
    BlockId z{1, -1};
    Driver rd = d.with_resampled_block(z, 1);
    auto a = realize(d, env, 2.0);
    auto b = realize(rd, env, 2.0);
    std::set<std::pair<std::int64_t, std::int64_t>> z_sites;
    for (const auto& x : sites_of_block(z, p)) z_sites.insert({x.x, x.y});
    // outside z the realizations agree exactly
    std::vector<CoxPoint> a_out, b_out;
    for (const auto& pt : a.points)
        if (!z_sites.count({pt.site.x, pt.site.y})) a_out.push_back(pt);
    for (const auto& pt : b.points)
        if (!z_sites.count({pt.site.x, pt.site.y})) b_out.push_back(pt);
    REQUIRE(a_out.size() == b_out.size());
    for (std::size_t i = 0; i < a_out.size(); ++i) CHECK(a_out[i].pos == b_out[i].pos);
    // resampling is deterministic per replicate
    Driver rd2 = d.with_resampled_block(z, 1);
    auto c = realize(rd2, env, 2.0);
    REQUIRE(b.points.size() == c.points.size());
    for (std::size_t i = 0; i < b.points.size(); ++i) CHECK(b.points[i].pos == c.points[i].pos);
    // a different replicate differs
    Driver rd3 = d.with_resampled_block(z, 2);
    CHECK(point_set(realize(rd3, env, 2.0)) != point_set(b));
    CHECK_THROWS_AS(d.with_resampled_block(BlockId{5, 5}, 1), Error);
}

TEST_CASE("env-block resample keeps sites outside I^+(z) bit-identical in realizations") {
    auto p = make_params(Variant::DEL_GRID, 5.0, 1.0, 21, 1.0);
    Environment env(p, BlockWindow{2}, 6);
    Environment env2 = env.with_resampled_y(BlockId{0, 0}, 3);
    Driver d = sample_driver(p, BlockWindow{2}, 1.0, 7);
    auto a = realize(d, env, 1.0);
    auto b = realize(d, env2, 1.0);
    auto outside = [&](const CoxPoint& pt) {
        BlockId z = block_of_site(pt.site, p);
        return std::max(std::abs(z.x), std::abs(z.y)) > 1;
    };
    std::vector<Point2> ao, bo;
    for (const auto& pt : a.points)
        if (outside(pt)) ao.push_back(pt.pos);
    for (const auto& pt : b.points)
        if (outside(pt)) bo.push_back(pt.pos);
    CHECK(ao == bo);
}

TEST_CASE("scale mismatch between driver and environment is rejected") {
    auto p1 = make_params(Variant::CAPPED, 5.0, 1.0, 21, 1.0, 0.5);
    auto p2 = make_params(Variant::CAPPED, 5.0, 1.0, 21, 1.0, 0.6);
    Environment env(p1, BlockWindow{1}, 1);
    Driver d = sample_driver(p2, BlockWindow{1}, 1.0, 1);
    try {
        realize(d, env, 1.0);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SCALE_MISMATCH);
    }
    Driver d2 = sample_driver(p1, BlockWindow{1}, 1.0, 1);
    CHECK_THROWS_AS(realize(d2, env, 1.5), Error);
}

TEST_CASE("WIDTH realization places points inside the street region") {
    auto p = make_params(Variant::WIDTH, 1.0, 1.0, 5, 1.0, 1.0, 0.1);
    Environment env(p, BlockWindow{1}, 2);
    Driver d = sample_driver(p, BlockWindow{1}, 30.0, 11);
    auto cfg = realize(d, env, 30.0);
    CHECK(cfg.points.size() > 0);
    for (const auto& pt : cfg.points) {
        auto s = env.site(pt.site);
        REQUIRE(!s.width_region.empty());
        CHECK(min_distance_to_segments(pt.pos, s.width_region) <= p.w0());
    }
    // determinism incl. the rejection loops
    auto cfg2 = realize(d, env, 30.0);
    REQUIRE(cfg.points.size() == cfg2.points.size());
    for (std::size_t i = 0; i < cfg.points.size(); ++i)
        CHECK(cfg.points[i].pos == cfg2.points[i].pos);
}

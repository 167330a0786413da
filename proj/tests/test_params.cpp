#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "coxlab/error.hpp"
#include "coxlab/params.hpp"
#include "doctest.h"

using namespace coxlab;

static ModelParams good_grid() {
    ModelParams p;
    p.M = 5.0;
    p.L = 1.0;
    p.b_inv = 21;  // > 2*2*5 = 20
    p.lambda = 0.5;
    p.lambda_del = 1.0;
    p.rho = 3.0;
    p.variant = Variant::CAPPED;
    return p;
}

TEST_CASE("a valid grid parameter set validates") {
    auto vp = validate_params(good_grid());
    CHECK(vp.b() == doctest::Approx(1.0 / 21.0));
    CHECK(vp.cube_side() == doctest::Approx(5.0 / 21.0));
    CHECK(vp.sites_per_block() == 441);
    CHECK(vp.rho() == 3.0);
    CHECK(vp.has_grid());
}

TEST_CASE("1/b must exceed 2dM") {
    auto p = good_grid();
    p.b_inv = 20;  // == 2dM, not strictly greater
    CHECK(!check_params(p).empty());
    try {
        validate_params(p);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::INVALID_SCALE);
    }
    p.b_inv = 21;
    CHECK(check_params(p).empty());
}

TEST_CASE("grid variants require M to be an integer multiple of L") {
    auto p = good_grid();
    p.M = 5.0;
    p.L = 2.0;
    try {
        validate_params(p);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::INVALID_GRID);
    }
    p.M = 6.0;
    p.b_inv = 25;
    CHECK(check_params(p).empty());
}

TEST_CASE("DEL ignores the grid rule") {
    auto p = good_grid();
    p.variant = Variant::DEL;
    p.L = 0.7;  // irrelevant for DEL
    CHECK(check_params(p).empty());
}

TEST_CASE("nonpositive scalars are rejected with NONPOSITIVE") {
    for (auto mutate : {+[](ModelParams& p) { p.lambda = -1.0; },
                        +[](ModelParams& p) { p.lambda_del = 0.0; },
                        +[](ModelParams& p) { p.rho = 0.0; },
                        +[](ModelParams& p) { p.eta = 0.0; },
                        +[](ModelParams& p) { p.ball_radius = 0.0; }}) {
        auto p = good_grid();
        mutate(p);
        try {
            validate_params(p);
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NONPOSITIVE);
        }
    }
}

TEST_CASE("lambda = 0 is allowed (empty device process)") {
    auto p = good_grid();
    p.lambda = 0.0;
    CHECK(check_params(p).empty());
}

TEST_CASE("the error message lists every violated rule") {
    auto p = good_grid();
    p.b_inv = 3;
    p.rho = -1.0;
    try {
        validate_params(p);
        FAIL("expected throw");
    } catch (const Error& e) {
        std::string w = e.what();
        CHECK(w.find("1/b") != std::string::npos);
        CHECK(w.find("rho") != std::string::npos);
    }
}

TEST_CASE("WIDTH normalizes the cap to the cube area") {
    auto p = good_grid();
    p.variant = Variant::WIDTH;
    p.w0 = 0.05;
    p.eta = 1e-6;
    auto vp = validate_params(p);
    double side = 5.0 / 21.0;
    CHECK(vp.rho() == doctest::Approx(side * side));
}

TEST_CASE("WIDTH requires a positive half-width") {
    auto p = good_grid();
    p.variant = Variant::WIDTH;
    p.w0 = 0.0;
    CHECK(!check_params(p).empty());
}

TEST_CASE("variant names round-trip") {
    for (auto v : {Variant::DEL, Variant::DEL_GRID, Variant::WIDTH, Variant::CAPPED})
        CHECK(variant_from_name(variant_name(v)) == v);
    CHECK_THROWS_AS(variant_from_name("POISSON"), Error);
}

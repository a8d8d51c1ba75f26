#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sparsedetect/boundary.hpp"

using namespace sparsedetect;

TEST_CASE("phi boundary closed forms") {
    CHECK(boundary::phi_boundary(0.75) == Catch::Approx(std::sqrt(0.5)).margin(1e-12));
    CHECK(boundary::phi_boundary(0.5 + 1e-9) < 1e-4);
    CHECK(boundary::phi_boundary(0.99) == Catch::Approx(1.272792206).margin(1e-6));

    CHECK_THROWS_AS(boundary::phi_boundary(0.5), std::domain_error);
    CHECK_THROWS_AS(boundary::phi_boundary(1.0), std::domain_error);
    CHECK_THROWS_AS(boundary::phi_boundary(0.3), std::domain_error);
    CHECK_THROWS_AS(boundary::phi_boundary(1.2), std::domain_error);
}

TEST_CASE("phi is continuous, strictly increasing, below sqrt(2)") {
    const double left = std::sqrt(2.0 * 0.75 - 1.0);
    const double right = std::sqrt(2.0) * (1.0 - std::sqrt(0.25));
    CHECK(std::abs(left - right) < 1e-12);

    double prev = 0.0;
    const int grid = 10000;
    for (int i = 1; i < grid; ++i) {
        const double beta = 0.5 + 0.5 * static_cast<double>(i) / grid;
        if (beta >= 1.0) break;
        const double v = boundary::phi_boundary(beta);
        CHECK(v > prev);
        CHECK(v > 0.0);
        CHECK(v < std::sqrt(2.0));
        prev = v;
    }
}

TEST_CASE("boundary rate closed forms") {
    CHECK(boundary::boundary_rate(10000, 100, 10) ==
          Catch::Approx(0.0316227766).margin(1e-9));
    CHECK(boundary::boundary_rate(16, 16, 1) ==
          Catch::Approx(0.4162773056).margin(1e-9));
    // both branches vanish as n grows
    CHECK(boundary::boundary_rate(100000000, 100, 10) < 1e-3);
    CHECK_THROWS_AS(boundary::boundary_rate(1, 10, 2), std::domain_error);
    CHECK_THROWS_AS(boundary::boundary_rate(10, 10, 11), std::domain_error);
}

TEST_CASE("boundary rate monotone in n and k") {
    for (std::size_t k : {2u, 5u, 9u}) {
        double prev = 1e9;
        for (std::size_t n : {16u, 64u, 256u, 1024u, 4096u}) {
            const double v = boundary::boundary_rate(n, 400, k);
            CHECK(v <= prev);
            prev = v;
        }
    }
    // nondecreasing in k within the highly sparse branch (k^2 < p); the
    // branch switch itself can step down when p < n because of the
    // n^{-1/4} cap, so monotonicity is a per-branch property
    for (std::size_t n : {100u, 1000u}) {
        double prev = 0.0;
        for (std::size_t k : {1u, 2u, 4u, 8u, 16u}) {
            const double v = boundary::boundary_rate(n, 400, k);
            CHECK(v >= prev);
            prev = v;
        }
    }
    // the moderate branch does not depend on k at all
    CHECK(boundary::boundary_rate(1000, 400, 64) ==
          boundary::boundary_rate(1000, 400, 400));
}

TEST_CASE("sharp radius") {
    // k = round(256^0.25) = 4; r = sqrt(0.5) * sqrt(4 log 256 / 1e4)
    CHECK(boundary::sharp_radius(10000, 256, 0.75) ==
          Catch::Approx(0.0333021844).margin(1e-9));
    // quadrupling n halves the radius
    CHECK(boundary::sharp_radius(40000, 256, 0.75) ==
          Catch::Approx(0.5 * boundary::sharp_radius(10000, 256, 0.75)).margin(1e-15));
    // continuity across the branch point
    CHECK(std::abs(boundary::sharp_radius(10000, 256, 0.75 - 1e-9) -
                   boundary::sharp_radius(10000, 256, 0.75 + 1e-9)) < 1e-9);
    // defining identity: radius / sqrt(k log p / n) is exactly phi(beta)
    for (double beta : {0.6, 0.75, 0.9}) {
        const double k = static_cast<double>(model::sparsity_from_beta(256, beta));
        const double unit = std::sqrt(k * std::log(256.0) / 10000.0);
        CHECK(boundary::sharp_radius(10000, 256, beta) ==
              boundary::phi_boundary(beta) * unit);
    }
}

TEST_CASE("regime classification") {
    model::ConfigInput in;
    in.n = 100;
    in.p = 50;
    in.beta = 0.3;
    in.x = 1.0;
    auto moderate = boundary::classify_regime(model::resolve_config(in));
    CHECK(moderate.regime == boundary::Regime::moderately_sparse);
    CHECK_FALSE(moderate.sharp_radius.has_value());
    CHECK_FALSE(moderate.sharp_constant_applicable);

    // beta = 1/2 stays on the moderate side
    in.beta = 0.5;
    CHECK(boundary::classify_regime(model::resolve_config(in)).regime ==
          boundary::Regime::moderately_sparse);

    in.n = 1000000;
    in.p = 256;
    in.beta = 0.75;
    auto sharp = boundary::classify_regime(model::resolve_config(in));
    CHECK(sharp.regime == boundary::Regime::highly_sparse);
    CHECK(sharp.sharp_condition_ratio == Catch::Approx(4.0 * std::log(256.0) / 1000.0)
                                             .margin(1e-12));
    CHECK(sharp.sharp_constant_applicable);
    CHECK(sharp.sharp_radius.has_value());

    // unknown variance with k log p = 2n: detection impossible
    model::ConfigInput uv;
    uv.n = 100;
    uv.p = 55;
    uv.k = 50;
    uv.x = 1.0;
    uv.variance_known = false;
    auto rep = boundary::classify_regime(model::resolve_config(uv));
    CHECK(rep.unknown_variance_ratio == Catch::Approx(50.0 * std::log(55.0) / 100.0)
                                            .margin(1e-12));
    CHECK_FALSE(rep.unknown_variance_detectable);
    uv.variance_known = true;  // known variance: flag is always true
    CHECK(boundary::classify_regime(model::resolve_config(uv)).unknown_variance_detectable);
}

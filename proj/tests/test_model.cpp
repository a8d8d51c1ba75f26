#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "sparsedetect/model.hpp"

using namespace sparsedetect;

TEST_CASE("place_signal closed forms") {
    rng::Stream s(1, 0, 0, 0);
    const auto all_pos = model::place_signal(model::AlternativeSpec(4, 4, 2.0),
                                             model::SignPattern::all_positive, s);
    CHECK(all_pos.coefficients == std::vector<double>{1.0, 1.0, 1.0, 1.0});
    CHECK(all_pos.support.size() == 4);
    CHECK(all_pos.norm == Catch::Approx(2.0).margin(1e-12));

    rng::Stream s2(2, 0, 0, 0);
    const auto single = model::place_signal(model::AlternativeSpec(10, 1, 0.5),
                                            model::SignPattern::random, s2);
    CHECK(single.support.size() == 1);
    int nonzero = 0;
    for (double v : single.coefficients) {
        if (v != 0.0) {
            ++nonzero;
            CHECK(std::abs(v) == Catch::Approx(0.5).margin(1e-15));
        }
    }
    CHECK(nonzero == 1);
}

TEST_CASE("place_signal norm and support recomputed from the vector") {
    rng::Stream s(77, 0, 0, 0);
    const auto sig = model::place_signal(model::AlternativeSpec(100, 9, 3.0),
                                         model::SignPattern::random, s);
    double norm_sq = 0.0;
    std::size_t count = 0;
    std::set<std::size_t> seen;
    for (std::size_t j = 0; j < sig.coefficients.size(); ++j) {
        if (sig.coefficients[j] != 0.0) {
            ++count;
            norm_sq += sig.coefficients[j] * sig.coefficients[j];
            seen.insert(j);
        }
    }
    CHECK(count == 9);
    CHECK(std::sqrt(norm_sq) == Catch::Approx(3.0).margin(1e-12));
    CHECK(seen == std::set<std::size_t>(sig.support.begin(), sig.support.end()));
    CHECK(std::abs(sig.norm - 3.0) <= 1e-12);
}

TEST_CASE("place_signal is reproducible and validates its inputs") {
    rng::Stream a(123, 9, 9, 9), b(123, 9, 9, 9);
    const auto s1 = model::place_signal(model::AlternativeSpec(50, 7, 1.5),
                                        model::SignPattern::random, a);
    const auto s2 = model::place_signal(model::AlternativeSpec(50, 7, 1.5),
                                        model::SignPattern::random, b);
    CHECK(s1.coefficients == s2.coefficients);

    CHECK_THROWS_AS(model::AlternativeSpec(4, 5, 1.0), std::domain_error);
    CHECK_THROWS_AS(model::AlternativeSpec(4, 0, 1.0), std::domain_error);
    CHECK_THROWS_AS(model::AlternativeSpec(4, 2, -1.0), std::domain_error);
}

TEST_CASE("sparsity index round trips") {
    CHECK(model::sparsity_from_beta(256, 0.75) == 4);
    CHECK(model::sparsity_from_beta(256, 1.0) == 1);
    CHECK(model::sparsity_from_beta(256, 0.0) == 256);
    CHECK(model::sparsity_from_beta(4096, 0.75) == 8);
    CHECK(model::beta_from_sparsity(100, 10) == Catch::Approx(0.5).margin(1e-15));
    CHECK(model::beta_from_sparsity(100, 100) == Catch::Approx(0.0).margin(1e-15));
    CHECK(model::beta_from_sparsity(100, 1) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("config resolution") {
    model::ConfigInput in;
    in.n = 500;
    in.p = 100;
    in.beta = 0.5;
    in.x = 1.0;
    const auto cfg = model::resolve_config(in);
    CHECK(cfg.k == 10);
    CHECK(cfg.r == Catch::Approx(std::sqrt(10 * std::log(100.0) / 500.0)).margin(1e-12));

    // r and x must agree when both are given
    model::ConfigInput bad = in;
    bad.r = cfg.r * 1.5;
    CHECK_THROWS_AS(model::resolve_config(bad), std::domain_error);
    model::ConfigInput good = in;
    good.r = cfg.r;
    CHECK_NOTHROW(model::resolve_config(good));

    model::ConfigInput missing;
    missing.n = 10;
    missing.p = 10;
    missing.k = 2;
    CHECK_THROWS_AS(model::resolve_config(missing), std::domain_error);  // no r/x
}

TEST_CASE("dataset invariants") {
    model::Matrix x(3, 2);
    CHECK_THROWS_AS(model::Dataset(x, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
    CHECK_NOTHROW(model::Dataset(x, std::vector<double>{1.0, 2.0, 3.0}));
}

TEST_CASE("decision sentinel never rejects") {
    const auto d = model::TestDecision::make(
        "hc", -std::numeric_limits<double>::infinity(), -10.0);
    CHECK_FALSE(d.reject);
    const auto r = model::TestDecision::make("hc", 1.0, 0.5);
    CHECK(r.reject);
}

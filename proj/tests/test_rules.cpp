#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "sparsedetect/tests.hpp"

using namespace sparsedetect;

namespace {
model::Dataset dataset_with_y(std::vector<double> y, std::size_t p,
                              std::uint64_t seed) {
    rng::Stream s(seed, 1, 1, 1);
    auto x = designs::sample_design(model::DesignKind::gaussian_iid, y.size(), p, s);
    return model::Dataset(std::move(x), std::move(y));
}
}  // namespace

TEST_CASE("psi0 level-alpha rule") {
    std::vector<double> zero(16, 0.0);
    const auto no = rules::decide_psi0_alpha(zero, 0.05);
    CHECK_FALSE(no.reject);  // t0 = -sqrt(n/2) < u_alpha
    CHECK(no.statistic_value == Catch::Approx(-std::sqrt(8.0)).margin(1e-12));
    CHECK(no.threshold == Catch::Approx(1.6448536).margin(1e-6));

    // force t0 = 10 by construction: sum(y^2) = n + 10 sqrt(2n)
    const std::size_t n = 25;
    const double total = n + 10.0 * std::sqrt(2.0 * n);
    std::vector<double> strong(n, std::sqrt(total / n));
    const auto yes = rules::decide_psi0_alpha(strong, 0.05);
    CHECK(yes.statistic_value == Catch::Approx(10.0).margin(1e-9));
    CHECK(yes.reject);

    CHECK_THROWS_AS(rules::decide_psi0_alpha(zero, 0.0), std::domain_error);
    CHECK_THROWS_AS(rules::decide_psi0_alpha(zero, 1.0), std::domain_error);
}

TEST_CASE("psi0 rejecting at alpha implies rejecting at larger alpha") {
    const auto data = oracles::random_dataset(40, 4, 88, 1.0);
    bool rejected = false;
    for (double alpha : {0.01, 0.05, 0.1, 0.2, 0.4}) {
        const bool r = rules::decide_psi0_alpha(data.y, alpha).reject;
        if (rejected) CHECK(r);  // u_alpha decreases with alpha
        rejected = rejected || r;
    }
}

TEST_CASE("psi0 with diverging threshold") {
    std::vector<double> y(100, 0.0);
    const auto d = rules::decide_psi0_T(y, 1.0);
    CHECK(d.threshold == Catch::Approx(5.0).margin(1e-12));
    CHECK_FALSE(d.reject);
    CHECK_THROWS_AS(rules::decide_psi0_T(y, 0.0), std::domain_error);
    CHECK_THROWS_AS(rules::decide_psi0_T(y, -1.0), std::domain_error);
    // explicit override wins
    CHECK(rules::decide_psi0_T(y, 1.0, 2.5).threshold == 2.5);
}

TEST_CASE("psi1 rule") {
    auto zero_y = dataset_with_y(std::vector<double>(10, 0.0), 4, 5);
    const auto d = rules::decide_psi1_alpha(zero_y, 0.05);
    CHECK(d.statistic_value == 0.0);
    CHECK_FALSE(d.reject);

    auto tiny = model::Dataset(model::Matrix(1, 2), std::vector<double>{1.0});
    CHECK_THROWS_AS(rules::decide_psi1_alpha(tiny, 0.05), std::domain_error);
}

TEST_CASE("psi_hc rule") {
    const auto data = oracles::random_dataset(30, 16, 9);
    const auto prof = stats::pvalue_profile(data);
    const auto d = rules::decide_psi_hc(prof, 0.1);
    CHECK(d.threshold ==
          Catch::Approx(1.1 * std::sqrt(2.0 * std::log(std::log(16.0)))).margin(1e-12));

    // all q above the cutoff: sentinel never rejects
    stats::PValueProfile high;
    high.y_values = {0.0, 0.0, 0.0};
    high.q_values = {0.9, 0.8, 0.95};
    high.q_sorted = {0.8, 0.9, 0.95};
    high.sort_index = {1, 0, 2};
    CHECK_FALSE(rules::decide_psi_hc(high, 0.1).reject);

    // p = 2 is out of domain (log log 2 < 0)
    CHECK_THROWS_AS(rules::hc_threshold(2, 0.1), std::domain_error);
    const auto two_cols = oracles::random_dataset(10, 2, 10);
    CHECK_THROWS_AS(rules::decide(two_cols, {rules::TestKind::psi_hc}),
                    std::domain_error);
}

TEST_CASE("hc decision is invariant to rescaling the response") {
    const auto data = oracles::random_dataset(60, 32, 11, 1.2);
    const auto base = rules::decide(data, {rules::TestKind::psi_hc});
    for (double c : {0.1, 10.0}) {
        std::vector<double> y(data.y.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = c * data.y[i];
        const auto scaled = rules::decide(model::Dataset(data.x, y),
                                          {rules::TestKind::psi_hc});
        CHECK(scaled.overall.reject == base.overall.reject);
        CHECK(std::abs(scaled.overall.statistic_value -
                       base.overall.statistic_value) <= 1e-12);
    }
}

TEST_CASE("combined rules reject iff any constituent rejects") {
    // null-ish data: nothing rejects
    const auto quiet = oracles::random_dataset(50, 8, 21);
    const auto d = rules::decide(quiet, {rules::TestKind::psi_star, 0.05});
    REQUIRE(d.parts.size() == 2);
    CHECK(d.overall.reject == (d.parts[0].reject || d.parts[1].reject));

    // strong signal through the first column: every constituent fires
    const auto loud = oracles::random_dataset(80, 8, 22, 4.0);
    const auto dl = rules::decide(loud, {rules::TestKind::psi_triple, 0.05});
    REQUIRE(dl.parts.size() == 3);
    CHECK(dl.overall.reject);
    CHECK(dl.overall.reject ==
          (dl.parts[0].reject || dl.parts[1].reject || dl.parts[2].reject));

    // psi_star_hc carries psi0 at full alpha plus the HC rule
    const auto ds = rules::decide(loud, {rules::TestKind::psi_star_hc, 0.05});
    REQUIRE(ds.parts.size() == 2);
    CHECK(ds.parts[0].test_name == "psi0");
    CHECK(ds.parts[1].test_name == "psi_hc");
}

TEST_CASE("combined level is below the sum of constituent levels") {
    // exact counting inequality: the union rejects at most as often as the
    // constituents together, draw by draw
    const std::size_t n = 100, p = 16;
    const int reps = 800;
    int star = 0, psi0 = 0, psi1 = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const auto data = oracles::random_dataset(n, p, 40000 + rep);
        const auto d = rules::decide(data, {rules::TestKind::psi_star, 0.05});
        if (d.overall.reject) ++star;
        if (d.parts[0].reject) ++psi0;
        if (d.parts[1].reject) ++psi1;
    }
    CHECK(star <= psi0 + psi1);
    // and both constituents sit near their nominal alpha/2
    CHECK(psi0 <= reps * 0.075);
    CHECK(psi1 <= reps * 0.075);
}

TEST_CASE("unknown variance admits only scale-invariant rules") {
    const auto data = oracles::random_dataset(30, 8, 33);
    CHECK_THROWS_AS(rules::decide(data, {rules::TestKind::psi0_alpha}, 1.0, false),
                    std::domain_error);
    CHECK_THROWS_AS(rules::decide(data, {rules::TestKind::psi1_alpha}, 1.0, false),
                    std::domain_error);
    CHECK_THROWS_AS(rules::decide(data, {rules::TestKind::psi_star}, 1.0, false),
                    std::domain_error);
    CHECK_NOTHROW(rules::decide(data, {rules::TestKind::psi_hc}, 1.0, false));
    CHECK_NOTHROW(rules::decide(data, {rules::TestKind::psi_max}, 1.0, false));
}

TEST_CASE("known sigma standardizes the response for t0/t1") {
    const auto base = oracles::random_dataset(40, 6, 44, 0.5);
    const double sigma = 2.5;
    std::vector<double> scaled(base.y.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = sigma * base.y[i];
    const model::Dataset data(base.x, scaled);

    const auto via_sigma = rules::decide(data, {rules::TestKind::psi0_alpha}, sigma, true);
    const auto direct = rules::decide(base, {rules::TestKind::psi0_alpha}, 1.0, true);
    CHECK(via_sigma.overall.statistic_value ==
          Catch::Approx(direct.overall.statistic_value).margin(1e-9));

    const auto t1_sigma = rules::decide(data, {rules::TestKind::psi1_alpha}, sigma, true);
    const auto t1_direct = rules::decide(base, {rules::TestKind::psi1_alpha}, 1.0, true);
    CHECK(t1_sigma.overall.statistic_value ==
          Catch::Approx(t1_direct.overall.statistic_value).margin(1e-9));
}

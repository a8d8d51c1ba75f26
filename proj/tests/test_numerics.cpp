#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sparsedetect/numerics.hpp"

using namespace sparsedetect;

TEST_CASE("std_normal_cdf closed forms") {
    CHECK(numerics::std_normal_cdf(0.0) == 0.5);
    CHECK(numerics::std_normal_cdf(-1.959964) == Catch::Approx(0.025).margin(1e-6));
    CHECK(numerics::std_normal_cdf(40.0) == 1.0);
    CHECK(numerics::std_normal_cdf(-40.0) == 0.0);
}

TEST_CASE("std_normal_cdf accuracy against series/continued-fraction oracle") {
    // absolute error on the bulk
    for (double t = -8.0; t <= 8.0; t += 1.0 / 64.0) {
        const double ref = static_cast<double>(oracles::normal_cdf(t));
        CHECK(std::abs(numerics::std_normal_cdf(t) - ref) <= 1e-14);
    }
    // relative error in the far tail, down to Phi(-37)
    for (double t = -37.0; t <= -8.0; t += 0.125) {
        const long double ref = oracles::normal_cdf(static_cast<long double>(t));
        const long double got = numerics::std_normal_cdf(t);
        CHECK(std::abs(got - ref) <= 1e-10L * ref);
    }
}

TEST_CASE("std_normal_cdf is monotone and symmetric") {
    double prev = -1.0;
    for (double t = -39.0; t <= 39.0; t += 0.0625) {
        const double v = numerics::std_normal_cdf(t);
        CHECK(v >= prev);
        prev = v;
        if (std::abs(t) <= 8.0) {
            CHECK(std::abs(numerics::std_normal_cdf(t) +
                           numerics::std_normal_cdf(-t) - 1.0) <= 1e-14);
        }
    }
}

TEST_CASE("std_normal_quantile reference values") {
    CHECK(numerics::std_normal_quantile(0.5) == 0.0);
    CHECK(numerics::std_normal_quantile(0.95) == Catch::Approx(1.644854).margin(1e-6));
    CHECK(numerics::std_normal_quantile(0.975) == Catch::Approx(1.959964).margin(1e-6));
    CHECK(numerics::std_normal_quantile(0.975) ==
          Catch::Approx(oracles::normal_quantile(0.975)).margin(1e-9));
    CHECK_THROWS_AS(numerics::std_normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(numerics::std_normal_quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(numerics::std_normal_quantile(-0.2), std::domain_error);
}

TEST_CASE("quantile inverts the cdf") {
    for (double a = 0.0005; a < 1.0; a += 0.0101) {
        CHECK(std::abs(numerics::std_normal_cdf(numerics::std_normal_quantile(a)) - a) <=
              1e-10);
    }
    // strictly increasing
    double prev = -1e9;
    for (double a = 1e-6; a < 1.0; a += 0.003) {
        const double v = numerics::std_normal_quantile(a);
        CHECK(v > prev);
        prev = v;
    }
    // cdf-then-quantile identity on [-6, 6]
    for (double t = -6.0; t <= 6.0; t += 0.125) {
        const double round_trip =
            numerics::std_normal_quantile(numerics::std_normal_cdf(t));
        CHECK(std::abs(round_trip - t) <= 1e-8);
    }
}

TEST_CASE("two_sided_pvalue") {
    CHECK(numerics::two_sided_pvalue(0.0) == 1.0);
    CHECK(numerics::two_sided_pvalue(1.959964) == Catch::Approx(0.05).margin(1e-6));
    CHECK(numerics::two_sided_pvalue(50.0) == numerics::q_min);
    CHECK(numerics::two_sided_pvalue(-50.0) == numerics::q_min);

    double prev = 2.0;
    for (double y = 0.0; y <= 45.0; y += 0.25) {
        const double q = numerics::two_sided_pvalue(y);
        CHECK(q <= prev);
        CHECK(q >= numerics::q_min);
        CHECK(q == numerics::two_sided_pvalue(-y));
        prev = q;
    }
}

TEST_CASE("log-sum-exp accumulator") {
    numerics::LogSumExp acc;
    CHECK(std::isinf(acc.value()));

    acc.add(std::log(2.0));
    acc.add(std::log(3.0));
    CHECK(acc.value() == Catch::Approx(std::log(5.0)).margin(1e-14));

    // no overflow for exponents far beyond double range
    numerics::LogSumExp big;
    big.add(5e4);
    big.add(5e4 + 2.0);
    CHECK(std::isfinite(big.value()));
    CHECK(big.value() == Catch::Approx(5e4 + 2.0 + std::log1p(std::exp(-2.0))).margin(1e-9));

    // merge order independence within 1e-12 relative
    sparsedetect::rng::Stream stream(42, 1, 2, 3);
    std::vector<double> terms(257);
    for (double& t : terms) t = 800.0 * (stream.next_double() - 0.5);
    numerics::LogSumExp forward, backward, split_a, split_b;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        forward.add(terms[i]);
        backward.add(terms[terms.size() - 1 - i]);
        (i % 2 ? split_a : split_b).add(terms[i]);
    }
    split_b.merge(split_a);
    const double ref = forward.value();
    CHECK(std::abs(backward.value() - ref) <= 1e-12 * std::abs(ref));
    CHECK(std::abs(split_b.value() - ref) <= 1e-12 * std::abs(ref));
}

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sparsedetect/sparsedetect.hpp"

// Fast invariant suite behind `selftest`: closed-form values, algebraic
// identities, scale invariance, and the U-statistic / likelihood-ratio
// cross-checks, each against an implementation-independent route.

namespace sparsedetect::cli {

namespace selfcheck {

// Reference O(n^2 p) pairwise evaluation of the U-statistic; kept separate
// from the library's column-sum form on purpose.
inline double t1_pairwise(const model::Dataset& data) {
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
            double cross = 0.0;
            for (std::size_t j = 0; j < p; ++j) cross += data.x(i, j) * data.x(k, j);
            sum += data.y[i] * data.y[k] * cross / std::sqrt(static_cast<double>(p));
        }
    }
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return sum / std::sqrt(pairs);
}

inline model::Dataset random_dataset(std::size_t n, std::size_t p, std::uint64_t seed) {
    rng::Stream stream(seed, 0x5E1Fu, 0, 0);
    model::Matrix x = designs::sample_design(model::DesignKind::gaussian_iid, n, p, stream);
    std::vector<double> y(n);
    for (double& v : y) v = stream.next_gaussian();
    return model::Dataset(std::move(x), std::move(y));
}

}  // namespace selfcheck

inline std::vector<CheckResult> run_selftest_checks(const std::string& force_fail) {
    std::vector<CheckResult> results;
    auto check = [&](const std::string& name, bool pass, const std::string& detail = "") {
        const bool forced = (name == force_fail);
        results.push_back({name, pass && !forced,
                           forced ? "forced failure (test fixture)" : detail});
    };

    // Gaussian cdf closed forms and symmetry
    {
        bool ok = numerics::std_normal_cdf(0.0) == 0.5 &&
                  numerics::std_normal_cdf(40.0) == 1.0 &&
                  std::abs(numerics::std_normal_cdf(-1.959964) - 0.025) < 1e-6;
        for (double t = -8.0; t <= 8.0; t += 0.25) {
            ok = ok && std::abs(numerics::std_normal_cdf(t) +
                                numerics::std_normal_cdf(-t) - 1.0) < 1e-14;
        }
        check("cdf-closed-forms", ok);
    }

    // quantile inverts cdf
    {
        bool ok = numerics::std_normal_quantile(0.5) == 0.0;
        for (double a : {0.001, 0.025, 0.3, 0.7, 0.95, 0.999}) {
            ok = ok && std::abs(numerics::std_normal_cdf(
                           numerics::std_normal_quantile(a)) - a) < 1e-10;
        }
        check("quantile-inversion", ok);
    }

    // p-value floor and monotonicity
    {
        bool ok = numerics::two_sided_pvalue(0.0) == 1.0 &&
                  numerics::two_sided_pvalue(50.0) == numerics::q_min;
        double prev = 2.0;
        for (double y = 0.0; y <= 40.0; y += 0.5) {
            const double q = numerics::two_sided_pvalue(y);
            ok = ok && q <= prev;
            prev = q;
        }
        check("pvalue-floor", ok);
    }

    // t1 column-sum form vs pairwise reference
    {
        bool ok = true;
        for (std::uint64_t s = 1; s <= 20 && ok; ++s) {
            const auto data = selfcheck::random_dataset(4 + s % 13, 2 + s % 7, s);
            const double fast = stats::t1_statistic(data);
            const double slow = selfcheck::t1_pairwise(data);
            ok = std::abs(fast - slow) <= 1e-10 * std::max(1.0, std::abs(slow));
        }
        check("t1-pairwise-equivalence", ok);
    }

    // HC hand examples and empty-index sentinel
    {
        auto prof2 = stats::pvalue_profile_from_y({0.0, 0.0});
        prof2.q_values = {0.2, 0.7};
        prof2.q_sorted = {0.2, 0.7};
        prof2.sort_index = {0, 1};
        const double hc2 = stats::hc_statistic(prof2, 0.5);
        stats::PValueProfile prof4;
        prof4.y_values = {0, 0, 0, 0};
        prof4.q_values = {0.01, 0.2, 0.4, 0.9};
        prof4.q_sorted = {0.01, 0.2, 0.4, 0.9};
        prof4.sort_index = {0, 1, 2, 3};
        const double hc4 = stats::hc_statistic(prof4, 0.5);
        stats::PValueProfile high;
        high.y_values = {0, 0};
        high.q_values = {0.8, 0.9};
        high.q_sorted = {0.8, 0.9};
        high.sort_index = {0, 1};
        const bool ok = std::abs(hc2 - 1.060660172) < 1e-6 &&
                        std::abs(hc4 - 4.824181513) < 1e-6 &&
                        std::isinf(stats::hc_statistic(high, 0.5));
        check("hc-closed-forms", ok);
    }

    // scale invariance of the p-value profile and HC decision
    {
        bool ok = true;
        const auto data = selfcheck::random_dataset(40, 12, 77);
        const double hc_ref = stats::hc_statistic(stats::pvalue_profile(data));
        for (double c : {0.1, 10.0, 1e3}) {
            std::vector<double> scaled(data.y.size());
            for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = c * data.y[i];
            const double hc = stats::hc_statistic(
                stats::pvalue_profile(model::Dataset(data.x, scaled)));
            ok = ok && std::abs(hc - hc_ref) <= 1e-12;
        }
        check("scale-invariance", ok);
    }

    // dominance t_max <= t_HC when the smallest p-value qualifies and
    // p q_(1) <= 1 (t_max nonnegative)
    {
        bool ok = true;
        for (std::uint64_t s = 30; s < 50; ++s) {
            const auto data = selfcheck::random_dataset(30, 8, s);
            const auto prof = stats::pvalue_profile(data);
            if (prof.q_sorted.front() <= 0.5 && 8.0 * prof.q_sorted.front() <= 1.0) {
                ok = ok && stats::tmax_statistic(prof) <=
                               stats::hc_statistic(prof) + 1e-12;
            }
        }
        check("tmax-hc-dominance", ok);
    }

    // phi branches agree at 3/4; strictly increasing; below sqrt(2)
    {
        const double left = std::sqrt(2.0 * 0.75 - 1.0);
        const double right = std::sqrt(2.0) * (1.0 - std::sqrt(1.0 - 0.75));
        bool ok = std::abs(left - right) < 1e-12 &&
                  std::abs(boundary::phi_boundary(0.75) - std::sqrt(0.5)) < 1e-12;
        double prev = 0.0;
        for (double b = 0.51; b < 0.999; b += 0.004) {
            const double v = boundary::phi_boundary(b);
            ok = ok && v > prev && v < std::sqrt(2.0);
            prev = v;
        }
        check("phi-branches", ok);
    }

    // threshold identity a_j T_j - a_j^2/2 = log(1/h)
    {
        bool ok = true;
        rng::Stream stream(5, 0x71u, 0, 0);
        for (int i = 0; i < 50; ++i) {
            const double a = 0.1 + 5.0 * stream.next_double();
            const double h = 0.001 + 0.998 * stream.next_double();
            const double tj = lowerbound::threshold_tj(a, h);
            ok = ok && std::abs(a * tj - a * a / 2.0 - std::log(1.0 / h)) < 1e-12;
        }
        check("threshold-identity", ok);
    }

    // martingale identity E0[L_pi] = 1 (Monte Carlo, moderate prior)
    {
        const auto prior = lowerbound::ThreePointPrior::from_radius(6, 2, 0.3, 0.9);
        double sum = 0.0, sum_sq = 0.0;
        const int reps = 600;
        for (int rep = 0; rep < reps; ++rep) {
            rng::Stream stream(99, 0xAAEu, static_cast<std::uint32_t>(rep), 0);
            auto x = designs::sample_design(model::DesignKind::gaussian_iid, 30, 6, stream);
            std::vector<double> y(30);
            for (double& v : y) v = stream.next_gaussian();
            const double l =
                lowerbound::likelihood_ratio_exact(model::Dataset(std::move(x), std::move(y)),
                                                   prior);
            sum += l;
            sum_sq += l * l;
        }
        const double mean = sum / reps;
        const double se = std::sqrt(std::max(0.0, sum_sq / reps - mean * mean) / reps);
        check("martingale-identity", std::abs(mean - 1.0) <= 4.0 * se + 1e-9,
              "mean " + fmt9(mean) + " se " + fmt9(se));
    }

    // signal placement lands on the sphere with the right support size
    {
        rng::Stream stream(123, 0x51Au, 0, 0);
        const auto sig =
            model::place_signal(model::AlternativeSpec(100, 9, 3.0),
                                model::SignPattern::random, stream);
        const bool ok = sig.support.size() == 9 && std::abs(sig.norm - 3.0) < 1e-12;
        check("signal-placement", ok);
    }

    return results;
}

}  // namespace sparsedetect::cli

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsedetect/model.hpp"
#include "sparsedetect/numerics.hpp"
#include "sparsedetect/statistics.hpp"

// ============================================================================
// Decision rules built from the statistics, including the combined tests.
// Unknown-variance mode admits only the scale-invariant rules (HC and t_max);
// t0/t1 calibration assumes unit noise variance, so with a known sigma != 1
// the response is standardized first.
// ============================================================================

namespace sparsedetect::rules {

using model::Dataset;
using model::TestDecision;

enum class TestKind {
    psi0_alpha,   // t0 > u_alpha
    psi0_T,       // t0 > T_np (default sqrt(n) r^2 / 2)
    psi1_alpha,   // t1 > u_alpha
    psi_hc,       // t_HC > (1+a) sqrt(2 log log p)
    psi_max,      // t_max > (1+a) sqrt(2 log log p)
    psi_star,     // max(psi0_{a/2}, psi1_{a/2})
    psi_star_hc,  // max(psi0_a, psi_hc)
    psi_triple,   // max(psi0_{a/2}, psi1_{a/2}, psi_hc)
};

inline std::string test_name(TestKind kind) {
    switch (kind) {
        case TestKind::psi0_alpha: return "psi0";
        case TestKind::psi0_T: return "psi0_T";
        case TestKind::psi1_alpha: return "psi1";
        case TestKind::psi_hc: return "psi_hc";
        case TestKind::psi_max: return "psi_max";
        case TestKind::psi_star: return "psi_star";
        case TestKind::psi_star_hc: return "psi_star_hc";
        case TestKind::psi_triple: return "psi_triple";
    }
    return "?";
}

inline std::optional<TestKind> test_from_name(const std::string& name) {
    for (TestKind k : {TestKind::psi0_alpha, TestKind::psi0_T, TestKind::psi1_alpha,
                       TestKind::psi_hc, TestKind::psi_max, TestKind::psi_star,
                       TestKind::psi_star_hc, TestKind::psi_triple}) {
        if (test_name(k) == name) return k;
    }
    return std::nullopt;
}

struct TestSpec {
    TestKind name = TestKind::psi_hc;
    double alpha = 0.05;             // level for the u_alpha-calibrated rules
    double a = 0.1;                  // HC threshold margin, any a > 0
    double cutoff = 0.5;             // HC p-value cutoff, any c in (0,1)
    std::optional<double> t_np;      // psi0_T threshold override

    TestSpec() = default;
    TestSpec(TestKind kind, double level = 0.05) : name(kind), alpha(level) {}
};

/// Which inputs a rule consumes. The Monte Carlo engine skips generating
/// design columns when only the response enters the statistic.
inline bool uses_design(TestKind kind) {
    return kind != TestKind::psi0_alpha && kind != TestKind::psi0_T;
}

inline bool uses_t0(TestKind kind) {
    return kind == TestKind::psi0_alpha || kind == TestKind::psi0_T ||
           kind == TestKind::psi_star || kind == TestKind::psi_star_hc ||
           kind == TestKind::psi_triple;
}

inline bool uses_t1(TestKind kind) {
    return kind == TestKind::psi1_alpha || kind == TestKind::psi_star ||
           kind == TestKind::psi_triple;
}

inline bool uses_profile(TestKind kind) {
    return kind == TestKind::psi_hc || kind == TestKind::psi_max ||
           kind == TestKind::psi_star_hc || kind == TestKind::psi_triple;
}

/// Scale-invariant rules stay calibrated when the noise variance is unknown.
inline bool scale_invariant(TestKind kind) {
    return kind == TestKind::psi_hc || kind == TestKind::psi_max;
}

inline double hc_threshold(std::size_t p, double a) {
    if (p < 3) throw std::domain_error("hc test: need p >= 3 so log log p > 0");
    if (!(a > 0.0)) throw std::domain_error("hc test: need a > 0");
    return (1.0 + a) * std::sqrt(2.0 * std::log(std::log(static_cast<double>(p))));
}

inline TestDecision decide_psi0_alpha(std::span<const double> y, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("psi0: alpha in (0,1)");
    const double u = numerics::std_normal_quantile(1.0 - alpha);
    return TestDecision::make("psi0", stats::t0_statistic(y), u);
}

/// psi0 with a diverging threshold; default T_np = sqrt(n) r^2 / 2.
inline TestDecision decide_psi0_T(std::span<const double> y, double r,
                                  std::optional<double> t_np = std::nullopt) {
    if (!t_np && !(r > 0.0)) throw std::domain_error("psi0_T: need r > 0");
    const double threshold =
        t_np ? *t_np : std::sqrt(static_cast<double>(y.size())) * r * r / 2.0;
    return TestDecision::make("psi0_T", stats::t0_statistic(y), threshold);
}

inline TestDecision decide_psi1_alpha(const Dataset& data, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("psi1: alpha in (0,1)");
    const double u = numerics::std_normal_quantile(1.0 - alpha);
    return TestDecision::make("psi1", stats::t1_statistic(data), u);
}

inline TestDecision decide_psi_hc(const stats::PValueProfile& profile, double a,
                                  double cutoff = 0.5) {
    const double threshold = hc_threshold(profile.size(), a);
    return TestDecision::make("psi_hc", stats::hc_statistic(profile, cutoff), threshold);
}

inline TestDecision decide_psi_max(const stats::PValueProfile& profile, double a) {
    const double threshold = hc_threshold(profile.size(), a);
    return TestDecision::make("psi_max", stats::tmax_statistic(profile), threshold);
}

/// Decision of a (possibly combined) rule plus its constituents.
struct CombinedDecision {
    TestDecision overall;
    std::vector<TestDecision> parts;
};

/// Precomputed statistic inputs. The Monte Carlo engine fills this from
/// streamed columns; the Dataset entry point fills it by direct evaluation.
/// Either way the decision logic below is the single authority.
struct StatBundle {
    std::optional<double> t0;
    std::optional<double> t1;
    std::optional<stats::PValueProfile> profile;
    std::size_t n = 0;
    double r = 0.0;  // separation radius, used by the default psi0_T threshold
};

inline CombinedDecision decide_from_bundle(const StatBundle& bundle,
                                           const TestSpec& spec) {
    auto need = [](const auto& opt, const char* what) -> const auto& {
        if (!opt) throw std::logic_error(std::string("decide: missing ") + what);
        return *opt;
    };
    auto psi0_at = [&](double alpha) {
        const double u = numerics::std_normal_quantile(1.0 - alpha);
        return TestDecision::make("psi0", need(bundle.t0, "t0"), u);
    };
    auto psi1_at = [&](double alpha) {
        const double u = numerics::std_normal_quantile(1.0 - alpha);
        return TestDecision::make("psi1", need(bundle.t1, "t1"), u);
    };

    CombinedDecision result;
    switch (spec.name) {
        case TestKind::psi0_alpha:
            result.overall = psi0_at(spec.alpha);
            return result;
        case TestKind::psi0_T: {
            const double threshold =
                spec.t_np ? *spec.t_np
                          : std::sqrt(static_cast<double>(bundle.n)) * bundle.r *
                                bundle.r / 2.0;
            result.overall =
                TestDecision::make("psi0_T", need(bundle.t0, "t0"), threshold);
            return result;
        }
        case TestKind::psi1_alpha:
            result.overall = psi1_at(spec.alpha);
            return result;
        case TestKind::psi_hc:
            result.overall = decide_psi_hc(need(bundle.profile, "profile"), spec.a,
                                           spec.cutoff);
            return result;
        case TestKind::psi_max:
            result.overall = decide_psi_max(need(bundle.profile, "profile"), spec.a);
            return result;
        case TestKind::psi_star:
            result.parts = {psi0_at(spec.alpha / 2.0), psi1_at(spec.alpha / 2.0)};
            break;
        case TestKind::psi_star_hc:
            result.parts = {psi0_at(spec.alpha),
                            decide_psi_hc(need(bundle.profile, "profile"), spec.a,
                                          spec.cutoff)};
            break;
        case TestKind::psi_triple:
            result.parts = {psi0_at(spec.alpha / 2.0), psi1_at(spec.alpha / 2.0),
                            decide_psi_hc(need(bundle.profile, "profile"), spec.a,
                                          spec.cutoff)};
            break;
    }

    // Combined rule: reject iff any constituent rejects.
    bool reject = false;
    for (const auto& part : result.parts) reject = reject || part.reject;
    result.overall.test_name = test_name(spec.name);
    result.overall.reject = reject;
    result.overall.statistic_value = std::numeric_limits<double>::quiet_NaN();
    result.overall.threshold = std::numeric_limits<double>::quiet_NaN();
    return result;
}

/// Evaluate a rule on one dataset. With known sigma != 1 the response is
/// standardized before t0/t1; in unknown-variance mode only scale-invariant
/// rules are admissible.
inline CombinedDecision decide(const Dataset& data, const TestSpec& spec,
                               double sigma = 1.0, bool variance_known = true,
                               double r = 0.0) {
    if (!variance_known && !scale_invariant(spec.name)) {
        throw std::domain_error(test_name(spec.name) + " requires known variance");
    }
    if (spec.name == TestKind::psi1_alpha || uses_t1(spec.name)) {
        if (data.n() < 2) throw std::domain_error("psi1: need n >= 2");
    }
    if (uses_profile(spec.name) && data.p() < 3) {
        throw std::domain_error("hc test: need p >= 3 so log log p > 0");
    }

    StatBundle bundle;
    bundle.n = data.n();
    bundle.r = r;

    const bool standardize = variance_known && sigma != 1.0;
    std::vector<double> scaled;
    std::span<const double> y{data.y};
    if (standardize) {
        scaled.resize(data.y.size());
        for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = data.y[i] / sigma;
        y = scaled;
    }

    if (uses_t0(spec.name)) bundle.t0 = stats::t0_statistic(y);
    if (uses_t1(spec.name)) {
        bundle.t1 = standardize ? stats::t1_statistic(Dataset(data.x, scaled))
                                : stats::t1_statistic(data);
    }
    if (uses_profile(spec.name)) bundle.profile = stats::pvalue_profile(data);
    return decide_from_bundle(bundle, spec);
}

}  // namespace sparsedetect::rules

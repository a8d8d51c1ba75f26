#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sparsedetect/designs.hpp"
#include "sparsedetect/model.hpp"
#include "sparsedetect/numerics.hpp"
#include "sparsedetect/rng.hpp"

// ============================================================================
// Least-favorable priors and exact likelihood-ratio mixtures on small
// instances, plus a Monte Carlo Bayes-risk oracle. All mixtures are
// evaluated in the log domain with log-sum-exp: exponents scale with n and
// would overflow otherwise.
// ============================================================================

namespace sparsedetect::lowerbound {

using model::Dataset;
using model::SparseSignal;

/// Hard cap for exact 3^p enumeration (3^12 ~ 5.3e5 sign/support patterns).
inline constexpr std::size_t p_max_exact = 12;

/// Exact support-mixture enumeration cap for the unknown-variance prior.
inline constexpr std::size_t support_enumeration_cap = 10000;

/// Coordinatewise three-point prior: each theta_j is 0 with probability 1-h
/// and +-b with probability h/2 each, where h = c k / p and b = r / (c sqrt(k)).
struct ThreePointPrior {
    std::size_t p = 0;
    double h = 0.0;  // atom mass; h = 0 is the degenerate prior at theta = 0
    double b = 0.0;  // atom magnitude
    double c = 0.9;

    ThreePointPrior(std::size_t p_, double h_, double b_, double c_ = 0.9)
        : p(p_), h(h_), b(b_), c(c_) {
        if (!(h >= 0.0 && h < 1.0)) throw std::domain_error("ThreePointPrior: h in [0,1)");
        if (!(b >= 0.0)) throw std::domain_error("ThreePointPrior: b >= 0");
    }

    static ThreePointPrior from_radius(std::size_t p, std::size_t k, double r,
                                       double c) {
        if (!(c > 0.0 && c < 1.0)) throw std::domain_error("ThreePointPrior: c in (0,1)");
        if (k < 1 || k > p) throw std::domain_error("ThreePointPrior: 1 <= k <= p");
        const double kd = static_cast<double>(k);
        return ThreePointPrior(p, c * kd / static_cast<double>(p),
                               r / (c * std::sqrt(kd)), c);
    }
};

inline SparseSignal sample_three_point(const ThreePointPrior& prior,
                                       rng::Stream& stream) {
    std::vector<double> coeffs(prior.p, 0.0);
    for (std::size_t j = 0; j < prior.p; ++j) {
        const double u = stream.next_double();
        if (u < prior.h) {
            coeffs[j] = (u < prior.h / 2.0) ? prior.b : -prior.b;
        }
    }
    return SparseSignal::from_coefficients(std::move(coeffs));
}

/// log of the exact prior mixture L_pi(Z) = E_pi exp(-||v||^2/2 + (v,Y)),
/// v = sum_j theta_j X_j, by enumeration of all 3^p support/sign patterns.
inline double log_likelihood_ratio_exact(const Dataset& data,
                                         const ThreePointPrior& prior) {
    const std::size_t p = data.p();
    if (p != prior.p) throw std::invalid_argument("likelihood_ratio: p mismatch");
    if (p > p_max_exact) {
        throw std::domain_error("likelihood_ratio_exact: p exceeds enumeration cap");
    }
    if (prior.h == 0.0) return 0.0;  // all mass at theta = 0

    // Gram data: G[j][l] = (X_j, X_l), c[j] = (X_j, Y).
    const std::size_t n = data.n();
    std::vector<double> gram(p * p, 0.0);
    std::vector<double> xty(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        const auto cj = data.x.col(j);
        for (std::size_t l = j; l < p; ++l) {
            const auto cl = data.x.col(l);
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += cj[i] * cl[i];
            gram[j * p + l] = gram[l * p + j] = dot;
        }
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += cj[i] * data.y[i];
        xty[j] = dot;
    }

    const double log_zero = std::log(1.0 - prior.h);
    const double log_atom = std::log(prior.h / 2.0);
    const double b = prior.b;

    numerics::LogSumExp acc;
    // Depth-first over patterns; cross[j] tracks sum_{l assigned} eps_l G_lj,
    // so assigning eps_j = s changes the exponent by
    //   b s (X_j,Y) - (b^2/2) G_jj - b^2 s cross[j].
    std::vector<double> cross(p, 0.0);
    std::function<void(std::size_t, double)> walk = [&](std::size_t j, double log_term) {
        if (j == p) {
            acc.add(log_term);
            return;
        }
        walk(j + 1, log_term + log_zero);
        for (int s : {+1, -1}) {
            const double sd = static_cast<double>(s);
            const double gain = b * sd * xty[j] -
                                0.5 * b * b * gram[j * p + j] -
                                b * b * sd * cross[j];
            for (std::size_t l = 0; l < p; ++l) cross[l] += sd * gram[j * p + l];
            walk(j + 1, log_term + log_atom + gain);
            for (std::size_t l = 0; l < p; ++l) cross[l] -= sd * gram[j * p + l];
        }
    };
    walk(0, 0.0);
    return acc.value();
}

inline double likelihood_ratio_exact(const Dataset& data, const ThreePointPrior& prior) {
    return std::exp(log_likelihood_ratio_exact(data, prior));
}

/// Uniform-support prior for the unknown-variance construction: supports of
/// size k drawn uniformly, common magnitude b, and null-matching noise
/// variance 1 - k b^2.
struct UniformSupportPrior {
    std::size_t p = 0;
    std::size_t k = 0;
    double b = 0.0;
    double variance_shrink = 1.0;  // 1 - k b^2 > 0

    UniformSupportPrior(std::size_t p_, std::size_t k_, double b_)
        : p(p_), k(k_), b(b_),
          variance_shrink(1.0 - static_cast<double>(k_) * b_ * b_) {
        if (k < 1 || k > p) throw std::domain_error("UniformSupportPrior: 1 <= k <= p");
        if (!(variance_shrink > 0.0)) {
            throw std::domain_error("UniformSupportPrior: need k b^2 < 1");
        }
    }
};

/// log L_m(Z) for one support m:
///   (1-kb^2)^{-n/2} exp( -kb^2 ||Y||^2 / (2(1-kb^2))
///                        + b (Y, W) / (1-kb^2)
///                        - b^2 ||W||^2 / (2(1-kb^2)) ),  W = sum_{i in m} X_i.
inline double log_likelihood_ratio_unknown_variance(
    const Dataset& data, const UniformSupportPrior& prior,
    std::span<const std::size_t> support) {
    if (support.size() != prior.k) {
        throw std::invalid_argument("likelihood_ratio_unknown_variance: |m| != k");
    }
    const std::size_t n = data.n();
    const double s = prior.variance_shrink;
    const double kb2 = static_cast<double>(prior.k) * prior.b * prior.b;

    std::vector<double> w(n, 0.0);
    for (std::size_t idx : support) {
        const auto col = data.x.col(idx);
        for (std::size_t i = 0; i < n; ++i) w[i] += col[i];
    }
    double y_sq = 0.0, w_sq = 0.0, yw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        y_sq += data.y[i] * data.y[i];
        w_sq += w[i] * w[i];
        yw += data.y[i] * w[i];
    }
    return -0.5 * static_cast<double>(n) * std::log(s) - kb2 * y_sq / (2.0 * s) +
           prior.b * yw / s - prior.b * prior.b * w_sq / (2.0 * s);
}

struct MixtureValue {
    double log_value = 0.0;
    bool exact = true;        // false when the support average was subsampled
    std::size_t terms = 0;
};

inline double binomial_coefficient_capped(std::size_t p, std::size_t k,
                                          std::size_t cap) {
    double v = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        v *= static_cast<double>(p - i) / static_cast<double>(i + 1);
        if (v > static_cast<double>(cap) * 2.0) return v;
    }
    return v;
}

/// Full unknown-variance mixture L_pi = |M|^{-1} sum_m L_m. Supports are
/// enumerated exactly while C(p,k) <= the cap; beyond that a flagged
/// uniform subsample stands in (never used by the acceptance oracle).
inline MixtureValue likelihood_ratio_unknown_variance(const Dataset& data,
                                                      const UniformSupportPrior& prior,
                                                      rng::Stream* subsample_stream = nullptr) {
    const std::size_t p = data.p();
    if (p != prior.p) throw std::invalid_argument("likelihood_ratio: p mismatch");
    MixtureValue out;
    numerics::LogSumExp acc;

    const double combos = binomial_coefficient_capped(p, prior.k, support_enumeration_cap);
    if (combos <= static_cast<double>(support_enumeration_cap)) {
        // lexicographic enumeration of all k-subsets
        std::vector<std::size_t> m(prior.k);
        for (std::size_t i = 0; i < prior.k; ++i) m[i] = i;
        std::size_t count = 0;
        while (true) {
            acc.add(log_likelihood_ratio_unknown_variance(data, prior, m));
            ++count;
            std::size_t i = prior.k;
            while (i > 0) {
                --i;
                if (m[i] != i + p - prior.k) break;
                if (i == 0) {
                    out.log_value = acc.value() - std::log(static_cast<double>(count));
                    out.terms = count;
                    return out;
                }
            }
            ++m[i];
            for (std::size_t l = i + 1; l < prior.k; ++l) m[l] = m[l - 1] + 1;
        }
    }

    if (subsample_stream == nullptr) {
        throw std::domain_error(
            "likelihood_ratio_unknown_variance: C(p,k) above enumeration cap; "
            "subsampling needs a stream");
    }
    out.exact = false;
    out.terms = support_enumeration_cap;
    std::vector<std::size_t> idx(p);
    for (std::size_t j = 0; j < p; ++j) idx[j] = j;
    std::vector<std::size_t> m(prior.k);
    for (std::size_t t = 0; t < support_enumeration_cap; ++t) {
        for (std::size_t j = 0; j < prior.k; ++j) {
            const std::size_t swap = j + subsample_stream->next_below(p - j);
            std::swap(idx[j], idx[swap]);
            m[j] = idx[j];
        }
        acc.add(log_likelihood_ratio_unknown_variance(data, prior, m));
    }
    out.log_value = acc.value() - std::log(static_cast<double>(support_enumeration_cap));
    return out;
}

/// Appendix threshold T_j = a_j/2 + log(1/h)/a_j; satisfies
/// a_j T_j - a_j^2/2 = log(1/h).
inline double threshold_tj(double a_j, double h) {
    if (!(a_j > 0.0)) throw std::domain_error("threshold_tj: need a_j > 0");
    if (!(h > 0.0 && h < 1.0)) throw std::domain_error("threshold_tj: need h in (0,1)");
    return a_j / 2.0 + std::log(1.0 / h) / a_j;
}

enum class PriorChoice { three_point, uniform_support };

struct GammaEstimate {
    double gamma_hat = 1.0;
    double stderr_ = 0.0;
    std::size_t reps = 0;
};

inline constexpr std::uint32_t oracle_stream_tag = 0x0BAE5u;

/// Monte Carlo estimate of the optimal total error gamma* between P_0 and
/// the prior mixture. Uses gamma* = 1 - TV(P_0, P_pi) with
/// TV = E_0 (1 - L_pi)_+ ; the positive-part form of the same identity as
/// E_0|L_pi - 1|/2 but with a bounded integrand, so the estimate stays
/// stable when L_pi has a heavy right tail under P_0.
inline GammaEstimate bayes_risk_oracle(const model::ProblemConfig& cfg,
                                       PriorChoice choice, std::size_t reps,
                                       double c = 0.9) {
    if (reps < 1) throw std::domain_error("bayes_risk_oracle: need reps >= 1");
    if (cfg.p > p_max_exact) {
        throw std::domain_error("bayes_risk_oracle: p exceeds exact enumeration cap");
    }

    ThreePointPrior three = (cfg.r > 0.0)
        ? ThreePointPrior::from_radius(cfg.p, cfg.k, cfg.r, c)
        : ThreePointPrior(cfg.p, 0.0, 0.0, c);
    const double b_uniform = cfg.r / std::sqrt(static_cast<double>(cfg.k));

    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        rng::Stream stream(cfg.seed, oracle_stream_tag, static_cast<std::uint32_t>(rep), 0);
        model::Matrix x = designs::sample_design(cfg.design, cfg.n, cfg.p, stream);
        std::vector<double> y(cfg.n);
        for (double& v : y) v = stream.next_gaussian();
        Dataset data(std::move(x), std::move(y));

        double log_l;
        if (choice == PriorChoice::three_point) {
            log_l = log_likelihood_ratio_exact(data, three);
        } else {
            UniformSupportPrior prior(cfg.p, cfg.k, b_uniform);
            log_l = likelihood_ratio_unknown_variance(data, prior).log_value;
        }
        const double l = std::exp(log_l);
        const double tv_term = (l < 1.0) ? 1.0 - l : 0.0;
        sum += tv_term;
        sum_sq += tv_term * tv_term;
    }
    const double mean = sum / static_cast<double>(reps);
    const double var = std::max(0.0, sum_sq / static_cast<double>(reps) - mean * mean);
    GammaEstimate est;
    est.gamma_hat = 1.0 - mean;
    est.stderr_ = std::sqrt(var / static_cast<double>(reps));
    est.reps = reps;
    return est;
}

}  // namespace sparsedetect::lowerbound

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "sparsedetect/model.hpp"

// ============================================================================
// Closed-form detection boundaries. Logs are natural throughout; only that
// choice balances the Gaussian tail algebra behind the sharp constant.
// ============================================================================

namespace sparsedetect::boundary {

/// Sharp detection constant on (1/2, 1):
///   phi(beta) = sqrt(2 beta - 1)            for 1/2 < beta <= 3/4,
///   phi(beta) = sqrt(2) (1 - sqrt(1-beta))  for 3/4 < beta < 1.
/// Continuous, strictly increasing, with values in (0, sqrt(2)).
inline double phi_boundary(double beta) {
    if (!(beta > 0.5 && beta < 1.0)) {
        throw std::domain_error("phi_boundary: need beta in (1/2, 1)");
    }
    if (beta <= 0.75) return std::sqrt(2.0 * beta - 1.0);
    return std::sqrt(2.0) * (1.0 - std::sqrt(1.0 - beta));
}

/// Minimax separation rate. The moderately sparse branch (k^2 >= p) is
/// p^{1/4}/sqrt(n) ^ n^{-1/4}; the highly sparse branch is
/// sqrt(k log p / n) ^ n^{-1/4}.
inline double boundary_rate(std::size_t n, std::size_t p, std::size_t k) {
    if (n < 2 || p < 2) throw std::domain_error("boundary_rate: need n, p >= 2");
    if (k < 1 || k > p) throw std::domain_error("boundary_rate: need 1 <= k <= p");
    const double nd = static_cast<double>(n);
    const double pd = static_cast<double>(p);
    const double kd = static_cast<double>(k);
    const double cap = std::pow(nd, -0.25);
    if (kd * kd >= pd) {
        return std::min(std::pow(pd, 0.25) / std::sqrt(nd), cap);
    }
    return std::min(std::sqrt(kd * std::log(pd) / nd), cap);
}

/// Sharp radius r = phi(beta) sqrt(k log p / n) with k = round(p^{1-beta}).
inline double sharp_radius(std::size_t n, std::size_t p, double beta) {
    const double kd = static_cast<double>(model::sparsity_from_beta(p, beta));
    return phi_boundary(beta) *
           std::sqrt(kd * std::log(static_cast<double>(p)) / static_cast<double>(n));
}

enum class Regime { moderately_sparse, highly_sparse };

inline std::string regime_name(Regime r) {
    return r == Regime::moderately_sparse ? "moderately_sparse" : "highly_sparse";
}

struct RegimeReport {
    double beta = 0.0;
    Regime regime = Regime::moderately_sparse;
    bool sharp_constant_applicable = false;
    double sharp_condition_ratio = 0.0;  // k log p / sqrt(n)
    double unknown_variance_ratio = 0.0; // k log p / n
    bool unknown_variance_detectable = true;
    double boundary_rate = 0.0;
    std::optional<double> sharp_radius;
};

/// Classify a configuration against the asymptotic conditions, using
/// finite-sample ratio proxies: the sharp constant needs k log p = o(sqrt(n))
/// (proxy: ratio <= sharp_threshold), and unknown-variance detectability
/// fails once k log p / n diverges (proxy: ratio <= 1). beta = 1/2 itself
/// sits on the moderate side.
inline RegimeReport classify_regime(const model::ProblemConfig& cfg,
                                    double sharp_threshold = 0.1) {
    RegimeReport rep;
    rep.beta = cfg.beta;
    rep.regime = (cfg.beta <= 0.5) ? Regime::moderately_sparse : Regime::highly_sparse;
    const double klogp =
        static_cast<double>(cfg.k) * std::log(static_cast<double>(cfg.p));
    rep.sharp_condition_ratio = klogp / std::sqrt(static_cast<double>(cfg.n));
    rep.unknown_variance_ratio = klogp / static_cast<double>(cfg.n);
    rep.sharp_constant_applicable = (cfg.beta > 0.5) &&
                                    (rep.sharp_condition_ratio <= sharp_threshold);
    rep.unknown_variance_detectable =
        cfg.variance_known || (rep.unknown_variance_ratio <= 1.0);
    rep.boundary_rate = boundary_rate(cfg.n, cfg.p, cfg.k);
    if (rep.regime == Regime::highly_sparse) {
        rep.sharp_radius = sharp_radius(cfg.n, cfg.p, cfg.beta);
    }
    return rep;
}

}  // namespace sparsedetect::boundary

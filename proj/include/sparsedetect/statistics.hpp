#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "sparsedetect/model.hpp"
#include "sparsedetect/numerics.hpp"

// ============================================================================
// Test statistics. t0 is the centered chi-square statistic of the response,
// t1 the degenerate second-order U-statistic with the cross-product kernel,
// and the Higher Criticism family works off the projected values
// y_j = (X_j, Y)/||Y|| and their two-sided Gaussian p-values.
// ============================================================================

namespace sparsedetect::stats {

using model::Dataset;

inline constexpr double neg_infinity = -std::numeric_limits<double>::infinity();

/// t0 = (2n)^{-1/2} * sum_i (Y_i^2 - 1).
inline double t0_statistic(std::span<const double> y) {
    if (y.empty()) throw std::domain_error("t0_statistic: empty response");
    double sum = 0.0;
    for (double v : y) sum += v * v - 1.0;
    return sum / std::sqrt(2.0 * static_cast<double>(y.size()));
}

/// Final assembly of t1 from column aggregates: sum_sq = sum_j S_j^2 with
/// S_j = sum_i Y_i X_ij, and sum_diag = sum_j sum_i Y_i^2 X_ij^2.
inline double t1_from_column_sums(double sum_sq, double sum_diag, std::size_t n,
                                  std::size_t p) {
    if (n < 2) throw std::domain_error("t1_statistic: need n >= 2");
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return (sum_sq - sum_diag) /
           (2.0 * std::sqrt(static_cast<double>(p)) * std::sqrt(pairs));
}

/// U-statistic t1 = N^{-1/2} sum_{i<k} K(Z_i,Z_k) with the kernel
/// K(Z_i,Z_k) = p^{-1/2} Y_i Y_k sum_j X_ij X_kj, evaluated in the
/// algebraically identical O(np) column-sum form.
inline double t1_statistic(const Dataset& data) {
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    if (n < 2) throw std::domain_error("t1_statistic: need n >= 2");
    double sum_sq = 0.0, sum_diag = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        const auto col = data.x.col(j);
        double s = 0.0, q = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double yx = data.y[i] * col[i];
            s += yx;
            q += yx * yx;
        }
        sum_sq += s * s;
        sum_diag += q;
    }
    return t1_from_column_sums(sum_sq, sum_diag, n, p);
}

/// Projected values y_j = (X_j, Y)/||Y||, their two-sided p-values, and the
/// p-values in increasing order with a stable original-index mapping.
struct PValueProfile {
    std::vector<double> y_values;
    std::vector<double> q_values;
    std::vector<double> q_sorted;
    std::vector<std::size_t> sort_index;  // q_sorted[i] == q_values[sort_index[i]]

    std::size_t size() const { return y_values.size(); }
};

inline PValueProfile pvalue_profile_from_y(std::vector<double> y_values) {
    PValueProfile prof;
    prof.y_values = std::move(y_values);
    const std::size_t p = prof.y_values.size();
    prof.q_values.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        prof.q_values[j] = numerics::two_sided_pvalue(prof.y_values[j]);
    }
    prof.sort_index.resize(p);
    std::iota(prof.sort_index.begin(), prof.sort_index.end(), std::size_t{0});
    std::stable_sort(prof.sort_index.begin(), prof.sort_index.end(),
                     [&](std::size_t a, std::size_t b) {
                         return prof.q_values[a] < prof.q_values[b];
                     });
    prof.q_sorted.resize(p);
    for (std::size_t i = 0; i < p; ++i) prof.q_sorted[i] = prof.q_values[prof.sort_index[i]];
    return prof;
}

inline PValueProfile pvalue_profile(const Dataset& data) {
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    double norm_sq = 0.0;
    for (double v : data.y) norm_sq += v * v;
    if (norm_sq == 0.0) {
        throw std::domain_error("pvalue_profile: degenerate response ||Y|| = 0");
    }
    const double norm = std::sqrt(norm_sq);
    std::vector<double> y_values(p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto col = data.x.col(j);
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += col[i] * data.y[i];
        y_values[j] = dot / norm;
    }
    return pvalue_profile_from_y(std::move(y_values));
}

/// Higher Criticism: max over ranks i with q_(i) <= cutoff of
/// sqrt(p) (i/p - q_(i)) / sqrt(q_(i)(1-q_(i))). Returns -inf when no rank
/// qualifies; that sentinel never rejects downstream.
inline double hc_statistic(const PValueProfile& profile, double cutoff = 0.5) {
    const std::size_t p = profile.size();
    const double sqrt_p = std::sqrt(static_cast<double>(p));
    double best = neg_infinity;
    for (std::size_t i = 0; i < p; ++i) {
        const double q = profile.q_sorted[i];
        if (q > cutoff) break;
        const double rank_frac = static_cast<double>(i + 1) / static_cast<double>(p);
        const double term = sqrt_p * (rank_frac - q) / std::sqrt(q * (1.0 - q));
        best = std::max(best, term);
    }
    return best;
}

/// t_max = (p q_(1))^{-1/2} - (p q_(1))^{1/2}, from the smallest p-value.
inline double tmax_statistic(const PValueProfile& profile) {
    if (profile.size() == 0) throw std::domain_error("tmax_statistic: empty profile");
    const double pq = static_cast<double>(profile.size()) * profile.q_sorted.front();
    return 1.0 / std::sqrt(pq) - std::sqrt(pq);
}

/// Max-projection exceedance indicator: ||y||_inf >= sqrt(2.5 log p).
inline bool ymax_exceeds(const PValueProfile& profile) {
    const std::size_t p = profile.size();
    if (p < 2) throw std::domain_error("ymax_exceeds: need p >= 2");
    double ymax = 0.0;
    for (double v : profile.y_values) ymax = std::max(ymax, std::abs(v));
    return ymax >= std::sqrt(2.5 * std::log(static_cast<double>(p)));
}

/// Thresholded-count statistic
/// L(u) = sum_j (1{|y_j| > u T_p} - 2 Phi(-u T_p)) / sqrt(2 p Phi(-u T_p))
/// with T_p = sqrt(log p).
inline double lu_statistic(const PValueProfile& profile, double u) {
    const std::size_t p = profile.size();
    if (p < 2) throw std::domain_error("lu_statistic: need p >= 2");
    if (!(u > 0.0)) throw std::domain_error("lu_statistic: need u > 0");
    const double tp = std::sqrt(std::log(static_cast<double>(p)));
    const double tail = numerics::std_normal_cdf(-u * tp);
    std::size_t exceed = 0;
    for (double v : profile.y_values) {
        if (std::abs(v) > u * tp) ++exceed;
    }
    return (static_cast<double>(exceed) - 2.0 * static_cast<double>(p) * tail) /
           std::sqrt(2.0 * static_cast<double>(p) * tail);
}

}  // namespace sparsedetect::stats

#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "sparsedetect/model.hpp"
#include "sparsedetect/rng.hpp"

// ============================================================================
// Random design generators. All families have i.i.d. entries with mean 0 and
// variance 1. Columns are filled from the caller's stream in a fixed order,
// so a matrix is a pure function of (family, n, p, stream identity).
// ============================================================================

namespace sparsedetect::designs {

using model::DesignKind;
using model::Matrix;

/// Fill one design column from a stream.
inline void fill_column(DesignKind kind, std::span<double> out, rng::Stream& stream) {
    switch (kind) {
        case DesignKind::gaussian_iid:
            for (double& v : out) v = stream.next_gaussian();
            break;
        case DesignKind::rademacher_iid:
            for (double& v : out) v = stream.next_rademacher();
            break;
        case DesignKind::uniform_iid:
            for (double& v : out) v = stream.next_uniform_unitvar();
            break;
    }
}

/// n x p design with i.i.d. entries, drawn column by column.
inline Matrix sample_design(DesignKind kind, std::size_t n, std::size_t p,
                            rng::Stream& stream) {
    if (n < 1 || p < 1) throw std::domain_error("sample_design: need n, p >= 1");
    Matrix x(n, p);
    for (std::size_t j = 0; j < p; ++j) fill_column(kind, x.col(j), stream);
    return x;
}

/// Finite-sample analogues of the column-norm, cross-correlation and
/// fourth-moment conditions the detection theory rests on. Reported as
/// normalized magnitudes, not pass/fail: the underlying conditions are
/// asymptotic and have no canonical finite cutoff.
struct DesignDiagnostics {
    double norm_deviation = 0.0;     // max_j |  ||X_j||^2 - n | / sqrt(n log p)
    double max_correlation = 0.0;    // max_{j<l} |(X_j,X_l)| / sqrt(n log p)
    double max_fourth_moment = 0.0;  // max_j n^-1 sum_i X_ij^4
};

inline DesignDiagnostics assumption_diagnostics(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    // log p would vanish at p = 1; use log 2 as the floor so the report
    // stays finite for degenerate single-column inputs.
    const double scale =
        std::sqrt(static_cast<double>(n) *
                  std::log(static_cast<double>(std::max<std::size_t>(p, 2))));

    DesignDiagnostics d;
    for (std::size_t j = 0; j < p; ++j) {
        const auto cj = x.col(j);
        double sq = 0.0, quart = 0.0;
        for (double v : cj) {
            sq += v * v;
            quart += v * v * v * v;
        }
        d.norm_deviation =
            std::max(d.norm_deviation, std::abs(sq - static_cast<double>(n)) / scale);
        d.max_fourth_moment = std::max(d.max_fourth_moment, quart / static_cast<double>(n));
        for (std::size_t l = j + 1; l < p; ++l) {
            const auto cl = x.col(l);
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += cj[i] * cl[i];
            d.max_correlation = std::max(d.max_correlation, std::abs(dot) / scale);
        }
    }
    return d;
}

}  // namespace sparsedetect::designs

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsedetect/rng.hpp"

// ============================================================================
// Domain types for the regression detection problem: the observed data
// (design matrix + response), sparse coefficient vectors, alternative
// classes and resolved problem configurations.
// ============================================================================

namespace sparsedetect::model {

/// Dense real matrix, column-major so that design columns are contiguous.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

    std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> col(std::size_t j) const {
        return {data_.data() + j * rows_, rows_};
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// Observations Z = (X, Y): n x p design and length-n response.
struct Dataset {
    Matrix x;
    std::vector<double> y;

    Dataset(Matrix design, std::vector<double> response)
        : x(std::move(design)), y(std::move(response)) {
        if (x.rows() != y.size()) {
            throw std::invalid_argument("Dataset: row count of x must equal length of y");
        }
        if (x.rows() == 0 || x.cols() == 0) {
            throw std::invalid_argument("Dataset: n and p must be at least 1");
        }
    }

    std::size_t n() const { return x.rows(); }
    std::size_t p() const { return x.cols(); }
};

/// Coefficient vector with tracked support and Euclidean norm.
struct SparseSignal {
    std::vector<double> coefficients;
    std::vector<std::size_t> support;  // indices of nonzero entries, ascending
    double norm = 0.0;

    static SparseSignal from_coefficients(std::vector<double> coeffs) {
        SparseSignal s;
        s.coefficients = std::move(coeffs);
        double sq = 0.0;
        for (std::size_t j = 0; j < s.coefficients.size(); ++j) {
            if (s.coefficients[j] != 0.0) {
                s.support.push_back(j);
                sq += s.coefficients[j] * s.coefficients[j];
            }
        }
        s.norm = std::sqrt(sq);
        return s;
    }

    std::size_t sparsity() const { return support.size(); }
};

/// Alternative class Theta_k(r): at most k nonzeros, Euclidean norm >= r.
struct AlternativeSpec {
    std::size_t p = 0;
    std::size_t k = 0;
    double r = 0.0;

    AlternativeSpec(std::size_t p_, std::size_t k_, double r_) : p(p_), k(k_), r(r_) {
        if (k < 1 || k > p) throw std::domain_error("AlternativeSpec: need 1 <= k <= p");
        if (!(r >= 0.0)) throw std::domain_error("AlternativeSpec: need r >= 0");
    }
};

enum class SignPattern { all_positive, random };

/// Canonical boundary element of Theta_k(r): k equal-magnitude entries
/// r/sqrt(k) at distinct uniformly drawn positions, signed per pattern.
inline SparseSignal place_signal(const AlternativeSpec& spec, SignPattern signs,
                                 rng::Stream& stream) {
    const double magnitude = spec.r / std::sqrt(static_cast<double>(spec.k));

    // Partial Fisher-Yates over 0..p-1: first k slots are the support.
    std::vector<std::size_t> idx(spec.p);
    for (std::size_t j = 0; j < spec.p; ++j) idx[j] = j;
    for (std::size_t j = 0; j < spec.k; ++j) {
        const std::size_t swap = j + stream.next_below(spec.p - j);
        std::swap(idx[j], idx[swap]);
    }

    std::vector<double> coeffs(spec.p, 0.0);
    for (std::size_t j = 0; j < spec.k; ++j) {
        const double sign =
            (signs == SignPattern::all_positive) ? 1.0 : stream.next_rademacher();
        coeffs[idx[j]] = sign * magnitude;
    }
    return SparseSignal::from_coefficients(std::move(coeffs));
}

enum class DesignKind { gaussian_iid, rademacher_iid, uniform_iid };

inline std::string design_name(DesignKind kind) {
    switch (kind) {
        case DesignKind::gaussian_iid: return "gaussian";
        case DesignKind::rademacher_iid: return "rademacher";
        case DesignKind::uniform_iid: return "uniform";
    }
    return "?";
}

/// Sparsity index from k = p^(1-beta), rounded half-up, clamped to [1, p].
inline std::size_t sparsity_from_beta(std::size_t p, double beta) {
    if (p < 2) throw std::domain_error("sparsity_from_beta: need p >= 2");
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw std::domain_error("sparsity_from_beta: need beta in [0,1]");
    }
    const double k = std::floor(std::pow(static_cast<double>(p), 1.0 - beta) + 0.5);
    return static_cast<std::size_t>(
        std::clamp(k, 1.0, static_cast<double>(p)));
}

inline double beta_from_sparsity(std::size_t p, std::size_t k) {
    if (p < 2) throw std::domain_error("beta_from_sparsity: need p >= 2");
    if (k < 1 || k > p) throw std::domain_error("beta_from_sparsity: need 1 <= k <= p");
    return 1.0 - std::log(static_cast<double>(k)) / std::log(static_cast<double>(p));
}

/// Fully resolved simulation configuration. Exactly one of (k, beta) and one
/// of (r, x) is required; the other is derived via k = round(p^(1-beta)) and
/// r = x * sqrt(k log(p) / n).
struct ProblemConfig {
    std::size_t n = 0;
    std::size_t p = 0;
    std::size_t k = 0;
    double beta = 0.0;
    double r = 0.0;
    double x = 0.0;
    double sigma = 1.0;
    bool variance_known = true;
    DesignKind design = DesignKind::gaussian_iid;
    std::uint64_t seed = 1;

    double boundary_unit() const {
        return std::sqrt(static_cast<double>(k) * std::log(static_cast<double>(p)) /
                         static_cast<double>(n));
    }
};

struct ConfigInput {
    std::size_t n = 0;
    std::size_t p = 0;
    std::optional<std::size_t> k;
    std::optional<double> beta;
    std::optional<double> r;
    std::optional<double> x;
    double sigma = 1.0;
    bool variance_known = true;
    DesignKind design = DesignKind::gaussian_iid;
    std::uint64_t seed = 1;
};

inline ProblemConfig resolve_config(const ConfigInput& in) {
    if (in.n < 1 || in.p < 2) {
        throw std::domain_error("config: need n >= 1 and p >= 2");
    }
    if (!in.k && !in.beta) throw std::domain_error("config: give k or beta");
    if (!(in.sigma > 0.0)) throw std::domain_error("config: need sigma > 0");

    ProblemConfig cfg;
    cfg.n = in.n;
    cfg.p = in.p;
    cfg.sigma = in.sigma;
    cfg.variance_known = in.variance_known;
    cfg.design = in.design;
    cfg.seed = in.seed;

    if (in.k) {
        cfg.k = *in.k;
        cfg.beta = in.beta ? *in.beta : beta_from_sparsity(in.p, *in.k);
        if (cfg.k < 1 || cfg.k > cfg.p) throw std::domain_error("config: need 1 <= k <= p");
    } else {
        cfg.beta = *in.beta;
        cfg.k = sparsity_from_beta(in.p, *in.beta);
    }

    const double unit = std::sqrt(static_cast<double>(cfg.k) *
                                  std::log(static_cast<double>(cfg.p)) /
                                  static_cast<double>(cfg.n));
    if (in.r && in.x) {
        if (std::abs(*in.r - *in.x * unit) > 1e-12 * std::max(1.0, std::abs(*in.r))) {
            throw std::domain_error("config: r and x given but inconsistent");
        }
        cfg.r = *in.r;
        cfg.x = *in.x;
    } else if (in.r) {
        cfg.r = *in.r;
        cfg.x = (unit > 0.0) ? *in.r / unit : 0.0;
    } else if (in.x) {
        cfg.x = *in.x;
        cfg.r = *in.x * unit;
    } else {
        throw std::domain_error("config: give r or x");
    }
    if (!(cfg.r >= 0.0)) throw std::domain_error("config: need r >= 0");
    return cfg;
}

/// Outcome of one thresholded test on one dataset.
struct TestDecision {
    double statistic_value = 0.0;
    double threshold = 0.0;
    bool reject = false;
    std::string test_name;

    static TestDecision make(std::string name, double statistic, double threshold) {
        // A -inf sentinel statistic compares false here, so it never rejects.
        return {statistic, threshold, statistic > threshold, std::move(name)};
    }
};

}  // namespace sparsedetect::model

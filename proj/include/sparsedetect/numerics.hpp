#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

// ============================================================================
// Scalar routines for the standard Gaussian distribution plus stable
// elementary transforms (log-sum-exp). The tail algorithms are fixed
// rational approximations rather than whatever erf/erfc the host libm
// ships, so outputs are bit-stable across runs on one platform.
// ============================================================================

namespace sparsedetect::numerics {

// Floor for two-sided p-values. Keeps sqrt(q*(1-q)) away from zero when a
// huge |y| would otherwise round the p-value to exactly 0.
inline constexpr double q_min = 1e-300;

namespace detail {

// W. J. Cody's rational Chebyshev approximations for erf/erfc
// (Math. Comp. 23, 1969). Relative error below 1.2e-16 on each branch.
inline double erfc_cody(double x) {
    static constexpr double a[5] = {
        3.1611237438705656, 113.864154151050156, 377.485237685302021,
        3209.37758913846947, 0.185777706184603153};
    static constexpr double b[4] = {
        23.6012909523441209, 244.024637934444173, 1282.61652607737228,
        2844.23683343917062};
    static constexpr double c[9] = {
        0.564188496988670089, 8.88314979438837594, 66.1191906371416295,
        298.635138197400131,  881.95222124176909,  1712.04761263407058,
        2051.07837782607147,  1230.33935479799725, 2.15311535474403846e-8};
    static constexpr double d[8] = {
        15.7449261107098347, 117.693950891312499, 537.181101862009858,
        1621.38957456669019, 3290.79923573345963, 4362.61909014324716,
        3439.36767414372164, 1230.33935480374942};
    static constexpr double p[6] = {
        0.305326634961232344, 0.360344899949804439, 0.125781726111229246,
        0.0160837851487422766, 6.58749161529837803e-4, 0.0163153871373020978};
    static constexpr double q[5] = {
        2.56852019228982242, 1.87295284992346047, 0.527905102951428412,
        0.0605183413124413191, 0.00233520497626869185};

    constexpr double sqrpi = 0.56418958354775628695;  // 1/sqrt(pi)
    constexpr double thresh = 0.46875;
    constexpr double xsmall = 1.11e-16;
    constexpr double xbig = 26.543;  // erfc underflows past this

    const double y = std::abs(x);
    double result;

    if (y <= thresh) {
        // erfc = 1 - erf on the central interval
        const double ysq = (y > xsmall) ? y * y : 0.0;
        double xnum = a[4] * ysq;
        double xden = ysq;
        for (int i = 0; i < 3; ++i) {
            xnum = (xnum + a[i]) * ysq;
            xden = (xden + b[i]) * ysq;
        }
        return 1.0 - x * (xnum + a[3]) / (xden + b[3]);
    }

    if (y <= 4.0) {
        double xnum = c[8] * y;
        double xden = y;
        for (int i = 0; i < 7; ++i) {
            xnum = (xnum + c[i]) * y;
            xden = (xden + d[i]) * y;
        }
        result = (xnum + c[7]) / (xden + d[7]);
    } else if (y < xbig) {
        const double ysq = 1.0 / (y * y);
        double xnum = p[5] * ysq;
        double xden = ysq;
        for (int i = 0; i < 4; ++i) {
            xnum = (xnum + p[i]) * ysq;
            xden = (xden + q[i]) * ysq;
        }
        result = ysq * (xnum + p[4]) / (xden + q[4]);
        result = (sqrpi - result) / y;
    } else {
        result = 0.0;  // saturate: true value below smallest normal
    }

    if (result != 0.0) {
        // exp(-y^2) split so the large part of the argument is exact
        const double ysq16 = std::trunc(y * 16.0) / 16.0;
        const double del = (y - ysq16) * (y + ysq16);
        result *= std::exp(-ysq16 * ysq16) * std::exp(-del);
    }

    return (x < 0.0) ? 2.0 - result : result;
}

// Wichura's AS241 (PPND16): inverse of the standard normal CDF,
// relative error around 1e-15 over (0,1).
inline double ppnd16(double prob) {
    const double q = prob - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = (q < 0.0) ? prob : 1.0 - prob;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                    3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                  4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                    6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                  2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                    2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                  5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                    1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                  5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -value : value;
}

}  // namespace detail

/// Standard Gaussian CDF. Absolute error below 1e-15 in the bulk,
/// relative error below 1e-13 in the far tail; saturates to 0/1 where the
/// true value is not representable.
inline double std_normal_cdf(double t) {
    return 0.5 * detail::erfc_cody(-t / std::sqrt(2.0));
}

/// alpha-lower quantile of the standard Gaussian; inverse of std_normal_cdf.
inline double std_normal_quantile(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("std_normal_quantile: alpha must lie in (0,1)");
    }
    return detail::ppnd16(alpha);
}

/// Two-sided Gaussian p-value 2*Phi(-|y|), floored at q_min.
inline double two_sided_pvalue(double y) {
    const double q = 2.0 * std_normal_cdf(-std::abs(y));
    return (q < q_min) ? q_min : q;
}

// ----------------------------------------------------------------------------
// Streaming log-sum-exp: log(sum_i exp(l_i)) without overflow. Accumulation
// is max-shifted on the fly; merging two accumulators is associative up to
// roundoff, which keeps parallel reductions within ~1e-15 of each other.
// ----------------------------------------------------------------------------
class LogSumExp {
public:
    void add(double log_term) {
        if (std::isinf(log_term) && log_term < 0.0) return;
        if (log_term > max_) {
            sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
            max_ = log_term;
        } else {
            sum_ += std::exp(log_term - max_);
        }
    }

    void merge(const LogSumExp& other) {
        if (other.sum_ == 0.0) return;
        if (other.max_ > max_) {
            sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
            max_ = other.max_;
        } else {
            sum_ += other.sum_ * std::exp(other.max_ - max_);
        }
    }

    /// log of the accumulated sum; -inf if nothing was added.
    double value() const {
        if (sum_ == 0.0) return -std::numeric_limits<double>::infinity();
        return max_ + std::log(sum_);
    }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
};

}  // namespace sparsedetect::numerics

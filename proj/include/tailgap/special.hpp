#pragma once

// Special functions: inverse complementary error function, standard normal
// helpers, and the generalized hypergeometric series pFq.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>

#include "tailgap/errors.hpp"

namespace tailgap {

namespace detail {

// Rational initial guess for the standard normal quantile (relative error ~1e-9).
inline double normal_quantile_guess(double u) {
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                             -2.759285104469687e+02, 1.383577518672690e+02,
                                             -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                             -1.556989798598866e+02, 6.680131188771972e+01,
                                             -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                             -2.400758277161838e+00, -2.549732539343734e+00,
                                             4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                             2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double low = 0.02425;

    auto tail = [&](double q) {
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    };
    if (u < low) {
        return tail(std::sqrt(-2.0 * std::log(u)));
    }
    if (u > 1.0 - low) {
        return -tail(std::sqrt(-2.0 * std::log1p(-u)));
    }
    const double q = u - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

/// Inverse of erfc on (0, 2). Rational start refined by two Newton steps.
inline double erfc_inv(double y) {
    if (!(y > 0.0 && y < 2.0)) {
        throw DomainError("erfc_inv: argument must lie in (0, 2)");
    }
    if (y > 1.0) {
        // erfc(-x) = 2 - erfc(x)
        return -erfc_inv(2.0 - y);
    }
    constexpr double two_over_sqrt_pi = 2.0 / 1.7724538509055160273;
    double x = -detail::normal_quantile_guess(0.5 * y) / std::numbers::sqrt2;
    const bool near_one = y >= 0.5;
    const double one_minus_y = 1.0 - y;  // exact for y in [0.5, 1]
    for (int step = 0; step < 2; ++step) {
        const double slope = two_over_sqrt_pi * std::exp(-x * x);
        if (slope == 0.0) break;
        // Residual taken on whichever side of erf/erfc is well conditioned.
        const double residual = near_one ? (one_minus_y - std::erf(x)) : (std::erfc(x) - y);
        x += residual / slope;
    }
    return x;
}

inline double erf_inv(double v) {
    if (!(v > -1.0 && v < 1.0)) {
        throw DomainError("erf_inv: argument must lie in (-1, 1)");
    }
    if (std::abs(v) >= 0.5) return erfc_inv(1.0 - v);  // 1 - v is exact here
    constexpr double two_over_sqrt_pi = 2.0 / 1.7724538509055160273;
    double x = detail::normal_quantile_guess(0.5 + 0.5 * v) / std::numbers::sqrt2;
    for (int step = 0; step < 2; ++step) {
        x += (v - std::erf(x)) / (two_over_sqrt_pi * std::exp(-x * x));
    }
    return x;
}

inline double normal_pdf(double z) {
    constexpr double inv_sqrt_2pi = 0.39894228040143267794;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_survival(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

/// Standard normal quantile on (0, 1).
inline double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("normal_quantile: probability must lie in (0, 1)");
    }
    return -std::numbers::sqrt2 * erfc_inv(2.0 * u);
}

/// Stopping rule for hypergeometric series.
struct SeriesControl {
    std::size_t max_terms = 500;
    double relative_tolerance = 1e-12;
    /// Largest tolerated rounding bound eps * sum|term| / |sum| before the
    /// result is rejected as cancelled out.
    double cancellation_tolerance = 1e-8;
};

struct SeriesResult {
    std::complex<double> value;
    std::size_t terms = 0;
    /// Estimated absolute error: last term plus accumulated rounding.
    double error_bound = 0.0;
};

/// Generalized hypergeometric series pFq(a; b; z) = sum_k prod (a_i)_k / prod (b_j)_k z^k / k!,
/// accumulated with the Pochhammer term-ratio recurrence.
inline SeriesResult hypergeometric_pfq(std::span<const double> a, std::span<const double> b,
                                       std::complex<double> z, const SeriesControl& control = {}) {
    for (double bj : b) {
        if (bj <= 0.0 && std::floor(bj) == bj) {
            throw DomainError("hypergeometric_pfq: lower parameter is a non-positive integer");
        }
    }
    std::complex<double> term{1.0, 0.0};
    std::complex<double> sum = term;
    double magnitude_sum = 1.0;
    for (std::size_t k = 0; k < control.max_terms; ++k) {
        double ratio = 1.0 / static_cast<double>(k + 1);
        for (double ai : a) ratio *= ai + static_cast<double>(k);
        for (double bj : b) ratio /= bj + static_cast<double>(k);
        term *= ratio * z;
        sum += term;
        magnitude_sum += std::abs(term);
        const double sum_abs = std::abs(sum);
        if (term == std::complex<double>{0.0, 0.0} ||
            std::abs(term) <= control.relative_tolerance * sum_abs) {
            const double rounding = std::numeric_limits<double>::epsilon() * magnitude_sum;
            SeriesResult out{sum, k + 2, std::abs(term) + rounding};
            if (rounding > control.cancellation_tolerance * std::max(sum_abs, 1.0)) {
                throw TruncationError("hypergeometric_pfq: catastrophic cancellation", out.error_bound);
            }
            return out;
        }
    }
    throw TruncationError("hypergeometric_pfq: series budget exceeded",
                          std::abs(term) / std::max(std::abs(sum), std::numeric_limits<double>::min()));
}

/// Regularized 2F2: 2F2(a1, a2; b1, b2; z) / (Gamma(b1) Gamma(b2)).
inline std::complex<double> hypergeometric_2f2_regularized(double a1, double a2, double b1, double b2,
                                                           std::complex<double> z,
                                                           const SeriesControl& control = {}) {
    const std::array<double, 2> a{a1, a2};
    const std::array<double, 2> b{b1, b2};
    const auto series = hypergeometric_pfq(a, b, z, control);
    return series.value / (std::tgamma(b1) * std::tgamma(b2));
}

}  // namespace tailgap

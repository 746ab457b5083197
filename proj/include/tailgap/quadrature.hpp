#pragma once

// Numerical integration front end. Adaptive Gauss-Kronrod (15-point) for
// smooth integrands on finite or semi-infinite ranges, tanh-sinh for finite
// ranges with integrable endpoint singularities.

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "tailgap/errors.hpp"

namespace tailgap::quadrature {

inline constexpr double default_tolerance = 1e-8;

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

/// Integrates f over [lower, upper]; either end may be infinite.
template <class F>
Estimate integrate(F&& f, double lower, double upper, double tolerance = default_tolerance,
                   unsigned max_depth = 25) {
    if (lower == upper) return {};
    double error = 0.0;
    double l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, lower, upper, max_depth, tolerance, &error, &l1);
    if (!std::isfinite(value)) {
        throw NumericError("quadrature: integral is not finite");
    }
    return {value, error};
}

/// Finite range with possibly singular (integrable) endpoints.
template <class F>
Estimate integrate_singular(F&& f, double lower, double upper, double tolerance = default_tolerance) {
    if (lower == upper) return {};
    boost::math::quadrature::tanh_sinh<double> rule;
    double error = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    const double value = rule.integrate(f, lower, upper, tolerance, &error, &l1, &levels);
    if (!std::isfinite(value)) {
        throw NumericError("quadrature: integral is not finite");
    }
    return {value, error};
}

}  // namespace tailgap::quadrature

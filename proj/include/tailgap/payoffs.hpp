#pragma once

// Payoff algebra: weighted sums of kernels (binary Heaviside, linear, softplus
// rho_{K,p}, square, constant), named option structures, and expectations of
// payoffs against a distribution, in full or above a threshold.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "tailgap/distributions.hpp"
#include "tailgap/errors.hpp"
#include "tailgap/quadrature.hpp"

namespace tailgap {

/// theta_K(x) = 1 for x >= K, else 0.
struct Heaviside {
    double K = 0.0;
    friend bool operator==(const Heaviside&, const Heaviside&) = default;
};

/// g(x) = x.
struct Linear {
    friend bool operator==(const Linear&, const Linear&) = default;
};

/// rho_{K,p}(x) = K + log(1 + e^{p (x - K)}) / p. Infinite sharpness is the
/// hinge limit max(x, K).
struct Softplus {
    double K = 0.0;
    double sharpness = 1.0;
    friend bool operator==(const Softplus&, const Softplus&) = default;
};

/// g(x) = x^2.
struct Square {
    friend bool operator==(const Square&, const Square&) = default;
};

struct Constant {
    double c = 0.0;
    friend bool operator==(const Constant&, const Constant&) = default;
};

using Kernel = std::variant<Heaviside, Linear, Softplus, Square, Constant>;

inline std::string_view kernel_name(const Kernel& k) {
    static constexpr std::string_view names[] = {"heaviside", "linear", "softplus", "square", "constant"};
    return names[k.index()];
}

inline double softplus(double K, double sharpness, double x) {
    if (sharpness == infinity) return std::max(x, K);
    const double t = sharpness * (x - K);
    if (t > 0.0) return x + std::log1p(std::exp(-t)) / sharpness;
    return K + std::log1p(std::exp(t)) / sharpness;
}

inline double eval_kernel(const Kernel& kernel, double x) {
    return std::visit(
        [x](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Heaviside>) return x >= k.K ? 1.0 : 0.0;
            else if constexpr (std::is_same_v<T, Linear>) return x;
            else if constexpr (std::is_same_v<T, Softplus>) return softplus(k.K, k.sharpness, x);
            else if constexpr (std::is_same_v<T, Square>) return x * x;
            else return k.c;
        },
        kernel);
}

inline void validate_kernel(const Kernel& kernel) {
    if (const auto* s = std::get_if<Softplus>(&kernel)) {
        if (!(s->sharpness > 0.0)) throw ValidationError("softplus sharpness must be > 0");
        if (!std::isfinite(s->K)) throw ValidationError("softplus strike must be finite");
    } else if (const auto* h = std::get_if<Heaviside>(&kernel)) {
        if (std::isnan(h->K)) throw ValidationError("heaviside strike must not be NaN");
    } else if (const auto* c = std::get_if<Constant>(&kernel)) {
        if (!std::isfinite(c->c)) throw ValidationError("constant kernel must be finite");
    }
}

struct PayoffTerm {
    double weight = 1.0;
    Kernel kernel;
    friend bool operator==(const PayoffTerm&, const PayoffTerm&) = default;
};

/// g(x) = sum_i w_i kernel_i(x).
class PayoffFunction {
public:
    PayoffFunction() = default;
    PayoffFunction(std::initializer_list<PayoffTerm> terms) {
        for (const auto& t : terms) add(t.weight, t.kernel);
    }

    PayoffFunction& add(double weight, Kernel kernel) {
        if (!std::isfinite(weight)) throw ValidationError("payoff weight must be finite");
        validate_kernel(kernel);
        terms_.push_back({weight, std::move(kernel)});
        return *this;
    }

    PayoffFunction& operator+=(const PayoffFunction& other) {
        terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
        return *this;
    }

    PayoffFunction& operator*=(double scale) {
        for (auto& t : terms_) t.weight *= scale;
        return *this;
    }

    friend PayoffFunction operator+(PayoffFunction a, const PayoffFunction& b) { return a += b; }
    friend PayoffFunction operator-(PayoffFunction a, PayoffFunction b) { return a += (b *= -1.0); }
    friend PayoffFunction operator*(double s, PayoffFunction g) { return g *= s; }

    double operator()(double x) const {
        double sum = 0.0;
        for (const auto& t : terms_) sum += t.weight * eval_kernel(t.kernel, x);
        return sum;
    }

    const std::vector<PayoffTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    friend bool operator==(const PayoffFunction&, const PayoffFunction&) = default;

private:
    std::vector<PayoffTerm> terms_;
};

inline double eval_payoff(const PayoffFunction& g, double x) { return g(x); }

inline PayoffFunction single(Kernel k, double weight = 1.0) {
    PayoffFunction g;
    g.add(weight, std::move(k));
    return g;
}

// Named structures.

struct Call {
    double K;
};
struct Put {
    double K;
};
/// Long put at K, short puts at K - delta1 and K - delta2.
struct ChristmasTree {
    double K;
    double delta1;
    double delta2;
};
/// +1 / -2 / +1 calls at K1 < K2 < K3.
struct Butterfly {
    double K1;
    double K2;
    double K3;
};
/// 1 - x^2, the daily payoff of a short variance position.
struct VarianceSwapShortVol {};

using Structure = std::variant<Call, Put, ChristmasTree, Butterfly, VarianceSwapShortVol>;

/// max(x - K, 0), or its softplus smoothing for finite sharpness.
inline PayoffFunction call_payoff(double K, double sharpness = infinity) {
    return PayoffFunction{{1.0, Softplus{K, sharpness}}, {-K, Constant{1.0}}};
}

/// max(K - x, 0), or its softplus smoothing for finite sharpness.
inline PayoffFunction put_payoff(double K, double sharpness = infinity) {
    return PayoffFunction{{1.0, Softplus{K, sharpness}}, {-1.0, Linear{}}};
}

/// x * theta_K(x), written as a call plus K binaries.
inline PayoffFunction truncated_linear(double K) {
    return call_payoff(K) + single(Heaviside{K}, K);
}

inline PayoffFunction build_structure(const Structure& kind, double sharpness = infinity) {
    if (!(sharpness > 0.0)) throw ValidationError("structure sharpness must be > 0");
    return std::visit(
        [sharpness](const auto& s) -> PayoffFunction {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Call>) {
                return call_payoff(s.K, sharpness);
            } else if constexpr (std::is_same_v<T, Put>) {
                return put_payoff(s.K, sharpness);
            } else if constexpr (std::is_same_v<T, ChristmasTree>) {
                if (!(s.delta1 >= 0.0 && s.delta2 >= s.delta1)) {
                    throw ValidationError("christmas tree requires delta2 >= delta1 >= 0");
                }
                return put_payoff(s.K, sharpness) - put_payoff(s.K - s.delta1, sharpness) -
                       put_payoff(s.K - s.delta2, sharpness);
            } else if constexpr (std::is_same_v<T, Butterfly>) {
                if (!(s.K1 < s.K2 && s.K2 < s.K3)) {
                    throw ValidationError("butterfly requires K1 < K2 < K3");
                }
                PayoffFunction g;
                g.add(1.0, Softplus{s.K1, sharpness});
                g.add(-2.0, Softplus{s.K2, sharpness});
                g.add(1.0, Softplus{s.K3, sharpness});
                g.add(-s.K1 + 2.0 * s.K2 - s.K3, Constant{1.0});
                return g;
            } else {
                return PayoffFunction{{1.0, Constant{1.0}}, {-1.0, Square{}}};
            }
        },
        kind);
}

namespace detail {

// Integral of log1p(exp(-p |x - K|)) / p * f(x) over (lower, inf); the
// softplus-minus-hinge gap, negligible beyond 40/p from the strike.
inline double softplus_gap_above(const DistributionSpec& dist, double K, double sharpness, double lower) {
    if (sharpness == infinity) return 0.0;
    const double width = 40.0 / sharpness;
    const double lo = std::max({lower, K - width, dist.support_lower()});
    const double hi = K + width;
    if (!(hi > lo)) return 0.0;
    auto gap = [&](double x) { return std::log1p(std::exp(-sharpness * std::abs(x - K))) / sharpness * pdf(dist, x); };
    double total = 0.0;
    if (lo < K && K < hi) {
        total += quadrature::integrate(gap, lo, K, 1e-12).value;
        total += quadrature::integrate(gap, K, hi, 1e-12).value;
    } else {
        total += quadrature::integrate(gap, lo, hi, 1e-12).value;
    }
    return total;
}

inline double kernel_expectation_above(const Kernel& kernel, const DistributionSpec& dist, double lower) {
    return std::visit(
        [&](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Heaviside>) {
                return survival(dist, std::max(lower, k.K));
            } else if constexpr (std::is_same_v<T, Linear>) {
                return partial_expectation(dist, lower);
            } else if constexpr (std::is_same_v<T, Square>) {
                return partial_second_moment(dist, lower);
            } else if constexpr (std::is_same_v<T, Constant>) {
                return k.c * survival(dist, lower);
            } else {
                const double m = std::max(lower, k.K);
                const double hinge = partial_expectation(dist, m) - k.K * survival(dist, m);
                return k.K * survival(dist, lower) + hinge + softplus_gap_above(dist, k.K, k.sharpness, lower);
            }
        },
        kernel);
}

}  // namespace detail

/// Integral of g(x) f(x) over (K, inf), by linearity over kernels.
inline double expectation_above(const PayoffFunction& g, const DistributionSpec& dist, double K) {
    if (std::isnan(K)) throw DomainError("expectation_above: NaN threshold");
    double sum = 0.0;
    for (const auto& t : g.terms()) {
        if (t.weight == 0.0) continue;
        sum += t.weight * detail::kernel_expectation_above(t.kernel, dist, K);
    }
    return sum;
}

/// E[g(X)] = sum_i w_i E[kernel_i(X)].
inline double expectation(const PayoffFunction& g, const DistributionSpec& dist) {
    return expectation_above(g, dist, -infinity);
}

/// Probability of the tail event times the payoff at the tail's average point:
/// P(X > K) g(E[X | X > K]). Differs from expectation_above unless g is affine on the tail.
inline double probability_times_average_payoff(const PayoffFunction& g, const DistributionSpec& dist, double K) {
    return survival(dist, K) * g(tail_expectation(dist, K));
}

}  // namespace tailgap

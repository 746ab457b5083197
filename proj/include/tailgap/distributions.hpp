#pragma once

// Parametric families used throughout the library, with density, tail and
// quantile evaluation, closed-form partial moments, seeded sampling and the
// characteristic-scale tail classification.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "tailgap/errors.hpp"
#include "tailgap/quadrature.hpp"
#include "tailgap/random.hpp"
#include "tailgap/special.hpp"

namespace tailgap {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

enum class Family { Gaussian, Pareto, Lognormal, Exponential, StudentT };

struct Gaussian {
    double mean = 0.0;
    double sigma = 1.0;
    friend bool operator==(const Gaussian&, const Gaussian&) = default;
};

/// Survival (x / x_min)^(-alpha) for x >= x_min, i.e. L x^(-alpha) with L = x_min^alpha.
struct Pareto {
    double alpha = 2.0;
    double x_min = 1.0;

    double scale_constant() const { return std::pow(x_min, alpha); }
    friend bool operator==(const Pareto&, const Pareto&) = default;
};

/// Lognormal parametrized by its mean x0 and log-volatility sigma.
struct Lognormal {
    double x0 = 1.0;
    double sigma = 1.0;

    double log_location() const { return std::log(x0) - 0.5 * sigma * sigma; }
    friend bool operator==(const Lognormal&, const Lognormal&) = default;
};

struct Exponential {
    double rate = 1.0;
    friend bool operator==(const Exponential&, const Exponential&) = default;
};

/// Centered Student-t with `dof` degrees of freedom and a scale factor.
struct StudentT {
    double dof = 3.0;
    double scale = 1.0;
    friend bool operator==(const StudentT&, const StudentT&) = default;
};

class DistributionSpec {
public:
    using Params = std::variant<Gaussian, Pareto, Lognormal, Exponential, StudentT>;

    DistributionSpec() : DistributionSpec(Gaussian{}) {}

    template <class P>
        requires std::is_constructible_v<Params, P>
    DistributionSpec(P params) : params_(std::move(params)) {  // NOLINT(google-explicit-constructor)
        validate();
    }

    Family family() const { return static_cast<Family>(params_.index()); }
    const Params& params() const { return params_; }

    template <class P>
    const P& as() const {
        return std::get<P>(params_);
    }

    /// Infimum of the support.
    double support_lower() const {
        return std::visit(
            [](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Pareto>) return d.x_min;
                else if constexpr (std::is_same_v<T, Lognormal> || std::is_same_v<T, Exponential>) return 0.0;
                else return -infinity;
            },
            params_);
    }

    bool in_support(double x) const {
        if (!std::isfinite(x)) return false;
        switch (family()) {
            case Family::Pareto: return x >= as<Pareto>().x_min;
            case Family::Lognormal: return x > 0.0;
            case Family::Exponential: return x >= 0.0;
            default: return true;
        }
    }

    friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;

private:
    static void require_positive(double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValidationError(std::string("distribution parameter '") + what + "' must be finite and > 0");
        }
    }

    void validate() const {
        std::visit(
            [](const auto& d) {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Gaussian>) {
                    if (!std::isfinite(d.mean)) throw ValidationError("distribution parameter 'mean' must be finite");
                    require_positive(d.sigma, "sigma");
                } else if constexpr (std::is_same_v<T, Pareto>) {
                    require_positive(d.alpha, "alpha");
                    require_positive(d.x_min, "x_min");
                } else if constexpr (std::is_same_v<T, Lognormal>) {
                    require_positive(d.x0, "x0");
                    require_positive(d.sigma, "sigma");
                } else if constexpr (std::is_same_v<T, Exponential>) {
                    require_positive(d.rate, "rate");
                } else {
                    require_positive(d.dof, "dof");
                    require_positive(d.scale, "scale");
                }
            },
            params_);
    }

    Params params_;
};

inline std::string_view family_name(Family f) {
    switch (f) {
        case Family::Gaussian: return "gaussian";
        case Family::Pareto: return "pareto";
        case Family::Lognormal: return "lognormal";
        case Family::Exponential: return "exponential";
        case Family::StudentT: return "student_t";
    }
    return "unknown";
}

namespace detail {

inline boost::math::students_t_distribution<double> student(const StudentT& t) {
    return boost::math::students_t_distribution<double>(t.dof);
}

inline double student_pdf_standard(double nu, double z) {
    const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi);
    return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(z * z / nu));
}

}  // namespace detail

// Total functions: defined on the whole real line (zero density outside support).

inline double pdf(const DistributionSpec& dist, double x) {
    if (!dist.in_support(x)) return 0.0;
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return normal_pdf((x - d.mean) / d.sigma) / d.sigma;
            } else if constexpr (std::is_same_v<T, Pareto>) {
                return d.alpha / x * std::pow(d.x_min / x, d.alpha);
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                const double z = (std::log(x) - d.log_location()) / d.sigma;
                return normal_pdf(z) / (d.sigma * x);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return d.rate * std::exp(-d.rate * x);
            } else {
                return detail::student_pdf_standard(d.dof, x / d.scale) / d.scale;
            }
        },
        dist.params());
}

inline double survival(const DistributionSpec& dist, double x) {
    if (std::isnan(x)) throw DomainError("survival: NaN argument");
    if (x <= dist.support_lower()) return 1.0;
    if (x == infinity) return 0.0;
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return normal_survival((x - d.mean) / d.sigma);
            } else if constexpr (std::is_same_v<T, Pareto>) {
                return std::pow(x / d.x_min, -d.alpha);
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                return normal_survival((std::log(x) - d.log_location()) / d.sigma);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return std::exp(-d.rate * x);
            } else {
                return boost::math::cdf(boost::math::complement(detail::student(d), x / d.scale));
            }
        },
        dist.params());
}

inline double cdf(const DistributionSpec& dist, double x) {
    if (std::isnan(x)) throw DomainError("cdf: NaN argument");
    if (x <= dist.support_lower()) return 0.0;
    if (x == infinity) return 1.0;
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return normal_cdf((x - d.mean) / d.sigma);
            } else if constexpr (std::is_same_v<T, Pareto>) {
                return -std::expm1(-d.alpha * std::log(x / d.x_min));
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                return normal_cdf((std::log(x) - d.log_location()) / d.sigma);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return -std::expm1(-d.rate * x);
            } else {
                return boost::math::cdf(detail::student(d), x / d.scale);
            }
        },
        dist.params());
}

enum class Evaluation { Pdf, Cdf, Survival };

/// Strict evaluation: x must lie in the support.
inline double eval(const DistributionSpec& dist, Evaluation which, double x) {
    if (!dist.in_support(x)) {
        throw DomainError("eval: x = " + std::to_string(x) + " is outside the support of the " +
                          std::string(family_name(dist.family())) + " distribution");
    }
    switch (which) {
        case Evaluation::Pdf: return pdf(dist, x);
        case Evaluation::Cdf: return cdf(dist, x);
        case Evaluation::Survival: return survival(dist, x);
    }
    return 0.0;
}

/// Inverse CDF on (0, 1).
inline double quantile(const DistributionSpec& dist, double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: probability must lie in (0, 1)");
    return std::visit(
        [u](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return d.mean + d.sigma * normal_quantile(u);
            } else if constexpr (std::is_same_v<T, Pareto>) {
                return d.x_min * std::exp(-std::log1p(-u) / d.alpha);
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                return std::exp(d.log_location() + d.sigma * normal_quantile(u));
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return -std::log1p(-u) / d.rate;
            } else {
                return d.scale * boost::math::quantile(detail::student(d), u);
            }
        },
        dist.params());
}

/// Right-tail threshold K_p = inf{K : P(X > K) <= p}, for p in (0, 0.5).
inline double quantile_threshold(const DistributionSpec& dist, double p) {
    if (!(p > 0.0 && p < 0.5)) {
        throw DomainError("quantile_threshold: p must lie in (0, 0.5)");
    }
    return std::visit(
        [p](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return d.mean + d.sigma * std::numbers::sqrt2 * erfc_inv(2.0 * p);
            } else if constexpr (std::is_same_v<T, Pareto>) {
                return d.x_min * std::pow(p, -1.0 / d.alpha);
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                return std::exp(d.log_location() + d.sigma * std::numbers::sqrt2 * erfc_inv(2.0 * p));
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return -std::log(p) / d.rate;
            } else {
                return d.scale * boost::math::quantile(boost::math::complement(detail::student(d), p));
            }
        },
        dist.params());
}

inline bool has_finite_mean(const DistributionSpec& dist) {
    switch (dist.family()) {
        case Family::Pareto: return dist.as<Pareto>().alpha > 1.0;
        case Family::StudentT: return dist.as<StudentT>().dof > 1.0;
        default: return true;
    }
}

inline bool has_finite_variance(const DistributionSpec& dist) {
    switch (dist.family()) {
        case Family::Pareto: return dist.as<Pareto>().alpha > 2.0;
        case Family::StudentT: return dist.as<StudentT>().dof > 2.0;
        default: return true;
    }
}

inline void require_finite_mean(const DistributionSpec& dist, std::string_view context) {
    if (!has_finite_mean(dist)) {
        throw InfiniteMeanError(std::string(context) + ": " + std::string(family_name(dist.family())) +
                                " distribution has an infinite mean (tail index <= 1)");
    }
}

inline double mean(const DistributionSpec& dist) {
    require_finite_mean(dist, "mean");
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) return d.mean;
            else if constexpr (std::is_same_v<T, Pareto>) return d.alpha * d.x_min / (d.alpha - 1.0);
            else if constexpr (std::is_same_v<T, Lognormal>) return d.x0;
            else if constexpr (std::is_same_v<T, Exponential>) return 1.0 / d.rate;
            else return 0.0;
        },
        dist.params());
}

/// E[X^2].
inline double second_moment(const DistributionSpec& dist) {
    if (!has_finite_variance(dist)) {
        throw InfiniteMeanError("second_moment: infinite second moment (tail index <= 2)");
    }
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) return d.mean * d.mean + d.sigma * d.sigma;
            else if constexpr (std::is_same_v<T, Pareto>) return d.alpha * d.x_min * d.x_min / (d.alpha - 2.0);
            else if constexpr (std::is_same_v<T, Lognormal>) return d.x0 * d.x0 * std::exp(d.sigma * d.sigma);
            else if constexpr (std::is_same_v<T, Exponential>) return 2.0 / (d.rate * d.rate);
            else return d.scale * d.scale * d.dof / (d.dof - 2.0);
        },
        dist.params());
}

/// First partial moment above K: integral of x f(x) over (K, inf). K may be -inf.
inline double partial_expectation(const DistributionSpec& dist, double K) {
    require_finite_mean(dist, "partial_expectation");
    if (std::isnan(K)) throw DomainError("partial_expectation: NaN threshold");
    if (K == infinity) return 0.0;
    return std::visit(
        [K](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                if (K == -infinity) return d.mean;
                const double z = (K - d.mean) / d.sigma;
                return d.mean * normal_survival(z) + d.sigma * normal_pdf(z);
            } else if constexpr (std::is_same_v<T, Pareto>) {
                const double k = std::max(K, d.x_min);
                return d.alpha * d.x_min / (d.alpha - 1.0) * std::pow(k / d.x_min, 1.0 - d.alpha);
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                if (K <= 0.0) return d.x0;
                return d.x0 * normal_cdf((std::log(d.x0 / K) + 0.5 * d.sigma * d.sigma) / d.sigma);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                if (K <= 0.0) return 1.0 / d.rate;
                return std::exp(-d.rate * K) * (K + 1.0 / d.rate);
            } else {
                if (K == -infinity) return 0.0;
                const double z = K / d.scale;
                return d.scale * (d.dof + z * z) / (d.dof - 1.0) * detail::student_pdf_standard(d.dof, z);
            }
        },
        dist.params());
}

/// Second partial moment above K: integral of x^2 f(x) over (K, inf).
inline double partial_second_moment(const DistributionSpec& dist, double K) {
    if (!has_finite_variance(dist)) {
        throw InfiniteMeanError("partial_second_moment: infinite second moment (tail index <= 2)");
    }
    if (K == infinity) return 0.0;
    if (K <= dist.support_lower()) return second_moment(dist);
    return std::visit(
        [K, &dist](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                const double z = (K - d.mean) / d.sigma;
                const double s = normal_survival(z);
                const double phi = normal_pdf(z);
                return d.mean * d.mean * s + 2.0 * d.mean * d.sigma * phi + d.sigma * d.sigma * (z * phi + s);
            } else if constexpr (std::is_same_v<T, Pareto>) {
                return d.alpha * d.x_min * d.x_min / (d.alpha - 2.0) * std::pow(K / d.x_min, 2.0 - d.alpha);
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                const double s2 = d.sigma * d.sigma;
                return d.x0 * d.x0 * std::exp(s2) * normal_cdf((std::log(d.x0 / K) + 1.5 * s2) / d.sigma);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                const double r = d.rate;
                return std::exp(-r * K) * (K * K + 2.0 * K / r + 2.0 / (r * r));
            } else {
                return quadrature::integrate([&dist](double x) { return x * x * pdf(dist, x); }, K, infinity).value;
            }
        },
        dist.params());
}

/// E(X | X > K).
inline double tail_expectation(const DistributionSpec& dist, double K) {
    require_finite_mean(dist, "tail_expectation");
    if (!std::isfinite(K)) throw DomainError("tail_expectation: threshold must be finite");
    const double tail = survival(dist, K);
    if (!(tail > 0.0)) {
        throw DegenerateTailError("tail_expectation: P(X > K) = 0 at K = " + std::to_string(K));
    }
    return partial_expectation(dist, K) / tail;
}

enum class TailClass { ThinD1, RegularVariationD2, BorderlineExponential };

inline std::string_view tail_class_name(TailClass c) {
    switch (c) {
        case TailClass::ThinD1: return "thin_d1";
        case TailClass::RegularVariationD2: return "regular_variation_d2";
        case TailClass::BorderlineExponential: return "borderline_exponential";
    }
    return "unknown";
}

struct LadderPoint {
    double p = 0.0;
    double K = 0.0;
    double lambda = 0.0;  ///< E(X | X > K) / K
    double excess = 0.0;  ///< E(X | X > K) - K
};

/// Characteristic-scale diagnosis: lim E(X | X > K) / K.
struct TailClassification {
    double lambda_estimate = 1.0;
    bool diverging = false;
    TailClass tail_class = TailClass::ThinD1;
    std::optional<double> mu_excess;
    std::vector<LadderPoint> ladder;
};

struct ClassifyOptions {
    /// Ladder of exceedance probabilities, decreasing.
    std::vector<double> probabilities{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    /// |d log(lambda - 1) / d log K| below this means lambda has settled above 1.
    double flat_slope = 0.05;
    /// Relative spread of E(X|X>K) - K below this means constant excess.
    double constant_excess = 1e-6;
};

inline TailClassification classify_tail(const DistributionSpec& dist, const ClassifyOptions& options = {}) {
    require_finite_mean(dist, "classify_tail");
    TailClassification out;
    for (double p : options.probabilities) {
        const double K = quantile_threshold(dist, p);
        if (!(K > 0.0)) continue;
        const double te = tail_expectation(dist, K);
        out.ladder.push_back({p, K, te / K, te - K});
    }
    if (out.ladder.size() < 3) {
        throw EstimationError("classify_tail: fewer than three positive thresholds on the ladder");
    }

    const auto& last = out.ladder.back();
    double spread = 0.0;
    for (const auto& pt : out.ladder) spread = std::max(spread, std::abs(pt.excess - last.excess));
    if (last.excess > 0.0 && spread <= options.constant_excess * last.excess) {
        out.tail_class = TailClass::BorderlineExponential;
        out.lambda_estimate = 1.0;
        out.mu_excess = last.excess;
        return out;
    }

    const auto& prev = out.ladder[out.ladder.size() - 2];
    if (!(last.lambda > 1.0) || !(prev.lambda > 1.0)) {
        out.tail_class = TailClass::ThinD1;
        out.lambda_estimate = 1.0;
        return out;
    }
    const double slope = (std::log(last.lambda - 1.0) - std::log(prev.lambda - 1.0)) / (std::log(last.K) - std::log(prev.K));
    if (std::abs(slope) < options.flat_slope) {
        out.tail_class = TailClass::RegularVariationD2;
        out.lambda_estimate = last.lambda;
    } else if (slope < 0.0) {
        out.tail_class = TailClass::ThinD1;
        out.lambda_estimate = 1.0;
    } else {
        out.tail_class = TailClass::RegularVariationD2;
        out.lambda_estimate = last.lambda;
        out.diverging = true;
    }
    return out;
}

/// One draw by inversion of a stream uniform.
inline double draw(const DistributionSpec& dist, RandomStream& rng) {
    return quantile(dist, rng.uniform());
}

/// n draws from stream (seed, stream). Deterministic in its arguments.
inline std::vector<double> sample(const DistributionSpec& dist, std::size_t n, std::uint64_t seed,
                                  std::uint64_t stream = 0) {
    if (n == 0) throw ValidationError("sample: n must be >= 1");
    RandomStream rng(seed, stream);
    std::vector<double> out(n);
    for (auto& x : out) x = draw(dist, rng);
    return out;
}

}  // namespace tailgap

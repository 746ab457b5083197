#pragma once

// Expected payoff above a threshold (I1) against impact-times-probability (I2),
// the corrected probability p*, pseudo-overestimation tables, the lognormal
// opposite-direction example, parameter convexities, and VaR / expected shortfall.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tailgap/distributions.hpp"
#include "tailgap/errors.hpp"
#include "tailgap/payoffs.hpp"

namespace tailgap {

struct ConflationReport {
    double p = 0.0;
    double K_p = 0.0;
    double I1 = 0.0;  ///< expected payoff above K_p
    double I2 = 0.0;  ///< g(K_p) * P(X > K_p)
    double p_star = 0.0;
    double ratio = 0.0;  ///< p_star / p
    /// p_star > 1: only reachable when the tail is grossly misspecified.
    bool diagnostic_overflow = false;
};

/// I1 = integral of g(x) f(x) over (K, inf).
inline double expected_payoff_above(const DistributionSpec& dist, double K, const PayoffFunction& g) {
    if (!std::isfinite(K)) throw DomainError("expected_payoff_above: threshold must be finite");
    return expectation_above(g, dist, K);
}

/// I1 for the linear payoff g(x) = x.
inline double expected_payoff_above(const DistributionSpec& dist, double K) {
    return expected_payoff_above(dist, K, single(Linear{}));
}

/// I2 = g(K) * P(X > K).
inline double probability_impact(const DistributionSpec& dist, double K, const PayoffFunction& g) {
    if (!std::isfinite(K)) throw DomainError("probability_impact: threshold must be finite");
    return g(K) * survival(dist, K);
}

inline double probability_impact(const DistributionSpec& dist, double K) {
    return probability_impact(dist, K, single(Linear{}));
}

inline ConflationReport conflation_row(const DistributionSpec& dist, double p) {
    require_finite_mean(dist, "corrected_probability");
    ConflationReport row;
    row.p = p;
    row.K_p = quantile_threshold(dist, p);
    if (!(row.K_p > 0.0)) {
        throw DomainError("corrected_probability: threshold K_p must be positive for the linear payoff");
    }
    row.I1 = expected_payoff_above(dist, row.K_p);
    row.I2 = probability_impact(dist, row.K_p);
    row.p_star = row.I1 / row.K_p;
    row.ratio = row.p_star / p;
    row.diagnostic_overflow = row.p_star > 1.0;
    return row;
}

/// p* = I1(K_p) / K_p for the linear payoff: the probability that makes I1 = I2.
inline double corrected_probability(const DistributionSpec& dist, double p) {
    return conflation_row(dist, p).p_star;
}

inline std::vector<ConflationReport> pseudo_table(const DistributionSpec& dist, std::span<const double> ps) {
    std::vector<ConflationReport> rows;
    rows.reserve(ps.size());
    for (double p : ps) rows.push_back(conflation_row(dist, p));
    return rows;
}

inline const std::vector<double>& table_probabilities() {
    static const std::vector<double> ps{1e-1, 1e-2, 1e-3, 1e-4};
    return ps;
}

struct BinaryVsExpectation {
    double expectation_above = 0.0;
    double prob_above = 0.0;
};

/// Lognormal with mean x0: E[X 1{X > x0}] and P(X > x0), which move in opposite
/// directions as sigma grows.
inline BinaryVsExpectation lognormal_binary_vs_expectation(double x0, double sigma) {
    if (!(x0 > 0.0) || !(sigma > 0.0)) {
        throw DomainError("lognormal_binary_vs_expectation: x0 and sigma must be > 0");
    }
    const double e = std::erf(sigma / (2.0 * std::numbers::sqrt2));
    // 1 - erf(s) taken as erfc(s) to keep the probability accurate for large sigma.
    return {0.5 * x0 * (1.0 + e), 0.5 * std::erfc(sigma / (2.0 * std::numbers::sqrt2))};
}

/// d^2/dsigma^2 of (integral of x f - integral of f) above K for a centered Gaussian.
inline double gaussian_sigma_convexity(double K, double sigma) {
    if (!(sigma > 0.0)) throw DomainError("gaussian_sigma_convexity: sigma must be > 0");
    const double s2 = sigma * sigma;
    constexpr double sqrt_2pi = 2.5066282746310005024;
    return std::exp(-K * K / (2.0 * s2)) * ((K - 1.0) * K * K * K - (K - 2.0) * K * s2) /
           (sqrt_2pi * s2 * s2 * sigma);
}

/// d^2/dalpha^2 of E(X | X > K) = alpha K / (alpha - 1) for a Pareto tail.
inline double pareto_alpha_convexity(double K, double alpha) {
    if (!(alpha > 1.0)) throw DomainError("pareto_alpha_convexity: alpha must be > 1");
    if (!(K > 0.0)) throw DomainError("pareto_alpha_convexity: K must be > 0");
    const double d = alpha - 1.0;
    return 2.0 * K / (d * d * d);
}

// Risk measures. Losses are negative values; VaR and expected shortfall are
// reported as positive loss amounts.

template <class T>
struct BasicRiskMeasures {
    T var_alpha{};
    T cvar_alpha{};
    T alpha{};
};

using RiskMeasures = BasicRiskMeasures<double>;

template <class T>
struct WeightedOutcome {
    T value{};
    T probability{};
};

/// VaR_a = -inf{x : F(x) > a}; expected shortfall as the average loss over the
/// worst a of probability mass. Exact for any ordered field T.
template <class T>
BasicRiskMeasures<T> risk_measures(std::vector<WeightedOutcome<T>> outcomes, T alpha) {
    if (outcomes.empty()) throw EstimationError("risk_measures: empty outcome set");
    if (!(T(0) < alpha && alpha < T(1))) throw DomainError("risk_measures: alpha must lie in (0, 1)");
    std::stable_sort(outcomes.begin(), outcomes.end(),
                     [](const auto& a, const auto& b) { return a.value < b.value; });
    T cumulative(0);
    T tail_sum(0);
    T tail_mass(0);
    for (const auto& o : outcomes) {
        if (o.probability < T(0)) throw ValidationError("risk_measures: negative probability");
        if (cumulative + o.probability > alpha) {
            const T q = o.value;
            const T shortfall = tail_sum + (alpha - tail_mass) * q;
            return {T(0) - q, T(0) - shortfall / alpha, alpha};
        }
        cumulative += o.probability;
        tail_sum += o.probability * o.value;
        tail_mass += o.probability;
    }
    throw EstimationError("risk_measures: probabilities sum to at most alpha");
}

/// Empirical VaR / expected shortfall of an equally weighted sample.
inline RiskMeasures risk_measures(std::span<const double> sample, double alpha) {
    if (sample.empty()) throw EstimationError("risk_measures: empty sample");
    std::vector<WeightedOutcome<double>> outcomes;
    outcomes.reserve(sample.size());
    const double w = 1.0 / static_cast<double>(sample.size());
    for (double x : sample) outcomes.push_back({x, w});
    return risk_measures(std::move(outcomes), alpha);
}

/// VaR and expected shortfall of a continuous distribution, left tail.
inline RiskMeasures risk_measures(const DistributionSpec& dist, double alpha) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw DomainError("risk_measures: alpha must lie in (0, 0.5)");
    require_finite_mean(dist, "risk_measures");
    const double q = quantile(dist, alpha);
    const double lower_partial = mean(dist) - partial_expectation(dist, q);
    return {-q, -lower_partial / alpha, alpha};
}

/// Distribution of X + Y for independent discrete X and Y, equal values merged.
template <class T>
std::vector<WeightedOutcome<T>> sum_independent(const std::vector<WeightedOutcome<T>>& x,
                                                const std::vector<WeightedOutcome<T>>& y) {
    std::map<T, T> merged;
    for (const auto& a : x) {
        for (const auto& b : y) merged[a.value + b.value] += a.probability * b.probability;
    }
    std::vector<WeightedOutcome<T>> out;
    out.reserve(merged.size());
    for (const auto& [v, p] : merged) out.push_back({v, p});
    return out;
}

}  // namespace tailgap

#pragma once

// Scoring metrics for forecasters (survival-conditioned P/L, binary tally, Brier
// score, M4 sMAPE / MASE, M5 extrema score) and the exact sampling analytics of
// the tally and the Brier score.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tailgap/distributions.hpp"
#include "tailgap/errors.hpp"
#include "tailgap/special.hpp"

namespace tailgap {

enum class Metric { PL, Tally, Brier, M4_1, M4_2, M5 };

inline std::string_view metric_name(Metric m) {
    switch (m) {
        case Metric::PL: return "PL";
        case Metric::Tally: return "Tally";
        case Metric::Brier: return "Brier";
        case Metric::M4_1: return "M4_1";
        case Metric::M4_2: return "M4_2";
        case Metric::M5: return "M5";
    }
    return "unknown";
}

struct ScoreReport {
    Metric metric = Metric::PL;
    double value = 0.0;
    std::size_t n = 0;
    bool absorbed = false;
    std::optional<std::size_t> absorbed_at{};  ///< 1-based period of absorption (PL only)
    std::size_t skipped = 0;                 ///< 0/0 terms counted as exact (M4/M5 s1)
};

struct ProbabilityForecast {
    double f = 0.0;  ///< announced probability
    int hit = 0;     ///< outcome indicator
};

struct PointForecast {
    double forecast = 0.0;
    double realized = 0.0;
};

/// Either probability forecasts with outcomes or point forecasts with realizations.
class ForecastSeries {
public:
    using Records = std::variant<std::vector<ProbabilityForecast>, std::vector<PointForecast>>;

    ForecastSeries() = default;
    explicit ForecastSeries(std::vector<ProbabilityForecast> r) : records_(std::move(r)) {}
    explicit ForecastSeries(std::vector<PointForecast> r) : records_(std::move(r)) {}

    bool is_probabilistic() const { return records_.index() == 0; }

    std::size_t size() const {
        return std::visit([](const auto& v) { return v.size(); }, records_);
    }

    const std::vector<ProbabilityForecast>& probability_records() const {
        if (!is_probabilistic()) throw ValidationError("series holds point forecasts, not probabilities");
        return std::get<0>(records_);
    }

    const std::vector<PointForecast>& point_records() const {
        if (is_probabilistic()) throw ValidationError("series holds probability forecasts, not point forecasts");
        return std::get<1>(records_);
    }

private:
    Records records_;
};

/// Absorbing barrier for the P/L recursion: accrual at t requires the sum of
/// payoffs strictly before t to exceed b.
struct SurvivalConfig {
    double b = -infinity;
    double initial = 0.0;
};

/// P(T) = P(0) + sum_t 1(sum_{tau<t} g_tau > b) g_t; the first failed indicator
/// absorbs and every later term is dropped.
inline ScoreReport pl_score(std::span<const double> payoffs, const SurvivalConfig& cfg = {}) {
    ScoreReport r{.metric = Metric::PL, .value = cfg.initial, .n = payoffs.size()};
    double running = 0.0;
    for (std::size_t t = 0; t < payoffs.size(); ++t) {
        if (!std::isfinite(payoffs[t])) throw ValidationError("pl_score: non-finite payoff at t=" + std::to_string(t + 1));
        if (!(running > cfg.b)) {
            r.absorbed = true;
            r.absorbed_at = t + 1;
            break;
        }
        running += payoffs[t];
    }
    r.value = cfg.initial + running;
    return r;
}

/// Fraction of forecasts whose target landed in the forecast range.
inline ScoreReport tally(std::span<const int> range_hits) {
    if (range_hits.empty()) throw ValidationError("tally: empty hit sequence");
    std::size_t hits = 0;
    for (int h : range_hits) {
        if (h != 0 && h != 1) throw ValidationError("tally: hit indicators must be 0 or 1");
        hits += static_cast<std::size_t>(h);
    }
    return {.metric = Metric::Tally,
            .value = static_cast<double>(hits) / static_cast<double>(range_hits.size()),
            .n = range_hits.size()};
}

inline void validate_probability_record(const ProbabilityForecast& r, std::size_t i) {
    if (!(r.f >= 0.0 && r.f <= 1.0)) {
        throw ValidationError("forecast f at record " + std::to_string(i + 1) + " must lie in [0, 1]");
    }
    if (r.hit != 0 && r.hit != 1) {
        throw ValidationError("hit at record " + std::to_string(i + 1) + " must be 0 or 1");
    }
}

/// Per-record Brier summands (f_t - 1_t)^2, each in [0, 1].
inline std::vector<double> brier_terms(std::span<const ProbabilityForecast> records) {
    std::vector<double> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        validate_probability_record(records[i], i);
        const double d = records[i].f - records[i].hit;
        out.push_back(d * d);
    }
    return out;
}

inline ScoreReport brier(std::span<const ProbabilityForecast> records) {
    if (records.empty()) throw ValidationError("brier: empty series");
    const auto terms = brier_terms(records);
    double sum = 0.0;
    for (double t : terms) sum += t;
    return {.metric = Metric::Brier, .value = sum / static_cast<double>(terms.size()), .n = terms.size()};
}

inline ScoreReport brier(const ForecastSeries& series) { return brier(series.probability_records()); }

enum class M4Variant { sMAPE, MASE };

/// Mean absolute one-step change of a history: the in-sample naive-forecast error.
inline double naive_mad(std::span<const double> history) {
    if (history.size() < 2) throw ValidationError("naive_mad: need at least two observations");
    double sum = 0.0;
    for (std::size_t i = 1; i < history.size(); ++i) sum += std::abs(history[i] - history[i - 1]);
    return sum / static_cast<double>(history.size() - 1);
}

/// (1/n) sum |X_f - X_r| / s with s = (|X_f| + |X_r|) / 2 (sMAPE) or a caller
/// supplied naive error per term (MASE; a single value is broadcast).
/// A 0/0 sMAPE term is an exact forecast of zero: it adds 0 and is reported in `skipped`.
inline ScoreReport m4_score(std::span<const PointForecast> records, M4Variant variant,
                            std::span<const double> naive_errors = {}) {
    if (records.empty()) throw ValidationError("m4_score: empty series");
    ScoreReport r{.metric = variant == M4Variant::sMAPE ? Metric::M4_1 : Metric::M4_2, .n = records.size()};
    if (variant == M4Variant::MASE && naive_errors.size() != 1 && naive_errors.size() != records.size()) {
        throw ValidationError("m4_score: MASE needs one naive error or one per record");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (!std::isfinite(rec.forecast) || !std::isfinite(rec.realized)) {
            throw ValidationError("m4_score: non-finite value at record " + std::to_string(i + 1));
        }
        const double err = std::abs(rec.forecast - rec.realized);
        double scale = 0.0;
        if (variant == M4Variant::sMAPE) {
            scale = 0.5 * (std::abs(rec.forecast) + std::abs(rec.realized));
            if (scale == 0.0) {
                ++r.skipped;
                continue;
            }
        } else {
            scale = naive_errors.size() == 1 ? naive_errors[0] : naive_errors[i];
            if (!(scale > 0.0)) {
                throw ValidationError("m4_score: naive error at record " + std::to_string(i + 1) + " must be > 0");
            }
        }
        sum += err / scale;
    }
    r.value = sum / static_cast<double>(records.size());
    return r;
}

inline ScoreReport m4_score(const ForecastSeries& series, M4Variant variant, std::span<const double> naive_errors = {}) {
    return m4_score(series.point_records(), variant, naive_errors);
}

/// M4 metric applied to forecasts of the path minimum and maximum: the mean of
/// the two single-term scores.
inline ScoreReport m5_extrema_score(double forecast_min, double forecast_max, std::span<const double> realized_path,
                                    M4Variant variant, std::span<const double> naive_errors = {}) {
    if (realized_path.empty()) throw ValidationError("m5_extrema_score: empty path");
    const auto [lo, hi] = std::minmax_element(realized_path.begin(), realized_path.end());
    const std::array<PointForecast, 2> extrema{{{forecast_min, *lo}, {forecast_max, *hi}}};
    auto r = m4_score(extrema, variant, naive_errors);
    r.metric = Metric::M5;
    return r;
}

// Tally analytics.

struct Cumulants {
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
    double k4 = 0.0;

    double excess_kurtosis() const { return k4 / (k2 * k2); }
};

/// Cumulants of the mean of N Bernoulli(p) indicators.
inline Cumulants tally_cumulants(double p, std::size_t N) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("tally_cumulants: p must lie in [0, 1]");
    if (N == 0) throw DomainError("tally_cumulants: N must be >= 1");
    const double n = static_cast<double>(N);
    return {p, (1.0 - p) * p / n, (p - 1.0) * p * (2.0 * p - 1.0) / (n * n),
            (1.0 - p) * p * (6.0 * (p - 1.0) * p + 1.0) / (n * n * n)};
}

// Brier score analytics: forecasts f ~ Beta(a, b) independent of outcomes ~ Bernoulli(p).

struct BrierModel {
    double a = 1.0;
    double b = 1.0;
    double p = 0.5;

    void validate() const {
        if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
            throw ValidationError("BrierModel: a and b must be finite and > 0");
        }
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("BrierModel: p must lie in [0, 1]");
    }
};

struct BrierMoments {
    double mu = 0.0;
    double sigma2_n = 0.0;
};

namespace detail {

// E f^m for f ~ Beta(a, b).
inline double beta_raw_moment(double a, double b, int m) {
    double v = 1.0;
    for (int j = 0; j < m; ++j) v *= (a + j) / (a + b + j);
    return v;
}

}  // namespace detail

/// E[(f - 1_A)^(2k)], the k-th raw moment of one Brier summand.
inline double brier_summand_moment(const BrierModel& m, int k) {
    m.validate();
    return (1.0 - m.p) * detail::beta_raw_moment(m.a, m.b, 2 * k) + m.p * detail::beta_raw_moment(m.b, m.a, 2 * k);
}

/// mu = (a^2 (1-p) - a p + a + b (b+1) p) Gamma(a+b) / Gamma(a+b+2).
inline double brier_mean(const BrierModel& m) {
    m.validate();
    const double s = m.a + m.b;
    return (m.a * m.a * (1.0 - m.p) - m.a * m.p + m.a + m.b * (m.b + 1.0) * m.p) / (s * (s + 1.0));
}

/// Location of the degenerate limit of lambda_n: (p (b - a) + a (a+1) / (a+b+1)) / (a+b).
inline double brier_limit_location(const BrierModel& m) {
    m.validate();
    return (m.p * (m.b - m.a) + m.a * (m.a + 1.0) / (m.a + m.b + 1.0)) / (m.a + m.b);
}

/// Mean and variance of lambda_n over n independent summands.
inline BrierMoments brier_moments(const BrierModel& m, std::size_t n) {
    if (n == 0) throw DomainError("brier_moments: n must be >= 1");
    const double mu = brier_mean(m);
    const double per_term = brier_summand_moment(m, 2) - mu * mu;
    return {mu, per_term / static_cast<double>(n)};
}

/// Excess kurtosis of lambda_n from the summand moments.
inline double brier_excess_kurtosis(const BrierModel& m, std::size_t n) {
    if (n == 0) throw DomainError("brier_excess_kurtosis: n must be >= 1");
    const double m1 = brier_summand_moment(m, 1);
    const double m2 = brier_summand_moment(m, 2);
    const double m3 = brier_summand_moment(m, 3);
    const double m4 = brier_summand_moment(m, 4);
    const double k2 = m2 - m1 * m1;
    const double k4 = m4 - 4.0 * m3 * m1 - 3.0 * m2 * m2 + 12.0 * m2 * m1 * m1 - 6.0 * m1 * m1 * m1 * m1;
    return k4 / (k2 * k2) / static_cast<double>(n);
}

enum class KurtosisRegime { MaxEntropy, MaxVariance };

/// Limiting excess kurtosis of lambda_n: -6/(7n) at a = b = 1, and
/// -(6 (p-1) p + 1) / (n (p-1) p) as a, b -> 0.
inline double brier_kurtosis(const BrierModel& m, std::size_t n, KurtosisRegime regime) {
    m.validate();
    if (n == 0) throw DomainError("brier_kurtosis: n must be >= 1");
    const double nd = static_cast<double>(n);
    if (regime == KurtosisRegime::MaxEntropy) return -6.0 / (7.0 * nd);
    if (m.p == 0.0 || m.p == 1.0) throw DomainError("brier_kurtosis: max-variance limit needs p outside {0, 1}");
    return -(6.0 * (m.p - 1.0) * m.p + 1.0) / (nd * (m.p - 1.0) * m.p);
}

/// Density of a single Brier summand (f - 1_A)^2 on (0, 1).
inline double brier_pdf_single(double z, const BrierModel& m) {
    m.validate();
    if (!(z > 0.0 && z < 1.0)) throw DomainError("brier_pdf_single: z must lie in (0, 1)");
    const double r = std::sqrt(z);
    const double log_beta = std::lgamma(m.a) + std::lgamma(m.b) - std::lgamma(m.a + m.b);
    const double numer = (m.p - 1.0) * std::pow(z, m.a / 2.0) * std::pow(1.0 - r, m.b) -
                         m.p * std::pow(1.0 - r, m.a) * std::pow(z, m.b / 2.0);
    return numer * std::exp(-log_beta) / (2.0 * (r - 1.0) * z);
}

/// sqrt(pi) 2^(1-a-b) Gamma(a+b) / (Gamma((a+b)/2) Gamma((a+b+1)/2)); identically 1
/// by the duplication formula.
inline double brier_charfn_normalizer(const BrierModel& m) {
    m.validate();
    const double s = m.a + m.b;
    return std::exp(0.5 * std::log(std::numbers::pi) + (1.0 - s) * std::log(2.0) + std::lgamma(s) -
                    std::lgamma(0.5 * s) - std::lgamma(0.5 * (s + 1.0)));
}

/// Characteristic function of one Brier summand.
inline std::complex<double> brier_charfn_single(double t, const BrierModel& m, const SeriesControl& control = {}) {
    m.validate();
    const double s = m.a + m.b;
    const std::complex<double> z{0.0, t};
    const std::array<double, 2> lower{0.5 * s, 0.5 * (s + 1.0)};
    const std::array<double, 2> upper_miss{0.5 * (m.a + 1.0), 0.5 * m.a};
    const std::array<double, 2> upper_hit{0.5 * (m.b + 1.0), 0.5 * m.b};
    // The regularized 2F2 times its Gamma prefactor reduces to the plain 2F2 series.
    const auto miss = hypergeometric_pfq(upper_miss, lower, z, control).value;
    const auto hit = hypergeometric_pfq(upper_hit, lower, z, control).value;
    return miss + m.p * (hit - miss);
}

/// Characteristic function of lambda_n: the single-summand function at t/n raised to n.
inline std::complex<double> brier_charfn(double t, const BrierModel& m, std::size_t n,
                                         const SeriesControl& control = {}) {
    if (n == 0) throw DomainError("brier_charfn: n must be >= 1");
    std::complex<double> base = brier_charfn_single(t / static_cast<double>(n), m, control);
    std::complex<double> result{1.0, 0.0};
    for (std::size_t e = n; e > 0; e >>= 1) {
        if (e & 1U) result *= base;
        base *= base;
    }
    return result;
}

}  // namespace tailgap

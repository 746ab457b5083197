#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "support/stats.hpp"
#include "tailgap/distributions.hpp"
#include "tailgap/quadrature.hpp"
#include "tailgap/scoring.hpp"

using namespace tailgap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr std::uint64_t seed = 20191204;

std::vector<double> xiv_stream(std::initializer_list<double> xs) {
    std::vector<double> g;
    for (double x : xs) g.push_back(1.0 - x * x);
    return g;
}

// lambda_n replications: mean of n Brier summands each.
std::vector<double> brier_replications(const BrierModel& m, std::size_t n, std::size_t reps, std::uint64_t stream) {
    RandomStream rng(seed, stream);
    std::vector<double> out(reps);
    for (auto& v : out) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += testing::brier_summand_draw(m.a, m.b, m.p, rng);
        v = s / static_cast<double>(n);
    }
    return out;
}

}  // namespace

TEST_CASE("pl_score: spec examples", "[scoring]") {
    const auto up = pl_score(xiv_stream({1, 1, 1, 1, 1, 0, 0}));
    CHECK(up.value == 2.0);
    CHECK_FALSE(up.absorbed);
    CHECK(up.n == 7);
    const auto bust = pl_score(xiv_stream({0, 0, 0, 0, 0, 0, 5}));
    CHECK(bust.value == -18.0);
    CHECK_FALSE(bust.absorbed);

    const std::vector<double> s{-1.0, -1.0, 5.0};
    const auto r = pl_score(s, {.b = -1.5, .initial = 0.0});
    CHECK(r.value == -2.0);
    CHECK(r.absorbed);
    REQUIRE(r.absorbed_at.has_value());
    CHECK(*r.absorbed_at == 3);
}

TEST_CASE("pl_score: barrier edge cases", "[scoring]") {
    const auto empty = pl_score({}, {.b = -infinity, .initial = 4.0});
    CHECK(empty.value == 4.0);
    CHECK(empty.n == 0);
    CHECK_FALSE(empty.absorbed);

    // the empty sum before t = 1 is 0, so any b >= 0 absorbs at once
    const std::vector<double> s{1.0, 2.0};
    const auto at_zero = pl_score(s, {.b = 0.0, .initial = 1.0});
    CHECK(at_zero.absorbed);
    CHECK(*at_zero.absorbed_at == 1);
    CHECK(at_zero.value == 1.0);

    // no accrual after absorption even if later payoffs would recover
    const std::vector<double> dip{-3.0, 10.0, 10.0};
    const auto frozen = pl_score(dip, {.b = -2.0, .initial = 0.0});
    CHECK(frozen.value == -3.0);
    CHECK(*frozen.absorbed_at == 2);

    const std::vector<double> bad{1.0, std::nan("")};
    CHECK_THROWS_AS(pl_score(bad), ValidationError);
}

TEST_CASE("tally: spec examples", "[scoring]") {
    const std::vector<int> all(50, 1);
    CHECK(tally(all).value == 1.0);
    const std::vector<int> alt{1, 0, 1, 0};
    CHECK(tally(alt).value == 0.5);

    RandomStream rng(seed, 1);
    std::vector<int> hits(100);
    for (auto& h : hits) h = rng.uniform() < 0.5 ? 1 : 0;
    CHECK_THAT(tally(hits).value, WithinAbs(0.5, 0.15));

    CHECK_THROWS_AS(tally(std::vector<int>{}), ValidationError);
    CHECK_THROWS_AS(tally(std::vector<int>{1, 2}), ValidationError);
}

TEST_CASE("brier: spec examples", "[scoring]") {
    std::vector<ProbabilityForecast> perfect{{1.0, 1}, {0.0, 0}, {1.0, 1}};
    CHECK(brier(perfect).value == 0.0);
    std::vector<ProbabilityForecast> half{{0.5, 1}, {0.5, 0}, {0.5, 0}, {0.5, 1}, {0.5, 1}};
    CHECK(brier(half).value == 0.25);

    RandomStream rng(seed, 2);
    std::vector<ProbabilityForecast> constant(100000);
    for (auto& r : constant) r = {0.3, rng.uniform() < 0.3 ? 1 : 0};
    const auto terms = brier_terms(constant);
    const auto est = testing::mean_estimate(terms);
    CHECK(est.within(0.21));
    CHECK_THAT(brier(constant).value, WithinAbs(0.21, 0.005));

    CHECK_THROWS_AS(brier(std::vector<ProbabilityForecast>{{1.2, 1}}), ValidationError);
    CHECK_THROWS_AS(brier(std::vector<ProbabilityForecast>{{-0.1, 0}}), ValidationError);
    CHECK_THROWS_AS(brier(std::vector<ProbabilityForecast>{{0.5, 3}}), ValidationError);
    CHECK_THROWS_AS(brier(std::vector<ProbabilityForecast>{}), ValidationError);
}

TEST_CASE("Brier summands never exceed 1", "[scoring][property]") {
    RandomStream rng(seed, 3);
    std::vector<ProbabilityForecast> recs(50000);
    for (auto& r : recs) r = {rng.uniform() < 0.05 ? std::round(rng.uniform()) : rng.uniform(), rng.uniform() < 0.5 ? 1 : 0};
    const auto terms = brier_terms(recs);
    CHECK(*std::max_element(terms.begin(), terms.end()) <= 1.0);
    CHECK(*std::min_element(terms.begin(), terms.end()) >= 0.0);
}

TEST_CASE("m4_score: spec examples", "[scoring]") {
    const std::vector<PointForecast> one{{10.0, 8.0}};
    CHECK_THAT(m4_score(one, M4Variant::sMAPE).value, WithinRel(2.0 / 9.0, 1e-15));
    const std::vector<PointForecast> exact{{1.0, 1.0}, {-3.0, -3.0}, {0.0, 0.0}};
    const auto e = m4_score(exact, M4Variant::sMAPE);
    CHECK(e.value == 0.0);
    CHECK(e.skipped == 1);
    CHECK(e.n == 3);
    const std::vector<PointForecast> m{{5.0, 8.0}};
    const std::vector<double> naive{2.0};
    CHECK(m4_score(m, M4Variant::MASE, naive).value == 1.5);

    const std::vector<PointForecast> two{{5.0, 8.0}, {1.0, 2.0}};
    const std::vector<double> per_term{2.0, 0.5};
    CHECK(m4_score(two, M4Variant::MASE, per_term).value == Catch::Approx((1.5 + 2.0) / 2.0));
    const std::vector<double> wrong{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(m4_score(two, M4Variant::MASE, wrong), ValidationError);
    CHECK_THROWS_AS(m4_score(two, M4Variant::MASE), ValidationError);
    const std::vector<double> zero{0.0};
    CHECK_THROWS_AS(m4_score(two, M4Variant::MASE, zero), ValidationError);
}

TEST_CASE("naive_mad", "[scoring]") {
    const std::vector<double> h{1.0, 3.0, 2.0, 6.0};
    CHECK(naive_mad(h) == Catch::Approx(7.0 / 3.0));
    CHECK_THROWS_AS(naive_mad(std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("m5_extrema_score: spec examples", "[scoring]") {
    const std::vector<double> p1{1.0, 2.0, 3.0};
    CHECK(m5_extrema_score(1.0, 3.0, p1, M4Variant::sMAPE).value == 0.0);
    const std::vector<double> p2{0.0, 0.0, 5.0};
    const auto r = m5_extrema_score(0.0, 1.0, p2, M4Variant::sMAPE);
    CHECK_THAT(r.value, WithinRel(2.0 / 3.0, 1e-15));
    CHECK(r.skipped == 1);
    CHECK(r.metric == Metric::M5);
    const std::vector<double> p3{-2.0, 4.0};
    CHECK(m5_extrema_score(-2.0, 4.0, p3, M4Variant::sMAPE).value == 0.0);
    CHECK_THROWS_AS(m5_extrema_score(0.0, 1.0, std::vector<double>{}, M4Variant::sMAPE), ValidationError);
}

TEST_CASE("forecast series keeps its record type", "[scoring]") {
    ForecastSeries probs(std::vector<ProbabilityForecast>{{0.2, 0}});
    CHECK(probs.is_probabilistic());
    CHECK_THROWS_AS(probs.point_records(), ValidationError);
    ForecastSeries points(std::vector<PointForecast>{{1.0, 2.0}});
    CHECK_THROWS_AS(brier(points), ValidationError);
    CHECK(m4_score(points, M4Variant::sMAPE).value == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("brier and tally depend only on the hit sequence", "[scoring][property]") {
    // common uniforms through two generators give the same exceedances
    const DistributionSpec thin = Gaussian{}, fat = Pareto{1.1, 1.0};
    const double Kt = quantile_threshold(thin, 0.2), Kf = quantile_threshold(fat, 0.2);
    RandomStream a(seed, 9), b(seed, 9);
    std::vector<int> ht, hf;
    std::vector<ProbabilityForecast> rt, rf;
    for (int i = 0; i < 5000; ++i) {
        const double xt = draw(thin, a), xf = draw(fat, b);
        ht.push_back(xt >= Kt);
        hf.push_back(xf >= Kf);
        rt.push_back({0.2, ht.back()});
        rf.push_back({0.2, hf.back()});
    }
    CHECK(ht == hf);
    CHECK(tally(ht).value == tally(hf).value);
    CHECK(brier(rt).value == brier(rf).value);
}

TEST_CASE("tally_cumulants: spec examples", "[scoring]") {
    const auto c = tally_cumulants(0.5, 1);
    CHECK(c.k1 == 0.5);
    CHECK(c.k2 == 0.25);
    CHECK(c.k3 == 0.0);
    CHECK(c.k4 == -0.125);
    CHECK(c.excess_kurtosis() == -2.0);
    CHECK_THAT(tally_cumulants(0.3, 100).k2, WithinRel(0.0021, 1e-12));
    CHECK_THROWS_AS(tally_cumulants(1.5, 10), DomainError);
    CHECK_THROWS_AS(tally_cumulants(0.5, 0), DomainError);
}

TEST_CASE("tally cumulants match simulation", "[scoring][mc]") {
    const double p = 0.3;
    const std::size_t N = 1000;
    RandomStream rng(11, 0);
    std::vector<double> tallies(10000);
    for (auto& t : tallies) {
        int hits = 0;
        for (std::size_t i = 0; i < N; ++i) hits += rng.uniform() < p;
        t = static_cast<double>(hits) / N;
    }
    const auto est = testing::cumulant_estimates(tallies);
    const auto c = tally_cumulants(p, N);
    CHECK(est[0].within(c.k1));
    CHECK(est[1].within(c.k2));
    CHECK(est[2].within(c.k3));
    CHECK(est[3].within(c.k4));
}

TEST_CASE("brier_moments: spec examples", "[scoring]") {
    for (double p : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
        const auto m = brier_moments({1.0, 1.0, p}, 10);
        CHECK_THAT(m.mu, WithinAbs(1.0 / 3.0, 1e-12));
    }
    for (const BrierModel& m : {BrierModel{1, 1, 0.5}, BrierModel{2, 3, 0.4}, BrierModel{0.5, 0.5, 0.2}, BrierModel{7, 0.3, 0.8}}) {
        // mu = E f^2 - 2 p E f + p, and the degenerate limit sits at mu
        const double ef = m.a / (m.a + m.b);
        const double ef2 = ef * (m.a + 1.0) / (m.a + m.b + 1.0);
        CHECK_THAT(brier_mean(m), WithinRel(ef2 - 2.0 * m.p * ef + m.p, 1e-13));
        CHECK_THAT(brier_limit_location(m), WithinRel(brier_mean(m), 1e-13));
        // variance falls as 1/n
        CHECK_THAT(brier_moments(m, 10).sigma2_n / brier_moments(m, 100).sigma2_n, WithinRel(10.0, 1e-13));
    }
    CHECK_THROWS_AS(brier_moments({0.0, 1.0, 0.5}, 10), ValidationError);
    CHECK_THROWS_AS(brier_moments({1.0, 1.0, 1.5}, 10), ValidationError);
    CHECK_THROWS_AS(brier_moments({1.0, 1.0, 0.5}, 0), DomainError);
}

TEST_CASE("brier_moments match Monte Carlo", "[scoring][mc]") {
    const BrierModel m{2.0, 3.0, 0.4};
    const auto reps = brier_replications(m, 100, 20000, 4);
    const auto mom = brier_moments(m, 100);
    CHECK(testing::mean_estimate(reps).within(mom.mu));
    CHECK(testing::variance_estimate(reps).within(mom.sigma2_n));
}

TEST_CASE("degenerate limit: lambda_n concentrates at mu with variance ~ 1/n", "[scoring][mc]") {
    const BrierModel m{1.0, 1.0, 0.73};
    const auto small = brier_replications(m, 50, 4000, 5);
    const auto large = brier_replications(m, 500, 4000, 6);
    CHECK(testing::mean_estimate(large).within(1.0 / 3.0));
    const double ratio = testing::variance_estimate(small).value / testing::variance_estimate(large).value;
    CHECK(ratio > 8.5);
    CHECK(ratio < 11.7);
}

TEST_CASE("Gaussian limit: standardized lambda_n is normal", "[scoring][mc]") {
    const BrierModel m{2.0, 3.0, 0.4};
    const std::size_t n = 10000;
    const auto reps = brier_replications(m, n, 1000, 7);
    const auto mom = brier_moments(m, n);
    std::vector<double> z;
    for (double v : reps) z.push_back((v - mom.mu) / std::sqrt(mom.sigma2_n));
    CHECK(testing::jarque_bera(z).p_value > 0.01);
    CHECK(testing::mean_estimate(z).within(0.0));
}

TEST_CASE("brier_kurtosis: spec examples", "[scoring]") {
    const BrierModel uniform{1.0, 1.0, 0.5};
    CHECK(brier_kurtosis(uniform, 7, KurtosisRegime::MaxEntropy) == -6.0 / 49.0);
    CHECK_THAT(brier_kurtosis(uniform, 70, KurtosisRegime::MaxEntropy), WithinRel(-6.0 / 490.0, 1e-15));
    CHECK_THAT(brier_kurtosis(uniform, 1, KurtosisRegime::MaxVariance), WithinRel(-2.0, 1e-15));
    CHECK_THROWS_AS(brier_kurtosis({1.0, 1.0, 0.0}, 1, KurtosisRegime::MaxVariance), DomainError);
    CHECK_THROWS_AS(brier_kurtosis({1.0, 1.0, 1.0}, 1, KurtosisRegime::MaxVariance), DomainError);

    // the general moment formula agrees with both limits
    for (double p : {0.1, 0.5, 0.8}) {
        CHECK_THAT(brier_excess_kurtosis({1.0, 1.0, p}, 7), WithinRel(-6.0 / 49.0, 1e-12));
        const double bernoulli = -(6.0 * (p - 1.0) * p + 1.0) / ((p - 1.0) * p);
        // forecasts collapsing onto 0 leave y = 1_A
        CHECK_THAT(brier_excess_kurtosis({1e-9, 1e3, p}, 3), WithinRel(bernoulli / 3.0, 1e-3));
        CHECK_THAT(brier_kurtosis({1e-9, 1e3, p}, 3, KurtosisRegime::MaxVariance), WithinRel(bernoulli / 3.0, 1e-15));
    }
}

TEST_CASE("brier_pdf_single", "[scoring]") {
    for (double p : {0.0, 0.3, 1.0}) {
        for (double z : {1e-6, 0.1, 0.5, 0.99}) {
            CHECK_THAT(brier_pdf_single(z, {1.0, 1.0, p}), WithinRel(1.0 / (2.0 * std::sqrt(z)), 1e-12));
        }
    }
    for (const BrierModel& m : {BrierModel{1, 1, 0.5}, BrierModel{2, 3, 0.4}, BrierModel{0.5, 0.5, 0.2}, BrierModel{3, 0.7, 0.9}}) {
        const double total = quadrature::integrate_singular([&](double z) { return brier_pdf_single(z, m); }, 0.0, 1.0, 1e-10).value;
        CHECK_THAT(total, WithinAbs(1.0, 1e-6));
        // the density is the mixture of the miss branch f^2 and the hit branch (1 - f)^2
        const double z = 0.3, r = std::sqrt(z);
        auto beta_pdf = [](double x, double a, double b) {
            return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - std::lgamma(a) - std::lgamma(b) + std::lgamma(a + b));
        };
        const double mixture = ((1.0 - m.p) * beta_pdf(r, m.a, m.b) + m.p * beta_pdf(1.0 - r, m.a, m.b)) / (2.0 * r);
        CHECK_THAT(brier_pdf_single(z, m), WithinRel(mixture, 1e-12));
    }
    CHECK_THROWS_AS(brier_pdf_single(0.0, {1, 1, 0.5}), DomainError);
    CHECK_THROWS_AS(brier_pdf_single(1.0, {1, 1, 0.5}), DomainError);
}

TEST_CASE("brier_pdf_single matches a simulated histogram", "[scoring][mc]") {
    const BrierModel m{2.0, 2.0, 0.5};
    RandomStream rng(seed, 8);
    const std::size_t draws = 200000;
    const double lo = 0.24, hi = 0.26;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double y = testing::brier_summand_draw(m.a, m.b, m.p, rng);
        inside += y >= lo && y < hi;
    }
    const double q = static_cast<double>(inside) / draws;
    const double density = q / (hi - lo);
    const double se = std::sqrt(q * (1.0 - q) / draws) / (hi - lo);
    const double bin_mass = quadrature::integrate([&](double z) { return brier_pdf_single(z, m); }, lo, hi).value / (hi - lo);
    CHECK(std::abs(density - bin_mass) <= 3.0 * se);
    CHECK_THAT(bin_mass, WithinRel(brier_pdf_single(0.25, m), 1e-3));
}

TEST_CASE("brier_charfn", "[scoring]") {
    for (const BrierModel& m : {BrierModel{1, 1, 0.5}, BrierModel{2, 3, 0.4}, BrierModel{0.5, 0.5, 0.2}}) {
        CHECK(brier_charfn(0.0, m, 1) == std::complex<double>{1.0, 0.0});
        CHECK(brier_charfn(0.0, m, 25) == std::complex<double>{1.0, 0.0});
        CHECK_THAT(brier_charfn_normalizer(m), WithinRel(1.0, 1e-13));
        const double h = 1e-5;
        const auto d = (brier_charfn(h, m, 1) - brier_charfn(-h, m, 1)) / (2.0 * h);
        CHECK_THAT(d.imag(), WithinAbs(brier_mean(m), 1e-6));
        CHECK_THAT(d.real(), WithinAbs(0.0, 1e-6));
        for (double t : {0.3, 2.0, 9.0}) CHECK(std::abs(brier_charfn(t, m, 3)) <= 1.0 + 1e-12);
        // the n-fold function is the single one at t/n to the n
        CHECK(std::abs(brier_charfn(4.0, m, 4) - std::pow(brier_charfn_single(1.0, m), 4)) < 1e-13);
    }
    const BrierModel m{1, 1, 0.5};
    const double h = 1e-5;
    const auto d = (brier_charfn(h, m, 1) - brier_charfn(-h, m, 1)) / (2.0 * h);
    CHECK_THAT(d.imag(), WithinAbs(1.0 / 3.0, 1e-6));

    // a = b = 1, p = 1/2: the summand is U^2 with U uniform
    const double t = 1.7;
    const auto direct = quadrature::integrate([t](double u) { return std::cos(t * u * u); }, 0.0, 1.0, 1e-13).value;
    CHECK_THAT(brier_charfn_single(t, m).real(), WithinAbs(direct, 1e-12));

    try {
        (void)brier_charfn_single(400.0, m);
        FAIL("expected truncation");
    } catch (const TruncationError& e) {
        CHECK(e.achieved_bound() > 0.0);
    }
    CHECK_THROWS_AS(brier_charfn(1.0, m, 0), DomainError);
}

TEST_CASE("brier_charfn matches the empirical characteristic function", "[scoring][mc]") {
    const BrierModel m{2.0, 3.0, 0.4};
    const auto reps = brier_replications(m, 10, 100000, 10);
    const double t = 2.0;
    std::vector<double> c, s;
    for (double v : reps) {
        c.push_back(std::cos(t * v));
        s.push_back(std::sin(t * v));
    }
    const auto phi = brier_charfn(t, m, 10);
    CHECK(testing::mean_estimate(c).within(phi.real()));
    CHECK(testing::mean_estimate(s).within(phi.imag()));
}

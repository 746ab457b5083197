#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "support/stats.hpp"
#include "tailgap/quadrature.hpp"
#include "tailgap/random.hpp"
#include "tailgap/special.hpp"

using namespace tailgap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double infinity = std::numeric_limits<double>::infinity();
}

TEST_CASE("erfc_inv reaches 1e-12 relative accuracy", "[special]") {
    for (double y : {1e-300, 1e-100, 1e-20, 1e-8, 2e-4, 0.002, 0.02, 0.2, 0.5, 0.9, 0.999, 1.0, 1.001, 1.3, 1.9, 1.99999}) {
        INFO("y=" << y);
        const double oracle = boost::math::erfc_inv(y);
        if (oracle == 0.0) {
            CHECK(erfc_inv(y) == 0.0);
        } else {
            CHECK_THAT(erfc_inv(y), WithinRel(oracle, 1e-12));
        }
        CHECK_THAT(std::erfc(erfc_inv(y)), WithinRel(y, 1e-12));
    }
    CHECK_THROWS_AS(erfc_inv(0.0), DomainError);
    CHECK_THROWS_AS(erfc_inv(2.0), DomainError);
    CHECK_THROWS_AS(erfc_inv(-0.1), DomainError);
}

TEST_CASE("erf_inv and normal quantile", "[special]") {
    for (double v : {-0.999, -0.5, -1e-6, -1e-300, 1e-6, 1e-12, 0.3, 0.49, 0.9, 0.999999}) {
        CHECK_THAT(erf_inv(v), WithinRel(boost::math::erf_inv(v), 1e-12));
    }
    const boost::math::normal_distribution<double> n01;
    for (double u : {1e-12, 1e-4, 0.025, 0.3, 0.5001, 0.9, 0.999}) {
        CHECK_THAT(normal_quantile(u), WithinRel(boost::math::quantile(n01, u), 1e-12));
    }
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK_THAT(normal_survival(3.0), WithinRel(boost::math::cdf(boost::math::complement(n01, 3.0)), 1e-14));
    CHECK_THAT(normal_pdf(1.0), WithinRel(std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi), 1e-15));
}

TEST_CASE("hypergeometric series: classical reductions", "[special]") {
    const std::complex<double> z{0.7, -1.3};
    // 0F0(;;z) = e^z
    CHECK(std::abs(hypergeometric_pfq({}, {}, z).value - std::exp(z)) < 1e-13);
    // 1F1(1; 2; z) = (e^z - 1) / z
    const std::array<double, 1> one{1.0}, two{2.0};
    CHECK(std::abs(hypergeometric_pfq(one, two, z).value - (std::exp(z) - 1.0) / z) < 1e-14);
    // 2F2(a, b; a, b; z) = e^z
    const std::array<double, 2> ab{0.3, 2.5};
    CHECK(std::abs(hypergeometric_pfq(ab, ab, z).value - std::exp(z)) < 1e-13);
    // regularized form divides by Gamma(b1) Gamma(b2)
    const auto reg = hypergeometric_2f2_regularized(0.3, 2.5, 0.3, 2.5, z);
    CHECK(std::abs(reg - std::exp(z) / (std::tgamma(0.3) * std::tgamma(2.5))) < 1e-13);
    // a polynomial: 1F1(-2; 1; z) = 1 - 2z + z^2 / 2
    const std::array<double, 1> m2{-2.0};
    const std::array<double, 1> b1{1.0};
    CHECK(std::abs(hypergeometric_pfq(m2, b1, z).value - (1.0 - 2.0 * z + 0.5 * z * z)) < 1e-14);
}

TEST_CASE("hypergeometric series: failures carry an achieved bound", "[special]") {
    const std::array<double, 2> a{1.0, 1.5};
    const std::array<double, 2> b{1.25, 1.75};
    try {
        (void)hypergeometric_pfq(a, b, {0.0, 400.0});
        FAIL("expected a truncation error");
    } catch (const TruncationError& e) {
        CHECK(e.achieved_bound() > 0.0);
    }
    SeriesControl tight;
    tight.max_terms = 3;
    CHECK_THROWS_AS(hypergeometric_pfq(a, b, {0.0, 5.0}, tight), TruncationError);
    const std::array<double, 1> bad{-1.0};
    CHECK_THROWS_AS(hypergeometric_pfq(a, bad, {0.1, 0.0}), DomainError);
}

TEST_CASE("quadrature", "[special]") {
    CHECK_THAT(quadrature::integrate([](double x) { return std::exp(-x); }, 0.0, infinity).value, WithinRel(1.0, 1e-10));
    CHECK_THAT(quadrature::integrate([](double x) { return std::exp(-x * x); }, -infinity, infinity).value,
               WithinRel(std::sqrt(std::numbers::pi), 1e-10));
    CHECK_THAT(quadrature::integrate_singular([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0).value,
               WithinRel(2.0, 1e-8));
    CHECK(quadrature::integrate([](double) { return 1.0; }, 2.0, 2.0).value == 0.0);
}

TEST_CASE("random streams", "[special]") {
    RandomStream a(1, 0), b(1, 0), c(1, 1), d(2, 0);
    bool all_equal = true, differ_stream = false, differ_seed = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a(), y = b(), z = c(), w = d();
        all_equal = all_equal && x == y;
        differ_stream = differ_stream || x != z;
        differ_seed = differ_seed || x != w;
    }
    CHECK(all_equal);
    CHECK(differ_stream);
    CHECK(differ_seed);

    RandomStream r(20191204, 0);
    std::vector<double> u(20000);
    for (auto& v : u) {
        v = r.uniform();
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
    }
    const auto ks = testing::ks_one_sample(u, [](double v) { return v; });
    CHECK(ks.p_value > 0.01);
}

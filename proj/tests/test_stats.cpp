#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ellipvol/errors.hpp"
#include "ellipvol/sampling.hpp"
#include "ellipvol/stats.hpp"

using namespace ellipvol;
using namespace ellipvol::stats;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// bisection inverse of the normal CDF, test-side oracle only
double normal_quantile(double p) {
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("standardize") {
    const std::vector<double> c = {2.0, 2.0, 2.0};
    for (double v : standardize(c, 2.0, 3.7)) CHECK(v == 0.0);

    const std::vector<double> x = {1.0, 3.0};
    const auto z = standardize(x, 2.0, 1.0);
    CHECK(z[0] == -1.0);
    CHECK(z[1] == 1.0);

    const auto twice = standardize(standardize(x, 0.0, 1.0), 0.0, 1.0);
    CHECK(twice[0] == x[0]);
    CHECK(twice[1] == x[1]);

    CHECK_THROWS_AS(standardize(x, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(standardize(x, 0.0, -1.0), DomainError);
}

TEST_CASE("kolmogorov_survival sanity") {
    // classic 5% critical value
    CHECK(kolmogorov_survival(1.358) == doctest::Approx(0.05).epsilon(0.02));
    // monotone decreasing
    CHECK(kolmogorov_survival(0.5) > kolmogorov_survival(1.0));
    CHECK(kolmogorov_survival(1.0) > kolmogorov_survival(1.5));
    CHECK(kolmogorov_survival(0.0) == 1.0);
    CHECK(kolmogorov_survival(5.0) <= 1e-20);

    // both internal branches against a long-double alternating-series oracle
    for (double t : {0.4, 0.7, 1.0, 1.17, 1.19, 1.5, 2.0}) {
        long double q = 0.0L;
        long double sign = 1.0L;
        for (int j = 1; j <= 64; ++j) {
            q += sign * std::exp(-2.0L * j * j * static_cast<long double>(t) * t);
            sign = -sign;
        }
        CHECK(kolmogorov_survival(t) ==
              doctest::Approx(static_cast<double>(2.0L * q)).epsilon(1e-10));
    }
}

TEST_CASE("ks_one_sample_normal on exact quantiles") {
    constexpr std::size_t m = 10000;
    std::vector<double> x(m);
    for (std::size_t i = 0; i < m; ++i)
        x[i] = normal_quantile((static_cast<double>(i) + 0.5) / m);
    const GofReport r = ks_one_sample_normal(x);
    CHECK(r.ks_statistic <= 1.0 / m + 1e-6); // perfect fit: D = 1/(2m)
    CHECK(r.ks_p_value >= 0.999);
    CHECK(std::abs(r.mean) <= 1e-3);
    CHECK(std::abs(r.variance - 1.0) <= 5e-3);
    CHECK(std::abs(r.skewness) <= 1e-6);
}

TEST_CASE("ks_one_sample_normal detects a unit shift") {
    RandomStream stream(70, 0);
    std::vector<double> x(1000);
    stream.fill_normal(x);
    for (double& v : x) v += 1.0;
    const GofReport r = ks_one_sample_normal(x);
    // population D = Phi(0.5) - Phi(-0.5) = 0.3829, fluctuation ~ 0.015
    const double expected_d = normal_cdf(0.5) - normal_cdf(-0.5);
    CHECK(std::abs(r.ks_statistic - expected_d) <= 0.08);
    CHECK(r.ks_p_value < 1e-10);
    CHECK(r.mean == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("ks_one_sample_normal null draw stays under the 5% critical value") {
    RandomStream stream(71, 0);
    std::vector<double> x(1000);
    stream.fill_normal(x);
    const GofReport r = ks_one_sample_normal(x);
    CHECK(r.ks_statistic < 1.358 / std::sqrt(1000.0));
    CHECK(r.ks_p_value > 0.05);
}

TEST_CASE("ks preconditions") {
    std::vector<double> tiny(10, 0.0);
    CHECK_THROWS_AS(ks_one_sample_normal(tiny), TooFewSamplesError);
    std::vector<double> ok(25, 0.0);
    CHECK_THROWS_AS(ks_two_sample(ok, tiny), TooFewSamplesError);

    // non-finite values are rejected up front, never looped on
    std::vector<double> bad(25, 0.0);
    bad[7] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(ks_one_sample_normal(bad), DomainError);
    CHECK_THROWS_AS(ks_two_sample(ok, bad), DomainError);
    bad[7] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(ks_two_sample(bad, ok), DomainError);
}

TEST_CASE("ks_two_sample degenerate cases") {
    RandomStream stream(72, 0);
    std::vector<double> a(50);
    stream.fill_normal(a);

    CHECK(ks_two_sample(a, a).ks_statistic == 0.0);

    std::vector<double> b = a;
    for (double& v : b) v += 100.0; // disjoint supports
    CHECK(ks_two_sample(a, b).ks_statistic == 1.0);
}

TEST_CASE("ks_two_sample null calibration on Cauchy pairs") {
    std::size_t passed = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RandomStream stream(73, seed);
        const auto a = sampling::stable_reference_sample(1.0, 5000, stream);
        const auto b = sampling::stable_reference_sample(1.0, 5000, stream);
        if (ks_two_sample(a, b).ks_p_value > 0.01) ++passed;
    }
    CHECK(passed >= 9);
}

TEST_CASE("classify_regime catalog") {
    SUBCASE("degenerate radii always give the normal limit") {
        const auto c = classify_regime(sampling::RadialLaw::degenerate(), 100, 0.6);
        CHECK(c.regime == RegimeKind::normal_limit);
        CHECK(c.s_n == 0.0);
        CHECK(c.m_n == 0.0);
        CHECK(c.alpha == 2.0);
        CHECK(c.sigma_half == doctest::Approx(0.3));
    }
    SUBCASE("log-cauchy dominates: stable limit with alpha = 1") {
        const auto c =
            classify_regime(sampling::RadialLaw::log_cauchy(0.0, 1.0), 100, 0.6);
        CHECK(c.regime == RegimeKind::stable_limit);
        CHECK(c.alpha == 1.0);
        CHECK(c.s_n == doctest::Approx(100.0));
    }
    SUBCASE("log-normal tuned to tau = 1 is mixed") {
        const double sigma_n = 0.6;
        const std::size_t p = 100;
        const double sd = sigma_n / 2.0 / std::sqrt(static_cast<double>(p));
        const auto c = classify_regime(sampling::RadialLaw::log_normal(0.0, sd), p, sigma_n);
        CHECK(c.regime == RegimeKind::mixed);
        CHECK(c.alpha == 2.0);
        CHECK(c.tau == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("tiny radial noise falls back to the normal limit") {
        const auto c =
            classify_regime(sampling::RadialLaw::log_normal(0.0, 1e-6), 100, 0.6);
        CHECK(c.regime == RegimeKind::normal_limit);
        CHECK(c.s_n > 0.0);
    }
    SUBCASE("log-pareto scaling") {
        const auto c =
            classify_regime(sampling::RadialLaw::log_pareto(0.5, 1.0), 100, 0.6);
        CHECK(c.alpha == 0.5);
        CHECK(c.s_n == doctest::Approx(std::pow(100.0, 2.0)).epsilon(1e-12));
        CHECK(c.regime == RegimeKind::stable_limit);
    }
    SUBCASE("location shifts move m_n, not the regime") {
        const auto c =
            classify_regime(sampling::RadialLaw::log_cauchy(2.5, 1.0), 40, 0.6);
        CHECK(c.m_n == doctest::Approx(100.0));
        CHECK(c.regime == RegimeKind::stable_limit);
    }
    SUBCASE("domain") {
        CHECK_THROWS_AS(classify_regime(sampling::RadialLaw::degenerate(), 10, 0.0),
                        DomainError);
    }
}

TEST_CASE("quadratic_form_moment_check exact and Monte Carlo") {
    SUBCASE("identity pair: both sides are exactly one") {
        RandomStream stream(74, 0);
        const auto qc = quadratic_form_moment_check(DenseMatrix::identity(5),
                                                    DenseMatrix::identity(5), 5, 500,
                                                    stream);
        CHECK(qc.theoretical == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(qc.empirical == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(qc.z_score) <= 5.0);
    }
    SUBCASE("disjoint diagonals give b22") {
        RandomStream stream(75, 0);
        DenseMatrix a(3, 3), b(3, 3);
        a(0, 0) = 1.0;
        b(1, 1) = 1.0;
        const auto qc = quadratic_form_moment_check(a, b, 3, 20000, stream);
        CHECK(qc.theoretical == doctest::Approx(1.0 / 15.0).epsilon(1e-14));
        CHECK(std::abs(qc.z_score) <= 5.0);
    }
    SUBCASE("random symmetric pairs stay within 5 sigma") {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            RandomStream stream(76, seed);
            const std::size_t n = 4;
            DenseMatrix g1 = sampling::gaussian_matrix(n, n, stream);
            DenseMatrix g2 = sampling::gaussian_matrix(n, n, stream);
            DenseMatrix a(n, n), b(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    a(i, j) = 0.5 * (g1(i, j) + g1(j, i));
                    b(i, j) = 0.5 * (g2(i, j) + g2(j, i));
                }
            const auto qc = quadratic_form_moment_check(a, b, n, 20000, stream);
            CHECK(std::abs(qc.z_score) <= 5.0);
        }
    }
    SUBCASE("asymmetric input rejected") {
        RandomStream stream(77, 0);
        DenseMatrix bad(2, 2);
        bad(0, 1) = 1.0;
        CHECK_THROWS_AS(
            quadratic_form_moment_check(bad, DenseMatrix::identity(2), 2, 100, stream),
            NotSymmetricError);
    }
}

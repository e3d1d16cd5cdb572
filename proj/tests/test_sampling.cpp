#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "ellipvol/errors.hpp"
#include "ellipvol/sampling.hpp"
#include "ellipvol/stats.hpp"

using namespace ellipvol;
using namespace ellipvol::sampling;

namespace {

struct MeanSe {
    double mean, se;
};

MeanSe mean_and_se(const std::vector<double>& x) {
    const double m = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= m;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= (m - 1.0);
    return {mean, std::sqrt(var / m)};
}

} // namespace

TEST_CASE("stream determinism and distinctness") {
    RandomStream a(42, 3);
    RandomStream b(42, 3);
    for (int k = 0; k < 256; ++k) CHECK(a.next_u64() == b.next_u64());

    RandomStream c(42, 4);
    RandomStream d(43, 3);
    bool differs_index = false, differs_master = false;
    RandomStream a2(42, 3);
    for (int k = 0; k < 64; ++k) {
        const std::uint64_t ref = a2.next_u64();
        if (c.next_u64() != ref) differs_index = true;
        if (d.next_u64() != ref) differs_master = true;
    }
    CHECK(differs_index);
    CHECK(differs_master);
}

TEST_CASE("split streams are deterministic") {
    RandomStream parent(7, 1);
    RandomStream c1 = parent.split(9);
    RandomStream c2 = parent.split(9);
    for (int k = 0; k < 64; ++k) CHECK(c1.next_u64() == c2.next_u64());
}

TEST_CASE("gaussian_matrix reproducible and has the right moments") {
    RandomStream s1(5, 0), s2(5, 0);
    CHECK(gaussian_matrix(3, 4, s1) == gaussian_matrix(3, 4, s2));

    RandomStream stream(6, 0);
    const DenseMatrix m = gaussian_matrix(200, 500, stream); // 1e5 entries
    const std::vector<double>& e = m.entries();
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= static_cast<double>(e.size());
    double var = 0.0;
    for (double v : e) var += (v - mean) * (v - mean);
    var /= static_cast<double>(e.size() - 1);

    CHECK(std::abs(mean) <= 4.0 / std::sqrt(1e5));
    CHECK(std::abs(var - 1.0) <= 4.0 * std::sqrt(2.0 / 1e5));
}

TEST_CASE("unit_sphere_vector basics") {
    RandomStream stream(7, 0);
    for (int k = 0; k < 16; ++k) {
        const auto v = unit_sphere_vector(1, stream);
        CHECK((v[0] == 1.0 || v[0] == -1.0));
    }
    for (std::size_t n : {2, 3, 17}) {
        const auto v = unit_sphere_vector(n, stream);
        double norm_sq = 0.0;
        for (double x : v) norm_sq += x * x;
        CHECK(std::abs(std::sqrt(norm_sq) - 1.0) <= 1e-12);
    }
}

TEST_CASE("sphere coordinate moments") {
    constexpr std::size_t draws = 100000;

    SUBCASE("E[U1^2] = 1/3 at n=3") {
        RandomStream stream(8, 0);
        std::vector<double> x(draws);
        for (auto& v : x) v = std::pow(unit_sphere_vector(3, stream)[0], 2);
        const MeanSe ms = mean_and_se(x);
        CHECK(std::abs(ms.mean - 1.0 / 3.0) <= 4.0 * ms.se);
    }
    SUBCASE("E[U1^4] = 3/8 at n=2") {
        RandomStream stream(9, 0);
        std::vector<double> x(draws);
        for (auto& v : x) v = std::pow(unit_sphere_vector(2, stream)[0], 4);
        const MeanSe ms = mean_and_se(x);
        CHECK(std::abs(ms.mean - 3.0 / 8.0) <= 4.0 * ms.se);
    }
}

TEST_CASE("radial law validation") {
    CHECK_THROWS_AS(RadialLaw::log_normal(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(RadialLaw::log_cauchy(0.0, -1.0), DomainError);
    CHECK_THROWS_AS(RadialLaw::log_pareto(2.0, 1.0), DomainError);
    CHECK_THROWS_AS(RadialLaw::log_pareto(0.0, 1.0), DomainError);
    CHECK(RadialLaw::log_pareto(1.5, 1.0).stable_index() == 1.5);
    CHECK(RadialLaw::degenerate().stable_index() == 2.0);
    CHECK(RadialLaw::log_cauchy(0.0, 1.0).stable_index() == 1.0);
}

TEST_CASE("sample_radii laws") {
    constexpr std::size_t draws = 100000;

    SUBCASE("degenerate radii are all one") {
        RandomStream stream(10, 0);
        const auto r = sample_radii(RadialLaw::degenerate(), 5, stream);
        for (double v : r) CHECK(v == 1.0);
    }
    SUBCASE("log-normal log mean") {
        RandomStream stream(11, 0);
        const auto r = sample_radii(RadialLaw::log_normal(0.0, 1.0), draws, stream);
        double mean = 0.0;
        for (double v : r) mean += std::log(v);
        mean /= static_cast<double>(draws);
        CHECK(std::abs(mean) <= 4.0 / std::sqrt(static_cast<double>(draws)));
    }
    SUBCASE("log-cauchy log median") {
        RandomStream stream(12, 0);
        auto r = sample_radii(RadialLaw::log_cauchy(0.0, 1.0), draws, stream);
        for (double& v : r) v = std::log(v);
        std::nth_element(r.begin(), r.begin() + draws / 2, r.end());
        CHECK(std::abs(r[draws / 2]) <= 0.02);
    }
    SUBCASE("log-pareto support and symmetry") {
        RandomStream stream(13, 0);
        const double alpha = 1.3, scale = 0.7;
        auto r = sample_radii(RadialLaw::log_pareto(alpha, scale), draws, stream);
        std::size_t positive = 0;
        for (double v : r) {
            const double lv = std::log(v);
            CHECK(std::abs(lv) >= scale - 1e-12); // support excludes (-scale, scale)
            if (lv > 0) ++positive;
        }
        // sign is a fair coin
        CHECK(std::abs(static_cast<double>(positive) / draws - 0.5) <=
              4.0 * 0.5 / std::sqrt(static_cast<double>(draws)));
        // median of |log R| is scale * 2^(1/alpha)
        std::vector<double> abs_log(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) abs_log[i] = std::abs(std::log(r[i]));
        std::nth_element(abs_log.begin(), abs_log.begin() + draws / 2, abs_log.end());
        CHECK(abs_log[draws / 2] ==
              doctest::Approx(scale * std::pow(2.0, 1.0 / alpha)).epsilon(0.02));
    }
}

TEST_CASE("log radii are the finite primitive") {
    // log R stays finite arbitrarily deep in the Cauchy tails, even where
    // R = exp(log R) overflows; radial log-sums must come from the logs
    RandomStream s1(25, 0), s2(25, 0);
    const auto logs =
        sample_log_radii(RadialLaw::log_cauchy(0.0, 1.0), 100000, s1);
    const auto radii = sample_radii(RadialLaw::log_cauchy(0.0, 1.0), 100000, s2);
    for (std::size_t i = 0; i < logs.size(); ++i) {
        CHECK(std::isfinite(logs[i]));
        CHECK(radii[i] == std::exp(logs[i])); // identical draw order
    }
    // block sums stay finite too (the quantity experiments accumulate)
    for (std::size_t block = 0; block + 150 <= logs.size(); block += 150) {
        double sum = 0.0;
        for (std::size_t k = 0; k < 150; ++k) sum += logs[block + k];
        CHECK(std::isfinite(sum));
    }
}

TEST_CASE("elliptical_sample structure") {
    SUBCASE("degenerate radii give X = Y exactly") {
        const EllipticalModel model(6, 3, Spectrum::identity(6), RadialLaw::degenerate());
        RandomStream stream(14, 0);
        const EllipticalSample s = elliptical_sample(model, stream);
        CHECK(s.x == s.y);
        for (double r : s.radii) CHECK(r == 1.0);
    }
    SUBCASE("identity spectrum rows stay on the sphere") {
        const EllipticalModel model(5, 4, Spectrum::identity(5), RadialLaw::degenerate());
        RandomStream stream(15, 0);
        const EllipticalSample s = elliptical_sample(model, stream);
        for (std::size_t i = 0; i < 4; ++i) {
            double norm_sq = 0.0;
            for (double v : s.y.row(i)) norm_sq += v * v;
            CHECK(std::abs(std::sqrt(norm_sq) - 1.0) <= 1e-12);
        }
    }
    SUBCASE("row norms bounded by sqrt(lambda_max)") {
        const Spectrum spectrum = linalg::normalize_spectrum(
            Spectrum({4.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.25, 0.25}));
        const EllipticalModel model(8, 4, spectrum, RadialLaw::degenerate());
        RandomStream stream(16, 0);
        const EllipticalSample s = elliptical_sample(model, stream);
        const double bound = std::sqrt(spectrum.max()) + 1e-12;
        for (std::size_t i = 0; i < 4; ++i) {
            double norm_sq = 0.0;
            for (double v : s.y.row(i)) norm_sq += v * v;
            CHECK(std::sqrt(norm_sq) <= bound);
        }
    }
    SUBCASE("X = diag(R) Y exactly for random radii") {
        const EllipticalModel model(6, 3, Spectrum::identity(6),
                                    RadialLaw::log_normal(0.0, 1.0));
        RandomStream stream(17, 0);
        const EllipticalSample s = elliptical_sample(model, stream);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(s.radii[i] == std::exp(s.log_radii[i]));
            for (std::size_t k = 0; k < 6; ++k)
                CHECK(s.x(i, k) == s.radii[i] * s.y(i, k));
        }
    }
    SUBCASE("model validation") {
        CHECK_THROWS_AS(EllipticalModel(4, 1, Spectrum::identity(4), RadialLaw::degenerate()),
                        DomainError);
        CHECK_THROWS_AS(EllipticalModel(4, 5, Spectrum::identity(4), RadialLaw::degenerate()),
                        DomainError);
        CHECK_THROWS_AS(EllipticalModel(3, 2, Spectrum({2.0, 1.0, 0.5}),
                                        RadialLaw::degenerate()),
                        DomainError); // spectrum not normalized
    }
}

TEST_CASE("stable_reference_sample distributions") {
    constexpr std::size_t draws = 10000;

    SUBCASE("alpha = 2 is standard normal") {
        RandomStream stream(18, 0);
        const auto x = stable_reference_sample(2.0, draws, stream);
        const stats::GofReport gof = stats::ks_one_sample_normal(x);
        CHECK(gof.ks_p_value > 0.01);
    }
    SUBCASE("alpha = 1 is standard Cauchy") {
        RandomStream stream(19, 2);
        auto x = stable_reference_sample(1.0, draws, stream);
        // ECDF at zero
        std::size_t below = 0;
        for (double v : x)
            if (v <= 0.0) ++below;
        CHECK(std::abs(static_cast<double>(below) / draws - 0.5) <= 4.0 * 0.005);
        // quartiles at -1 and +1
        std::sort(x.begin(), x.end());
        CHECK(std::abs(x[draws / 4] + 1.0) <= 0.05);
        CHECK(std::abs(x[3 * draws / 4] - 1.0) <= 0.05);
    }
    SUBCASE("general alpha matches the closed form at alpha = 1") {
        // the general CMS branch evaluated near 1 stays close to Cauchy quartiles
        RandomStream stream(20, 0);
        auto x = stable_reference_sample(1.000001, draws, stream);
        std::sort(x.begin(), x.end());
        CHECK(std::abs(x[draws / 4] + 1.0) <= 0.06);
        CHECK(std::abs(x[3 * draws / 4] - 1.0) <= 0.06);
    }
    SUBCASE("domain") {
        RandomStream stream(21, 0);
        CHECK_THROWS_AS(stable_reference_sample(0.0, 10, stream), DomainError);
        CHECK_THROWS_AS(stable_reference_sample(2.5, 10, stream), DomainError);
    }
}

TEST_CASE("haar_orthogonal_matrix is orthogonal") {
    RandomStream stream(22, 0);
    const DenseMatrix q = haar_orthogonal_matrix(6, stream);
    const DenseMatrix qtq = matmul(q, q.transposed());
    CHECK(max_abs_diff(qtq, DenseMatrix::identity(6)) <= 1e-12);
}

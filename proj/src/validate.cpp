#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ellipvol/errors.hpp"
#include "ellipvol/geometry.hpp"
#include "ellipvol/linalg.hpp"
#include "ellipvol/runner.hpp"
#include "ellipvol/sampling.hpp"
#include "ellipvol/stats.hpp"
#include "ellipvol/theory.hpp"

namespace ellipvol {
namespace runner {
namespace checks {

namespace {

CheckResult bound_check(std::string name, double measured, double tolerance,
                        std::string detail = {}) {
    return {std::move(name), measured, tolerance, measured <= tolerance,
            std::move(detail)};
}

CheckResult flag_check(std::string name, bool pass, std::string detail = {}) {
    return {std::move(name), pass ? 0.0 : 1.0, 0.0, pass, std::move(detail)};
}

double rel_dev(double value, double reference) {
    return std::abs(value - reference) / std::max(1.0, std::abs(reference));
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
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

std::vector<CheckResult> exact_identity_suite() {
    const std::vector<std::size_t> grid = {8, 16, 32, 64};
    constexpr std::uint64_t kSeedLo = 1, kSeedHi = 20;

    double max_logdet_dev = 0.0;       // perpendicular vs Cholesky, relative
    double max_reassembly_dev = 0.0;   // -p log n + sum log(n z) vs log_det
    double max_sym_dev = 0.0;          // ||P - P^T||_max
    double max_idem_dev = 0.0;         // ||P^2 - P||_max
    double max_trace_dev = 0.0;        // |tr P - (n-i)|
    double max_bound_excess = 0.0;     // entry-bound violation
    double max_diag_dev = 0.0;         // diagonal route vs full matrix
    double max_reduction_dev = 0.0;    // weighted row norms vs weighted diagonal
    double max_flat_tracepow_dev = 0.0;   // tr(Q^2) reduced form, flat spectrum
    double max_tracepow_ratio = 0.0;   // reduced-form deviation / deficit bound
    double max_band_excess = 0.0;      // weighted trace outside [C^-1, C](n-i)
    double max_upsilon_dev = 0.0;      // upsilon(simplex) vs pinned simplex
    double max_two_route_dev = 0.0;    // linear-image volume routes
    double max_rotation_dev = 0.0;     // volume under row rotation
    double max_factor_dev = 0.0;       // X route vs (radii, Y) route
    double max_catalog_dev = 0.0;      // cross-polytope/cube log-volume gap

    for (std::uint64_t seed = kSeedLo; seed <= kSeedHi; ++seed) {
        for (std::size_t n : grid) {
            const std::size_t p = n / 2;
            for (int spec_idx = 0; spec_idx < 2; ++spec_idx) {
                const Spectrum spectrum =
                    spec_idx == 0
                        ? Spectrum::identity(n)
                        : build_spectrum({SpectrumSpecKind::near_identity, {}, 1.0}, n);
                RandomStream stream(seed, 1000 + 10 * n + spec_idx);

                const sampling::EllipticalModel model(
                    n, p, spectrum, sampling::RadialLaw::log_normal(0.0, 1.0));
                const sampling::EllipticalSample sample =
                    sampling::elliptical_sample(model, stream);

                // log-determinant, two algorithms
                const double ld = linalg::log_det_gram(sample.y);
                const linalg::PerpendicularDecomposition perp =
                    linalg::perpendicular_log_det(sample.y);
                max_logdet_dev = std::max(max_logdet_dev, rel_dev(perp.log_det, ld));

                double reassembled =
                    -static_cast<double>(p) * std::log(static_cast<double>(n));
                for (double z : perp.z_values)
                    reassembled += std::log(static_cast<double>(n) * z);
                max_reassembly_dev =
                    std::max(max_reassembly_dev, rel_dev(reassembled, perp.log_det));

                // projector identities on a fresh Gaussian matrix
                const DenseMatrix gauss = sampling::gaussian_matrix(p, n, stream);
                const double cond = theory::condition_bound(spectrum);
                for (std::size_t i = 1; i < p; ++i) {
                    const DenseMatrix ni = gauss.top_rows(i);
                    const DenseMatrix pm = linalg::projection_matrix(ni, spectrum);
                    const std::vector<double> diag =
                        linalg::projection_diagonal(ni, spectrum);

                    double trace = 0.0;
                    for (std::size_t k = 0; k < n; ++k) {
                        trace += pm(k, k);
                        max_diag_dev = std::max(max_diag_dev,
                                                std::abs(diag[k] - pm(k, k)));
                        max_bound_excess =
                            std::max({max_bound_excess, -pm(k, k), pm(k, k) - 1.0});
                        for (std::size_t l = 0; l < k; ++l) {
                            max_sym_dev =
                                std::max(max_sym_dev, std::abs(pm(k, l) - pm(l, k)));
                            max_bound_excess =
                                std::max(max_bound_excess, std::abs(pm(k, l)) - 0.5);
                        }
                    }
                    max_trace_dev = std::max(
                        max_trace_dev, std::abs(trace - static_cast<double>(n - i)));

                    max_idem_dev =
                        std::max(max_idem_dev, max_abs_diff(matmul(pm, pm), pm));

                    // trace-of-powers machinery around Q = A P A / T.
                    // tr(Q^2) = tr(A^2 P A^2 P)/T^2 holds per realization; the
                    // reduced form tr(A^4 P)/T^2 is exact only for a flat
                    // spectrum and otherwise deviates by at most
                    // 2 * sum(lambda-1)^2 / T^2 (idempotency plus the entry
                    // bounds give |tr(EPEP)|, |tr(E^2 P)| <= ||E||_F^2 for
                    // E = A^2 - I).
                    double t_hat = 0.0, tr_a4p = 0.0;
                    for (std::size_t k = 0; k < n; ++k) {
                        t_hat += spectrum[k] * diag[k];
                        tr_a4p += spectrum[k] * spectrum[k] * diag[k];
                    }
                    double tr_a2pa2p = 0.0;  // = T^2 tr(Q^2)
                    double row_weighted = 0.0; // sum_kl lambda_k^2 P_kl^2
                    for (std::size_t k = 0; k < n; ++k) {
                        const double lk = spectrum[k];
                        for (std::size_t l = 0; l < n; ++l) {
                            const double pkl2 = pm(k, l) * pm(k, l);
                            tr_a2pa2p += lk * spectrum[l] * pkl2;
                            row_weighted += lk * lk * pkl2;
                        }
                    }
                    // idempotency route: sum_l P_kl^2 = P_kk row by row
                    max_reduction_dev =
                        std::max(max_reduction_dev, rel_dev(row_weighted, tr_a4p));

                    const double tr_q2 = tr_a2pa2p / (t_hat * t_hat);
                    const double reduced = tr_a4p / (t_hat * t_hat);
                    if (spec_idx == 0) {
                        max_flat_tracepow_dev =
                            std::max(max_flat_tracepow_dev, rel_dev(tr_q2, reduced));
                    } else {
                        const double bound =
                            2.0 * theory::b2_deficit(spectrum) / (t_hat * t_hat) +
                            1e-8 * std::abs(tr_q2);
                        max_tracepow_ratio = std::max(
                            max_tracepow_ratio, std::abs(tr_q2 - reduced) / bound);
                    }

                    const double ni_d = static_cast<double>(n - i);
                    max_band_excess = std::max(
                        {max_band_excess, ni_d / cond - t_hat, t_hat - cond * ni_d});
                }

                // volume identities
                const double pinned = geometry::pinned_simplex_log_volume(sample.y);
                const double ups = geometry::upsilon_log_volume(
                    {geometry::BodyKind::standard_simplex, p}, sample.y);
                max_upsilon_dev = std::max(max_upsilon_dev, std::abs(ups - pinned));

                const DenseMatrix m = sampling::gaussian_matrix(p, p, stream);
                const double via_factor = geometry::linear_image_log_volume(m, sample.y);
                const double via_product =
                    geometry::pinned_simplex_log_volume(matmul(m, sample.y));
                max_two_route_dev =
                    std::max(max_two_route_dev, rel_dev(via_factor, via_product));

                const DenseMatrix q = sampling::haar_orthogonal_matrix(n, stream);
                const double rotated =
                    geometry::pinned_simplex_log_volume(matmul(sample.y, q));
                max_rotation_dev = std::max(max_rotation_dev, rel_dev(rotated, pinned));

                double sum_log_r = 0.0;
                for (double radius : sample.radii) sum_log_r += std::log(radius);
                const double from_parts =
                    -std::lgamma(static_cast<double>(p) + 1.0) + sum_log_r + 0.5 * ld;
                const double from_x = geometry::pinned_simplex_log_volume(sample.x);
                max_factor_dev = std::max(max_factor_dev, rel_dev(from_x, from_parts));

                const double gap =
                    geometry::body_log_volume({geometry::BodyKind::symmetric_cube, p}) -
                    geometry::body_log_volume({geometry::BodyKind::cross_polytope, p});
                max_catalog_dev = std::max(
                    max_catalog_dev,
                    std::abs(gap - std::lgamma(static_cast<double>(p) + 1.0)));
            }
        }
    }

    const std::string detail = "seeds 1..20, n in {8,16,32,64}, p = n/2, identity and "
                               "near-identity spectra";
    std::vector<CheckResult> out;
    out.push_back(bound_check("perpendicular vs cholesky log-det (relative)",
                              max_logdet_dev, 1e-8, detail));
    out.push_back(bound_check("perpendicular reassembly -p log n + sum log(n z)",
                              max_reassembly_dev, 1e-10, detail));
    out.push_back(bound_check("projector symmetry ||P - P^T||_max", max_sym_dev, 1e-10,
                              detail));
    out.push_back(bound_check("projector idempotency ||P^2 - P||_max", max_idem_dev,
                              1e-8, detail));
    out.push_back(bound_check("projector trace |tr P - (n-i)|", max_trace_dev, 1e-8,
                              detail));
    out.push_back(bound_check("projector entry bounds excess", max_bound_excess, 1e-10,
                              "diagonal in [0,1], off-diagonal in [-1/2,1/2]"));
    out.push_back(bound_check("projection diagonal vs full matrix", max_diag_dev, 1e-8,
                              detail));
    out.push_back(bound_check("trace-of-powers reduction sum lambda^2 |P row|^2 = "
                              "tr(A^4 P) (relative)",
                              max_reduction_dev, 1e-8, detail));
    out.push_back(bound_check("trace identity tr(Q^2) = tr(A^4 P)/T^2, flat spectrum "
                              "(relative)",
                              max_flat_tracepow_dev, 1e-8,
                              "identity spectrum; exact only when the spectrum is flat"));
    out.push_back(bound_check("trace identity reduced-form deviation within "
                              "2*deficit/T^2 bound",
                              max_tracepow_ratio, 1.0,
                              "near-identity spectra; ratio of deviation to bound"));
    out.push_back(bound_check("weighted trace band [C^-1,C](n-i) excess",
                              max_band_excess, 1e-8, detail));
    out.push_back(bound_check("upsilon(standard simplex) = pinned simplex",
                              max_upsilon_dev, 0.0, "exact equality"));
    out.push_back(bound_check("linear-image volume two-route agreement (relative)",
                              max_two_route_dev, 1e-8, detail));
    out.push_back(bound_check("pinned volume rotation invariance (relative)",
                              max_rotation_dev, 1e-8, detail));
    out.push_back(bound_check("volume factorization X vs (radii, Y) (relative)",
                              max_factor_dev, 1e-8, detail));
    out.push_back(bound_check("cross-polytope/cube catalog gap = log p!",
                              max_catalog_dev, 1e-12, detail));
    return out;
}

std::vector<CheckResult> sphere_moment_suite() {
    const std::vector<std::size_t> ns = {2, 3, 10, 50};
    const std::vector<std::vector<unsigned>> patterns = {
        {1}, {2}, {1, 1}, {2, 1}, {3}};
    constexpr std::size_t kDraws = 100000;

    std::vector<double> max_abs_z(patterns.size(), 0.0);
    for (std::size_t n : ns) {
        RandomStream stream(2024, 100 + n);
        std::vector<std::vector<double>> samples(patterns.size());
        for (auto& s : samples) s.reserve(kDraws);
        for (std::size_t d = 0; d < kDraws; ++d) {
            const std::vector<double> u = sampling::unit_sphere_vector(n, stream);
            for (std::size_t pi = 0; pi < patterns.size(); ++pi) {
                if (patterns[pi].size() > n) continue;
                double prod = 1.0;
                for (std::size_t j = 0; j < patterns[pi].size(); ++j)
                    prod *= std::pow(u[j] * u[j], patterns[pi][j]);
                samples[pi].push_back(prod);
            }
        }
        for (std::size_t pi = 0; pi < patterns.size(); ++pi) {
            if (patterns[pi].size() > n) continue;
            const MeanSe ms = mean_and_se(samples[pi]);
            const double expected = theory::beta_moment(n, patterns[pi]);
            max_abs_z[pi] =
                std::max(max_abs_z[pi], std::abs(ms.mean - expected) / ms.se);
        }
    }

    std::vector<CheckResult> out;
    const char* names[] = {"[1]", "[2]", "[1,1]", "[2,1]", "[3]"};
    for (std::size_t pi = 0; pi < patterns.size(); ++pi)
        out.push_back(bound_check(
            std::string("sphere moment pattern ") + names[pi] + " |z|", max_abs_z[pi],
            5.0, "n in {2,3,10,50}, 1e5 draws"));

    double max_norm_dev = 0.0;
    for (std::size_t n : {2, 3, 10, 50, 300}) {
        const double nn = static_cast<double>(n);
        const double b4 = theory::beta_moment(n, {2});
        const double b22 = theory::beta_moment(n, {1, 1});
        max_norm_dev =
            std::max(max_norm_dev, std::abs(nn * b4 + nn * (nn - 1.0) * b22 - 1.0));
    }
    out.push_back(bound_check("normalization identity n b4 + n(n-1) b22 = 1",
                              max_norm_dev, 1e-12, "n in {2,3,10,50,300}"));

    double max_prod_dev = 0.0;
    for (std::size_t n : ns) {
        for (unsigned r = 1; r <= 5 && r <= n; ++r) {
            const std::vector<unsigned> ones(r, 1);
            double v = theory::beta_moment(n, ones);
            for (unsigned j = 0; j < r; ++j) v *= static_cast<double>(n) + 2.0 * j;
            max_prod_dev = std::max(max_prod_dev, std::abs(v - 1.0));
        }
    }
    out.push_back(bound_check("product identity b(n,[1]*r) prod(n+2j) = 1",
                              max_prod_dev, 1e-12, "r <= 5"));

    bool monotone = true;
    for (unsigned m = 1; m <= 3; ++m)
        for (std::size_t n = 2; n < 60; ++n)
            if (!(theory::beta_moment(n + 1, {m}) < theory::beta_moment(n, {m})))
                monotone = false;
    out.push_back(flag_check("beta moment decreasing in n", monotone, "m in {1,2,3}"));

    double max_u4_dev = 0.0;
    for (std::size_t n : {2, 3, 10, 50, 400}) {
        const double nn = static_cast<double>(n);
        max_u4_dev = std::max(max_u4_dev, std::abs(theory::beta_moment(n, {2}) -
                                                   3.0 / (nn * (nn + 2.0))));
    }
    out.push_back(bound_check("fourth moment closed form 3/(n(n+2))", max_u4_dev, 1e-15));
    return out;
}

std::vector<CheckResult> t_matrix_suite() {
    constexpr std::size_t n = 16, p = 8, draws = 500;
    std::vector<CheckResult> out;

    {
        const Spectrum spectrum = Spectrum::identity(n);
        const theory::TMatrix t = theory::estimate_t_matrix(
            spectrum, p, draws, RandomStream(31, 0), true, 0);
        double max_abs_z = 0.0;
        bool in_range = true;
        for (std::size_t i = 1; i < p; ++i) {
            const double target =
                static_cast<double>(n - i) / static_cast<double>(n);
            for (std::size_t k = 0; k < n; ++k) {
                const double dev = std::abs(t.value(i, k) - target);
                const double se = t.std_error(i, k);
                max_abs_z = std::max(max_abs_z, se > 0.0 ? dev / se : 0.0);
                if (t.value(i, k) < -1e-12 || t.value(i, k) > 1.0 + 1e-12)
                    in_range = false;
            }
        }
        out.push_back(bound_check("t-matrix identity oracle max |z|", max_abs_z, 5.0,
                                  "n=16, p=8, 500 draws vs (n-i)/n"));
        out.push_back(flag_check("t-matrix entries in [0,1]", in_range));
    }

    {
        const Spectrum spectrum =
            build_spectrum({SpectrumSpecKind::near_identity, {}, 1.0}, n);
        const theory::TMatrix t = theory::estimate_t_matrix(
            spectrum, p, draws, RandomStream(47, 0), false, 0);
        double max_ratio = 0.0;
        for (std::size_t i = 1; i < p; ++i) {
            const double dev =
                std::abs(t.raw_row_sums[i - 1] - static_cast<double>(n - i));
            // the trace identity is exact per draw; the floating-point slack
            // keeps a zero-variance row from tripping on rounding alone
            const double tol = 5.0 * t.row_sum_std_errors[i - 1] + 1e-9;
            max_ratio = std::max(max_ratio, dev / tol);
        }
        out.push_back(bound_check("t-matrix raw row sums vs n-i (units of 5 SE)",
                                  max_ratio, 1.0, "near-identity spectrum, c=1"));
    }
    return out;
}

std::vector<CheckResult> quadratic_form_suite() {
    constexpr std::size_t kDraws = 100000;
    const std::size_t ns[] = {2, 3, 5, 10, 2, 3, 5, 10, 2, 3};

    double max_abs_z = 0.0;
    for (std::size_t pair = 0; pair < 10; ++pair) {
        const std::size_t n = ns[pair];
        RandomStream stream(55, pair);
        auto symmetric = [&](void) {
            DenseMatrix g = sampling::gaussian_matrix(n, n, stream);
            DenseMatrix s(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    s(i, j) = 0.5 * (g(i, j) + g(j, i));
            return s;
        };
        const DenseMatrix a = symmetric();
        const DenseMatrix b = symmetric();
        const stats::QuadraticFormCheck qc =
            stats::quadratic_form_moment_check(a, b, n, kDraws, stream);
        max_abs_z = std::max(max_abs_z, std::abs(qc.z_score));
    }

    std::vector<CheckResult> out;
    out.push_back(bound_check("quadratic-form moment identity max |z|", max_abs_z, 5.0,
                              "10 random symmetric pairs, n cycling {2,3,5,10}, 1e5 "
                              "draws"));

    // degenerate cases with exact expectations
    {
        RandomStream stream(56, 0);
        const DenseMatrix eye = DenseMatrix::identity(4);
        const stats::QuadraticFormCheck qc =
            stats::quadratic_form_moment_check(eye, eye, 4, 1000, stream);
        out.push_back(bound_check("quadratic form A=B=I theoretical = 1",
                                  std::abs(qc.theoretical - 1.0), 1e-14));
        out.push_back(bound_check("quadratic form A=B=I empirical = 1",
                                  std::abs(qc.empirical - 1.0), 1e-12,
                                  "z^T z = 1 on the sphere"));
    }
    {
        RandomStream stream(57, 0);
        DenseMatrix a(3, 3), b(3, 3);
        a(0, 0) = 1.0;
        b(1, 1) = 1.0;
        const stats::QuadraticFormCheck qc =
            stats::quadratic_form_moment_check(a, b, 3, 1000, stream);
        out.push_back(bound_check("quadratic form disjoint diagonals = b22 = 1/15",
                                  std::abs(qc.theoretical - 1.0 / 15.0), 1e-15));
    }
    return out;
}

std::vector<CheckResult> statistical_suite() {
    std::vector<CheckResult> out;

    // law of log det(YY^T) must match between a diagonal model and any
    // rotation of it (two-sample KS on independent runs)
    {
        constexpr std::size_t n = 8, p = 4, reps = 2000;
        const Spectrum spectrum = linalg::normalize_spectrum(
            Spectrum({1.5, 1.25, 1.0, 1.0, 0.875, 0.875, 0.75, 0.75}));
        RandomStream setup(91, 0);
        const DenseMatrix q = sampling::haar_orthogonal_matrix(n, setup);
        DenseMatrix m(n, n); // Q diag(sqrt(lambda))
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                m(i, j) = q(i, j) * std::sqrt(spectrum[j]);

        std::vector<double> diag_route(reps), rotated_route(reps);
        const sampling::EllipticalModel model(n, p, spectrum,
                                              sampling::RadialLaw::degenerate());
        for (std::size_t r = 0; r < reps; ++r) {
            RandomStream s1(92, r);
            diag_route[r] =
                linalg::log_det_gram(sampling::elliptical_sample(model, s1).y);
            RandomStream s2(93, r);
            DenseMatrix y(p, n);
            for (std::size_t i = 0; i < p; ++i) {
                const std::vector<double> u = sampling::unit_sphere_vector(n, s2);
                auto row = y.row(i);
                for (std::size_t k = 0; k < n; ++k) {
                    double acc = 0.0;
                    for (std::size_t l = 0; l < n; ++l) acc += m(k, l) * u[l];
                    row[k] = acc;
                }
            }
            rotated_route[r] = linalg::log_det_gram(y);
        }
        const stats::GofReport gof = stats::ks_two_sample(diag_route, rotated_route);
        out.push_back({("rotation invariance of log-det law (two-sample KS p)"),
                       gof.ks_p_value, 0.01, gof.ks_p_value > 0.01,
                       "n=8, p=4, 2000 replicates per route"});
    }

    // eigenvalue recovery is invariant under orthogonal similarity
    {
        RandomStream stream(94, 0);
        const DenseMatrix q = sampling::haar_orthogonal_matrix(3, stream);
        const double eig[] = {5.0, 2.0, 1.0};
        DenseMatrix s(3, 3);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < 3; ++k) acc += q(i, k) * eig[k] * q(j, k);
                s(i, j) = acc;
            }
        const Spectrum found = linalg::jacobi_spectrum(s);
        double dev = 0.0;
        for (std::size_t k = 0; k < 3; ++k)
            dev = std::max(dev, std::abs(found[k] - eig[k]));
        out.push_back(bound_check("jacobi similarity invariance", dev, 1e-9,
                                  "rotation of diag(5,2,1)"));
    }

    // KS p-value approximately uniform under the null
    {
        constexpr std::size_t runs = 200, m = 300;
        std::size_t below = 0;
        for (std::size_t r = 0; r < runs; ++r) {
            RandomStream stream(95, r);
            std::vector<double> x(m);
            stream.fill_normal(x);
            if (stats::ks_one_sample_normal(x).ks_p_value < 0.05) ++below;
        }
        const double frac = static_cast<double>(below) / runs;
        out.push_back({"KS null calibration: fraction with p < 0.05", frac, 0.12,
                       frac >= 0.01 && frac <= 0.12, "200 null runs of size 300"});
    }

    // two-sample KS null calibration on heavy tails
    {
        std::size_t passed = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            RandomStream stream(96, seed);
            const std::vector<double> a =
                sampling::stable_reference_sample(1.0, 5000, stream);
            const std::vector<double> b =
                sampling::stable_reference_sample(1.0, 5000, stream);
            if (stats::ks_two_sample(a, b).ks_p_value > 0.01) ++passed;
        }
        out.push_back({"two-sample KS null (Cauchy pairs) passes",
                       static_cast<double>(passed), 18.0, passed >= 18,
                       "20 seeds, expect >= 18 with p > 0.01"});
    }

    // centered quadratic-form residuals have mean zero
    {
        constexpr std::size_t n = 60, p = 30, i = 10, draws = 5000;
        const Spectrum spectrum = Spectrum::identity(n);
        const theory::TMatrix t = theory::t_matrix_identity(n, p);
        double t_i = 0.0;
        for (std::size_t k = 0; k < n; ++k) t_i += spectrum[k] * t.value(i, k);
        const theory::ZtildeSample zs =
            theory::sample_ztilde(spectrum, i, t_i, draws, RandomStream(97, 0));
        const MeanSe ms = mean_and_se(zs.z);
        out.push_back(bound_check("ztilde centered: |mean| / SE", std::abs(ms.mean) / ms.se,
                                  5.0, "n=60, p=30, i=10, 5000 draws"));
    }

    // norming constants: identity-spectrum closed form and the gamma limit
    {
        constexpr std::size_t n = 400, p = 200;
        const Spectrum spectrum = Spectrum::identity(n);
        const theory::NormingConstants nc = theory::norming_constants(
            spectrum, p, theory::t_matrix_identity(n, p), theory::VarianceVariant::theorem);

        double sigma2_direct = -2.0 * static_cast<double>(p) / n;
        double log_terms = 0.0;
        for (std::size_t i = 1; i < p; ++i) {
            sigma2_direct += 2.0 / static_cast<double>(n - i);
            log_terms += std::log(static_cast<double>(n - i));
        }
        const double mu_direct = std::log(static_cast<double>(n)) -
                                 static_cast<double>(p) * std::log(static_cast<double>(n)) -
                                 sigma2_direct / 2.0 + log_terms;
        out.push_back(bound_check("norming sigma^2 vs direct summation",
                                  std::abs(nc.sigma2 - sigma2_direct), 1e-12,
                                  "identity spectrum, n=400, p=200"));
        out.push_back(bound_check("norming mu vs direct summation (relative)",
                                  rel_dev(nc.mu, mu_direct), 1e-12));
        out.push_back(bound_check("sigma^2 convergence to -2g - 2log(1-g)",
                                  std::abs(nc.sigma2 - theory::variance_limit(0.5)), 0.02,
                                  "gamma = 1/2, n = 400"));

        bool threw = false;
        try {
            (void)theory::norming_constants(Spectrum::identity(4), 2,
                                            theory::t_matrix_identity(4, 2),
                                            theory::VarianceVariant::theorem);
        } catch (const NonPositiveVarianceError&) {
            threw = true;
        }
        out.push_back(flag_check("non-positive variance raised at n=4, p=2", threw,
                                 "sigma^2 = -1/3 under the plain variant"));
    }

    // regime classification scale consistency
    {
        bool consistent = true;
        constexpr double c = 3.0, sigma_n = 0.8;
        constexpr std::size_t p = 64;
        const sampling::RadialLaw laws[] = {
            sampling::RadialLaw::log_normal(0.2, 0.5),
            sampling::RadialLaw::log_cauchy(0.1, 0.7),
            sampling::RadialLaw::log_pareto(1.4, 0.6)};
        for (const auto& law : laws) {
            sampling::RadialLaw scaled = law;
            scaled.scale *= c;
            const auto base = stats::classify_regime(law, p, sigma_n);
            const auto big = stats::classify_regime(scaled, p, sigma_n);
            if (std::abs(big.s_n - c * base.s_n) > 1e-12 * big.s_n ||
                big.alpha != base.alpha)
                consistent = false;
        }
        out.push_back(flag_check("classify_regime scale consistency", consistent,
                                 "scale x3 multiplies s_n by 3, alpha unchanged"));
    }

    // standardize round trip
    {
        RandomStream stream(98, 0);
        std::vector<double> x(100);
        stream.fill_normal(x);
        const std::vector<double> z = stats::standardize(x, 1.7, 2.5);
        const std::vector<double> back = stats::standardize(z, -1.7 / 2.5, 1.0 / 2.5);
        double dev = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k)
            dev = std::max(dev, std::abs(back[k] - x[k]));
        out.push_back(bound_check("standardize round trip", dev, 1e-12));
    }

    return out;
}

std::vector<CheckResult> runner_suite() {
    std::vector<CheckResult> out;

    ExperimentConfig config;
    config.n = 24;
    config.p = 12;
    config.replicates = 64;
    config.master_seed = 7;

    // identical samples for 1 and 4 threads
    {
        ExperimentConfig c1 = config;
        c1.threads = 1;
        ExperimentConfig c4 = config;
        c4.threads = 4;
        const ExperimentReport r1 = run_experiment(c1);
        const ExperimentReport r4 = run_experiment(c4);
        const std::string csv1 = samples_to_csv(r1.samples);
        const std::string csv4 = samples_to_csv(r4.samples);
        out.push_back(flag_check("thread-count invariance of samples CSV", csv1 == csv4,
                                 "threads 1 vs 4, 64 replicates"));

        // CSV round trip is exact
        const std::vector<SampleRecord> parsed = parse_samples_csv(csv1);
        bool exact = parsed.size() == r1.samples.size();
        for (std::size_t i = 0; exact && i < parsed.size(); ++i) {
            const SampleRecord& a = parsed[i];
            const SampleRecord& b = r1.samples[i];
            exact = a.replicate == b.replicate && a.seed == b.seed &&
                    a.log_det == b.log_det && a.sum_log_radii == b.sum_log_radii &&
                    a.log_volume == b.log_volume && a.standardized == b.standardized;
        }
        out.push_back(flag_check("samples CSV round trip exact", exact));

        // degenerate radii: radial column identically zero, V_n reduces to
        // the plain log-det standardization
        double max_radial = 0.0, max_vn_dev = 0.0;
        for (const SampleRecord& s : r1.samples) {
            max_radial = std::max(max_radial, std::abs(s.sum_log_radii));
            const double vn = (s.log_det - r1.norming.mu) / r1.norming.sigma();
            max_vn_dev = std::max(max_vn_dev, std::abs(s.standardized - vn));
        }
        out.push_back(bound_check("degenerate radii: sum_log_radii = 0", max_radial, 0.0));
        out.push_back(bound_check("degenerate radii: V_n = (log det - mu)/sigma",
                                  max_vn_dev, 1e-12));

        // reports byte-identical apart from timings
        const ExperimentReport r1b = run_experiment(c1);
        out.push_back(flag_check(
            "report determinism (timings excluded)",
            report_to_json(r1, false) == report_to_json(r1b, false)));
    }

    // stream derivation behaves like a pure function of (seed, index)
    {
        bool ok = true;
        RandomStream a = derive_replicate_seed(123, 5);
        RandomStream b = derive_replicate_seed(123, 5);
        for (int k = 0; k < 64; ++k)
            if (a.next_u64() != b.next_u64()) ok = false;

        RandomStream c0 = derive_replicate_seed(123, 0);
        RandomStream c1 = derive_replicate_seed(123, 1);
        bool differ01 = false;
        for (int k = 0; k < 64; ++k)
            if (c0.next_u64() != c1.next_u64()) differ01 = true;

        RandomStream d0 = derive_replicate_seed(123, 7);
        RandomStream d1 = derive_replicate_seed(124, 7);
        bool differ_master = false;
        for (int k = 0; k < 64; ++k)
            if (d0.next_u64() != d1.next_u64()) differ_master = true;

        out.push_back(flag_check("replicate stream derivation deterministic and distinct",
                                 ok && differ01 && differ_master));
    }

    // body shift: unit cube run equals simplex run shifted by log p!
    {
        ExperimentConfig simplex = config;
        simplex.replicates = 16;
        ExperimentConfig cube = simplex;
        cube.body = geometry::BodyKind::unit_cube;
        const ExperimentReport rs = run_experiment(simplex);
        const ExperimentReport rc = run_experiment(cube);
        const double expected_shift =
            std::lgamma(static_cast<double>(config.p) + 1.0);
        double dev = 0.0;
        for (std::size_t i = 0; i < rs.samples.size(); ++i)
            dev = std::max(dev, std::abs(rc.samples[i].log_volume -
                                         rs.samples[i].log_volume - expected_shift));
        out.push_back(bound_check("unit-cube run shifts log volume by log p!", dev,
                                  1e-10, "same seeds, 16 replicates"));
    }

    return out;
}

} // namespace checks
} // namespace runner
} // namespace ellipvol

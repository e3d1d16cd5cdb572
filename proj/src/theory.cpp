#include "ellipvol/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ellipvol/errors.hpp"
#include "ellipvol/parallel.hpp"
#include "ellipvol/sampling.hpp"

namespace ellipvol {
namespace theory {

double NormingConstants::sigma() const { return std::sqrt(sigma2); }

double beta_moment(std::size_t n, const std::vector<unsigned>& exponents) {
    if (exponents.empty()) throw DomainError("beta_moment: empty exponent list");
    if (exponents.size() > n)
        throw DomainError("beta_moment: more exponents than coordinates");
    unsigned total = 0;
    for (unsigned m : exponents) {
        if (m == 0) throw DomainError("beta_moment: exponents must be positive");
        total += m;
    }
    if (total > 30) throw DomainError("beta_moment: exponent sum exceeds overflow guard (30)");

    double log_num = 0.0; // sum of log (2m-1)!!
    for (unsigned m : exponents)
        for (unsigned t = 1; t <= m; ++t) log_num += std::log(2.0 * t - 1.0);
    double log_den = 0.0;
    for (unsigned j = 0; j < total; ++j)
        log_den += std::log(static_cast<double>(n) + 2.0 * j);
    return std::exp(log_num - log_den);
}

TMatrix t_matrix_identity(std::size_t n, std::size_t p) {
    if (p < 2 || p > n) throw DomainError("t_matrix_identity: need 2 <= p <= n");
    TMatrix t;
    t.n = n;
    t.p = p;
    t.values.resize((p - 1) * n);
    t.std_errors.assign((p - 1) * n, 0.0);
    t.raw_row_sums.resize(p - 1);
    t.row_sum_std_errors.assign(p - 1, 0.0);
    for (std::size_t i = 1; i < p; ++i) {
        const double v = static_cast<double>(n - i) / static_cast<double>(n);
        std::fill_n(t.values.begin() + (i - 1) * n, n, v);
        t.raw_row_sums[i - 1] = static_cast<double>(n - i);
    }
    return t;
}

TMatrix estimate_t_matrix(const Spectrum& spectrum, std::size_t p, std::size_t mc_draws,
                          const RandomStream& stream, bool renormalize_rows,
                          unsigned threads) {
    const std::size_t n = spectrum.size();
    if (p < 2 || p > n) throw DomainError("estimate_t_matrix: need 2 <= p <= n");
    if (!spectrum.normalized())
        throw DomainError("estimate_t_matrix: spectrum must be normalized");
    if (mc_draws < 2) throw DomainError("estimate_t_matrix: need mc_draws >= 2");

    const std::size_t cells = (p - 1) * n;
    constexpr std::size_t kChunk = 16; // draws per reduction chunk (fixed)
    const std::size_t n_chunks = (mc_draws + kChunk - 1) / kChunk;

    struct ChunkSums {
        std::vector<double> sum, sum_sq;       // per cell
        std::vector<double> row_sum, row_sq;   // per row
        std::size_t accepted = 0;
        std::size_t discarded = 0;
    };
    std::vector<ChunkSums> chunks(n_chunks);

    parallel_for_index(n_chunks, threads, [&](std::size_t c) {
        ChunkSums& cs = chunks[c];
        cs.sum.assign(cells, 0.0);
        cs.sum_sq.assign(cells, 0.0);
        cs.row_sum.assign(p - 1, 0.0);
        cs.row_sq.assign(p - 1, 0.0);
        const std::size_t lo = c * kChunk;
        const std::size_t hi = std::min(mc_draws, lo + kChunk);
        for (std::size_t d = lo; d < hi; ++d) {
            RandomStream draw_stream = stream.split(d);
            const DenseMatrix gauss = sampling::gaussian_matrix(p, n, draw_stream);
            try {
                for (std::size_t i = 1; i < p; ++i) {
                    const std::vector<double> diag =
                        linalg::detail::projection_diagonal_prefix(gauss, i, spectrum);
                    double rs = 0.0;
                    double* s = cs.sum.data() + (i - 1) * n;
                    double* sq = cs.sum_sq.data() + (i - 1) * n;
                    for (std::size_t k = 0; k < n; ++k) {
                        s[k] += diag[k];
                        sq[k] += diag[k] * diag[k];
                        rs += diag[k];
                    }
                    cs.row_sum[i - 1] += rs;
                    cs.row_sq[i - 1] += rs * rs;
                }
                ++cs.accepted;
            } catch (const SingularInnerError&) {
                ++cs.discarded;
            }
        }
    });

    // fixed-order reduction: identical result for any thread count
    std::vector<double> sum(cells, 0.0), sum_sq(cells, 0.0);
    std::vector<double> row_sum(p - 1, 0.0), row_sq(p - 1, 0.0);
    std::size_t accepted = 0, discarded = 0;
    for (const ChunkSums& cs : chunks) {
        for (std::size_t k = 0; k < cells; ++k) {
            sum[k] += cs.sum[k];
            sum_sq[k] += cs.sum_sq[k];
        }
        for (std::size_t r = 0; r + 1 < p; ++r) {
            row_sum[r] += cs.row_sum[r];
            row_sq[r] += cs.row_sq[r];
        }
        accepted += cs.accepted;
        discarded += cs.discarded;
    }

    if (discarded * 100 > mc_draws)
        throw SingularInnerError("estimate_t_matrix: discard rate above 1% (" +
                                 std::to_string(discarded) + " of " +
                                 std::to_string(mc_draws) + " draws)");
    if (accepted < 2) throw SingularInnerError("estimate_t_matrix: fewer than 2 usable draws");

    TMatrix t;
    t.n = n;
    t.p = p;
    t.mc_draws = accepted;
    t.discarded_draws = discarded;
    t.values.resize(cells);
    t.std_errors.resize(cells);
    t.raw_row_sums.resize(p - 1);
    t.row_sum_std_errors.resize(p - 1);

    const double d = static_cast<double>(accepted);
    for (std::size_t k = 0; k < cells; ++k) {
        const double mean = sum[k] / d;
        const double var = std::max(0.0, (sum_sq[k] - d * mean * mean) / (d - 1.0));
        t.values[k] = mean;
        t.std_errors[k] = std::sqrt(var / d);
    }
    for (std::size_t r = 0; r + 1 < p; ++r) {
        const double mean = row_sum[r] / d;
        const double var = std::max(0.0, (row_sq[r] - d * mean * mean) / (d - 1.0));
        t.raw_row_sums[r] = mean;
        t.row_sum_std_errors[r] = std::sqrt(var / d);
    }

    if (renormalize_rows) {
        // exact-constraint variance reduction: each row sum equals n-i
        for (std::size_t i = 1; i < p; ++i) {
            const double target = static_cast<double>(n - i);
            const double factor = target / t.raw_row_sums[i - 1];
            double* v = t.values.data() + (i - 1) * n;
            double* se = t.std_errors.data() + (i - 1) * n;
            for (std::size_t k = 0; k < n; ++k) {
                v[k] *= factor;
                se[k] *= factor;
            }
        }
        t.row_renormalized = true;
    }
    return t;
}

NormingConstants norming_constants(const Spectrum& spectrum, std::size_t p,
                                   const TMatrix& t, VarianceVariant variant) {
    const std::size_t n = spectrum.size();
    if (!spectrum.normalized())
        throw DomainError("norming_constants: spectrum must be normalized");
    if (t.n != n || t.p != p) throw DomainError("norming_constants: t-matrix shape mismatch");

    NormingConstants nc;
    nc.variant = variant;
    nc.n = n;
    nc.p = p;
    nc.gamma = static_cast<double>(p) / static_cast<double>(n);
    nc.per_i_log_terms.resize(p - 1);
    nc.per_i_var_terms.resize(p - 1);

    const auto& lambda = spectrum.values();
    for (std::size_t i = 1; i < p; ++i) {
        double s1 = 0.0; // sum_k lambda_k t_{i,k}
        double s2 = 0.0; // sum_k lambda_k^2 t_{i,k}
        for (std::size_t k = 0; k < n; ++k) {
            const double tv = t.value(i, k);
            s1 += lambda[k] * tv;
            s2 += lambda[k] * lambda[k] * tv;
        }
        if (!(s1 > 0.0)) throw NumericalError("norming_constants: non-positive trace term");
        nc.per_i_log_terms[i - 1] = std::log(s1);
        nc.per_i_var_terms[i - 1] = 2.0 * s2 / (s1 * s1);
    }

    if (variant == VarianceVariant::with_i0)
        nc.i0_var_term = 2.0 * spectrum.sum_sq() / (spectrum.sum() * spectrum.sum());

    double sigma2 = -2.0 * nc.gamma + nc.i0_var_term;
    for (double v : nc.per_i_var_terms) sigma2 += v;
    if (!(sigma2 > 0.0))
        throw NonPositiveVarianceError(
            "norming_constants: sigma_n^2 = " + std::to_string(sigma2) +
            " <= 0; p too small for the asymptotic variance formula");
    nc.sigma2 = sigma2;

    double mu = std::log(spectrum.sum()) -
                static_cast<double>(p) * std::log(static_cast<double>(n)) - sigma2 / 2.0;
    for (double v : nc.per_i_log_terms) mu += v;
    nc.mu = mu;
    return nc;
}

double variance_limit(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw DomainError("variance_limit: gamma must lie in (0,1)");
    return -2.0 * gamma - 2.0 * std::log1p(-gamma);
}

double b2_deficit(const Spectrum& spectrum) {
    const double mean = spectrum.sum() / static_cast<double>(spectrum.size());
    double s = 0.0;
    for (double v : spectrum.values()) s += (v - mean) * (v - mean);
    return s;
}

double condition_bound(const Spectrum& spectrum) {
    return std::max(spectrum.max(), 1.0 / spectrum.min());
}

ZtildeMoment ztilde_second_moment(std::size_t n, double mean_tr_q2, double var_tr_q) {
    if (!std::isfinite(mean_tr_q2) || !std::isfinite(var_tr_q) || var_tr_q < 0.0)
        throw DomainError("ztilde_second_moment: invalid trace statistics");
    const double nn = static_cast<double>(n);
    const double b4 = beta_moment(n, {2});
    const double b22 = beta_moment(n, {1, 1});
    const double n2b4m1 = nn * nn * b4 - 1.0;

    ZtildeMoment m;
    m.components[0] = n2b4m1 * (mean_tr_q2 - 1.0 / (nn - 1.0));
    m.components[1] = mean_tr_q2 * n2b4m1 / (nn - 1.0);
    m.components[2] = nn * nn * b22 * var_tr_q;
    m.value = m.components[0] + m.components[1] + m.components[2];
    return m;
}

ZtildeSample sample_ztilde(const Spectrum& spectrum, std::size_t i, double t_i,
                           std::size_t draws, RandomStream stream) {
    const std::size_t n = spectrum.size();
    if (i == 0 || i >= n) throw DomainError("sample_ztilde: need 1 <= i < n");
    if (!(t_i > 0.0)) throw DomainError("sample_ztilde: normalizer must be positive");

    ZtildeSample out;
    out.z.resize(draws);
    out.tr_q2.resize(draws);
    out.tr_q.resize(draws);

    for (std::size_t d = 0; d < draws; ++d) {
        RandomStream ds = stream.split(d);
        const DenseMatrix gauss = sampling::gaussian_matrix(i, n, ds);
        const std::vector<double> diag = linalg::projection_diagonal(gauss, spectrum);

        double tr_a2p = 0.0, tr_a4p = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            tr_a2p += spectrum[k] * diag[k];
            tr_a4p += spectrum[k] * spectrum[k] * diag[k];
        }
        out.tr_q[d] = tr_a2p / t_i;
        out.tr_q2[d] = tr_a4p / (t_i * t_i);

        // u^T A P A u via the projector complement: orthonormalize the rows
        // of N A (two-pass Gram-Schmidt) and subtract the captured energy
        // of A u from its full squared norm.
        DenseMatrix rows(i, n);
        for (std::size_t a = 0; a < i; ++a) {
            const auto g = gauss.row(a);
            auto r = rows.row(a);
            for (std::size_t k = 0; k < n; ++k) r[k] = g[k] * std::sqrt(spectrum[k]);
        }
        DenseMatrix basis(i, n);
        std::vector<double> v(n);
        for (std::size_t a = 0; a < i; ++a) {
            const auto r = rows.row(a);
            std::copy(r.begin(), r.end(), v.begin());
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t b = 0; b < a; ++b) {
                    const auto qb = basis.row(b);
                    double c = 0.0;
                    for (std::size_t k = 0; k < n; ++k) c += v[k] * qb[k];
                    for (std::size_t k = 0; k < n; ++k) v[k] -= c * qb[k];
                }
            }
            double norm_sq = 0.0;
            for (double x : v) norm_sq += x * x;
            const double inv = 1.0 / std::sqrt(norm_sq);
            auto qa = basis.row(a);
            for (std::size_t k = 0; k < n; ++k) qa[k] = v[k] * inv;
        }

        const std::vector<double> u = sampling::unit_sphere_vector(n, ds);
        std::vector<double> au(n);
        double au_sq = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            au[k] = std::sqrt(spectrum[k]) * u[k];
            au_sq += au[k] * au[k];
        }
        double captured = 0.0;
        for (std::size_t a = 0; a < i; ++a) {
            const auto qa = basis.row(a);
            double c = 0.0;
            for (std::size_t k = 0; k < n; ++k) c += au[k] * qa[k];
            captured += c * c;
        }
        const double quad = au_sq - captured; // u^T A P_i A u
        out.z[d] = static_cast<double>(n) * quad / t_i - 1.0;
    }
    return out;
}

} // namespace theory
} // namespace ellipvol

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "ellipvol/linalg.hpp"
#include "ellipvol/rng.hpp"

namespace ellipvol {
namespace theory {

// Grid of t_{i,k} values for i = 1..p-1, k = 1..n: the expected diagonal
// entries of the complement projectors that drive the norming constants.
// Rows satisfy sum_k t_{i,k} = n - i; `row_renormalized` records whether the
// Monte Carlo estimate was rescaled onto that exact constraint.
struct TMatrix {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<double> values;              // (p-1) x n, row i-1 holds t_{i,.}
    std::vector<double> std_errors;          // same shape; zero for exact values
    std::vector<double> raw_row_sums;        // pre-renormalization row sums, p-1
    std::vector<double> row_sum_std_errors;  // standard error of each row sum, p-1
    std::size_t mc_draws = 0;                // accepted draws
    std::size_t discarded_draws = 0;         // draws lost to singular inner systems
    bool row_renormalized = false;

    // i is the 1-based projector order (1..p-1), k the 0-based coordinate.
    double value(std::size_t i, std::size_t k) const { return values[(i - 1) * n + k]; }
    double std_error(std::size_t i, std::size_t k) const {
        return std_errors[(i - 1) * n + k];
    }
};

enum class VarianceVariant { theorem, with_i0 };

// Centering mu_n and scaling sigma_n^2 of the log-determinant, kept together
// with the per-i summands they were assembled from so the decomposition can
// be rechecked: mu = log(sum lambda) - p log n - sigma2/2 + sum(per_i_log_terms),
// sigma2 = -2p/n + i0_var_term + sum(per_i_var_terms). log(p!) is not part
// of mu; volume formulas carry it separately.
struct NormingConstants {
    double mu = 0.0;
    double sigma2 = 0.0;
    std::vector<double> per_i_log_terms;  // log(sum_k lambda_k t_{i,k}), i = 1..p-1
    std::vector<double> per_i_var_terms;  // 2 * sum(lambda^2 t) / (sum(lambda t))^2
    double i0_var_term = 0.0;             // 2 * sum(lambda^2)/(sum lambda)^2 when with_i0
    VarianceVariant variant = VarianceVariant::theorem;
    double gamma = 0.0;  // p/n
    std::size_t n = 0;
    std::size_t p = 0;

    double sigma() const;
};

// Exact mixed even moments of the sphere coordinates:
//   E[U_1^{2 m_1} ... U_r^{2 m_r}] = prod_j (2 m_j - 1)!! / prod_{j=0}^{M-1} (n + 2j),
// with M = sum m_j, evaluated in log space. Guards: r <= n, M <= 30.
double beta_moment(std::size_t n, const std::vector<unsigned>& exponents);

// Closed form t_{i,k} = (n-i)/n for the identity spectrum.
TMatrix t_matrix_identity(std::size_t n, std::size_t p);

// Monte Carlo estimate of the t-matrix: each draw samples one Gaussian
// matrix and walks the nested projector diagonals i = 1..p-1 on its leading
// rows. Draw d uses the child stream split(d), and partial sums are reduced
// in fixed chunk order, so the result depends only on (stream origin,
// mc_draws), never on the worker count. Draws whose inner system is
// singular are discarded; more than 1% discards is an error.
TMatrix estimate_t_matrix(const Spectrum& spectrum, std::size_t p, std::size_t mc_draws,
                          const RandomStream& stream, bool renormalize_rows = true,
                          unsigned threads = 1);

// Assembles (mu_n, sigma_n^2) from a normalized spectrum and a t-matrix.
// Throws NonPositiveVarianceError when sigma_n^2 <= 0 (p too small for the
// asymptotic formula). The with_i0 variant adds the i = 0 variance summand
// 2*sum(lambda^2)/(sum lambda)^2, the leading finite-n correction.
NormingConstants norming_constants(const Spectrum& spectrum, std::size_t p,
                                   const TMatrix& t, VarianceVariant variant);

// Limit of sigma_n^2 for the identity spectrum: -2 gamma - 2 log(1 - gamma).
double variance_limit(double gamma);

// sum_k (lambda_k - mean)^2, the flatness deficit the spectrum assumption
// asks to vanish. Purely diagnostic.
double b2_deficit(const Spectrum& spectrum);

// Smallest admissible eigenvalue bound: max(lambda_max, 1/lambda_min).
double condition_bound(const Spectrum& spectrum);

struct ZtildeMoment {
    double value = 0.0;                     // E[Ztilde^2]
    std::array<double, 3> components{};     // the three summands
};

// Theoretical second moment of the centered normalized quadratic form
// Ztilde = n u^T Q u - 1:
//   (n^2 b4 - 1)(E[tr Q^2] - 1/(n-1)) + E[tr Q^2](n^2 b4 - 1)/(n-1)
//   + n^2 b22 Var(tr Q),
// with b4, b22 the sphere moments of order (4) and (2,2).
ZtildeMoment ztilde_second_moment(std::size_t n, double mean_tr_q2, double var_tr_q);

// Simulated draws of Ztilde for one projector order i together with the
// per-draw trace statistics tr(Q^2) and tr(Q) the moment formula consumes.
// t_i is the deterministic normalizer sum_k lambda_k t_{i,k}.
struct ZtildeSample {
    std::vector<double> z;
    std::vector<double> tr_q2;
    std::vector<double> tr_q;
};
ZtildeSample sample_ztilde(const Spectrum& spectrum, std::size_t i, double t_i,
                           std::size_t draws, RandomStream stream);

} // namespace theory
} // namespace ellipvol

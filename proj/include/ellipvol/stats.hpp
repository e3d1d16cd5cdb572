#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ellipvol/matrix.hpp"
#include "ellipvol/rng.hpp"
#include "ellipvol/sampling.hpp"

namespace ellipvol {
namespace stats {

enum class ReferenceKind { normal, stable_two_sample };

struct GofReport {
    std::size_t sample_size = 0;
    double ks_statistic = 0.0;
    double ks_p_value = 1.0;
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;         // bias-corrected
    double excess_kurtosis = 0.0;  // bias-corrected
    ReferenceKind reference = ReferenceKind::normal;
    double reference_alpha = 0.0;  // stability index when two-sample vs stable
};

// (x - center) / scale elementwise; scale must be positive.
std::vector<double> standardize(std::span<const double> samples, double center,
                                double scale);

// Survival function of the Kolmogorov distribution, Q(t) = P(K > t).
double kolmogorov_survival(double t);

// One-sample Kolmogorov-Smirnov test against the standard normal, with the
// usual finite-sample adjustment (sqrt(m) + 0.12 + 0.11/sqrt(m)) applied to
// the statistic before the asymptotic series. Needs at least 20 samples.
GofReport ks_one_sample_normal(std::span<const double> samples);

// Two-sample KS with effective size m_a m_b / (m_a + m_b).
GofReport ks_two_sample(std::span<const double> a, std::span<const double> b);

enum class RegimeKind { normal_limit, stable_limit, mixed };

// Which limit the standardized log-volume follows, decided by the size of
// the radial fluctuation scale s_n against sigma_n/2. The window
// (0.1, 10) for their ratio is a reporting heuristic; raw s_n and sigma_n/2
// are always carried so callers can re-classify.
struct RegimeClassification {
    RegimeKind regime = RegimeKind::normal_limit;
    double alpha = 2.0;      // stability index of the radial limit
    double tau = 0.0;        // s_n / (sigma_n/2), mixed regime only
    double s_n = 0.0;
    double m_n = 0.0;
    double sigma_half = 0.0;
};

RegimeClassification classify_regime(const sampling::RadialLaw& law, std::size_t p,
                                     double sigma_n);

const char* regime_kind_name(RegimeKind kind);

// Monte Carlo check of the exact fourth-moment identity for quadratic forms
// in sphere coordinates:
//   E[z^T A z * z^T B z] = b22 (tr A tr B + 2 tr(AB)) + (b4 - 3 b22) tr(A o B).
struct QuadraticFormCheck {
    double empirical = 0.0;
    double theoretical = 0.0;
    double z_score = 0.0;
    double std_error = 0.0;
};

QuadraticFormCheck quadratic_form_moment_check(const DenseMatrix& a, const DenseMatrix& b,
                                               std::size_t n, std::size_t mc_draws,
                                               RandomStream& stream);

} // namespace stats
} // namespace ellipvol

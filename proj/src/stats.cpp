#include "ellipvol/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ellipvol/errors.hpp"
#include "ellipvol/theory.hpp"

namespace ellipvol {
namespace stats {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// D and the adjusted p-value shared by both KS variants.
double ks_p_value(double d, double effective_size) {
    const double rm = std::sqrt(effective_size);
    return kolmogorov_survival((rm + 0.12 + 0.11 / rm) * d);
}

struct Moments {
    double mean, variance, skewness, excess_kurtosis;
};

Moments sample_moments(std::span<const double> x) {
    const double m = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= m;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= m;
    m3 /= m;
    m4 /= m;

    Moments out{};
    out.mean = mean;
    out.variance = m2 * m / (m - 1.0);
    const double g1 = m3 / std::pow(m2, 1.5);
    out.skewness = std::sqrt(m * (m - 1.0)) / (m - 2.0) * g1;
    const double g2 = m4 / (m2 * m2) - 3.0;
    out.excess_kurtosis =
        (m - 1.0) / ((m - 2.0) * (m - 3.0)) * ((m + 1.0) * g2 + 6.0);
    return out;
}

} // namespace

std::vector<double> standardize(std::span<const double> samples, double center,
                                double scale) {
    if (!(scale > 0.0)) throw DomainError("standardize: scale must be positive");
    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        out[i] = (samples[i] - center) / scale;
    return out;
}

double kolmogorov_survival(double t) {
    if (t <= 0.0) return 1.0;
    if (t < 1.18) {
        // theta-function form, fast for small t
        const double v = std::numbers::pi * std::numbers::pi / (8.0 * t * t);
        const double z = std::exp(-v);
        double cdf = 0.0;
        for (int j = 1; j <= 7; j += 2) {
            const double term = std::pow(z, j * j);
            cdf += term;
            if (term < 1e-18) break;
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / t;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    // alternating series, fast for large t
    double q = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * t * t);
        q += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::clamp(2.0 * q, 0.0, 1.0);
}

namespace {

void require_finite(std::span<const double> samples, const char* who) {
    for (double v : samples)
        if (!std::isfinite(v))
            throw DomainError(std::string(who) + ": non-finite sample value");
}

} // namespace

GofReport ks_one_sample_normal(std::span<const double> samples) {
    if (samples.size() < 20)
        throw TooFewSamplesError("ks_one_sample_normal: need at least 20 samples");
    require_finite(samples, "ks_one_sample_normal");

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(sorted.size());

    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = normal_cdf(sorted[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / m,
                                 static_cast<double>(i + 1) / m - f));
    }

    GofReport r;
    r.sample_size = sorted.size();
    r.ks_statistic = d;
    r.ks_p_value = ks_p_value(d, m);
    const Moments mo = sample_moments(samples);
    r.mean = mo.mean;
    r.variance = mo.variance;
    r.skewness = mo.skewness;
    r.excess_kurtosis = mo.excess_kurtosis;
    r.reference = ReferenceKind::normal;
    return r;
}

GofReport ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 20 || b.size() < 20)
        throw TooFewSamplesError("ks_two_sample: need at least 20 samples on each side");
    require_finite(a, "ks_two_sample");
    require_finite(b, "ks_two_sample");

    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const double ma = static_cast<double>(sa.size());
    const double mb = static_cast<double>(sb.size());
    double d = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < sa.size() && ib < sb.size()) {
        const double va = sa[ia];
        const double vb = sb[ib];
        // step past ties on both sides before comparing the empirical CDFs
        if (va <= vb) while (ia < sa.size() && sa[ia] == va) ++ia;
        if (vb <= va) while (ib < sb.size() && sb[ib] == vb) ++ib;
        d = std::max(d, std::abs(static_cast<double>(ia) / ma -
                                 static_cast<double>(ib) / mb));
    }

    GofReport r;
    r.sample_size = sa.size();
    r.ks_statistic = d;
    r.ks_p_value = ks_p_value(d, ma * mb / (ma + mb));
    const Moments mo = sample_moments(a);
    r.mean = mo.mean;
    r.variance = mo.variance;
    r.skewness = mo.skewness;
    r.excess_kurtosis = mo.excess_kurtosis;
    r.reference = ReferenceKind::stable_two_sample;
    return r;
}

RegimeClassification classify_regime(const sampling::RadialLaw& law, std::size_t p,
                                     double sigma_n) {
    if (!(sigma_n > 0.0)) throw DomainError("classify_regime: sigma_n must be positive");
    if (p == 0) throw DomainError("classify_regime: need p >= 1");
    law.validate();

    const double pd = static_cast<double>(p);
    RegimeClassification c;
    c.sigma_half = sigma_n / 2.0;
    c.alpha = law.stable_index();

    switch (law.kind) {
        case sampling::RadialKind::degenerate1:
            c.m_n = 0.0;
            c.s_n = 0.0;
            break;
        case sampling::RadialKind::log_normal:
            c.m_n = pd * law.location;
            c.s_n = law.scale * std::sqrt(pd);
            break;
        case sampling::RadialKind::log_cauchy:
            c.m_n = pd * law.location;
            c.s_n = pd * law.scale;
            break;
        case sampling::RadialKind::log_pareto:
            c.m_n = 0.0; // symmetric law
            c.s_n = law.scale * std::pow(pd, 1.0 / law.alpha);
            break;
    }

    if (c.s_n == 0.0) {
        c.regime = RegimeKind::normal_limit;
        return c;
    }
    const double ratio = c.s_n / c.sigma_half;
    if (ratio > 0.1 && ratio < 10.0) {
        c.regime = RegimeKind::mixed;
        c.tau = ratio;
    } else if (ratio >= 10.0) {
        c.regime = RegimeKind::stable_limit;
    } else {
        c.regime = RegimeKind::normal_limit;
    }
    return c;
}

const char* regime_kind_name(RegimeKind kind) {
    switch (kind) {
        case RegimeKind::normal_limit: return "normal_limit";
        case RegimeKind::stable_limit: return "stable_limit";
        case RegimeKind::mixed: return "mixed";
    }
    return "?";
}

QuadraticFormCheck quadratic_form_moment_check(const DenseMatrix& a, const DenseMatrix& b,
                                               std::size_t n, std::size_t mc_draws,
                                               RandomStream& stream) {
    if (a.rows() != n || a.cols() != n || b.rows() != n || b.cols() != n)
        throw DomainError("quadratic_form_moment_check: matrices must be n x n");
    if (mc_draws < 2) throw DomainError("quadratic_form_moment_check: need draws >= 2");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(a(i, j) - a(j, i)) > 1e-12 || std::abs(b(i, j) - b(j, i)) > 1e-12)
                throw NotSymmetricError("quadratic_form_moment_check: input not symmetric");

    const double b4 = theory::beta_moment(n, {2});
    const double b22 = theory::beta_moment(n, {1, 1});
    double tr_a = 0.0, tr_b = 0.0, tr_ab = 0.0, tr_had = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tr_a += a(i, i);
        tr_b += b(i, i);
        tr_had += a(i, i) * b(i, i);
        for (std::size_t j = 0; j < n; ++j) tr_ab += a(i, j) * b(j, i);
    }
    const double theoretical =
        b22 * (tr_a * tr_b + 2.0 * tr_ab) + (b4 - 3.0 * b22) * tr_had;

    auto quad = [n](const DenseMatrix& m, const std::vector<double>& z) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += m(i, j) * z[j];
            s += z[i] * row;
        }
        return s;
    };

    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t d = 0; d < mc_draws; ++d) {
        const std::vector<double> z = sampling::unit_sphere_vector(n, stream);
        const double v = quad(a, z) * quad(b, z);
        sum += v;
        sum_sq += v * v;
    }
    const double m = static_cast<double>(mc_draws);
    const double mean = sum / m;
    const double var = std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0));
    const double se = std::sqrt(var / m);

    QuadraticFormCheck out;
    out.empirical = mean;
    out.theoretical = theoretical;
    out.std_error = se;
    if (se == 0.0) {
        // zero sample variance (e.g. A = B = I, where every draw is exactly
        // normalized): agreement at rounding precision counts as z = 0
        const bool agrees =
            std::abs(mean - theoretical) <= 1e-12 * std::max(1.0, std::abs(theoretical));
        out.z_score = agrees ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        out.z_score = (mean - theoretical) / se;
    }
    return out;
}

} // namespace stats
} // namespace ellipvol

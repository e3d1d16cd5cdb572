#include "ellipvol/sampling.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ellipvol/errors.hpp"

namespace ellipvol {
namespace sampling {

RadialLaw RadialLaw::degenerate() { return {}; }

RadialLaw RadialLaw::log_normal(double mean, double sd) {
    RadialLaw law{RadialKind::log_normal, mean, sd, 2.0};
    law.validate();
    return law;
}

RadialLaw RadialLaw::log_cauchy(double location, double scale) {
    RadialLaw law{RadialKind::log_cauchy, location, scale, 1.0};
    law.validate();
    return law;
}

RadialLaw RadialLaw::log_pareto(double alpha, double scale) {
    RadialLaw law{RadialKind::log_pareto, 0.0, scale, alpha};
    law.validate();
    return law;
}

double RadialLaw::stable_index() const {
    switch (kind) {
        case RadialKind::degenerate1: return 2.0;
        case RadialKind::log_normal: return 2.0;
        case RadialKind::log_cauchy: return 1.0;
        case RadialKind::log_pareto: return alpha;
    }
    throw DomainError("RadialLaw: unknown kind");
}

void RadialLaw::validate() const {
    if (kind == RadialKind::degenerate1) return;
    if (!(scale > 0.0)) throw DomainError("RadialLaw: scale must be positive");
    if (kind == RadialKind::log_pareto && !(alpha > 0.0 && alpha < 2.0))
        throw DomainError("RadialLaw: log_pareto tail index must lie in (0,2)");
}

EllipticalModel::EllipticalModel(std::size_t n_, std::size_t p_, Spectrum spectrum_,
                                 RadialLaw radial_)
    : n(n_), p(p_), spectrum(std::move(spectrum_)), radial(radial_) {
    if (p < 2 || p > n) throw DomainError("EllipticalModel: need 2 <= p <= n");
    if (spectrum.size() != n) throw DomainError("EllipticalModel: spectrum length != n");
    if (!spectrum.normalized())
        throw DomainError("EllipticalModel: spectrum must be normalized (sum = n)");
    radial.validate();
}

DenseMatrix gaussian_matrix(std::size_t p, std::size_t n, RandomStream& stream) {
    if (p == 0 || n == 0) throw DomainError("gaussian_matrix: need p, n >= 1");
    DenseMatrix m(p, n);
    for (std::size_t i = 0; i < p; ++i) stream.fill_normal(m.row(i));
    return m;
}

std::vector<double> unit_sphere_vector(std::size_t n, RandomStream& stream) {
    if (n == 0) throw DomainError("unit_sphere_vector: need n >= 1");
    std::vector<double> v(n);
    if (n == 1) {
        // the sphere in one dimension is {-1, +1}; take the sign exactly
        double g;
        do {
            g = stream.next_normal();
        } while (g == 0.0);
        v[0] = g > 0.0 ? 1.0 : -1.0;
        return v;
    }
    for (;;) {
        stream.fill_normal(v);
        double norm_sq = 0.0;
        for (double x : v) norm_sq += x * x;
        if (norm_sq > 0.0) {
            const double inv = 1.0 / std::sqrt(norm_sq);
            for (double& x : v) x *= inv;
            return v;
        }
    }
}

std::vector<double> sample_log_radii(const RadialLaw& law, std::size_t p,
                                     RandomStream& stream) {
    if (p == 0) throw DomainError("sample_log_radii: need p >= 1");
    law.validate();
    std::vector<double> r(p);
    switch (law.kind) {
        case RadialKind::degenerate1:
            std::fill(r.begin(), r.end(), 0.0);
            break;
        case RadialKind::log_normal:
            for (double& x : r) x = law.location + law.scale * stream.next_normal();
            break;
        case RadialKind::log_cauchy:
            for (double& x : r) {
                const double u = stream.next_double();
                x = law.location + law.scale * std::tan(std::numbers::pi * (u - 0.5));
            }
            break;
        case RadialKind::log_pareto:
            // log R = sign * scale * U^{-1/alpha}: symmetric Pareto tails,
            // in the stable domain of attraction with norming ~ p^{1/alpha}.
            for (double& x : r) {
                const double u = stream.next_double_pos();
                const double sign = (stream.next_u64() & 1u) ? 1.0 : -1.0;
                x = sign * law.scale * std::pow(u, -1.0 / law.alpha);
            }
            break;
    }
    return r;
}

std::vector<double> sample_radii(const RadialLaw& law, std::size_t p, RandomStream& stream) {
    std::vector<double> r = sample_log_radii(law, p, stream);
    for (double& x : r) x = std::exp(x);
    return r;
}

EllipticalSample elliptical_sample(const EllipticalModel& model, RandomStream& stream) {
    const std::size_t n = model.n;
    const std::size_t p = model.p;

    std::vector<double> root_lambda(n);
    for (std::size_t k = 0; k < n; ++k) root_lambda[k] = std::sqrt(model.spectrum[k]);

    EllipticalSample s{DenseMatrix(p, n), {}, {}, DenseMatrix(p, n)};
    for (std::size_t i = 0; i < p; ++i) {
        const std::vector<double> u = unit_sphere_vector(n, stream);
        auto y = s.y.row(i);
        for (std::size_t k = 0; k < n; ++k) y[k] = root_lambda[k] * u[k];
    }
    s.log_radii = sample_log_radii(model.radial, p, stream);
    s.radii.resize(p);
    for (std::size_t i = 0; i < p; ++i) s.radii[i] = std::exp(s.log_radii[i]);
    for (std::size_t i = 0; i < p; ++i) {
        const double r = s.radii[i];
        const auto y = s.y.row(i);
        auto x = s.x.row(i);
        for (std::size_t k = 0; k < n; ++k) x[k] = r * y[k];
    }
    return s;
}

std::vector<double> stable_reference_sample(double alpha, std::size_t size,
                                            RandomStream& stream) {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw DomainError("stable_reference_sample: alpha must lie in (0,2]");

    std::vector<double> out(size);
    if (alpha == 2.0) {
        stream.fill_normal(out);
        return out;
    }
    if (alpha == 1.0) {
        for (double& x : out)
            x = std::tan(std::numbers::pi * (stream.next_double() - 0.5));
        return out;
    }
    for (double& x : out) {
        const double v = std::numbers::pi * (stream.next_double() - 0.5);
        const double w = stream.next_exponential();
        x = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
            std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
    }
    return out;
}

DenseMatrix haar_orthogonal_matrix(std::size_t n, RandomStream& stream) {
    // Row-wise Gram-Schmidt of a Gaussian matrix with positive row scales
    // yields a Haar frame.
    const DenseMatrix g = gaussian_matrix(n, n, stream);
    DenseMatrix q(n, n);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = g.row(i);
        std::copy(row.begin(), row.end(), v.begin());
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < i; ++j) {
                const auto qj = q.row(j);
                double c = 0.0;
                for (std::size_t k = 0; k < n; ++k) c += v[k] * qj[k];
                for (std::size_t k = 0; k < n; ++k) v[k] -= c * qj[k];
            }
        }
        double norm_sq = 0.0;
        for (double x : v) norm_sq += x * x;
        if (!(norm_sq > 0.0))
            throw NumericalError("haar_orthogonal_matrix: degenerate Gaussian draw");
        const double inv = 1.0 / std::sqrt(norm_sq);
        auto qi = q.row(i);
        for (std::size_t k = 0; k < n; ++k) qi[k] = v[k] * inv;
    }
    return q;
}

} // namespace sampling
} // namespace ellipvol

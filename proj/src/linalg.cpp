#include "ellipvol/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ellipvol/errors.hpp"

namespace ellipvol {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// In-place lower Cholesky factor of a symmetric matrix. Returns false as
// soon as a pivot falls at or below `pivot_floor`.
bool cholesky_in_place(DenseMatrix& g, double pivot_floor) {
    const std::size_t n = g.rows();
    for (std::size_t j = 0; j < n; ++j) {
        double d = g(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= g(j, k) * g(j, k);
        if (!(d > pivot_floor)) return false;
        const double ljj = std::sqrt(d);
        g(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = g(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= g(i, k) * g(j, k);
            g(i, j) = s / ljj;
        }
    }
    // zero the strict upper triangle so the factor is usable as-is
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) g(i, j) = 0.0;
    return true;
}

// Solves L y = b in place (L lower triangular).
void forward_solve(const DenseMatrix& l, std::span<double> b) {
    const std::size_t n = l.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        const auto li = l.row(i);
        for (std::size_t k = 0; k < i; ++k) s -= li[k] * b[k];
        b[i] = s / li[i];
    }
}

// Gram matrix of the rows of y under the weights: G_ab = sum_k y_ak w_k y_bk.
// With unit weights this is Y Y^T.
DenseMatrix weighted_row_gram(const DenseMatrix& y, const double* weights) {
    const std::size_t p = y.rows();
    const std::size_t n = y.cols();
    DenseMatrix g(p, p);
    for (std::size_t a = 0; a < p; ++a) {
        const auto ra = y.row(a);
        for (std::size_t b = 0; b <= a; ++b) {
            const auto rb = y.row(b);
            double s = 0.0;
            if (weights) {
                for (std::size_t k = 0; k < n; ++k) s += ra[k] * weights[k] * rb[k];
            } else {
                for (std::size_t k = 0; k < n; ++k) s += ra[k] * rb[k];
            }
            g(a, b) = s;
            g(b, a) = s;
        }
    }
    return g;
}

double max_diagonal(const DenseMatrix& g) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.rows(); ++i) m = std::max(m, g(i, i));
    return m;
}

} // namespace

Spectrum::Spectrum(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw DomainError("Spectrum: empty");
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!(values_[k] > 0.0) || !std::isfinite(values_[k]))
            throw NotPositiveError("Spectrum: eigenvalue " + std::to_string(k) +
                                   " is not a positive finite real");
        if (k > 0 && values_[k] > values_[k - 1])
            throw DomainError("Spectrum: values must be sorted descending");
        sum_ += values_[k];
        sum_sq_ += values_[k] * values_[k];
    }
    const double n = static_cast<double>(values_.size());
    normalized_ = std::abs(sum_ - n) <= 1e-12 * n;
}

Spectrum Spectrum::identity(std::size_t n) {
    return Spectrum(std::vector<double>(n, 1.0));
}

bool Spectrum::is_identity() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 1.0; });
}

namespace linalg {

double log_det_gram(const DenseMatrix& y) {
    const std::size_t p = y.rows();
    const std::size_t n = y.cols();
    if (p == 0 || p > n) throw DomainError("log_det_gram: need 1 <= p <= n");

    DenseMatrix g = weighted_row_gram(y, nullptr);
    const double floor =
        static_cast<double>(p) * static_cast<double>(n) * kEps * max_diagonal(g);
    if (!cholesky_in_place(g, floor))
        throw RankDeficientError("log_det_gram: Gram matrix numerically rank deficient");

    double log_det = 0.0;
    for (std::size_t j = 0; j < p; ++j) log_det += 2.0 * std::log(g(j, j));
    return log_det;
}

PerpendicularDecomposition perpendicular_log_det(const DenseMatrix& y) {
    const std::size_t p = y.rows();
    const std::size_t n = y.cols();
    if (p == 0 || p > n) throw DomainError("perpendicular_log_det: need 1 <= p <= n");

    PerpendicularDecomposition out;
    out.z_values.reserve(p);

    DenseMatrix basis(p, n); // orthonormal rows built so far
    std::vector<double> v(n);
    for (std::size_t i = 0; i < p; ++i) {
        const auto row = y.row(i);
        std::copy(row.begin(), row.end(), v.begin());
        const double row_norm_sq = dot(row, row);

        // one orthogonalization pass plus one full re-orthogonalization pass
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < i; ++j) {
                const auto q = basis.row(j);
                const double c = dot({v.data(), n}, q);
                for (std::size_t k = 0; k < n; ++k) v[k] -= c * q[k];
            }
        }

        const double len_sq = dot({v.data(), n}, {v.data(), n});
        if (!(len_sq > static_cast<double>(n) * kEps * row_norm_sq))
            throw RankDeficientError("perpendicular_log_det: row " + std::to_string(i) +
                                     " lies in the span of the rows before it");

        out.z_values.push_back(len_sq);
        out.log_det += std::log(len_sq);

        const double inv_len = 1.0 / std::sqrt(len_sq);
        auto q = basis.row(i);
        for (std::size_t k = 0; k < n; ++k) q[k] = v[k] * inv_len;
    }
    return out;
}

namespace {

// Shared setup of projection_matrix / projection_diagonal: Cholesky factor
// of N A^2 N^T over the first `i` rows of `n_mat`.
DenseMatrix inner_cholesky(const DenseMatrix& n_mat, std::size_t i, const Spectrum& spectrum) {
    const std::size_t n = n_mat.cols();
    if (i == 0 || i >= n) throw DomainError("projection: need 1 <= i < n");
    if (spectrum.size() != n) throw DomainError("projection: spectrum length != n");

    DenseMatrix g = weighted_row_gram(n_mat.top_rows(i), spectrum.values().data());
    const double floor =
        static_cast<double>(i) * static_cast<double>(n) * kEps * max_diagonal(g);
    if (!cholesky_in_place(g, floor))
        throw SingularInnerError("projection: inner system numerically singular");
    return g;
}

} // namespace

DenseMatrix projection_matrix(const DenseMatrix& n_i, const Spectrum& spectrum) {
    const std::size_t i = n_i.rows();
    const std::size_t n = n_i.cols();
    const DenseMatrix l = inner_cholesky(n_i, i, spectrum);

    // C = L^{-1} (A N^T)^T = L^{-1} N A, row-major i-by-n. Then
    // P = I - C^T C, assembled on the lower triangle and mirrored so the
    // result is exactly symmetric.
    DenseMatrix c(i, n);
    for (std::size_t a = 0; a < i; ++a) {
        const auto na = n_i.row(a);
        auto ca = c.row(a);
        for (std::size_t k = 0; k < n; ++k)
            ca[k] = na[k] * std::sqrt(spectrum[k]);
    }
    // forward substitution applied to every column at once, row by row
    for (std::size_t a = 0; a < i; ++a) {
        auto ca = c.row(a);
        for (std::size_t b = 0; b < a; ++b) {
            const double lab = l(a, b);
            const auto cb = c.row(b);
            for (std::size_t k = 0; k < n; ++k) ca[k] -= lab * cb[k];
        }
        const double inv = 1.0 / l(a, a);
        for (std::size_t k = 0; k < n; ++k) ca[k] *= inv;
    }

    DenseMatrix p = DenseMatrix::identity(n);
    for (std::size_t a = 0; a < i; ++a) {
        const auto ca = c.row(a);
        for (std::size_t k = 0; k < n; ++k) {
            const double cak = ca[k];
            if (cak == 0.0) continue;
            for (std::size_t m = 0; m <= k; ++m) p(k, m) -= cak * ca[m];
        }
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t m = 0; m < k; ++m) p(m, k) = p(k, m);
    return p;
}

namespace detail {

std::vector<double> projection_diagonal_prefix(const DenseMatrix& n_full, std::size_t i,
                                               const Spectrum& spectrum) {
    const std::size_t n = n_full.cols();
    const DenseMatrix l = inner_cholesky(n_full, i, spectrum);

    // p_kk = 1 - lambda_k ||L^{-1} w_k||^2 with w_k the k-th column of N;
    // only the forward solve is needed.
    std::vector<double> diag(n);
    std::vector<double> w(i);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t a = 0; a < i; ++a) w[a] = n_full(a, k);
        forward_solve(l, w);
        diag[k] = 1.0 - spectrum[k] * dot({w.data(), i}, {w.data(), i});
    }
    return diag;
}

} // namespace detail

std::vector<double> projection_diagonal(const DenseMatrix& n_i, const Spectrum& spectrum) {
    return detail::projection_diagonal_prefix(n_i, n_i.rows(), spectrum);
}

Spectrum jacobi_spectrum(const DenseMatrix& s) {
    const std::size_t n = s.rows();
    if (n == 0 || s.cols() != n) throw DomainError("jacobi_spectrum: matrix must be square");
    if (n > 2000) throw DomainError("jacobi_spectrum: n > 2000 unsupported");

    double scale = 0.0;
    for (double v : s.entries()) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(s(i, j) - s(j, i)) > 1e-10 * std::max(1.0, scale))
                throw NotSymmetricError("jacobi_spectrum: input not symmetric");

    DenseMatrix a = s;
    double frob_sq = 0.0;
    for (double v : a.entries()) frob_sq += v * v;
    const double off_target_sq = 1e-24 * frob_sq; // (1e-12 * ||S||_F)^2

    auto off_diag_sq = [&] {
        double o = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) o += 2.0 * a(i, j) * a(i, j);
        return o;
    };

    for (int sweep = 0; sweep < 64; ++sweep) {
        if (off_diag_sq() <= off_target_sq) break;
        if (sweep == 63)
            throw NumericalError("jacobi_spectrum: rotations did not converge");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
            }
        }
    }

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end(), std::greater<>());
    if (eig.back() <= 0.0)
        throw NotPositiveError("jacobi_spectrum: non-positive eigenvalue");
    return Spectrum(eig);
}

Spectrum normalize_spectrum(const Spectrum& s) {
    const double factor = static_cast<double>(s.size()) / s.sum();
    std::vector<double> scaled = s.values();
    for (double& v : scaled) v *= factor;
    return Spectrum(std::move(scaled));
}

double log_abs_det(const DenseMatrix& m) {
    const std::size_t n = m.rows();
    if (n == 0 || m.cols() != n) throw DomainError("log_abs_det: matrix must be square");

    DenseMatrix a = m;
    double scale = 0.0;
    for (double v : a.entries()) scale = std::max(scale, std::abs(v));
    const double floor = static_cast<double>(n) * kEps * scale;

    double log_det = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t piv = j;
        for (std::size_t i = j + 1; i < n; ++i)
            if (std::abs(a(i, j)) > std::abs(a(piv, j))) piv = i;
        if (!(std::abs(a(piv, j)) > floor))
            throw SingularMatrixError("log_abs_det: matrix numerically singular");
        if (piv != j)
            for (std::size_t k = 0; k < n; ++k) std::swap(a(j, k), a(piv, k));
        log_det += std::log(std::abs(a(j, j)));
        for (std::size_t i = j + 1; i < n; ++i) {
            const double f = a(i, j) / a(j, j);
            if (f == 0.0) continue;
            for (std::size_t k = j; k < n; ++k) a(i, k) -= f * a(j, k);
        }
    }
    return log_det;
}

} // namespace linalg
} // namespace ellipvol

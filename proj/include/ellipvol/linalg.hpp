#pragma once

#include <cstddef>
#include <vector>

#include "ellipvol/matrix.hpp"

namespace ellipvol {

// Ordered eigenvalues of a positive definite matrix (the model's AA^T),
// sorted descending. `normalized()` is true when the values sum to their
// count, the convention under which the norming constants are evaluated.
class Spectrum {
public:
    explicit Spectrum(std::vector<double> values);

    static Spectrum identity(std::size_t n);

    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }

    bool normalized() const { return normalized_; }
    double sum() const { return sum_; }
    double sum_sq() const { return sum_sq_; }
    double max() const { return values_.front(); }
    double min() const { return values_.back(); }

    // True when every eigenvalue equals 1 exactly; the closed-form t-matrix
    // applies in that case.
    bool is_identity() const;

private:
    std::vector<double> values_;
    double sum_ = 0.0;
    double sum_sq_ = 0.0;
    bool normalized_ = false;
};

namespace linalg {

// Log of squared perpendicular lengths of each row against the span of the
// rows before it. `log_det` equals the sum of their logs; `z_values[i]` is
// the squared perpendicular length of row i+1 (the per-row factor before
// the 1/n scaling used in the norming analysis).
struct PerpendicularDecomposition {
    double log_det = 0.0;
    std::vector<double> z_values;
};

// log det(Y Y^T) through a Cholesky factorization of the p-by-p Gram
// matrix. Throws RankDeficientError when a pivot falls at or below
// p*n*eps*max(diag), the almost-surely-impossible degenerate event.
double log_det_gram(const DenseMatrix& y);

// Same quantity as log_det_gram through the method of perpendiculars:
// modified Gram-Schmidt over the rows with one full re-orthogonalization
// pass, no pivoting. Agrees with the Cholesky route to 1e-8 relative.
PerpendicularDecomposition perpendicular_log_det(const DenseMatrix& y);

// Projector onto the orthogonal complement of the rows of diag(sqrt(lambda))
// applied to N_i:  P = I - A N^T (N A^2 N^T)^{-1} N A,  A = diag(sqrt(lambda)).
// Exactly symmetric by construction; idempotent and trace n-i up to
// rounding. Throws SingularInnerError when the inner i-by-i system is
// numerically singular.
DenseMatrix projection_matrix(const DenseMatrix& n_i, const Spectrum& spectrum);

// Diagonal of projection_matrix without forming it, through the rank-one
// identity p_kk = 1 - lambda_k w_k^T (N A^2 N^T)^{-1} w_k with w_k the k-th
// column of N. One Cholesky factorization is shared by all n entries, so
// the cost is O(i^3 + n i^2).
std::vector<double> projection_diagonal(const DenseMatrix& n_i, const Spectrum& spectrum);

namespace detail {
// Same as projection_diagonal but using only the first `i` rows of `n_full`
// without copying them out; the Monte Carlo t-matrix loop walks i upward
// over one fixed Gaussian matrix.
std::vector<double> projection_diagonal_prefix(const DenseMatrix& n_full, std::size_t i,
                                               const Spectrum& spectrum);
} // namespace detail

// Eigenvalues of a symmetric positive definite matrix by cyclic Jacobi
// rotations, iterated until the off-diagonal Frobenius mass drops below
// 1e-12 times the Frobenius norm. Throws NotSymmetricError when the input
// is asymmetric beyond 1e-10 and NotPositiveError when any eigenvalue is
// non-positive.
Spectrum jacobi_spectrum(const DenseMatrix& s);

// Rescales the spectrum so its values sum to n; order is preserved.
Spectrum normalize_spectrum(const Spectrum& s);

// log |det M| of a square matrix by LU with partial pivoting. Throws
// SingularMatrixError when a pivot falls at or below n*eps*max|entry|.
double log_abs_det(const DenseMatrix& m);

} // namespace linalg
} // namespace ellipvol

#pragma once

#include <cstddef>

#include "ellipvol/matrix.hpp"

namespace ellipvol {
namespace geometry {

enum class BodyKind {
    standard_simplex, // {x_i >= 0, sum x_i <= 1}
    unit_cube,        // [0,1]^p
    symmetric_cube,   // [-1,1]^p
    cross_polytope,   // {sum |x_i| <= 1}
    unit_ball         // Euclidean
};

struct ConvexBodyKind {
    BodyKind kind = BodyKind::standard_simplex;
    std::size_t p = 1;
};

const char* body_kind_name(BodyKind kind);

// log Vol_p of the reference body; everything stays in log space so p in
// the hundreds never overflows a factorial.
double body_log_volume(const ConvexBodyKind& body);

// log volume of the simplex spanned by the origin and the rows of X:
// -log(p!) + (1/2) log det(X X^T).
double pinned_simplex_log_volume(const DenseMatrix& x);

// log volume of the linear image of `body` under the map with rows of Y:
// (1/2) log det(Y Y^T) + log Vol_p(body). With the standard simplex this is
// exactly pinned_simplex_log_volume.
double upsilon_log_volume(const ConvexBodyKind& body, const DenseMatrix& y);

// log volume of the simplex spanned by the rows of M * Y, evaluated as
// -log(p!) + (1/2) log det(Y Y^T) + log|det M| and cross-checked against the
// direct route through M * Y to 1e-8 relative. Throws SingularMatrixError
// when M is numerically singular and NumericalError when the routes differ.
double linear_image_log_volume(const DenseMatrix& m, const DenseMatrix& y);

} // namespace geometry
} // namespace ellipvol

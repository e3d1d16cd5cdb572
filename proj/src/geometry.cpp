#include "ellipvol/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ellipvol/errors.hpp"
#include "ellipvol/linalg.hpp"

namespace ellipvol {
namespace geometry {

const char* body_kind_name(BodyKind kind) {
    switch (kind) {
        case BodyKind::standard_simplex: return "standard_simplex";
        case BodyKind::unit_cube: return "unit_cube";
        case BodyKind::symmetric_cube: return "symmetric_cube";
        case BodyKind::cross_polytope: return "cross_polytope";
        case BodyKind::unit_ball: return "unit_ball";
    }
    return "?";
}

double body_log_volume(const ConvexBodyKind& body) {
    if (body.p == 0) throw DomainError("body_log_volume: need p >= 1");
    const double p = static_cast<double>(body.p);
    switch (body.kind) {
        case BodyKind::standard_simplex:
            return -std::lgamma(p + 1.0);
        case BodyKind::unit_cube:
            return 0.0;
        case BodyKind::symmetric_cube:
            return p * std::numbers::ln2;
        case BodyKind::cross_polytope:
            return p * std::numbers::ln2 - std::lgamma(p + 1.0);
        case BodyKind::unit_ball:
            return (p / 2.0) * std::log(std::numbers::pi) - std::lgamma(p / 2.0 + 1.0);
    }
    throw DomainError("body_log_volume: unknown body");
}

double upsilon_log_volume(const ConvexBodyKind& body, const DenseMatrix& y) {
    if (body.p != y.rows())
        throw DomainError("upsilon_log_volume: body dimension != row count");
    return 0.5 * linalg::log_det_gram(y) + body_log_volume(body);
}

double pinned_simplex_log_volume(const DenseMatrix& x) {
    return upsilon_log_volume({BodyKind::standard_simplex, x.rows()}, x);
}

double linear_image_log_volume(const DenseMatrix& m, const DenseMatrix& y) {
    const std::size_t p = y.rows();
    if (m.rows() != p || m.cols() != p)
        throw DomainError("linear_image_log_volume: M must be p x p");

    const double direct = -std::lgamma(static_cast<double>(p) + 1.0) +
                          0.5 * linalg::log_det_gram(y) + linalg::log_abs_det(m);
    const double reference = pinned_simplex_log_volume(matmul(m, y));
    const double tol = 1e-8 * std::max(1.0, std::abs(reference));
    if (std::abs(direct - reference) > tol)
        throw NumericalError("linear_image_log_volume: evaluation routes disagree (" +
                             std::to_string(direct) + " vs " + std::to_string(reference) +
                             ")");
    return direct;
}

} // namespace geometry
} // namespace ellipvol

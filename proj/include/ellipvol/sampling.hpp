#pragma once

#include <cstddef>
#include <vector>

#include "ellipvol/linalg.hpp"
#include "ellipvol/matrix.hpp"
#include "ellipvol/rng.hpp"

namespace ellipvol {
namespace sampling {

enum class RadialKind { degenerate1, log_normal, log_cauchy, log_pareto };

// Law of the radius R >= 0 through the law of log R. The catalog covers the
// three limit regimes of the radial sum: vanishing (degenerate), Gaussian
// (log-normal), and heavy-tailed alpha-stable (log-Cauchy, log-Pareto).
struct RadialLaw {
    RadialKind kind = RadialKind::degenerate1;
    double location = 0.0; // mean of log R (log_normal) / location (log_cauchy)
    double scale = 1.0;    // sd of log R / Cauchy scale / Pareto scale
    double alpha = 2.0;    // tail index, log_pareto only, in (0,2)

    static RadialLaw degenerate();
    static RadialLaw log_normal(double mean, double sd);
    static RadialLaw log_cauchy(double location, double scale);
    static RadialLaw log_pareto(double alpha, double scale);

    // Stability index of the limit of the normalized radial log-sum.
    double stable_index() const;

    void validate() const;
};

// Data-generating process: p points x_i = R_i A u_i in R^n with
// A = diag(sqrt(lambda)) from a normalized spectrum, u_i uniform on the
// sphere, R_i from the radial law, all independent.
struct EllipticalModel {
    std::size_t n;
    std::size_t p;
    Spectrum spectrum;
    RadialLaw radial;

    EllipticalModel(std::size_t n, std::size_t p, Spectrum spectrum, RadialLaw radial);
};

// p-by-n matrix of independent standard normals (Box-Muller pairs in
// row-major fill order).
DenseMatrix gaussian_matrix(std::size_t p, std::size_t n, RandomStream& stream);

// Uniform random point on the unit sphere of R^n: a Gaussian vector divided
// by its norm, redrawn in the probability-zero event of an exactly zero norm.
std::vector<double> unit_sphere_vector(std::size_t n, RandomStream& stream);

// p i.i.d. draws of log R. This is the primitive the laws are defined
// through; it is always finite, even deep in the Cauchy tails where
// R = exp(log R) itself overflows the double range.
std::vector<double> sample_log_radii(const RadialLaw& law, std::size_t p,
                                     RandomStream& stream);

// p i.i.d. radius draws, exp of sample_log_radii draw for draw.
std::vector<double> sample_radii(const RadialLaw& law, std::size_t p, RandomStream& stream);

struct EllipticalSample {
    DenseMatrix x;                  // rows R_i * A u_i
    std::vector<double> radii;      // R_1..R_p (= exp(log_radii))
    std::vector<double> log_radii;  // log R_1..log R_p, always finite
    DenseMatrix y;                  // rows A u_i
};

// Draw order: the p sphere directions first (building Y), then the p radii;
// X = diag(R) Y holds exactly.
EllipticalSample elliptical_sample(const EllipticalModel& model, RandomStream& stream);

// i.i.d. standard symmetric alpha-stable draws via the Chambers-Mallows-Stuck
// transform. alpha = 1 is the standard Cauchy; alpha = 2 returns standard
// normals (the CMS output N(0,2) rescaled to the unit-variance convention
// used throughout the reports).
std::vector<double> stable_reference_sample(double alpha, std::size_t size,
                                            RandomStream& stream);

// Haar-distributed orthogonal matrix: Gram-Schmidt frame of a Gaussian matrix.
DenseMatrix haar_orthogonal_matrix(std::size_t n, RandomStream& stream);

} // namespace sampling
} // namespace ellipvol

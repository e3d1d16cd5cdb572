#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ellipvol/geometry.hpp"
#include "ellipvol/rng.hpp"
#include "ellipvol/sampling.hpp"
#include "ellipvol/stats.hpp"
#include "ellipvol/theory.hpp"

namespace ellipvol {
namespace runner {

enum class SpectrumSpecKind { identity, explicit_values, near_identity };

// How to build the model spectrum. `near_identity` produces eigenvalues
// 1 +/- d with d chosen so the flatness deficit equals c/n and the mean
// stays 1, exercising non-identity code paths while keeping the guaranteed
// regime.
struct SpectrumSpec {
    SpectrumSpecKind kind = SpectrumSpecKind::identity;
    std::vector<double> values; // explicit_values only; normalized on load
    double c = 1.0;             // near_identity deficit target, sum (lambda-1)^2 = c/n
};

struct ExperimentConfig {
    std::size_t n = 0;
    std::size_t p = 0;    // 0 when gamma is given
    double gamma = 0.0;   // 0 when p is given; p = round(gamma * n)
    SpectrumSpec spectrum_spec;
    sampling::RadialLaw radial_spec;
    std::size_t replicates = 1;
    std::size_t mc_draws = 200;
    theory::VarianceVariant variance_variant = theory::VarianceVariant::theorem;
    std::optional<geometry::BodyKind> body; // none = pinned simplex
    std::uint64_t master_seed = 0;
    unsigned threads = 0; // 0 = auto

    std::size_t resolved_p() const;
    void validate() const;
};

// Strict JSON codec: field names match the struct, unknown keys are
// rejected, `p` and `gamma` are mutually exclusive.
ExperimentConfig parse_config_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

Spectrum build_spectrum(const SpectrumSpec& spec, std::size_t n);

struct SampleRecord {
    std::uint64_t replicate = 0;
    std::uint64_t seed = 0; // stream fingerprint, see derive_seed_tag
    double log_det = 0.0;
    double sum_log_radii = 0.0;
    double log_volume = 0.0;
    double standardized = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;
    theory::NormingConstants norming;
    // t-matrix summary
    std::size_t t_mc_draws = 0;
    std::size_t t_discarded_draws = 0;
    bool t_row_renormalized = false;
    double t_max_abs_row_residual = 0.0; // max |raw row sum - (n-i)|
    double t_max_std_error = 0.0;
    std::vector<SampleRecord> samples;
    stats::GofReport gof;
    stats::RegimeClassification regime;
    double b2_deficit = 0.0;
    double condition_bound = 0.0;
    double seconds_t_matrix = 0.0;
    double seconds_replicates = 0.0;
    double seconds_total = 0.0;
};

// Stream for replicate `index` of a run seeded with `master`. The mapping
// (master, index) -> stream state is injective; see RandomStream.
RandomStream derive_replicate_seed(std::uint64_t master, std::uint64_t index);

// 64-bit fingerprint of a replicate stream, the value written to the CSV
// seed column: mix64(mix64(master) ^ (index * 0x9e3779b97f4a7c15 + 1)).
std::uint64_t derive_seed_tag(std::uint64_t master, std::uint64_t index);

// Runs the full pipeline: spectrum, t-matrix (closed form for the identity
// spectrum, Monte Carlo otherwise), norming constants, parallel replicates,
// standardization and the goodness-of-fit test matching the classified
// regime. Output is deterministic for a fixed (config, master_seed)
// whatever the thread count. A failed replicate aborts the experiment with
// its seed in the error message.
ExperimentReport run_experiment(const ExperimentConfig& config);

// samples CSV, header: replicate,seed,log_det,sum_log_radii,log_volume,standardized
// Floating values use shortest round-trip decimals, so parse(emit(x)) == x.
std::string samples_to_csv(const std::vector<SampleRecord>& samples);
std::vector<SampleRecord> parse_samples_csv(const std::string& text);

// Structured report as JSON. Timing fields live under "timings" and are the
// only part allowed to differ between reruns of the same configuration.
std::string report_to_json(const ExperimentReport& report, bool include_timings = true);

// --- validation suite -----------------------------------------------------

struct CheckResult {
    std::string name;
    double measured = 0.0;   // observed deviation / statistic
    double tolerance = 0.0;  // bound it must respect
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool all_pass() const;
    std::string to_text() const; // one line per check
};

namespace checks {
// Per-realization exact identities on seeds 1..20, n in {8,16,32,64},
// p = n/2: perpendicular vs Cholesky, projector symmetry/idempotency/trace,
// entry bounds, trace-of-powers identity, weighted-trace band, body-volume
// identities and the two-route linear-image agreement.
std::vector<CheckResult> exact_identity_suite();
// Empirical sphere moments vs the closed form on the standard pattern grid,
// plus the exact normalization and product identities.
std::vector<CheckResult> sphere_moment_suite();
// Monte Carlo t-matrix against the closed form (identity spectrum) and the
// row-sum constraint (near-identity spectrum).
std::vector<CheckResult> t_matrix_suite();
// Quadratic-form moment identity on a fixed grid of random symmetric pairs.
std::vector<CheckResult> quadratic_form_suite();
// Statistical invariants: rotation invariance of the log-determinant law,
// KS null calibration, centered quadratic-form residuals, norming-constant
// convergence, regime scale consistency.
std::vector<CheckResult> statistical_suite();
// Runner plumbing: thread-count invariance, CSV round trip, degenerate
// radial law reductions, stream derivation determinism.
std::vector<CheckResult> runner_suite();
} // namespace checks

// Runs every suite; exit status of the CLI `validate` command is 0 iff
// all_pass().
ValidationReport run_validation_suite();

} // namespace runner
} // namespace ellipvol

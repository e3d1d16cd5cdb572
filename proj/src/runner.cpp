#include "ellipvol/runner.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <string>

#include "json.hpp"

#include "ellipvol/errors.hpp"
#include "ellipvol/parallel.hpp"

namespace ellipvol {
namespace runner {

using json = nlohmann::json;
using clock_type = std::chrono::steady_clock;

namespace {

// Stream indices reserved for non-replicate randomness; replicate indices
// are expected to stay far below these.
constexpr std::uint64_t kTMatrixStreamIndex = 0xffffffff00000001ULL;
constexpr std::uint64_t kGofStreamIndex = 0xffffffff00000002ULL;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const char* context) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw ConfigError(std::string("unknown key \"") + item.key() + "\" in " +
                              context);
    }
}

template <typename T>
T get_field(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("field \"") + key + "\" has the wrong type");
    }
}

sampling::RadialLaw parse_radial(const json& j) {
    if (!j.is_object()) throw ConfigError("radial_spec must be an object");
    const std::string kind = get_field<std::string>(j, "kind", "");
    if (kind == "degenerate1") {
        require_keys(j, {"kind"}, "radial_spec");
        return sampling::RadialLaw::degenerate();
    }
    if (kind == "log_normal") {
        require_keys(j, {"kind", "mean", "sd"}, "radial_spec");
        return sampling::RadialLaw::log_normal(get_field<double>(j, "mean", 0.0),
                                               get_field<double>(j, "sd", 1.0));
    }
    if (kind == "log_cauchy") {
        require_keys(j, {"kind", "location", "scale"}, "radial_spec");
        return sampling::RadialLaw::log_cauchy(get_field<double>(j, "location", 0.0),
                                               get_field<double>(j, "scale", 1.0));
    }
    if (kind == "log_pareto") {
        require_keys(j, {"kind", "alpha", "scale"}, "radial_spec");
        return sampling::RadialLaw::log_pareto(get_field<double>(j, "alpha", 1.5),
                                               get_field<double>(j, "scale", 1.0));
    }
    throw ConfigError("radial_spec.kind must be one of degenerate1, log_normal, "
                      "log_cauchy, log_pareto");
}

json radial_to_json(const sampling::RadialLaw& law) {
    switch (law.kind) {
        case sampling::RadialKind::degenerate1:
            return {{"kind", "degenerate1"}};
        case sampling::RadialKind::log_normal:
            return {{"kind", "log_normal"}, {"mean", law.location}, {"sd", law.scale}};
        case sampling::RadialKind::log_cauchy:
            return {{"kind", "log_cauchy"},
                    {"location", law.location},
                    {"scale", law.scale}};
        case sampling::RadialKind::log_pareto:
            return {{"kind", "log_pareto"}, {"alpha", law.alpha}, {"scale", law.scale}};
    }
    throw ConfigError("radial law kind unknown");
}

SpectrumSpec parse_spectrum_spec(const json& j) {
    if (!j.is_object()) throw ConfigError("spectrum_spec must be an object");
    SpectrumSpec spec;
    const std::string kind = get_field<std::string>(j, "kind", "");
    if (kind == "identity") {
        require_keys(j, {"kind"}, "spectrum_spec");
        spec.kind = SpectrumSpecKind::identity;
    } else if (kind == "explicit") {
        require_keys(j, {"kind", "values"}, "spectrum_spec");
        spec.kind = SpectrumSpecKind::explicit_values;
        spec.values = get_field<std::vector<double>>(j, "values", {});
        if (spec.values.empty())
            throw ConfigError("spectrum_spec: explicit kind needs non-empty values");
    } else if (kind == "near_identity") {
        require_keys(j, {"kind", "c"}, "spectrum_spec");
        spec.kind = SpectrumSpecKind::near_identity;
        spec.c = get_field<double>(j, "c", 1.0);
        if (!(spec.c > 0.0)) throw ConfigError("spectrum_spec: c must be positive");
    } else {
        throw ConfigError(
            "spectrum_spec.kind must be one of identity, explicit, near_identity");
    }
    return spec;
}

json spectrum_spec_to_json(const SpectrumSpec& spec) {
    switch (spec.kind) {
        case SpectrumSpecKind::identity: return {{"kind", "identity"}};
        case SpectrumSpecKind::explicit_values:
            return {{"kind", "explicit"}, {"values", spec.values}};
        case SpectrumSpecKind::near_identity:
            return {{"kind", "near_identity"}, {"c", spec.c}};
    }
    throw ConfigError("spectrum spec kind unknown");
}

geometry::BodyKind parse_body_kind(const std::string& name) {
    if (name == "standard_simplex") return geometry::BodyKind::standard_simplex;
    if (name == "unit_cube") return geometry::BodyKind::unit_cube;
    if (name == "symmetric_cube") return geometry::BodyKind::symmetric_cube;
    if (name == "cross_polytope") return geometry::BodyKind::cross_polytope;
    if (name == "unit_ball") return geometry::BodyKind::unit_ball;
    throw ConfigError("body must be one of standard_simplex, unit_cube, symmetric_cube, "
                      "cross_polytope, unit_ball");
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double_token(std::string_view token, const char* what) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw ConfigError(std::string("malformed ") + what + " in CSV: \"" +
                          std::string(token) + "\"");
    return v;
}

std::uint64_t parse_u64_token(std::string_view token, const char* what) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw ConfigError(std::string("malformed ") + what + " in CSV: \"" +
                          std::string(token) + "\"");
    return v;
}

} // namespace

std::size_t ExperimentConfig::resolved_p() const {
    if (p != 0) return p;
    return static_cast<std::size_t>(
        std::llround(gamma * static_cast<double>(n)));
}

void ExperimentConfig::validate() const {
    if (n == 0) throw ConfigError("config: n is required");
    if ((p == 0) == (gamma == 0.0))
        throw ConfigError("config: exactly one of p and gamma must be set");
    if (gamma != 0.0 && !(gamma > 0.0 && gamma < 1.0))
        throw ConfigError("config: gamma must lie in (0,1)");
    const std::size_t rp = resolved_p();
    if (rp < 2 || rp > n) throw ConfigError("config: need 2 <= p <= n");
    if (replicates == 0) throw ConfigError("config: replicates must be >= 1");
    if (spectrum_spec.kind == SpectrumSpecKind::explicit_values &&
        spectrum_spec.values.size() != n)
        throw ConfigError("config: explicit spectrum length must equal n");
    radial_spec.validate();
}

ExperimentConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    require_keys(j,
                 {"n", "p", "gamma", "spectrum_spec", "radial_spec", "replicates",
                  "mc_draws", "variance_variant", "body", "master_seed", "threads"},
                 "config");

    ExperimentConfig c;
    c.n = get_field<std::size_t>(j, "n", 0);
    c.p = get_field<std::size_t>(j, "p", 0);
    c.gamma = get_field<double>(j, "gamma", 0.0);
    if (j.contains("spectrum_spec")) c.spectrum_spec = parse_spectrum_spec(j["spectrum_spec"]);
    if (j.contains("radial_spec")) c.radial_spec = parse_radial(j["radial_spec"]);
    c.replicates = get_field<std::size_t>(j, "replicates", 1);
    c.mc_draws = get_field<std::size_t>(j, "mc_draws", 200);
    const std::string variant = get_field<std::string>(j, "variance_variant", "theorem");
    if (variant == "theorem") {
        c.variance_variant = theory::VarianceVariant::theorem;
    } else if (variant == "with_i0") {
        c.variance_variant = theory::VarianceVariant::with_i0;
    } else {
        throw ConfigError("variance_variant must be \"theorem\" or \"with_i0\"");
    }
    if (j.contains("body") && !j["body"].is_null())
        c.body = parse_body_kind(get_field<std::string>(j, "body", ""));
    c.master_seed = get_field<std::uint64_t>(j, "master_seed", 0);
    c.threads = get_field<unsigned>(j, "threads", 0);
    c.validate();
    return c;
}

std::string config_to_json(const ExperimentConfig& config) {
    json j;
    j["n"] = config.n;
    if (config.p != 0)
        j["p"] = config.p;
    else
        j["gamma"] = config.gamma;
    j["spectrum_spec"] = spectrum_spec_to_json(config.spectrum_spec);
    j["radial_spec"] = radial_to_json(config.radial_spec);
    j["replicates"] = config.replicates;
    j["mc_draws"] = config.mc_draws;
    j["variance_variant"] =
        config.variance_variant == theory::VarianceVariant::theorem ? "theorem" : "with_i0";
    if (config.body) j["body"] = geometry::body_kind_name(*config.body);
    j["master_seed"] = config.master_seed;
    j["threads"] = config.threads;
    return j.dump(2);
}

Spectrum build_spectrum(const SpectrumSpec& spec, std::size_t n) {
    switch (spec.kind) {
        case SpectrumSpecKind::identity: return Spectrum::identity(n);
        case SpectrumSpecKind::explicit_values: {
            if (spec.values.size() != n)
                throw ConfigError("explicit spectrum length must equal n");
            std::vector<double> v = spec.values;
            std::sort(v.begin(), v.end(), std::greater<>());
            return linalg::normalize_spectrum(Spectrum(std::move(v)));
        }
        case SpectrumSpecKind::near_identity: {
            // eigenvalues 1 +/- d in equal numbers (one exact 1 when n is
            // odd), with d set so sum (lambda - 1)^2 = c/n and sum = n.
            const std::size_t pairs = n / 2;
            if (pairs == 0) throw ConfigError("near_identity spectrum needs n >= 2");
            const double d =
                std::sqrt(spec.c / (static_cast<double>(n) * 2.0 * static_cast<double>(pairs)));
            if (!(d < 1.0))
                throw ConfigError("near_identity: deficit too large, eigenvalues would be "
                                  "non-positive");
            std::vector<double> v;
            v.reserve(n);
            for (std::size_t k = 0; k < pairs; ++k) v.push_back(1.0 + d);
            if (n % 2 == 1) v.push_back(1.0);
            for (std::size_t k = 0; k < pairs; ++k) v.push_back(1.0 - d);
            return Spectrum(std::move(v));
        }
    }
    throw ConfigError("spectrum spec kind unknown");
}

RandomStream derive_replicate_seed(std::uint64_t master, std::uint64_t index) {
    return RandomStream(master, index);
}

std::uint64_t derive_seed_tag(std::uint64_t master, std::uint64_t index) {
    return detail::mix64(detail::mix64(master) ^
                         (index * 0x9e3779b97f4a7c15ULL + 1ULL));
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto t_total = clock_type::now();

    const std::size_t n = config.n;
    const std::size_t p = config.resolved_p();
    const unsigned threads = resolve_thread_count(config.threads);

    ExperimentReport rep;
    rep.config = config;

    const Spectrum spectrum = build_spectrum(config.spectrum_spec, n);
    rep.b2_deficit = theory::b2_deficit(spectrum);
    rep.condition_bound = theory::condition_bound(spectrum);

    const auto t_tmat = clock_type::now();
    const theory::TMatrix t =
        spectrum.is_identity()
            ? theory::t_matrix_identity(n, p)
            : theory::estimate_t_matrix(spectrum, p, config.mc_draws,
                                        derive_replicate_seed(config.master_seed,
                                                              kTMatrixStreamIndex),
                                        true, threads);
    rep.seconds_t_matrix = seconds_since(t_tmat);
    rep.t_mc_draws = t.mc_draws;
    rep.t_discarded_draws = t.discarded_draws;
    rep.t_row_renormalized = t.row_renormalized;
    for (std::size_t i = 1; i < p; ++i) {
        rep.t_max_abs_row_residual =
            std::max(rep.t_max_abs_row_residual,
                     std::abs(t.raw_row_sums[i - 1] - static_cast<double>(n - i)));
    }
    for (double se : t.std_errors) rep.t_max_std_error = std::max(rep.t_max_std_error, se);

    rep.norming = theory::norming_constants(spectrum, p, t, config.variance_variant);
    rep.regime = stats::classify_regime(config.radial_spec, p, rep.norming.sigma());

    const geometry::ConvexBodyKind body{
        config.body.value_or(geometry::BodyKind::standard_simplex), p};
    const double body_lv = geometry::body_log_volume(body);
    const double center = rep.norming.mu / 2.0 + rep.regime.m_n + body_lv;
    const double scale = std::max(rep.regime.sigma_half, rep.regime.s_n);

    const sampling::EllipticalModel model(n, p, spectrum, config.radial_spec);

    rep.samples.resize(config.replicates);
    const auto t_reps = clock_type::now();
    parallel_for_index(config.replicates, threads, [&](std::size_t r) {
        RandomStream stream = derive_replicate_seed(config.master_seed, r);
        const std::uint64_t tag = derive_seed_tag(config.master_seed, r);
        try {
            const sampling::EllipticalSample s = sampling::elliptical_sample(model, stream);
            const linalg::PerpendicularDecomposition perp =
                linalg::perpendicular_log_det(s.y);
            double sum_log_r = 0.0;
            if (config.radial_spec.kind != sampling::RadialKind::degenerate1)
                for (double lr : s.log_radii) sum_log_r += lr;

            SampleRecord& rec = rep.samples[r];
            rec.replicate = r;
            rec.seed = tag;
            rec.log_det = perp.log_det;
            rec.sum_log_radii = sum_log_r;
            rec.log_volume = 0.5 * perp.log_det + sum_log_r + body_lv;
            rec.standardized = (rec.log_volume - center) / scale;
        } catch (const RankDeficientError& e) {
            throw RankDeficientError("replicate " + std::to_string(r) + " (seed " +
                                     std::to_string(tag) + "): " + e.what());
        } catch (const Error& e) {
            throw NumericalError("replicate " + std::to_string(r) + " (seed " +
                                 std::to_string(tag) + "): " + e.what());
        }
    });
    rep.seconds_replicates = seconds_since(t_reps);

    std::vector<double> standardized(config.replicates);
    for (std::size_t r = 0; r < config.replicates; ++r)
        standardized[r] = rep.samples[r].standardized;

    if (config.replicates < 20) {
        // too few samples for a fit; gof stays empty (sample_size 0)
        rep.seconds_total = seconds_since(t_total);
        return rep;
    }

    RandomStream gof_stream = derive_replicate_seed(config.master_seed, kGofStreamIndex);
    switch (rep.regime.regime) {
        case stats::RegimeKind::normal_limit:
            rep.gof = stats::ks_one_sample_normal(standardized);
            break;
        case stats::RegimeKind::stable_limit: {
            const std::vector<double> ref = sampling::stable_reference_sample(
                rep.regime.alpha, 10 * config.replicates, gof_stream);
            rep.gof = stats::ks_two_sample(standardized, ref);
            rep.gof.reference_alpha = rep.regime.alpha;
            break;
        }
        case stats::RegimeKind::mixed: {
            // limit is max(1,1/tau) S_alpha + min(1,tau) N(0,1); simulate the
            // convolution as the two-sample reference
            const std::size_t ref_size = 10 * config.replicates;
            std::vector<double> ref = sampling::stable_reference_sample(
                rep.regime.alpha, ref_size, gof_stream);
            const double w_stable = std::max(1.0, 1.0 / rep.regime.tau);
            const double w_normal = std::min(1.0, rep.regime.tau);
            for (double& v : ref)
                v = w_stable * v + w_normal * gof_stream.next_normal();
            rep.gof = stats::ks_two_sample(standardized, ref);
            rep.gof.reference_alpha = rep.regime.alpha;
            break;
        }
    }

    rep.seconds_total = seconds_since(t_total);
    return rep;
}

std::string samples_to_csv(const std::vector<SampleRecord>& samples) {
    std::string out = "replicate,seed,log_det,sum_log_radii,log_volume,standardized\n";
    for (const SampleRecord& s : samples) {
        out += std::to_string(s.replicate);
        out += ',';
        out += std::to_string(s.seed);
        out += ',';
        out += format_double(s.log_det);
        out += ',';
        out += format_double(s.sum_log_radii);
        out += ',';
        out += format_double(s.log_volume);
        out += ',';
        out += format_double(s.standardized);
        out += '\n';
    }
    return out;
}

std::vector<SampleRecord> parse_samples_csv(const std::string& text) {
    std::vector<SampleRecord> out;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != "replicate,seed,log_det,sum_log_radii,log_volume,standardized")
                throw ConfigError("samples CSV: unexpected header");
            header_seen = true;
            continue;
        }
        std::array<std::string_view, 6> tokens;
        std::size_t start = 0;
        for (std::size_t f = 0; f < 6; ++f) {
            const std::size_t comma = f == 5 ? line.size() : line.find(',', start);
            if (comma == std::string_view::npos)
                throw ConfigError("samples CSV: wrong field count");
            tokens[f] = line.substr(start, comma - start);
            start = comma + 1;
        }
        SampleRecord r;
        r.replicate = parse_u64_token(tokens[0], "replicate");
        r.seed = parse_u64_token(tokens[1], "seed");
        r.log_det = parse_double_token(tokens[2], "log_det");
        r.sum_log_radii = parse_double_token(tokens[3], "sum_log_radii");
        r.log_volume = parse_double_token(tokens[4], "log_volume");
        r.standardized = parse_double_token(tokens[5], "standardized");
        out.push_back(r);
    }
    if (!header_seen) throw ConfigError("samples CSV: missing header");
    return out;
}

std::string report_to_json(const ExperimentReport& report, bool include_timings) {
    json j;
    j["config"] = json::parse(config_to_json(report.config));
    // worker count is a runtime detail like the timings: it never affects
    // results, so it lives beside them rather than in the config echo
    j["config"].erase("threads");
    json& norm = j["norming"];
    norm["mu"] = report.norming.mu;
    norm["sigma2"] = report.norming.sigma2;
    norm["gamma"] = report.norming.gamma;
    norm["n"] = report.norming.n;
    norm["p"] = report.norming.p;
    norm["variant"] =
        report.norming.variant == theory::VarianceVariant::theorem ? "theorem" : "with_i0";
    norm["i0_var_term"] = report.norming.i0_var_term;
    norm["per_i_log_terms"] = report.norming.per_i_log_terms;
    norm["per_i_var_terms"] = report.norming.per_i_var_terms;

    json& t = j["t_summary"];
    t["mc_draws"] = report.t_mc_draws;
    t["discarded_draws"] = report.t_discarded_draws;
    t["row_renormalized"] = report.t_row_renormalized;
    t["max_abs_row_residual"] = report.t_max_abs_row_residual;
    t["max_std_error"] = report.t_max_std_error;

    if (report.gof.sample_size == 0) {
        j["gof"] = nullptr; // too few replicates for a fit
    } else {
        json& g = j["gof"];
        g["sample_size"] = report.gof.sample_size;
        g["ks_statistic"] = report.gof.ks_statistic;
        g["ks_p_value"] = report.gof.ks_p_value;
        g["mean"] = report.gof.mean;
        g["variance"] = report.gof.variance;
        g["skewness"] = report.gof.skewness;
        g["excess_kurtosis"] = report.gof.excess_kurtosis;
        g["reference"] = report.gof.reference == stats::ReferenceKind::normal
                             ? "normal"
                             : "stable_two_sample";
        g["reference_alpha"] = report.gof.reference_alpha;
    }

    json& r = j["regime"];
    r["regime"] = stats::regime_kind_name(report.regime.regime);
    r["alpha"] = report.regime.alpha;
    r["tau"] = report.regime.tau;
    r["s_n"] = report.regime.s_n;
    r["m_n"] = report.regime.m_n;
    r["sigma_half"] = report.regime.sigma_half;

    json& d = j["diagnostics"];
    d["b2_deficit"] = report.b2_deficit;
    d["condition_bound"] = report.condition_bound;

    if (include_timings) {
        json& tm = j["timings"];
        tm["threads"] = report.config.threads;
        tm["t_matrix_seconds"] = report.seconds_t_matrix;
        tm["replicates_seconds"] = report.seconds_replicates;
        tm["total_seconds"] = report.seconds_total;
    }
    return j.dump(2);
}

bool ValidationReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.pass; });
}

std::string ValidationReport::to_text() const {
    std::string out;
    for (const CheckResult& c : checks) {
        out += c.pass ? "[PASS] " : "[FAIL] ";
        out += c.name;
        out += ": measured ";
        out += format_double(c.measured);
        out += " vs tolerance ";
        out += format_double(c.tolerance);
        if (!c.detail.empty()) {
            out += " (";
            out += c.detail;
            out += ')';
        }
        out += '\n';
    }
    out += all_pass() ? "ALL CHECKS PASSED\n" : "VALIDATION FAILED\n";
    return out;
}

ValidationReport run_validation_suite() {
    ValidationReport rep;
    auto append = [&rep](std::vector<CheckResult> group) {
        for (CheckResult& c : group) rep.checks.push_back(std::move(c));
    };
    append(checks::exact_identity_suite());
    append(checks::sphere_moment_suite());
    append(checks::t_matrix_suite());
    append(checks::quadratic_form_suite());
    append(checks::statistical_suite());
    append(checks::runner_suite());
    return rep;
}

} // namespace runner
} // namespace ellipvol

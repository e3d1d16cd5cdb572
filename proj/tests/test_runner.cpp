#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ellipvol/errors.hpp"
#include "ellipvol/runner.hpp"

using namespace ellipvol;
using namespace ellipvol::runner;

namespace {

const char* kFullConfig = R"({
  "n": 16,
  "p": 8,
  "spectrum_spec": {"kind": "near_identity", "c": 1.0},
  "radial_spec": {"kind": "log_normal", "mean": 0.0, "sd": 0.5},
  "replicates": 32,
  "mc_draws": 50,
  "variance_variant": "with_i0",
  "body": "unit_cube",
  "master_seed": 99,
  "threads": 2
})";

} // namespace

TEST_CASE("parse_config_json full document") {
    const ExperimentConfig c = parse_config_json(kFullConfig);
    CHECK(c.n == 16);
    CHECK(c.p == 8);
    CHECK(c.resolved_p() == 8);
    CHECK(c.spectrum_spec.kind == SpectrumSpecKind::near_identity);
    CHECK(c.spectrum_spec.c == 1.0);
    CHECK(c.radial_spec.kind == sampling::RadialKind::log_normal);
    CHECK(c.radial_spec.scale == 0.5);
    CHECK(c.replicates == 32);
    CHECK(c.mc_draws == 50);
    CHECK(c.variance_variant == theory::VarianceVariant::with_i0);
    REQUIRE(c.body.has_value());
    CHECK(*c.body == geometry::BodyKind::unit_cube);
    CHECK(c.master_seed == 99);
    CHECK(c.threads == 2);

    // round trip through the emitter
    const ExperimentConfig c2 = parse_config_json(config_to_json(c));
    CHECK(config_to_json(c2) == config_to_json(c));
}

TEST_CASE("parse_config_json defaults") {
    const ExperimentConfig c = parse_config_json(R"({"n": 10, "p": 5})");
    CHECK(c.spectrum_spec.kind == SpectrumSpecKind::identity);
    CHECK(c.radial_spec.kind == sampling::RadialKind::degenerate1);
    CHECK(c.replicates == 1);
    CHECK(c.mc_draws == 200);
    CHECK(c.variance_variant == theory::VarianceVariant::theorem);
    CHECK_FALSE(c.body.has_value());
    CHECK(c.master_seed == 0);
    CHECK(c.threads == 0);
}

TEST_CASE("parse_config_json rejects bad input") {
    CHECK_THROWS_AS(parse_config_json("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"n": 10, "p": 5, "surprise": 1})"), ConfigError);
    CHECK_THROWS_AS(
        parse_config_json(R"({"n": 10, "p": 5, "radial_spec": {"kind": "log_normal",
                              "mean": 0, "sd": 1, "extra": 2}})"),
        ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"n": 10})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"n": 10, "p": 5, "gamma": 0.5})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"n": 10, "p": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"n": 10, "p": 11})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"n": 10, "gamma": 1.5})"), ConfigError);
    CHECK_THROWS_AS(
        parse_config_json(R"({"n": 10, "p": 5, "variance_variant": "bogus"})"),
        ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"n": 10, "p": 5, "body": "dodecahedron"})"),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_config_json(R"({"n": 4, "p": 2, "spectrum_spec":
                              {"kind": "explicit", "values": [1, 2]}})"),
        ConfigError); // explicit length != n
}

TEST_CASE("gamma resolves to a rounded p") {
    const ExperimentConfig c = parse_config_json(R"({"n": 10, "gamma": 0.52})");
    CHECK(c.resolved_p() == 5); // round(5.2)
    const ExperimentConfig c2 = parse_config_json(R"({"n": 300, "gamma": 0.5})");
    CHECK(c2.resolved_p() == 150);
}

TEST_CASE("build_spectrum variants") {
    SUBCASE("explicit values are sorted and normalized on load") {
        const Spectrum s = build_spectrum(
            {SpectrumSpecKind::explicit_values, {1.0, 3.0, 2.0}, 0.0}, 3);
        CHECK(s.normalized());
        CHECK(s[0] >= s[1]);
        CHECK(s[1] >= s[2]);
        CHECK(s[0] == doctest::Approx(1.5).epsilon(1e-15));
    }
    SUBCASE("near identity hits the deficit target") {
        for (std::size_t n : {8, 9, 300}) {
            const double c = 1.0;
            const Spectrum s =
                build_spectrum({SpectrumSpecKind::near_identity, {}, c}, n);
            CHECK(s.normalized());
            CHECK(theory::b2_deficit(s) ==
                  doctest::Approx(c / static_cast<double>(n)).epsilon(1e-12));
        }
    }
}

TEST_CASE("derive_replicate_seed and seed tags") {
    RandomStream a = derive_replicate_seed(5, 2);
    RandomStream b = derive_replicate_seed(5, 2);
    for (int k = 0; k < 64; ++k) CHECK(a.next_u64() == b.next_u64());

    CHECK(derive_seed_tag(5, 2) == derive_seed_tag(5, 2));
    CHECK(derive_seed_tag(5, 2) != derive_seed_tag(5, 3));
    CHECK(derive_seed_tag(5, 2) != derive_seed_tag(6, 2));
}

TEST_CASE("samples CSV round trip is exact") {
    std::vector<SampleRecord> samples(3);
    samples[0] = {0, 11, -1.5, 0.0, 0.1 + 0.2, -0.30000000000000004};
    samples[1] = {1, 12, 1e-300, 5e17, -3.14159265358979, 2.2250738585072014e-308};
    samples[2] = {2, 13, 123456.789, -0.0, 1.0 / 3.0, 42.0};

    const std::string csv = samples_to_csv(samples);
    const std::vector<SampleRecord> parsed = parse_samples_csv(csv);
    REQUIRE(parsed.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(parsed[i].replicate == samples[i].replicate);
        CHECK(parsed[i].seed == samples[i].seed);
        CHECK(parsed[i].log_det == samples[i].log_det);
        CHECK(parsed[i].sum_log_radii == samples[i].sum_log_radii);
        CHECK(parsed[i].log_volume == samples[i].log_volume);
        CHECK(parsed[i].standardized == samples[i].standardized);
    }

    CHECK_THROWS_AS(parse_samples_csv("bogus\n1,2,3\n"), ConfigError);
    CHECK_THROWS_AS(parse_samples_csv(""), ConfigError);
}

TEST_CASE("run_experiment determinism across thread counts") {
    ExperimentConfig config = parse_config_json(R"({"n": 20, "p": 10,
        "replicates": 40, "master_seed": 3, "threads": 1})");
    const ExperimentReport r1 = run_experiment(config);
    config.threads = 4;
    const ExperimentReport r4 = run_experiment(config);
    CHECK(samples_to_csv(r1.samples) == samples_to_csv(r4.samples));
    CHECK(report_to_json(r1, false) == report_to_json(r4, false));
}

TEST_CASE("run_experiment degenerate radii reduce to the plain standardization") {
    const ExperimentConfig config = parse_config_json(R"({"n": 24, "p": 12,
        "replicates": 25, "master_seed": 5})");
    const ExperimentReport r = run_experiment(config);
    REQUIRE(r.samples.size() == 25);
    for (const SampleRecord& s : r.samples) {
        CHECK(s.sum_log_radii == 0.0);
        const double vn = (s.log_det - r.norming.mu) / r.norming.sigma();
        CHECK(s.standardized == doctest::Approx(vn).epsilon(1e-12));
    }
    CHECK(r.regime.regime == stats::RegimeKind::normal_limit);
    CHECK(r.gof.sample_size == 25);
    CHECK(r.b2_deficit == 0.0);
    CHECK(r.condition_bound == 1.0);
}

TEST_CASE("run_experiment body shift equals log p!") {
    ExperimentConfig simplex = parse_config_json(R"({"n": 18, "p": 9,
        "replicates": 8, "master_seed": 17})");
    ExperimentConfig cube = simplex;
    cube.body = geometry::BodyKind::unit_cube;

    const ExperimentReport rs = run_experiment(simplex);
    const ExperimentReport rc = run_experiment(cube);
    const double shift = std::lgamma(10.0);
    for (std::size_t i = 0; i < rs.samples.size(); ++i) {
        CHECK(rc.samples[i].log_det == rs.samples[i].log_det); // same seeds
        CHECK(rc.samples[i].log_volume - rs.samples[i].log_volume ==
              doctest::Approx(shift).epsilon(1e-12));
    }
}

TEST_CASE("run_experiment propagates NonPositiveVariance") {
    const ExperimentConfig config = parse_config_json(R"({"n": 4, "p": 2,
        "replicates": 25, "master_seed": 1})");
    CHECK_THROWS_AS(run_experiment(config), NonPositiveVarianceError);
}

TEST_CASE("run_experiment Monte Carlo t-matrix path end to end") {
    const ExperimentConfig config = parse_config_json(R"({"n": 12, "p": 6,
        "spectrum_spec": {"kind": "near_identity", "c": 0.5},
        "replicates": 30, "mc_draws": 60, "master_seed": 23})");
    const ExperimentReport r = run_experiment(config);
    CHECK(r.t_mc_draws == 60);
    CHECK(r.t_row_renormalized);
    CHECK(r.t_max_std_error > 0.0);
    CHECK(r.t_max_abs_row_residual <= 0.5); // sanity: residuals are MC-small
    CHECK(r.b2_deficit == doctest::Approx(0.5 / 12.0).epsilon(1e-12));
    CHECK(r.norming.sigma2 > 0.0);
    CHECK(r.gof.sample_size == 30);
}

TEST_CASE("small normal-regime experiment passes loose CLT bounds") {
    const ExperimentConfig config = parse_config_json(R"({"n": 80, "p": 40,
        "replicates": 400, "master_seed": 2})");
    const ExperimentReport r = run_experiment(config);
    CHECK(r.gof.ks_p_value > 1e-3);
    CHECK(std::abs(r.gof.mean) <= 0.35);
    CHECK(std::abs(r.gof.variance - 1.0) <= 0.4);
}

TEST_CASE("gof left empty below 20 replicates") {
    const ExperimentConfig config = parse_config_json(R"({"n": 10, "p": 5,
        "replicates": 1, "master_seed": 1})");
    const ExperimentReport r = run_experiment(config);
    CHECK(r.gof.sample_size == 0);
    CHECK(report_to_json(r).find("\"gof\": null") != std::string::npos);
}

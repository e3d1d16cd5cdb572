// Command-line front end: theory / simulate / gof / validate / bench.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical error,
// 4 validation failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ellipvol/errors.hpp"
#include "ellipvol/runner.hpp"

namespace {

using namespace ellipvol;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << content;
}

int cmd_theory(const std::string& config_path, const std::string& out_path) {
    runner::ExperimentConfig config = runner::parse_config_json(read_file(config_path));
    // norming constants only: reuse the pipeline with a single replicate
    config.replicates = 1;
    const runner::ExperimentReport report = runner::run_experiment(config);

    nlohmann::json j = nlohmann::json::parse(runner::report_to_json(report));
    j.erase("gof"); // a one-replicate fit is meaningless
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& samples_path,
                 const std::string& report_path, std::uint64_t seed, bool seed_given,
                 unsigned threads, bool threads_given, const std::string& hist_path,
                 const std::string& ecdf_path) {
    runner::ExperimentConfig config = runner::parse_config_json(read_file(config_path));
    if (seed_given) config.master_seed = seed;
    if (threads_given) config.threads = threads;

    const runner::ExperimentReport report = runner::run_experiment(config);
    if (!samples_path.empty())
        write_file(samples_path, runner::samples_to_csv(report.samples));
    const std::string text = runner::report_to_json(report) + "\n";
    if (report_path.empty())
        std::cout << text;
    else
        write_file(report_path, text);

    if (!hist_path.empty() || !ecdf_path.empty()) {
        std::vector<double> v(report.samples.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = report.samples[i].standardized;
        std::sort(v.begin(), v.end());
        if (!ecdf_path.empty()) {
            std::string ecdf = "value,ecdf\n";
            for (std::size_t i = 0; i < v.size(); ++i)
                ecdf += std::to_string(v[i]) + "," +
                        std::to_string(static_cast<double>(i + 1) / v.size()) + "\n";
            write_file(ecdf_path, ecdf);
        }
        if (!hist_path.empty()) {
            const std::size_t bins = std::max<std::size_t>(
                10, static_cast<std::size_t>(std::ceil(std::sqrt(v.size()))));
            const double lo = v.front(), hi = v.back();
            const double width = (hi - lo) / bins;
            std::vector<std::size_t> count(bins, 0);
            for (double x : v) {
                std::size_t b = width > 0.0
                                    ? std::min(bins - 1, static_cast<std::size_t>(
                                                             (x - lo) / width))
                                    : 0;
                ++count[b];
            }
            std::string hist = "bin_left,bin_right,count\n";
            for (std::size_t b = 0; b < bins; ++b)
                hist += std::to_string(lo + b * width) + "," +
                        std::to_string(lo + (b + 1) * width) + "," +
                        std::to_string(count[b]) + "\n";
            write_file(hist_path, hist);
        }
    }
    return 0;
}

int cmd_gof(const std::string& samples_path, const std::string& reference,
            std::uint64_t seed) {
    const std::vector<runner::SampleRecord> samples =
        runner::parse_samples_csv(read_file(samples_path));
    std::vector<double> v(samples.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = samples[i].standardized;

    stats::GofReport gof;
    if (reference == "normal") {
        gof = stats::ks_one_sample_normal(v);
    } else if (reference.rfind("stable:", 0) == 0) {
        const double alpha = std::stod(reference.substr(7));
        RandomStream stream(seed, 0);
        const std::vector<double> ref =
            sampling::stable_reference_sample(alpha, 10 * v.size(), stream);
        gof = stats::ks_two_sample(v, ref);
        gof.reference_alpha = alpha;
    } else {
        throw ConfigError("--reference must be normal or stable:ALPHA");
    }

    nlohmann::json j;
    j["sample_size"] = gof.sample_size;
    j["ks_statistic"] = gof.ks_statistic;
    j["ks_p_value"] = gof.ks_p_value;
    j["mean"] = gof.mean;
    j["variance"] = gof.variance;
    j["skewness"] = gof.skewness;
    j["excess_kurtosis"] = gof.excess_kurtosis;
    j["reference"] = reference;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_validate() {
    const runner::ValidationReport report = runner::run_validation_suite();
    std::cout << report.to_text();
    return report.all_pass() ? 0 : 4;
}

int cmd_bench(std::size_t n, std::size_t p, std::size_t reps) {
    using clock = std::chrono::steady_clock;
    RandomStream stream(1, 0);
    const sampling::EllipticalModel model(n, p, Spectrum::identity(n),
                                          sampling::RadialLaw::degenerate());

    std::vector<DenseMatrix> ys;
    ys.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r)
        ys.push_back(sampling::elliptical_sample(model, stream).y);

    double max_dev = 0.0;
    const auto t0 = clock::now();
    std::vector<double> chol(reps);
    for (std::size_t r = 0; r < reps; ++r) chol[r] = linalg::log_det_gram(ys[r]);
    const auto t1 = clock::now();
    for (std::size_t r = 0; r < reps; ++r) {
        const double perp = linalg::perpendicular_log_det(ys[r]).log_det;
        max_dev = std::max(max_dev, std::abs(perp - chol[r]) /
                                        std::max(1.0, std::abs(chol[r])));
    }
    const auto t2 = clock::now();

    const double ms_chol = std::chrono::duration<double, std::milli>(t1 - t0).count();
    const double ms_perp = std::chrono::duration<double, std::milli>(t2 - t1).count();
    std::printf("n=%zu p=%zu reps=%zu\n", n, p, reps);
    std::printf("cholesky gram:   %10.3f ms total, %8.4f ms/rep\n", ms_chol,
                ms_chol / static_cast<double>(reps));
    std::printf("perpendiculars:  %10.3f ms total, %8.4f ms/rep\n", ms_perp,
                ms_perp / static_cast<double>(reps));
    std::printf("max relative deviation: %.3e\n", max_dev);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"log-volume simulation and verification toolkit for elliptical "
                 "random simplices"};
    app.require_subcommand(1);

    std::string config_path, out_path, samples_path, report_path;
    std::string gof_samples, gof_reference = "normal";
    std::string hist_path, ecdf_path;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::size_t bench_n = 300, bench_p = 150, bench_reps = 20;

    auto* theory_cmd = app.add_subcommand("theory", "norming constants and diagnostics");
    theory_cmd->add_option("--config", config_path, "experiment config JSON")->required();
    theory_cmd->add_option("--out", out_path, "output JSON path (stdout if omitted)");

    auto* sim = app.add_subcommand("simulate", "run replicated experiment");
    sim->add_option("--config", config_path, "experiment config JSON")->required();
    sim->add_option("--out-samples", samples_path, "samples CSV path");
    sim->add_option("--out-report", report_path, "report JSON path (stdout if omitted)");
    auto* seed_opt = sim->add_option("--seed", seed, "override master seed");
    auto* threads_opt = sim->add_option("--threads", threads, "override worker count");
    sim->add_option("--out-hist", hist_path, "histogram-bin CSV of standardized values");
    sim->add_option("--out-ecdf", ecdf_path, "empirical-CDF CSV of standardized values");

    auto* gof = app.add_subcommand("gof", "goodness of fit on a samples CSV");
    gof->add_option("--samples", gof_samples, "samples CSV path")->required();
    gof->add_option("--reference", gof_reference, "normal or stable:ALPHA");
    gof->add_option("--seed", seed, "seed for the stable reference sample");

    auto* validate = app.add_subcommand("validate", "run the cross-module oracle suite");

    auto* bench = app.add_subcommand("bench", "perpendicular vs Cholesky timing");
    bench->add_option("--n", bench_n, "ambient dimension");
    bench->add_option("--p", bench_p, "number of rows");
    bench->add_option("--reps", bench_reps, "matrices to time");

    CLI11_PARSE(app, argc, argv);

    try {
        if (theory_cmd->parsed()) return cmd_theory(config_path, out_path);
        if (sim->parsed())
            return cmd_simulate(config_path, samples_path, report_path, seed,
                                seed_opt->count() > 0, threads,
                                threads_opt->count() > 0, hist_path, ecdf_path);
        if (gof->parsed()) return cmd_gof(gof_samples, gof_reference, seed);
        if (validate->parsed()) return cmd_validate();
        if (bench->parsed()) return cmd_bench(bench_n, bench_p, bench_reps);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

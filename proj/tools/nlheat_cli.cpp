#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlheat/config.hpp"
#include "nlheat/decay_analysis.hpp"
#include "nlheat/errors.hpp"
#include "nlheat/experiment.hpp"
#include "nlheat/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void print_fit(const nlheat::DecayFit& fit, const nlheat::DecayVerdict* verdict) {
    std::printf("q=%s slope=%.6f intercept=%.6f r2=%.6f window=[%.4g, %.4g] points=%zu", nlheat::format_real(fit.q).c_str(),
                fit.slope, fit.intercept, fit.r_squared, fit.t_lo, fit.t_hi, fit.points);
    if (std::isfinite(fit.theoretical_exponent)) std::printf(" theory=-%.6f", fit.theoretical_exponent);
    if (verdict != nullptr) std::printf(" %s (%s)", verdict->pass ? "pass" : "fail", verdict->details.c_str());
    std::printf("\n");
}

int cmd_run(const std::string& config_path) {
    const nlheat::ExperimentConfig config = nlheat::load_config(config_path);
    const nlheat::ExperimentResult result = nlheat::run_experiment(config);
    for (std::size_t k = 0; k < result.fits.size(); ++k) print_fit(result.fits[k], &result.verdicts[k]);
    if (result.exploratory) std::printf("note: n = 1 run, exploratory only\n");
    std::printf("wrote %s and %s\n", config.csv_path.c_str(), config.json_path.c_str());
    return kExitOk;
}

// Bad verb arguments are usage errors, reported like config errors.
template <class Parse>
auto parse_argument(const std::string& text, Parse&& parse) {
    try {
        return parse(text);
    } catch (const nlheat::InvalidArgument& e) {
        throw nlheat::ConfigError(e.what());
    }
}

int cmd_verify(const std::string& selector) {
    const auto which = parse_argument(selector, nlheat::parse_verify_selector);
    const nlheat::VerifyReport report = nlheat::verify_suite(which);
    std::cout << report.format();
    return report.passed() ? kExitOk : kExitVerifyFailed;
}

int cmd_sweep(const std::string& config_path, const std::string& axis_name, const std::vector<std::string>& values,
              const std::string& out_path) {
    const nlheat::ExperimentConfig config = nlheat::load_config(config_path);
    const nlheat::SweepAxis axis = parse_argument(axis_name, nlheat::parse_sweep_axis);
    const auto rows = nlheat::sweep(config, axis, values);
    const std::string table = nlheat::sweep_table_csv(axis, rows);
    nlheat::write_file_atomic(out_path, table);
    std::cout << table;
    return kExitOk;
}

int cmd_fit(const std::string& csv_path, double q, double window, std::optional<int> dimension,
            std::optional<double> sigma) {
    nlheat::DecaySeries series = nlheat::read_series_csv(csv_path);
    if (dimension) series.dimension = *dimension;
    series.sigma = sigma;
    print_fit(nlheat::fit_decay(series, q, window), nullptr);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlocal heat equation laboratory"};
    app.require_subcommand(1);

    std::string run_config;
    auto* run = app.add_subcommand("run", "Simulate one configuration and write CSV and JSON outputs");
    run->add_option("config", run_config, "Config file (key = value)")->required();

    std::string selector = "all";
    auto* verify = app.add_subcommand("verify", "Run property suites; nonzero exit on any failure");
    verify->add_option("selector", selector, "all, inequalities, dynamics or decay");

    std::string sweep_config;
    std::string axis;
    std::vector<std::string> values;
    std::string sweep_out = "sweep.csv";
    auto* sweep = app.add_subcommand("sweep", "One run per value along a parameter axis");
    sweep->add_option("config", sweep_config, "Base config file")->required();
    sweep->add_option("--axis", axis, "sigma, q or kernel_family")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
    sweep->add_option("--out", sweep_out, "Summary table path");

    std::string fit_csv;
    double fit_q = 2.0;
    double fit_window = 0.5;
    std::optional<int> fit_dimension;
    std::optional<double> fit_sigma;
    auto* fit = app.add_subcommand("fit", "Fit a power law to a CSV series");
    fit->add_option("csv", fit_csv, "Series CSV written by run")->required();
    fit->add_option("--q", fit_q, "Norm column");
    fit->add_option("--window", fit_window, "Fraction of log-time to fit");
    fit->add_option("--dimension", fit_dimension, "Dimension for the theoretical exponent");
    fit->add_option("--sigma", fit_sigma, "sigma for the theoretical exponent (omit for compact kernels)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) return cmd_run(run_config);
        if (*verify) return cmd_verify(selector);
        if (*sweep) return cmd_sweep(sweep_config, axis, values, sweep_out);
        if (*fit) return cmd_fit(fit_csv, fit_q, fit_window, fit_dimension, fit_sigma);
    } catch (const nlheat::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}

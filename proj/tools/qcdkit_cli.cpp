#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "qcdkit/em.hpp"
#include "qcdkit/errors.hpp"
#include "qcdkit/experiment.hpp"
#include "qcdkit/harness.hpp"
#include "qcdkit/stream.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitBadInput = 2;    // config, schema, parse and stream problems
constexpr int kExitDegenerate = 3;  // fit degeneracy, unreachable calibration

std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

struct GlobalArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

qcd::ExperimentConfig load_experiment(const GlobalArgs& args) {
    if (args.config_path.empty()) {
        throw qcd::ConfigError("this command needs --config <path>");
    }
    auto config = qcd::ExperimentConfig::load(args.config_path);
    if (args.seed) {
        config.seed = args.seed;
    }
    if (!args.out_dir.empty()) {
        config.output_dir = fs::path(args.out_dir);
    }
    config.validate_common();
    return config;
}

fs::path ensure_output_dir(const qcd::ExperimentConfig& config) {
    const fs::path dir = config.output_dir.value_or(fs::path("."));
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw qcd::ConfigError("cannot write '" + path.string() + "'");
    }
    out << text;
}

qcd::EvalOptions eval_options(const qcd::ExperimentConfig& config) {
    qcd::EvalOptions options;
    options.trials = config.trials;
    options.horizon = config.horizon;
    options.workers = config.workers;
    return options;
}

int run_fit(const std::string& input, std::size_t k, const std::string& output) {
    const auto data = qcd::read_error_stream_csv(input);
    const auto fit = qcd::fit_em(data, k);
    write_text(output, fit.mixture.to_json().dump(2) + "\n");
    std::cout << "log_likelihood=" << format_double(fit.log_likelihood)
              << " iterations=" << fit.iterations
              << " converged=" << (fit.converged ? "true" : "false") << "\n";
    const auto& components = fit.mixture.components();
    for (std::size_t i = 0; i < components.size(); ++i) {
        std::cout << "component " << (i + 1) << ": weight=" << format_double(components[i].weight)
                  << " mean=" << format_double(components[i].gaussian.mean)
                  << " variance=" << format_double(components[i].gaussian.variance) << "\n";
    }
    return kExitOk;
}

int run_detect(const GlobalArgs& args) {
    const auto config = load_experiment(args);
    std::vector<double> stream;
    if (config.stream_csv) {
        stream = qcd::read_error_stream_csv(*config.stream_csv);
    } else {
        stream = qcd::generate(config.require_scenario(), *config.seed);
    }
    const fs::path dir = ensure_output_dir(config);

    // Run everything before writing anything, so a failure mid-way never
    // leaves partial artifacts behind.
    std::vector<std::pair<fs::path, std::string>> traces;
    std::string verdicts;
    for (const auto& detector_config : config.detectors) {
        qcd::Detector detector(detector_config);
        std::string trace = "time,sample,statistic,alarmed\n";
        std::optional<std::uint64_t> tau;
        for (double x : stream) {
            const auto& state = detector.step(x);
            trace += std::to_string(state.time) + ',' + format_double(x) + ',' +
                     format_double(state.statistic) + ',' + (state.alarmed ? '1' : '0') + '\n';
            if (state.alarmed) {
                tau = state.stopping_time;
                break;
            }
        }
        traces.emplace_back(dir / ("trace_" + detector_config.name + ".csv"), std::move(trace));
        verdicts += tau ? "ALARM t=" + std::to_string(*tau) + "\n"
                        : "NO_ALARM n=" + std::to_string(stream.size()) + "\n";
    }
    for (const auto& [path, text] : traces) {
        write_text(path, text);
    }
    std::cout << verdicts;
    return kExitOk;
}

int run_calibrate(const GlobalArgs& args) {
    const auto config = load_experiment(args);
    if (!config.target_mtfa) {
        throw qcd::ConfigError("calibrate needs 'target_mtfa' in the config");
    }
    const auto& scenario = config.require_scenario();
    const fs::path dir = ensure_output_dir(config);

    qcd::CalibrationOptions calib;
    calib.trials = config.calibration_trials;
    calib.workers = config.workers;

    json artifact = json::object();
    for (std::size_t d = 0; d < config.detectors.size(); ++d) {
        const auto& detector_config = config.detectors[d];
        const std::uint64_t lane = qcd::split_seed(*config.seed, d);
        const double threshold = qcd::calibrate_threshold(detector_config, *config.target_mtfa,
                                                          scenario, calib, lane);

        qcd::EvalOptions verify;
        verify.trials = std::max<std::uint64_t>(config.calibration_trials, 200);
        verify.horizon = static_cast<std::uint64_t>(std::ceil(10.0 * *config.target_mtfa));
        verify.workers = config.workers;
        const auto mtfa = qcd::estimate_mtfa(detector_config.with_threshold(threshold),
                                             scenario.pre_only(1), verify,
                                             qcd::split_seed(lane, 1));

        std::cout << detector_config.name << " threshold=" << format_double(threshold)
                  << " mtfa=" << format_double(mtfa.value)
                  << (mtfa.lower_bound ? " (lower bound)" : "") << "\n";
        artifact[detector_config.name] = {{"threshold", threshold},
                                          {"verified_mtfa", mtfa.value},
                                          {"verified_mtfa_stderr", mtfa.std_error},
                                          {"lower_bound", mtfa.lower_bound}};
    }
    write_text(dir / "calibration.json", artifact.dump(2) + "\n");
    return kExitOk;
}

int run_sweep(const GlobalArgs& args) {
    const auto config = load_experiment(args);
    if (config.threshold_grid.empty()) {
        throw qcd::ConfigError("sweep needs a non-empty 'threshold_grid' in the config");
    }
    const auto& scenario = config.require_scenario();
    const fs::path dir = ensure_output_dir(config);

    const auto curves = qcd::sweep(config.detectors, scenario, config.threshold_grid,
                                   eval_options(config), *config.seed);

    std::string csv = "detector,threshold,mtfa,mtfa_stderr,wadd,wadd_stderr,trials,censored\n";
    for (std::size_t d = 0; d < curves.size(); ++d) {
        for (const auto& point : curves[d]) {
            csv += config.detectors[d].name + ',' + format_double(point.threshold) + ',' +
                   format_double(point.mtfa.value) + ',' + format_double(point.mtfa.std_error) +
                   ',' + format_double(point.wadd.value) + ',' +
                   format_double(point.wadd.std_error) + ',' + std::to_string(point.wadd.trials) +
                   ',' + std::to_string(point.mtfa.censored + point.wadd.censored) + '\n';
        }
    }
    write_text(dir / "sweep.csv", csv);
    std::cout << "wrote sweep.csv\n";
    return kExitOk;
}

int run_report(const GlobalArgs& args) {
    const auto config = load_experiment(args);
    const auto& scenario = config.require_scenario();
    for (const auto& detector_config : config.detectors) {
        if (!detector_config.has_model()) {
            throw qcd::ConfigError("report needs likelihood-based detectors; '" +
                                   detector_config.name + "' has no model");
        }
    }
    const fs::path dir = ensure_output_dir(config);

    std::vector<std::pair<fs::path, std::string>> artifacts;
    std::string lines;
    for (std::size_t d = 0; d < config.detectors.size(); ++d) {
        const auto& detector_config = config.detectors[d];
        const auto report =
            qcd::correctness_report(detector_config.build_model(), scenario,
                                    config.correctness_samples, qcd::split_seed(*config.seed, d));
        const json artifact = {
            {"detector", detector_config.name},
            {"pre_change_expectation", report.pre_change_expectation.value},
            {"pre_change_stderr", report.pre_change_expectation.std_error},
            {"post_change_expectation", report.post_change_expectation.value},
            {"post_change_stderr", report.post_change_expectation.std_error},
            {"pre_variance", report.pre_variance},
            {"post_variance", report.post_variance},
            {"correct", report.correct},
            {"samples", config.correctness_samples},
        };
        artifacts.emplace_back(dir / ("report_" + detector_config.name + ".json"),
                               artifact.dump(2) + "\n");
        lines += detector_config.name;
        lines += report.correct ? " correct=true" : " correct=false";
        lines += " pre=" + format_double(report.pre_change_expectation.value) +
                 " post=" + format_double(report.post_change_expectation.value) + "\n";
    }
    for (const auto& [path, text] : artifacts) {
        write_text(path, text);
    }
    std::cout << lines;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming change detection over prediction-error streams"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config_path, "Experiment config JSON");
    app.add_option("--seed", args.seed, "Master seed (overrides the config seed)");
    app.add_option("--out", args.out_dir, "Output directory (overrides the config)");

    std::string fit_input;
    std::size_t fit_k = 2;
    std::string fit_output = "gmm.json";
    auto* fit = app.add_subcommand("fit", "Fit a Gaussian mixture to an error-stream CSV");
    fit->add_option("input", fit_input, "Error-stream CSV")->required();
    fit->add_option("-k,--components", fit_k, "Number of mixture components")
        ->check(CLI::Range(1, 8));
    fit->add_option("-o,--output", fit_output, "Output mixture JSON");
    fit->fallthrough();

    auto* detect = app.add_subcommand("detect", "Run detectors over a stream and write traces");
    detect->fallthrough();
    auto* calibrate =
        app.add_subcommand("calibrate", "Find thresholds reaching a target mean time to false alarm");
    calibrate->fallthrough();
    auto* sweep = app.add_subcommand("sweep", "Delay-vs-MTFA curves over a threshold grid");
    sweep->fallthrough();
    auto* report = app.add_subcommand("report", "Sign checks of each detector's likelihood ratio");
    report->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (fit->parsed()) {
            return run_fit(fit_input, fit_k, fit_output);
        }
        if (detect->parsed()) {
            return run_detect(args);
        }
        if (calibrate->parsed()) {
            return run_calibrate(args);
        }
        if (sweep->parsed()) {
            return run_sweep(args);
        }
        if (report->parsed()) {
            return run_report(args);
        }
    } catch (const qcd::DegenerateData& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const qcd::TooFewPoints& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const qcd::CalibrationUnreachable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const qcd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

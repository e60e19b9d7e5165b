#include "qcdkit/experiment.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "qcdkit/errors.hpp"

namespace qcd {

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw SchemaError("experiment config must be a json object");
    }
    static const char* known[] = {"scenario",      "stream_csv",     "detectors",
                                  "seed",          "trials",         "horizon",
                                  "workers",       "output_dir",     "target_mtfa",
                                  "threshold_grid", "correctness_samples", "calibration_trials"};
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return key == k; }) == std::end(known)) {
            throw SchemaError("unknown experiment config key '" + key + "'");
        }
    }

    ExperimentConfig config;
    if (j.contains("scenario")) {
        config.scenario = ChangeScenario::from_json(j.at("scenario"));
    }
    if (j.contains("stream_csv")) {
        config.stream_csv = std::filesystem::path(j.at("stream_csv").get<std::string>());
    }
    if (j.contains("detectors")) {
        if (!j.at("detectors").is_array()) {
            throw SchemaError("'detectors' must be an array");
        }
        for (const auto& d : j.at("detectors")) {
            config.detectors.push_back(DetectorConfig::from_json(d));
        }
    }
    if (j.contains("seed")) {
        config.seed = j.at("seed").get<std::uint64_t>();
    }
    config.trials = j.value("trials", config.trials);
    config.horizon = j.value("horizon", config.horizon);
    config.workers = j.value("workers", config.workers);
    if (j.contains("output_dir")) {
        config.output_dir = std::filesystem::path(j.at("output_dir").get<std::string>());
    }
    if (j.contains("target_mtfa")) {
        config.target_mtfa = j.at("target_mtfa").get<double>();
    }
    if (j.contains("threshold_grid")) {
        config.threshold_grid = j.at("threshold_grid").get<std::vector<double>>();
    }
    config.correctness_samples = j.value("correctness_samples", config.correctness_samples);
    config.calibration_trials = j.value("calibration_trials", config.calibration_trials);

    // Detector names label output files; duplicates would silently clobber.
    std::vector<std::string> names;
    for (const auto& d : config.detectors) {
        if (std::find(names.begin(), names.end(), d.name) != names.end()) {
            throw ConfigError("duplicate detector name '" + d.name + "'");
        }
        names.push_back(d.name);
    }
    return config;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) {
        throw ConfigError("cannot open config '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        file >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config '" + path.string() + "': " + e.what());
    }
    return from_json(j);
}

void ExperimentConfig::validate_common() const {
    if (!seed) {
        throw ConfigError("a seed is required (config 'seed' or --seed)");
    }
    if (detectors.empty()) {
        throw ConfigError("at least one detector is required");
    }
}

const ChangeScenario& ExperimentConfig::require_scenario() const {
    if (!scenario) {
        throw ConfigError("this command needs a 'scenario' in the config");
    }
    return *scenario;
}

}  // namespace qcd

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qcdkit/detector.hpp"
#include "qcdkit/stream.hpp"

namespace qcd {

/// Everything one experiment run needs, loaded from a JSON file. The seed is
/// mandatory somewhere (file or command line): nothing in the toolkit falls
/// back to wall-clock entropy.
struct ExperimentConfig {
    std::optional<ChangeScenario> scenario;
    std::optional<std::filesystem::path> stream_csv;
    std::vector<DetectorConfig> detectors;
    std::optional<std::uint64_t> seed;
    std::uint64_t trials = 10000;
    std::uint64_t horizon = 0;  // 0 = automatic
    unsigned workers = 0;       // 0 = hardware count
    std::optional<std::filesystem::path> output_dir;

    // Command-specific knobs.
    std::optional<double> target_mtfa;      // calibrate
    std::vector<double> threshold_grid;     // sweep
    std::uint64_t correctness_samples = 100000;  // report
    std::uint64_t calibration_trials = 200;

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& path);

    /// Shared invariants: a seed, at least one detector.
    void validate_common() const;
    /// A synthetic scenario (not a stream file) must be present.
    const ChangeScenario& require_scenario() const;
};

}  // namespace qcd

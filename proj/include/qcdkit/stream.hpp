#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qcdkit/gmm.hpp"
#include "qcdkit/metrics.hpp"

namespace qcd {

/// Sentinel change point meaning "the change never happens".
inline constexpr std::uint64_t kNoChange = std::numeric_limits<std::uint64_t>::max();

/// Pre-change law, post-change law and the 1-based step at which the stream
/// switches from the first to the second.
struct ChangeScenario {
    GaussianMixture pre;
    GaussianMixture post;
    std::uint64_t change_point = kNoChange;
    std::uint64_t length = 1;

    ChangeScenario(GaussianMixture pre, GaussianMixture post, std::uint64_t change_point,
                   std::uint64_t length);

    /// Same laws, change at the first step: every sample is post-change.
    ChangeScenario immediate_change(std::uint64_t new_length) const;
    /// Same laws, change never arrives: every sample is pre-change.
    ChangeScenario pre_only(std::uint64_t new_length) const;

    nlohmann::json to_json() const;
    static ChangeScenario from_json(const nlohmann::json& j);
};

/// Sample the scenario: steps 1..change_point-1 from pre, the rest from
/// post. Deterministic under the seed.
std::vector<double> generate(const ChangeScenario& scenario, std::uint64_t seed);

/// Same, against a caller-owned generator.
std::vector<double> generate(const ChangeScenario& scenario, Rng& rng);

/// Error-stream file: header "time,error", time strictly increasing
/// integers starting at 1.
std::vector<double> read_error_stream_csv(const std::filesystem::path& path);
void write_error_stream_csv(const std::filesystem::path& path, std::span<const double> values);

/// Trajectory file: header "scene_id,frame,pred_x,pred_y,true_x,true_y";
/// each scene's rows are contiguous with frames 1..L in order. Returns one
/// pair per scene, in file order.
std::vector<TrajectoryPair> read_trajectory_csv(const std::filesystem::path& path);

using CsvContent = std::variant<std::vector<double>, std::vector<TrajectoryPair>>;

/// Reads either schema, dispatching on the header row.
CsvContent ingest_csv(const std::filesystem::path& path);

}  // namespace qcd

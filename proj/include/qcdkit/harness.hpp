#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qcdkit/detector.hpp"
#include "qcdkit/kl.hpp"
#include "qcdkit/stream.hpp"

namespace qcd {

/// Monte-Carlo estimate with its standard error and censoring bookkeeping.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t trials = 0;
    /// Trials that ran out of horizon before alarming.
    std::uint64_t censored = 0;
    /// True when censored runs make the value a lower bound.
    bool lower_bound = false;
};

/// Outcome of one detection trial.
struct TrialResult {
    std::optional<std::uint64_t> stopping_time;
    std::uint64_t change_point = kNoChange;

    bool detected() const {
        return stopping_time.has_value() && change_point != kNoChange &&
               *stopping_time >= change_point;
    }
    bool false_alarm() const {
        return stopping_time.has_value() &&
               (change_point == kNoChange || *stopping_time < change_point);
    }
};

struct EvalOptions {
    std::uint64_t trials = 10000;
    /// Per-trial stream length; 0 picks a default (for delay estimation,
    /// 10 * threshold / drift capped at 1e5; otherwise 1e5).
    std::uint64_t horizon = 0;
    /// Worker threads; 0 uses the hardware count. Results are identical for
    /// any worker count: trial i always runs under substream i of the seed
    /// and aggregation happens in index order.
    unsigned workers = 0;
};

/// Run seeded, independent detection trials of the scenario. Trial i uses
/// split_seed(seed, i). Windowed detectors in immediate-change scenarios
/// (change_point == 1) are warm-started with window-1 pre-change samples
/// that do not count toward the stopping time, so the delay is measured
/// against a window filled with in-distribution data.
std::vector<TrialResult> run_detection_trials(const DetectorConfig& config,
                                              const ChangeScenario& scenario,
                                              const EvalOptions& options, std::uint64_t seed);

/// Worst-case mean detection delay: the scenario must change at step 1, so
/// the delay equals the stopping time. Censored trials are excluded from the
/// mean and reported; more than 1% of them raises HorizonTooShort.
Estimate estimate_wadd(const DetectorConfig& config, const ChangeScenario& scenario,
                       const EvalOptions& options, std::uint64_t seed);

/// Mean time to false alarm: the scenario must never change. Runs that
/// survive the horizon contribute the horizon value and flag the estimate as
/// a lower bound.
Estimate estimate_mtfa(const DetectorConfig& config, const ChangeScenario& scenario,
                       const EvalOptions& options, std::uint64_t seed);

struct CalibrationOptions {
    double threshold_lo = 0.0;
    double threshold_hi = 50.0;
    std::size_t max_iterations = 40;
    /// Accept when the estimated MTFA is within this fraction of the target.
    double tolerance = 0.10;
    std::uint64_t trials = 200;
    /// MTFA horizon per probe; 0 uses 10x the target.
    std::uint64_t horizon = 0;
    unsigned workers = 0;
};

/// Bisect the threshold until the estimated MTFA reaches the target within
/// tolerance. All probes share one seed (common random numbers), which makes
/// the estimated MTFA monotone in the threshold. Throws
/// CalibrationUnreachable when the upper bound undershoots the target or the
/// iteration budget runs out without landing inside the tolerance band.
double calibrate_threshold(const DetectorConfig& config, double target_mtfa,
                           const ChangeScenario& scenario, const CalibrationOptions& options,
                           std::uint64_t seed);

/// One point of a delay-vs-MTFA trade-off curve.
struct SweepPoint {
    double threshold = 0.0;
    Estimate mtfa;
    Estimate wadd;
};

/// MTFA and delay at every threshold of an ascending grid. The two
/// estimates at each point draw from disjoint seed substreams.
std::vector<SweepPoint> sweep_detector(const DetectorConfig& config,
                                       const ChangeScenario& scenario,
                                       std::span<const double> thresholds,
                                       const EvalOptions& options, std::uint64_t seed);

/// Per-detector sweeps; detector d uses substream d of the seed.
std::vector<std::vector<SweepPoint>> sweep(std::span<const DetectorConfig> configs,
                                           const ChangeScenario& scenario,
                                           std::span<const double> thresholds,
                                           const EvalOptions& options, std::uint64_t seed);

/// Delay at a target MTFA, log-linearly interpolated between adjacent sweep
/// points. The target must fall inside the curve's MTFA range.
double wadd_at_mtfa(std::span<const SweepPoint> curve, double target_mtfa);

/// Sign structure of the approximate log likelihood ratio under the true
/// laws: its expectation under pre must be negative and under post positive
/// for the detector to be trustworthy.
struct CorrectnessReport {
    Estimate pre_change_expectation;
    Estimate post_change_expectation;
    double pre_variance = 0.0;
    double post_variance = 0.0;
    /// pre mean + 3 stderr < 0 and post mean - 3 stderr > 0.
    bool correct = false;
};

/// Monte-Carlo correctness check of a likelihood approximation against the
/// scenario's true laws; n >= 10000 samples per side.
CorrectnessReport correctness_report(const LikelihoodModel& model, const ChangeScenario& truth,
                                     std::size_t n, std::uint64_t seed);

struct RobustShiftRow {
    double shift = 0.0;
    double detection_rate = 0.0;
    /// Mean stopping time among detected runs; 0 when nothing was detected.
    double mean_delay = 0.0;
    std::uint64_t detections = 0;
};

/// Robust-shift sensitivity study: the true post-change law is the
/// pre-change mixture shifted by true_shift; each row runs a robust detector
/// built with one of the candidate shifts at the shared threshold.
std::vector<RobustShiftRow> robust_shift_study(const GaussianMixture& pre, double true_shift,
                                               std::span<const double> shifts, double threshold,
                                               const EvalOptions& options, std::uint64_t seed);

}  // namespace qcd

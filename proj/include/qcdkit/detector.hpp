#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qcdkit/likelihood.hpp"

namespace qcd {

/// Running state shared by every detector: the decision statistic, the
/// threshold it is compared against, and the alarm bookkeeping. Once alarmed
/// the state is frozen until reset, which keeps the stopping time
/// single-valued per run.
struct DetectorState {
    double statistic = 0.0;
    double threshold = 0.0;
    std::uint64_t time = 0;
    bool alarmed = false;
    std::optional<std::uint64_t> stopping_time;
};

/// Ring buffer over the most recent samples with running first and second
/// moments. Windowed detectors stay silent until it first fills.
class SampleWindow {
public:
    explicit SampleWindow(std::size_t capacity);

    /// Append x, evicting the oldest sample once at capacity.
    void push(double x);
    void clear();

    bool full() const { return count_ == buffer_.size(); }
    std::size_t capacity() const { return buffer_.size(); }
    std::size_t size() const { return count_; }

    double sum() const { return sum_; }
    double mean() const;
    /// Population variance (divisor = current size).
    double variance() const;

private:
    std::vector<double> buffer_;
    std::size_t head_ = 0;
    std::size_t count_ = 0;
    double sum_ = 0.0;
    double sum_sq_ = 0.0;
};

/// One CUSUM update: statistic' = max(statistic + log_lr, 0), alarm when the
/// statistic reaches the threshold. Throws SteppedAfterAlarm on a frozen
/// state.
void cusum_step(DetectorState& state, const LikelihoodModel& model, double x);

/// One z-score update over the sliding window (newest sample included).
/// Before the window first fills the statistic stays 0 and no alarm is
/// possible; a zero-spread window raises ZeroSpread. Alarms when |z| exceeds
/// the threshold strictly.
void zscore_step(SampleWindow& window, DetectorState& state, double x);

/// One windowed chi-square update: the statistic is the sum over in-window
/// samples r of (post(r) - pre(r))^2 / pre(r), with the denominator floored.
/// The model must be the Mix variant. Alarms on strict exceedance after
/// warm-up.
void chisq_step(SampleWindow& window, DetectorState& state, const LikelihoodModel& model,
                double x);

/// Threshold guaranteeing a false alarm rate of at most alpha: |log alpha|.
double threshold_for_far(double alpha);

/// Back to statistic 0, time 0, no alarm; the threshold is retained.
void reset(DetectorState& state);
void reset(DetectorState& state, SampleWindow& window);

enum class DetectorKind {
    kCusumMix,
    kCusumSinmix,
    kCusumSingle,
    kCusumRobust,
    kZScore,
    kChiSquare,
};

std::string_view to_string(DetectorKind kind);
DetectorKind detector_kind_from_string(std::string_view name);

/// Distribution input that may arrive either as a full mixture or as a
/// moment pair, depending on how much the caller knows.
struct DistributionInput {
    std::optional<GaussianMixture> mixture;
    std::optional<MomentSummary> moments;

    /// The mixture itself, or a single Gaussian built from the moments.
    GaussianMixture as_mixture() const;
    /// The moments themselves, or the mixture's overall moments.
    MomentSummary as_moments() const;

    static DistributionInput from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Declarative detector description; round-trips through JSON.
struct DetectorConfig {
    DetectorKind kind = DetectorKind::kCusumMix;
    std::string name;  // defaults to the kind string
    double threshold = 0.0;
    std::size_t window = 0;  // windowed kinds only
    double kappa = 0.0;      // robust kind only
    std::optional<DistributionInput> pre;
    std::optional<DistributionInput> post;

    /// Full validation; throws ConfigError with the offending field named.
    void validate() const;

    /// The likelihood model this configuration implies. Throws ConfigError
    /// for the z-score kind, which uses no model.
    LikelihoodModel build_model() const;

    bool windowed() const { return kind == DetectorKind::kZScore || kind == DetectorKind::kChiSquare; }
    bool has_model() const { return kind != DetectorKind::kZScore; }

    DetectorConfig with_threshold(double b) const;

    static DetectorConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// A configured detector behind a single contract: feed one error sample,
/// get the updated statistic and alarm decision.
class Detector {
public:
    explicit Detector(const DetectorConfig& config);

    /// Process one sample; returns the updated state. Throws
    /// SteppedAfterAlarm once alarmed.
    const DetectorState& step(double x);

    void reset();
    const DetectorState& state() const { return state_; }
    const DetectorConfig& config() const { return config_; }

    /// Number of leading samples on which the detector cannot alarm
    /// (window size - 1 for windowed kinds, 0 otherwise).
    std::uint64_t warmup_length() const;

    /// Zero the step counter while keeping window contents and statistic;
    /// excludes warm-up samples from stopping-time accounting.
    void rebase_time();

private:
    DetectorConfig config_;
    std::optional<LikelihoodModel> model_;
    DetectorState state_;
    std::optional<SampleWindow> window_;
};

}  // namespace qcd

#include "qcdkit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "qcdkit/errors.hpp"

namespace qcd {

namespace {

// Seed substreams reserved for machinery, far away from trial indices.
constexpr std::uint64_t kDriftProbeLane = std::uint64_t(-2);
constexpr std::uint64_t kCalibrationLane = std::uint64_t(-3);

constexpr std::uint64_t kHorizonCap = 100000;

std::optional<std::uint64_t> run_single_trial(Detector& detector, const ChangeScenario& scenario,
                                              std::uint64_t horizon, Rng& rng) {
    detector.reset();
    if (detector.warmup_length() > 0 && scenario.change_point == 1) {
        for (std::uint64_t i = 0; i < detector.warmup_length(); ++i) {
            detector.step(sample(scenario.pre, rng));
        }
        detector.rebase_time();
    }
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        const bool post =
            scenario.change_point != kNoChange && t >= scenario.change_point;
        const DetectorState& state =
            detector.step(sample(post ? scenario.post : scenario.pre, rng));
        if (state.alarmed) {
            return state.stopping_time;
        }
    }
    return std::nullopt;
}

// Mean log likelihood ratio under the post-change law; sizes the default
// horizon of delay runs.
double estimate_drift(const DetectorConfig& config, const ChangeScenario& scenario,
                      std::uint64_t seed) {
    const LikelihoodModel model = config.build_model();
    Rng rng(split_seed(seed, kDriftProbeLane));
    constexpr std::size_t kProbes = 4096;
    double sum = 0.0;
    for (std::size_t i = 0; i < kProbes; ++i) {
        sum += log_likelihood_ratio(model, sample(scenario.post, rng));
    }
    return sum / static_cast<double>(kProbes);
}

std::uint64_t default_delay_horizon(const DetectorConfig& config, const ChangeScenario& scenario,
                                    std::uint64_t seed) {
    if (config.windowed()) {
        return kHorizonCap;
    }
    const double drift = estimate_drift(config, scenario, seed);
    if (!(drift > 1e-9)) {
        return kHorizonCap;
    }
    const double steps = 10.0 * std::max(config.threshold, 1.0) / drift;
    return std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::ceil(steps)), 200,
                                     kHorizonCap);
}

Estimate summarize(const std::vector<double>& values, std::uint64_t trials,
                   std::uint64_t censored, bool lower_bound) {
    Estimate estimate;
    estimate.trials = trials;
    estimate.censored = censored;
    estimate.lower_bound = lower_bound;
    if (values.empty()) {
        return estimate;
    }
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    estimate.value = mean;
    estimate.std_error = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return estimate;
}

}  // namespace

std::vector<TrialResult> run_detection_trials(const DetectorConfig& config,
                                              const ChangeScenario& scenario,
                                              const EvalOptions& options, std::uint64_t seed) {
    config.validate();
    std::uint64_t horizon = options.horizon;
    if (horizon == 0) {
        horizon = scenario.change_point == 1 ? default_delay_horizon(config, scenario, seed)
                                             : kHorizonCap;
    }

    std::vector<TrialResult> results(options.trials);
    unsigned workers = options.workers != 0 ? options.workers
                                            : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(
        std::min<std::uint64_t>(workers, std::max<std::uint64_t>(options.trials, 1)));

    std::atomic<std::uint64_t> next{0};
    auto work = [&] {
        Detector detector(config);
        for (;;) {
            const std::uint64_t i = next.fetch_add(1);
            if (i >= options.trials) {
                return;
            }
            Rng rng(split_seed(seed, i));
            results[i] = {run_single_trial(detector, scenario, horizon, rng),
                          scenario.change_point};
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    return results;
}

Estimate estimate_wadd(const DetectorConfig& config, const ChangeScenario& scenario,
                       const EvalOptions& options, std::uint64_t seed) {
    if (scenario.change_point != 1) {
        throw ConfigError("delay estimation needs a scenario that changes at step 1");
    }
    if (options.trials < 100) {
        throw ConfigError("delay estimation needs at least 100 trials");
    }
    const auto results = run_detection_trials(config, scenario, options, seed);
    std::vector<double> delays;
    delays.reserve(results.size());
    for (const auto& r : results) {
        if (r.stopping_time) {
            delays.push_back(static_cast<double>(*r.stopping_time));
        }
    }
    const std::uint64_t censored = options.trials - delays.size();
    if (100 * censored > options.trials) {
        throw HorizonTooShort("more than 1% of delay trials never alarmed (" +
                              std::to_string(censored) + " of " +
                              std::to_string(options.trials) + ")");
    }
    return summarize(delays, options.trials, censored, false);
}

Estimate estimate_mtfa(const DetectorConfig& config, const ChangeScenario& scenario,
                       const EvalOptions& options, std::uint64_t seed) {
    if (scenario.change_point != kNoChange) {
        throw ConfigError("false-alarm estimation needs a scenario that never changes");
    }
    if (options.trials < 100) {
        throw ConfigError("false-alarm estimation needs at least 100 trials");
    }
    const std::uint64_t horizon = options.horizon != 0 ? options.horizon : kHorizonCap;
    EvalOptions fixed = options;
    fixed.horizon = horizon;
    const auto results = run_detection_trials(config, scenario, fixed, seed);
    std::vector<double> times;
    times.reserve(results.size());
    std::uint64_t censored = 0;
    for (const auto& r : results) {
        if (r.stopping_time) {
            times.push_back(static_cast<double>(*r.stopping_time));
        } else {
            times.push_back(static_cast<double>(horizon));
            ++censored;
        }
    }
    return summarize(times, options.trials, censored, censored > 0);
}

double calibrate_threshold(const DetectorConfig& config, double target_mtfa,
                           const ChangeScenario& scenario, const CalibrationOptions& options,
                           std::uint64_t seed) {
    if (!(target_mtfa > 1.0)) {
        throw ConfigError("target MTFA must exceed 1");
    }
    const ChangeScenario null_scenario = scenario.pre_only(1);
    EvalOptions probe;
    probe.trials = options.trials;
    probe.horizon = options.horizon != 0
                        ? options.horizon
                        : static_cast<std::uint64_t>(std::ceil(10.0 * target_mtfa));
    probe.workers = options.workers;
    // One shared seed across probes: with common random numbers the
    // estimated MTFA is monotone in the threshold, so bisection is clean.
    const std::uint64_t probe_seed = split_seed(seed, kCalibrationLane);

    auto mtfa_at = [&](double threshold) {
        return estimate_mtfa(config.with_threshold(threshold), null_scenario, probe, probe_seed)
            .value;
    };

    if (mtfa_at(options.threshold_hi) < (1.0 - options.tolerance) * target_mtfa) {
        throw CalibrationUnreachable("threshold upper bound undershoots the target MTFA");
    }
    double lo = options.threshold_lo;
    double hi = options.threshold_hi;
    for (std::size_t i = 0; i < options.max_iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double estimate = mtfa_at(mid);
        if (std::abs(estimate - target_mtfa) <= options.tolerance * target_mtfa) {
            return mid;
        }
        if (estimate < target_mtfa) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    throw CalibrationUnreachable("no threshold reached the target MTFA within tolerance");
}

std::vector<SweepPoint> sweep_detector(const DetectorConfig& config,
                                       const ChangeScenario& scenario,
                                       std::span<const double> thresholds,
                                       const EvalOptions& options, std::uint64_t seed) {
    if (thresholds.empty()) {
        throw ConfigError("threshold grid must be non-empty");
    }
    if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
        throw ConfigError("threshold grid must be ascending");
    }
    const ChangeScenario null_scenario = scenario.pre_only(1);
    const ChangeScenario change_scenario = scenario.immediate_change(1);
    std::vector<SweepPoint> points;
    points.reserve(thresholds.size());
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        const DetectorConfig at = config.with_threshold(thresholds[i]);
        SweepPoint point;
        point.threshold = thresholds[i];
        point.mtfa = estimate_mtfa(at, null_scenario, options, split_seed(seed, 2 * i));
        point.wadd = estimate_wadd(at, change_scenario, options, split_seed(seed, 2 * i + 1));
        points.push_back(point);
    }
    return points;
}

std::vector<std::vector<SweepPoint>> sweep(std::span<const DetectorConfig> configs,
                                           const ChangeScenario& scenario,
                                           std::span<const double> thresholds,
                                           const EvalOptions& options, std::uint64_t seed) {
    std::vector<std::vector<SweepPoint>> curves;
    curves.reserve(configs.size());
    for (std::size_t d = 0; d < configs.size(); ++d) {
        curves.push_back(
            sweep_detector(configs[d], scenario, thresholds, options, split_seed(seed, d)));
    }
    return curves;
}

double wadd_at_mtfa(std::span<const SweepPoint> curve, double target_mtfa) {
    if (curve.size() < 2) {
        throw ConfigError("interpolation needs at least two sweep points");
    }
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const double lo = curve[i].mtfa.value;
        const double hi = curve[i + 1].mtfa.value;
        if (target_mtfa >= lo && target_mtfa <= hi) {
            if (hi == lo) {
                return curve[i].wadd.value;
            }
            const double t = (std::log(target_mtfa) - std::log(lo)) / (std::log(hi) - std::log(lo));
            return curve[i].wadd.value + t * (curve[i + 1].wadd.value - curve[i].wadd.value);
        }
    }
    throw ConfigError("target MTFA lies outside the sweep curve");
}

CorrectnessReport correctness_report(const LikelihoodModel& model, const ChangeScenario& truth,
                                     std::size_t n, std::uint64_t seed) {
    if (n < 10000) {
        throw ConfigError("correctness report needs at least 10000 samples per side");
    }
    auto side = [&](const GaussianMixture& law, std::uint64_t lane) {
        Rng rng(split_seed(seed, lane));
        double sum = 0.0;
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double value = log_likelihood_ratio(model, sample(law, rng));
            sum += value;
            sum_sq += value * value;
        }
        const double nd = static_cast<double>(n);
        const double mean = sum / nd;
        const double variance = std::max(sum_sq / nd - mean * mean, 0.0);
        Estimate estimate{mean, std::sqrt(variance / nd), n, 0, false};
        return std::pair{estimate, variance};
    };

    CorrectnessReport report;
    auto [pre, pre_var] = side(truth.pre, 0);
    auto [post, post_var] = side(truth.post, 1);
    report.pre_change_expectation = pre;
    report.post_change_expectation = post;
    report.pre_variance = pre_var;
    report.post_variance = post_var;
    report.correct = pre.value + 3.0 * pre.std_error < 0.0 &&
                     post.value - 3.0 * post.std_error > 0.0;
    return report;
}

std::vector<RobustShiftRow> robust_shift_study(const GaussianMixture& pre, double true_shift,
                                               std::span<const double> shifts, double threshold,
                                               const EvalOptions& options, std::uint64_t seed) {
    if (!(true_shift > 0.0)) {
        throw ConfigError("true shift must be positive");
    }
    EvalOptions run = options;
    if (run.horizon == 0) {
        run.horizon = 1000;
    }
    const ChangeScenario truth(pre, pre.shifted(true_shift), 1, run.horizon);

    std::vector<RobustShiftRow> rows;
    rows.reserve(shifts.size());
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        DetectorConfig config;
        config.kind = DetectorKind::kCusumRobust;
        config.threshold = threshold;
        config.kappa = shifts[i];
        config.pre = DistributionInput{pre, std::nullopt};
        const auto results = run_detection_trials(config, truth, run, split_seed(seed, i));
        RobustShiftRow row;
        row.shift = shifts[i];
        double delay_sum = 0.0;
        for (const auto& r : results) {
            if (r.stopping_time) {
                ++row.detections;
                delay_sum += static_cast<double>(*r.stopping_time);
            }
        }
        row.detection_rate =
            static_cast<double>(row.detections) / static_cast<double>(options.trials);
        row.mean_delay = row.detections > 0 ? delay_sum / static_cast<double>(row.detections) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qcd

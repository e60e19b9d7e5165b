#include "qcdkit/detector.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "qcdkit/errors.hpp"

namespace qcd {

SampleWindow::SampleWindow(std::size_t capacity) : buffer_(capacity) {
    if (capacity == 0) {
        throw ConfigError("window capacity must be at least 1");
    }
}

void SampleWindow::push(double x) {
    if (count_ == buffer_.size()) {
        const double evicted = buffer_[head_];
        sum_ -= evicted;
        sum_sq_ -= evicted * evicted;
    } else {
        ++count_;
    }
    buffer_[head_] = x;
    sum_ += x;
    sum_sq_ += x * x;
    head_ = (head_ + 1) % buffer_.size();
}

void SampleWindow::clear() {
    head_ = 0;
    count_ = 0;
    sum_ = 0.0;
    sum_sq_ = 0.0;
}

double SampleWindow::mean() const { return count_ == 0 ? 0.0 : sum_ / static_cast<double>(count_); }

double SampleWindow::variance() const {
    if (count_ == 0) {
        return 0.0;
    }
    const double m = mean();
    return std::max(sum_sq_ / static_cast<double>(count_) - m * m, 0.0);
}

namespace {

void require_live(const DetectorState& state) {
    if (state.alarmed) {
        throw SteppedAfterAlarm("detector already alarmed; reset before stepping again");
    }
}

void raise_alarm(DetectorState& state) {
    state.alarmed = true;
    state.stopping_time = state.time;
}

}  // namespace

void cusum_step(DetectorState& state, const LikelihoodModel& model, double x) {
    require_live(state);
    state.statistic = std::max(state.statistic + log_likelihood_ratio(model, x), 0.0);
    ++state.time;
    if (state.statistic >= state.threshold) {
        raise_alarm(state);
    }
}

void zscore_step(SampleWindow& window, DetectorState& state, double x) {
    require_live(state);
    window.push(x);
    ++state.time;
    if (!window.full()) {
        state.statistic = 0.0;
        return;
    }
    const double spread = std::sqrt(window.variance());
    if (spread == 0.0) {
        throw ZeroSpread("z-score window has zero spread");
    }
    state.statistic = (x - window.mean()) / spread;
    if (std::abs(state.statistic) > state.threshold) {
        raise_alarm(state);
    }
}

void chisq_step(SampleWindow& window, DetectorState& state, const LikelihoodModel& model,
                double x) {
    require_live(state);
    const auto* mix = std::get_if<MixModel>(&model);
    if (mix == nullptr) {
        throw ConfigError("chi-square needs both densities (Mix model)");
    }
    const double pre_density = std::max(mix->pre.pdf(x), kDensityFloor);
    const double post_density = mix->post.pdf(x);
    const double gap = post_density - pre_density;
    // The window stores one ratio term per sample; the statistic is their sum.
    window.push(gap * gap / pre_density);
    ++state.time;
    if (!window.full()) {
        state.statistic = 0.0;
        return;
    }
    state.statistic = window.sum();
    if (state.statistic > state.threshold) {
        raise_alarm(state);
    }
}

double threshold_for_far(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw ConfigError("false alarm rate must lie in (0, 1)");
    }
    return std::abs(std::log(alpha));
}

void reset(DetectorState& state) {
    state.statistic = 0.0;
    state.time = 0;
    state.alarmed = false;
    state.stopping_time.reset();
}

void reset(DetectorState& state, SampleWindow& window) {
    reset(state);
    window.clear();
}

std::string_view to_string(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::kCusumMix: return "cusum_mix";
        case DetectorKind::kCusumSinmix: return "cusum_sinmix";
        case DetectorKind::kCusumSingle: return "cusum_single";
        case DetectorKind::kCusumRobust: return "cusum_robust";
        case DetectorKind::kZScore: return "zscore";
        case DetectorKind::kChiSquare: return "chisq";
    }
    throw ConfigError("unknown detector kind");
}

DetectorKind detector_kind_from_string(std::string_view name) {
    for (DetectorKind kind :
         {DetectorKind::kCusumMix, DetectorKind::kCusumSinmix, DetectorKind::kCusumSingle,
          DetectorKind::kCusumRobust, DetectorKind::kZScore, DetectorKind::kChiSquare}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw ConfigError("unknown detector kind '" + std::string(name) + "'");
}

GaussianMixture DistributionInput::as_mixture() const {
    if (mixture) {
        return *mixture;
    }
    if (moments) {
        return GaussianMixture::single(moments->mean, moments->variance);
    }
    throw ConfigError("distribution input is empty");
}

MomentSummary DistributionInput::as_moments() const {
    if (moments) {
        return *moments;
    }
    if (mixture) {
        return mixture->moments();
    }
    throw ConfigError("distribution input is empty");
}

DistributionInput DistributionInput::from_json(const nlohmann::json& j) {
    DistributionInput input;
    if (j.is_object() && j.contains("components")) {
        input.mixture = GaussianMixture::from_json(j);
    } else if (j.is_object() && j.contains("mean") && j.contains("variance")) {
        input.moments = MomentSummary{j.at("mean").get<double>(), j.at("variance").get<double>()};
    } else {
        throw SchemaError("distribution must be a mixture ('components') or moments ('mean'/'variance')");
    }
    return input;
}

nlohmann::json DistributionInput::to_json() const {
    if (mixture) {
        return mixture->to_json();
    }
    if (moments) {
        return {{"mean", moments->mean}, {"variance", moments->variance}};
    }
    throw ConfigError("distribution input is empty");
}

void DetectorConfig::validate() const {
    if (!std::isfinite(threshold) || threshold < 0.0) {
        throw ConfigError("detector threshold must be finite and non-negative");
    }
    switch (kind) {
        case DetectorKind::kCusumMix:
        case DetectorKind::kCusumSinmix:
        case DetectorKind::kCusumSingle:
            if (!pre) throw ConfigError("detector needs 'pre'");
            if (!post) throw ConfigError("detector needs 'post'");
            break;
        case DetectorKind::kCusumRobust:
            if (!pre) throw ConfigError("detector needs 'pre'");
            if (post) throw ConfigError("robust detector takes no 'post'");
            if (!(kappa > 0.0)) throw ConfigError("robust detector needs 'kappa' > 0");
            break;
        case DetectorKind::kZScore:
            if (window < 2) throw ConfigError("z-score needs 'window' >= 2");
            break;
        case DetectorKind::kChiSquare:
            if (window < 1) throw ConfigError("chi-square needs 'window' >= 1");
            if (!pre) throw ConfigError("detector needs 'pre'");
            if (!post) throw ConfigError("detector needs 'post'");
            break;
    }
    if (has_model()) {
        build_model();  // surface distribution errors now, not on first step
    }
}

LikelihoodModel DetectorConfig::build_model() const {
    switch (kind) {
        case DetectorKind::kCusumMix:
        case DetectorKind::kChiSquare:
            return MixModel{pre->as_mixture(), post->as_mixture()};
        case DetectorKind::kCusumSinmix:
            return make_sinmix(pre->as_mixture(), post->as_moments());
        case DetectorKind::kCusumSingle:
            return make_single(pre->as_moments(), post->as_moments());
        case DetectorKind::kCusumRobust:
            return make_robust_shift(pre->as_mixture(), kappa);
        case DetectorKind::kZScore:
            throw ConfigError("z-score uses no likelihood model");
    }
    throw ConfigError("unknown detector kind");
}

DetectorConfig DetectorConfig::with_threshold(double b) const {
    DetectorConfig copy = *this;
    copy.threshold = b;
    return copy;
}

DetectorConfig DetectorConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw SchemaError("detector config must be a json object");
    }
    for (const auto& [key, value] : j.items()) {
        static const char* known[] = {"kind", "name", "threshold", "window", "kappa", "pre", "post"};
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return key == k; }) == std::end(known)) {
            throw SchemaError("unknown detector config key '" + key + "'");
        }
    }
    if (!j.contains("kind")) throw SchemaError("detector config needs 'kind'");
    if (!j.contains("threshold")) throw SchemaError("detector config needs 'threshold'");

    DetectorConfig config;
    config.kind = detector_kind_from_string(j.at("kind").get<std::string>());
    config.name = j.value("name", std::string(to_string(config.kind)));
    config.threshold = j.at("threshold").get<double>();
    config.window = j.value("window", std::size_t{0});
    config.kappa = j.value("kappa", 0.0);
    if (j.contains("pre")) config.pre = DistributionInput::from_json(j.at("pre"));
    if (j.contains("post")) config.post = DistributionInput::from_json(j.at("post"));
    config.validate();
    return config;
}

nlohmann::json DetectorConfig::to_json() const {
    nlohmann::json j{{"kind", std::string(to_string(kind))},
                     {"name", name.empty() ? std::string(to_string(kind)) : name},
                     {"threshold", threshold}};
    if (windowed()) j["window"] = window;
    if (kind == DetectorKind::kCusumRobust) j["kappa"] = kappa;
    if (pre) j["pre"] = pre->to_json();
    if (post) j["post"] = post->to_json();
    return j;
}

Detector::Detector(const DetectorConfig& config) : config_(config) {
    config_.validate();
    if (config_.name.empty()) {
        config_.name = std::string(to_string(config_.kind));
    }
    if (config_.has_model()) {
        model_ = config_.build_model();
    }
    if (config_.windowed()) {
        window_.emplace(config_.window);
    }
    state_.threshold = config_.threshold;
}

const DetectorState& Detector::step(double x) {
    switch (config_.kind) {
        case DetectorKind::kZScore:
            zscore_step(*window_, state_, x);
            break;
        case DetectorKind::kChiSquare:
            chisq_step(*window_, state_, *model_, x);
            break;
        default:
            cusum_step(state_, *model_, x);
            break;
    }
    return state_;
}

void Detector::reset() {
    if (window_) {
        qcd::reset(state_, *window_);
    } else {
        qcd::reset(state_);
    }
}

std::uint64_t Detector::warmup_length() const {
    return config_.windowed() ? config_.window - 1 : 0;
}

void Detector::rebase_time() { state_.time = 0; }

}  // namespace qcd

#include <cmath>
#include <optional>
#include <vector>

#include "doctest.h"

#include <nlohmann/json.hpp>

#include "qcdkit/detector.hpp"
#include "qcdkit/errors.hpp"
#include "qcdkit/stream.hpp"
#include "test_support.hpp"

using namespace qcd;

namespace {

GaussianMixture bimodal(double mean_lo, double mean_hi, double variance) {
    return GaussianMixture({{0.5, Gaussian(mean_lo, variance)}, {0.5, Gaussian(mean_hi, variance)}});
}

DetectorConfig mix_config(const GaussianMixture& pre, const GaussianMixture& post, double b) {
    DetectorConfig config;
    config.kind = DetectorKind::kCusumMix;
    config.threshold = b;
    config.pre = DistributionInput{pre, std::nullopt};
    config.post = DistributionInput{post, std::nullopt};
    return config;
}

std::optional<std::uint64_t> stopping_time_on(Detector detector, const std::vector<double>& xs) {
    for (double x : xs) {
        if (detector.step(x).alarmed) {
            return detector.state().stopping_time;
        }
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("log likelihood ratio vanishes when pre equals post") {
    const auto law = bimodal(-1.0, 1.0, 1.0);
    const LikelihoodModel model = MixModel{law, law};
    for (double x = -8.0; x <= 8.0; x += 0.25) {
        CHECK(log_likelihood_ratio(model, x) == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("single-gaussian ratio has the affine closed form") {
    // For unit variances, log N(x|1,1) - log N(x|0,1) = x - 1/2.
    const LikelihoodModel model = make_single({0.0, 1.0}, {1.0, 1.0});
    for (double x = -6.0; x <= 6.0; x += 0.37) {
        CHECK(log_likelihood_ratio(model, x) == doctest::Approx(x - 0.5).epsilon(1e-12));
    }
}

TEST_CASE("robust shift ratio is antisymmetric around half the shift") {
    const LikelihoodModel model = make_robust_shift(GaussianMixture::single(0.0, 1.0), 1.0);
    CHECK(log_likelihood_ratio(model, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(log_likelihood_ratio(model, 1.0) > 0.0);
    CHECK(log_likelihood_ratio(model, 0.0) < 0.0);
}

TEST_CASE("sinmix ratio uses the moment-matched post approximation") {
    const auto pre = bimodal(-1.0, 1.0, 1.0);
    const auto post = bimodal(1.5, 3.5, 1.0);
    const auto pm = post.moments();
    const LikelihoodModel model = make_sinmix(pre, pm);
    const Gaussian approx(pm.mean, pm.variance);
    for (double x : {-2.0, 0.0, 1.3, 4.0}) {
        CHECK(log_likelihood_ratio(model, x) ==
              doctest::Approx(approx.log_pdf(x) - pre.log_pdf(x)).epsilon(1e-12));
    }
}

TEST_CASE("ratios stay finite arbitrarily far out") {
    const LikelihoodModel model = MixModel{bimodal(-1.0, 1.0, 0.2), bimodal(2.0, 4.0, 0.3)};
    for (double x : {-1e8, -50.0, 50.0, 1e8, 1e300}) {
        CHECK(std::isfinite(log_likelihood_ratio(model, x)));
    }
}

TEST_CASE("cusum reflects at zero") {
    DetectorState state;
    state.threshold = 7.0;
    // x = -2.5 gives ratio -3 under the affine closed form.
    cusum_step(state, make_single({0.0, 1.0}, {1.0, 1.0}), -2.5);
    CHECK(state.statistic == 0.0);
    CHECK(state.time == 1);
    CHECK_FALSE(state.alarmed);
}

TEST_CASE("cusum alarms on reaching the threshold") {
    DetectorState state;
    state.threshold = 7.0;
    state.statistic = 6.9;
    state.time = 41;
    cusum_step(state, make_single({0.0, 1.0}, {1.0, 1.0}), 0.7);  // ratio 0.2
    CHECK(state.statistic == doctest::Approx(7.1));
    CHECK(state.alarmed);
    REQUIRE(state.stopping_time.has_value());
    CHECK(*state.stopping_time == 42);
    CHECK_THROWS_AS(cusum_step(state, make_single({0.0, 1.0}, {1.0, 1.0}), 0.0),
                    SteppedAfterAlarm);
}

TEST_CASE("threshold for a false alarm budget") {
    CHECK(threshold_for_far(1.0 / std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(threshold_for_far(0.01) == doctest::Approx(4.605170185988092).epsilon(1e-12));
    CHECK(threshold_for_far(0.5) == doctest::Approx(0.6931471805599453).epsilon(1e-12));
    CHECK_THROWS_AS(threshold_for_far(0.0), ConfigError);
    CHECK_THROWS_AS(threshold_for_far(1.0), ConfigError);
}

TEST_CASE("z-score of a hand-computed window") {
    SampleWindow window(4);
    DetectorState state;
    state.threshold = 100.0;
    for (double x : {1.0, 2.0, 3.0}) {
        zscore_step(window, state, x);
        CHECK(state.statistic == 0.0);
    }
    zscore_step(window, state, 4.0);
    CHECK(state.statistic == doctest::Approx(1.3416407864998738).epsilon(1e-12));
    CHECK_FALSE(state.alarmed);
}

TEST_CASE("no z-score alarm is possible during warm-up") {
    SampleWindow window(5);
    DetectorState state;
    state.threshold = 0.1;
    for (double x : {1e6, -1e6, 1e7, -1e7}) {
        zscore_step(window, state, x);
        CHECK_FALSE(state.alarmed);
        CHECK(state.statistic == 0.0);
    }
    zscore_step(window, state, 1e8);  // window full now, alarms are allowed
    CHECK(state.alarmed);
    REQUIRE(state.stopping_time.has_value());
    CHECK(*state.stopping_time == 5);
}

TEST_CASE("constant windows have no z-score") {
    SampleWindow window(3);
    DetectorState state;
    state.threshold = 3.0;
    zscore_step(window, state, 2.0);
    zscore_step(window, state, 2.0);
    CHECK_THROWS_AS(zscore_step(window, state, 2.0), ZeroSpread);
}

TEST_CASE("chi-square statistic vanishes when pre equals post") {
    const auto law = bimodal(0.0, 1.0, 1.0);
    const LikelihoodModel model = MixModel{law, law};
    SampleWindow window(3);
    DetectorState state;
    state.threshold = 1e-6;
    for (double x : {0.3, -0.6, 1.2, 0.9, 2.0}) {
        chisq_step(window, state, model, x);
        CHECK(state.statistic == doctest::Approx(0.0).epsilon(1e-18));
        CHECK_FALSE(state.alarmed);
    }
}

TEST_CASE("chi-square with a unit window is the single-sample term") {
    const auto pre = bimodal(-1.0, 1.0, 1.0);
    const auto post = bimodal(1.0, 3.0, 1.0);
    const LikelihoodModel model = MixModel{pre, post};
    SampleWindow window(1);
    DetectorState state;
    state.threshold = 1e12;
    const double x = 1.7;
    chisq_step(window, state, model, x);
    const double f = pre.pdf(x);
    const double g = post.pdf(x);
    CHECK(state.statistic == doctest::Approx((g - f) * (g - f) / f).epsilon(1e-12));
}

TEST_CASE("replacing a window sample with a higher-discrepancy one raises the statistic") {
    const auto pre = GaussianMixture::single(0.0, 1.0);
    const auto post = GaussianMixture::single(2.5, 1.0);
    const LikelihoodModel model = MixModel{pre, post};
    auto statistic_for = [&](double second_sample) {
        SampleWindow window(2);
        DetectorState state;
        state.threshold = 1e12;
        chisq_step(window, state, model, 0.1);
        chisq_step(window, state, model, second_sample);
        return state.statistic;
    };
    // Larger samples sit deeper in the post-change bulk here.
    CHECK(statistic_for(3.0) > statistic_for(2.0));
    CHECK(statistic_for(2.0) > statistic_for(0.2));
}

TEST_CASE("reset clears everything except the threshold") {
    DetectorConfig config = mix_config(GaussianMixture::single(0.0, 1.0),
                                       GaussianMixture::single(2.5, 1.0), 1.0);
    Detector detector(config);
    while (!detector.state().alarmed) {
        detector.step(3.0);
    }
    detector.reset();
    CHECK(detector.state().statistic == 0.0);
    CHECK(detector.state().time == 0);
    CHECK_FALSE(detector.state().alarmed);
    CHECK_FALSE(detector.state().stopping_time.has_value());
    CHECK(detector.state().threshold == 1.0);
    detector.reset();  // idempotent
    CHECK(detector.state().time == 0);
}

TEST_CASE("reset then replay reproduces the statistic trajectory bit for bit") {
    const auto pre = bimodal(-0.5, 0.5, 1.0);
    const auto post = bimodal(2.0, 3.0, 1.0);
    const auto stream = generate(ChangeScenario(pre, post, 40, 80), 99);
    for (auto kind : {DetectorKind::kCusumMix, DetectorKind::kZScore, DetectorKind::kChiSquare}) {
        DetectorConfig config;
        config.kind = kind;
        config.threshold = 1e9;  // keep it from alarming so the whole stream replays
        config.window = 8;
        if (kind != DetectorKind::kZScore) {
            config.pre = DistributionInput{pre, std::nullopt};
            config.post = DistributionInput{post, std::nullopt};
        }
        Detector detector(config);
        std::vector<double> first;
        for (double x : stream) first.push_back(detector.step(x).statistic);
        detector.reset();
        std::vector<double> second;
        for (double x : stream) second.push_back(detector.step(x).statistic);
        CHECK(first == second);
    }
}

TEST_CASE("raising the threshold never hastens the stopping time") {
    Rng rng(31);
    const auto pre = bimodal(-0.5, 0.5, 1.0);
    const auto post = bimodal(2.0, 3.0, 1.0);
    const auto stream = generate(ChangeScenario(pre, post, 30, 120), 17);

    std::vector<DetectorConfig> configs;
    configs.push_back(mix_config(pre, post, 0.0));
    {
        DetectorConfig c;
        c.kind = DetectorKind::kCusumRobust;
        c.kappa = 1.0;
        c.pre = DistributionInput{pre, std::nullopt};
        configs.push_back(c);
    }
    {
        DetectorConfig c;
        c.kind = DetectorKind::kZScore;
        c.window = 10;
        configs.push_back(c);
    }
    {
        DetectorConfig c;
        c.kind = DetectorKind::kChiSquare;
        c.window = 10;
        c.pre = DistributionInput{pre, std::nullopt};
        c.post = DistributionInput{post, std::nullopt};
        configs.push_back(c);
    }

    for (auto& config : configs) {
        double lo = 0.5;
        for (int i = 0; i < 6; ++i) {
            const double hi = lo + 0.5 + 2.0 * rng.uniform();
            const auto tau_lo = stopping_time_on(Detector(config.with_threshold(lo)), stream);
            const auto tau_hi = stopping_time_on(Detector(config.with_threshold(hi)), stream);
            const auto value = [](const std::optional<std::uint64_t>& t) {
                return t ? *t : std::numeric_limits<std::uint64_t>::max();
            };
            CHECK(value(tau_hi) >= value(tau_lo));
            lo = hi;
        }
    }
}

TEST_CASE("cusum statistic is never negative and is zero under an empty ratio") {
    const auto law = bimodal(-1.0, 1.0, 1.0);
    Detector same(mix_config(law, law, 5.0));
    Detector real(mix_config(law, law.shifted(2.0), 5.0));
    Rng rng(5150);
    for (int i = 0; i < 2000; ++i) {
        const double x = sample(law, rng);
        CHECK(same.step(x).statistic == 0.0);
        if (real.state().alarmed) {
            real.reset();
        }
        CHECK(real.step(x).statistic >= 0.0);
    }
}

TEST_CASE("larger samples never lower the cusum path for an increasing ratio") {
    const LikelihoodModel model = make_single({0.0, 1.0}, {2.0, 1.0});
    Rng rng(808);
    std::vector<double> stream(60);
    for (auto& x : stream) x = rng.normal();
    for (std::size_t bump = 0; bump < stream.size(); bump += 7) {
        auto raised = stream;
        raised[bump] += 1.5;
        DetectorState a, b;
        a.threshold = b.threshold = 1e9;
        for (std::size_t t = 0; t < stream.size(); ++t) {
            cusum_step(a, model, stream[t]);
            cusum_step(b, model, raised[t]);
            CHECK(b.statistic >= a.statistic);
        }
    }
}

TEST_CASE("detector configs round-trip through json") {
    const auto pre = bimodal(-1.0, 1.0, 1.0);
    const auto post = bimodal(1.5, 3.5, 1.0);

    const std::string text = R"({
      "kind": "cusum_sinmix", "threshold": 4.0,
      "pre": {"components": [{"weight": 0.5, "mean": -1.0, "variance": 1.0},
                              {"weight": 0.5, "mean": 1.0, "variance": 1.0}]},
      "post": {"mean": 2.5, "variance": 2.0}
    })";
    const auto config = DetectorConfig::from_json(nlohmann::json::parse(text));
    CHECK(config.kind == DetectorKind::kCusumSinmix);
    CHECK(config.name == "cusum_sinmix");
    CHECK(config.threshold == 4.0);
    CHECK(config.pre->mixture.has_value());
    CHECK(config.post->moments.has_value());

    const auto back = DetectorConfig::from_json(config.to_json());
    CHECK(back.kind == config.kind);
    CHECK(back.threshold == config.threshold);
    CHECK(back.post->moments->mean == 2.5);

    for (auto kind : {DetectorKind::kCusumMix, DetectorKind::kCusumSinmix,
                      DetectorKind::kCusumSingle, DetectorKind::kCusumRobust,
                      DetectorKind::kZScore, DetectorKind::kChiSquare}) {
        DetectorConfig c;
        c.kind = kind;
        c.threshold = 2.0;
        c.window = 10;
        c.kappa = kind == DetectorKind::kCusumRobust ? 1.5 : 0.0;
        if (kind != DetectorKind::kZScore && kind != DetectorKind::kCusumRobust) {
            c.pre = DistributionInput{pre, std::nullopt};
            c.post = DistributionInput{post, std::nullopt};
        }
        if (kind == DetectorKind::kCusumRobust) {
            c.pre = DistributionInput{pre, std::nullopt};
        }
        const auto rebuilt = DetectorConfig::from_json(c.to_json());
        CHECK(rebuilt.kind == kind);
        CHECK(to_string(rebuilt.kind) == to_string(kind));
    }
}

TEST_CASE("bad detector configs are rejected with the field named") {
    using nlohmann::json;
    const json good = DetectorConfig::from_json(json::parse(
        R"({"kind":"zscore","threshold":3.0,"window":10})")).to_json();
    CHECK_THROWS_AS(DetectorConfig::from_json(json::parse(R"({"threshold":1.0})")), SchemaError);
    CHECK_THROWS_AS(DetectorConfig::from_json(json::parse(R"({"kind":"zscore"})")), SchemaError);
    CHECK_THROWS_AS(DetectorConfig::from_json(json::parse(
                        R"({"kind":"zscore","threshold":1.0,"window":1})")),
                    ConfigError);
    CHECK_THROWS_AS(DetectorConfig::from_json(json::parse(
                        R"({"kind":"cusum_mix","threshold":1.0})")),
                    ConfigError);
    CHECK_THROWS_AS(DetectorConfig::from_json(json::parse(
                        R"({"kind":"cusum_robust","threshold":1.0,"kappa":0.0,
                            "pre":{"mean":0.0,"variance":1.0}})")),
                    ConfigError);
    CHECK_THROWS_AS(DetectorConfig::from_json(json::parse(
                        R"({"kind":"zscore","threshold":-1.0,"window":5})")),
                    ConfigError);
    CHECK_THROWS_AS(DetectorConfig::from_json(json::parse(
                        R"({"kind":"zscore","threshold":1.0,"window":5,"typo":1})")),
                    SchemaError);
    CHECK_THROWS_AS(detector_kind_from_string("cusum"), ConfigError);
}

TEST_CASE("an alarm holds until an explicit reset") {
    DetectorConfig config = mix_config(GaussianMixture::single(0.0, 1.0),
                                       GaussianMixture::single(3.0, 1.0), 0.5);
    Detector detector(config);
    detector.step(5.0);
    REQUIRE(detector.state().alarmed);
    CHECK_THROWS_AS(detector.step(0.0), SteppedAfterAlarm);
    detector.reset();
    CHECK_FALSE(detector.state().alarmed);
    detector.step(0.0);
    CHECK(detector.state().time == 1);
}

TEST_CASE("a mid-stream change is caught shortly after it happens") {
    // Pre-change errors around 1.7, post-change around 4.7, threshold 7.
    GaussianMixture pre({{0.65, Gaussian(1.45, 0.20)}, {0.35, Gaussian(2.1, 0.16)}});
    GaussianMixture post({{0.5, Gaussian(4.2, 0.49)}, {0.5, Gaussian(5.1, 0.64)}});
    const ChangeScenario scenario(pre, post, 490, 600);
    Detector detector(mix_config(pre, post, 7.0));

    const auto stream = generate(scenario, 20260810);
    std::optional<std::uint64_t> tau;
    for (double x : stream) {
        if (detector.step(x).alarmed) {
            tau = detector.state().stopping_time;
            break;
        }
    }
    REQUIRE(tau.has_value());
    CHECK(*tau >= 490);
    CHECK(*tau <= 510);

    // The same detector on a change-free stream stays quiet.
    detector.reset();
    const auto quiet = generate(scenario.pre_only(600), 20260810);
    for (double x : quiet) {
        detector.step(x);
    }
    CHECK_FALSE(detector.state().alarmed);
}

#include "qcdkit/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "qcdkit/errors.hpp"

namespace qcd {

const double kLogDensityFloor = std::log(kDensityFloor);

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;

double log_density_raw(const Gaussian& g, double x) {
    const double d = x - g.mean;
    return -0.5 * (kLogTwoPi + std::log(g.variance)) - 0.5 * d * d / g.variance;
}

}  // namespace

Gaussian::Gaussian(double mean_, double variance_) : mean(mean_), variance(variance_) {
    if (!std::isfinite(mean) || !std::isfinite(variance)) {
        throw InvalidDistribution("gaussian parameters must be finite");
    }
    if (variance <= 0.0) {
        throw InvalidDistribution("gaussian variance must be positive");
    }
}

double Gaussian::pdf(double x) const { return std::exp(log_density_raw(*this, x)); }

double Gaussian::log_pdf(double x) const {
    return std::max(log_density_raw(*this, x), kLogDensityFloor);
}

GaussianMixture::GaussianMixture(std::vector<Component> components)
    : components_(std::move(components)) {
    if (components_.empty()) {
        throw InvalidDistribution("mixture needs at least one component");
    }
    double total = 0.0;
    for (const auto& c : components_) {
        if (!std::isfinite(c.weight) || c.weight <= 0.0) {
            throw InvalidDistribution("mixture weights must be positive");
        }
        Gaussian validated(c.gaussian.mean, c.gaussian.variance);
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidDistribution("mixture weights must sum to one");
    }
}

GaussianMixture GaussianMixture::single(double mean, double variance) {
    return GaussianMixture({{1.0, Gaussian(mean, variance)}});
}

namespace {

// Raw log-sum-exp over weighted component log densities; -inf when every
// component underflows completely.
double log_sum_exp(const std::vector<GaussianMixture::Component>& components, double x) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : components) {
        best = std::max(best, std::log(c.weight) + log_density_raw(c.gaussian, x));
    }
    if (!(best > -std::numeric_limits<double>::infinity())) {
        return -std::numeric_limits<double>::infinity();
    }
    double acc = 0.0;
    for (const auto& c : components) {
        acc += std::exp(std::log(c.weight) + log_density_raw(c.gaussian, x) - best);
    }
    return best + std::log(acc);
}

}  // namespace

double GaussianMixture::pdf(double x) const {
    const double lse = log_sum_exp(components_, x);
    return std::isinf(lse) ? 0.0 : std::exp(lse);
}

double GaussianMixture::log_pdf(double x) const {
    return std::max(log_sum_exp(components_, x), kLogDensityFloor);
}

MomentSummary GaussianMixture::moments() const {
    double mean = 0.0;
    for (const auto& c : components_) {
        mean += c.weight * c.gaussian.mean;
    }
    double second = 0.0;
    for (const auto& c : components_) {
        second += c.weight * (c.gaussian.variance + c.gaussian.mean * c.gaussian.mean);
    }
    return {mean, second - mean * mean};
}

GaussianMixture GaussianMixture::shifted(double delta) const {
    std::vector<Component> shifted_components = components_;
    for (auto& c : shifted_components) {
        c.gaussian.mean += delta;
    }
    return GaussianMixture(std::move(shifted_components));
}

nlohmann::json GaussianMixture::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& c : components_) {
        list.push_back({{"weight", c.weight},
                        {"mean", c.gaussian.mean},
                        {"variance", c.gaussian.variance}});
    }
    return {{"components", std::move(list)}};
}

GaussianMixture GaussianMixture::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("components")) {
        throw SchemaError("mixture json needs a 'components' array");
    }
    std::vector<Component> components;
    for (const auto& c : j.at("components")) {
        for (const char* key : {"weight", "mean", "variance"}) {
            if (!c.contains(key)) {
                throw SchemaError(std::string("mixture component missing '") + key + "'");
            }
        }
        components.push_back(
            {c.at("weight").get<double>(),
             Gaussian(c.at("mean").get<double>(), c.at("variance").get<double>())});
    }
    return GaussianMixture(std::move(components));
}

double sample(const GaussianMixture& mixture, Rng& rng) {
    const auto& components = mixture.components();
    const Gaussian* chosen = &components.back().gaussian;
    if (components.size() > 1) {
        const double u = rng.uniform();
        double cumulative = 0.0;
        for (const auto& c : components) {
            cumulative += c.weight;
            if (u < cumulative) {
                chosen = &c.gaussian;
                break;
            }
        }
    }
    return rng.normal(chosen->mean, std::sqrt(chosen->variance));
}

std::vector<double> sample(const GaussianMixture& mixture, std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    std::vector<double> draws;
    draws.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        draws.push_back(sample(mixture, rng));
    }
    return draws;
}

}  // namespace qcd

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qcdkit/rng.hpp"

namespace qcd {

/// Densities are clamped at this value before logs are taken, so
/// log-likelihood ratios stay finite no matter how extreme a sample is.
inline constexpr double kDensityFloor = 1e-300;

/// log(kDensityFloor); the smallest value log_pdf can return.
extern const double kLogDensityFloor;

/// Scalar normal distribution, parameterized by mean and variance.
struct Gaussian {
    double mean = 0.0;
    double variance = 1.0;

    Gaussian() = default;
    Gaussian(double mean, double variance);

    double pdf(double x) const;
    /// Stable log density, floored at kLogDensityFloor.
    double log_pdf(double x) const;
};

/// First two moments of a distribution.
struct MomentSummary {
    double mean = 0.0;
    double variance = 0.0;
};

/// Finite mixture of scalar Gaussians. Immutable after construction; weights
/// must be positive and sum to one within 1e-9.
class GaussianMixture {
public:
    struct Component {
        double weight = 1.0;
        Gaussian gaussian;
    };

    explicit GaussianMixture(std::vector<Component> components);

    /// Mixture with a single component of weight one.
    static GaussianMixture single(double mean, double variance);

    const std::vector<Component>& components() const { return components_; }
    std::size_t component_count() const { return components_.size(); }

    double pdf(double x) const;
    /// Log-sum-exp over component log densities, floored at kLogDensityFloor.
    double log_pdf(double x) const;

    /// Overall mean and variance of the mixture.
    MomentSummary moments() const;

    /// Copy with every component mean increased by delta; weights and
    /// variances unchanged.
    GaussianMixture shifted(double delta) const;

    nlohmann::json to_json() const;
    static GaussianMixture from_json(const nlohmann::json& j);

    bool operator==(const GaussianMixture&) const = default;

private:
    std::vector<Component> components_;
};

inline bool operator==(const Gaussian& a, const Gaussian& b) {
    return a.mean == b.mean && a.variance == b.variance;
}
inline bool operator==(const GaussianMixture::Component& a, const GaussianMixture::Component& b) {
    return a.weight == b.weight && a.gaussian == b.gaussian;
}

/// One draw: pick a component by weight, then sample its Gaussian.
double sample(const GaussianMixture& mixture, Rng& rng);

/// n i.i.d. draws under a fresh generator; same seed, same sequence.
std::vector<double> sample(const GaussianMixture& mixture, std::uint64_t seed, std::size_t n);

}  // namespace qcd

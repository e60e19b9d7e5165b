#pragma once

#include <cstdint>

#include "qcdkit/gmm.hpp"

namespace qcd {

struct KlEstimate {
    double value = 0.0;
    /// Standard error of the estimate; zero when the value is exact.
    double std_error = 0.0;
    std::size_t samples = 0;
};

/// Monte-Carlo estimate of KL(p || q): mean of log p(x) - log q(x) over n
/// draws x ~ p, with its standard error. Deterministic under a fixed seed.
/// Requires n >= 1000.
KlEstimate kl_mc(const GaussianMixture& p, const GaussianMixture& q, std::size_t n,
                 std::uint64_t seed);

/// Closed-form KL(p || q) between two scalar Gaussians.
double kl_gaussian(const Gaussian& p, const Gaussian& q);

/// KL(p || q): exact closed form when both mixtures have one component,
/// otherwise the Monte-Carlo estimate.
KlEstimate kl(const GaussianMixture& p, const GaussianMixture& q, std::size_t n,
              std::uint64_t seed);

}  // namespace qcd

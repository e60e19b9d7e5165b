#pragma once

#include <cstddef>
#include <span>

#include "qcdkit/gmm.hpp"

namespace qcd {

struct EmConfig {
    std::size_t max_iterations = 500;
    /// Stop when the relative log-likelihood improvement drops below this.
    double tolerance = 1e-8;
    /// Lower bound for component variances, keeps components from collapsing
    /// onto single points.
    double variance_floor = 1e-6;
};

struct EmFit {
    GaussianMixture mixture;
    double log_likelihood = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Fit a k-component mixture by expectation-maximization.
///
/// Initialization is deterministic: component means start at the evenly
/// spaced quantiles (i + 1/2)/k of the data (the 25th/75th percentiles for
/// k = 2), variances at the sample variance, weights at 1/k. The data
/// log-likelihood is checked to be non-decreasing on every iteration.
///
/// Throws TooFewPoints when data.size() < 10*k or k == 0, DegenerateData
/// when all points are identical.
EmFit fit_em(std::span<const double> data, std::size_t k, const EmConfig& config = {});

}  // namespace qcd

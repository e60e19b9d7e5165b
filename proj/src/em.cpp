#include "qcdkit/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "qcdkit/errors.hpp"

namespace qcd {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;

// Linear-interpolation quantile on a sorted copy of the data.
double quantile(const std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

EmFit fit_em(std::span<const double> data, std::size_t k, const EmConfig& config) {
    if (k == 0 || data.size() < 10 * k) {
        throw TooFewPoints("fit_em needs at least 10*k points and k >= 1");
    }
    for (double x : data) {
        if (!std::isfinite(x)) {
            throw NonFiniteValue("fit_em input contains a non-finite value");
        }
    }
    const double n = static_cast<double>(data.size());
    const double sample_mean = std::accumulate(data.begin(), data.end(), 0.0) / n;
    double sample_var = 0.0;
    for (double x : data) {
        sample_var += (x - sample_mean) * (x - sample_mean);
    }
    sample_var /= n;
    if (sample_var == 0.0) {
        throw DegenerateData("fit_em input has zero spread");
    }

    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());

    std::vector<double> weights(k, 1.0 / static_cast<double>(k));
    std::vector<double> means(k);
    std::vector<double> variances(k, std::max(sample_var, config.variance_floor));
    for (std::size_t i = 0; i < k; ++i) {
        means[i] = quantile(sorted, (static_cast<double>(i) + 0.5) / static_cast<double>(k));
    }

    std::vector<double> resp(data.size() * k);
    double prev_ll = -std::numeric_limits<double>::infinity();
    double ll = prev_ll;
    std::size_t iter = 0;
    bool converged = false;

    for (; iter < config.max_iterations; ++iter) {
        // E-step: responsibilities via log-sum-exp, accumulating the
        // data log-likelihood along the way.
        ll = 0.0;
        for (std::size_t j = 0; j < data.size(); ++j) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < k; ++i) {
                const double d = data[j] - means[i];
                const double lp = std::log(weights[i]) -
                                  0.5 * (kLogTwoPi + std::log(variances[i])) -
                                  0.5 * d * d / variances[i];
                resp[j * k + i] = lp;
                best = std::max(best, lp);
            }
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                acc += std::exp(resp[j * k + i] - best);
            }
            const double log_px = best + std::log(acc);
            ll += log_px;
            for (std::size_t i = 0; i < k; ++i) {
                resp[j * k + i] = std::exp(resp[j * k + i] - log_px);
            }
        }
        if (std::isfinite(prev_ll) && ll < prev_ll - 1e-9 * (1.0 + std::abs(prev_ll))) {
            throw Error("fit_em log-likelihood decreased");
        }
        if (std::isfinite(prev_ll) &&
            (ll - prev_ll) / std::max(std::abs(prev_ll), 1e-12) < config.tolerance) {
            converged = true;
            break;
        }
        prev_ll = ll;

        // M-step.
        for (std::size_t i = 0; i < k; ++i) {
            double total = 0.0;
            double mean = 0.0;
            for (std::size_t j = 0; j < data.size(); ++j) {
                total += resp[j * k + i];
                mean += resp[j * k + i] * data[j];
            }
            total = std::max(total, 1e-12);
            mean /= total;
            double var = 0.0;
            for (std::size_t j = 0; j < data.size(); ++j) {
                var += resp[j * k + i] * (data[j] - mean) * (data[j] - mean);
            }
            var /= total;
            weights[i] = total / n;
            means[i] = mean;
            variances[i] = std::max(var, config.variance_floor);
        }
        // Guard against weight drift from the total floor above.
        const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
        for (auto& w : weights) {
            w /= wsum;
        }
    }

    std::vector<GaussianMixture::Component> components;
    components.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        components.push_back({weights[i], Gaussian(means[i], variances[i])});
    }
    return {GaussianMixture(std::move(components)), ll, iter, converged};
}

}  // namespace qcd

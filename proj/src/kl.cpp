#include "qcdkit/kl.hpp"

#include <cmath>

#include "qcdkit/errors.hpp"

namespace qcd {

KlEstimate kl_mc(const GaussianMixture& p, const GaussianMixture& q, std::size_t n,
                 std::uint64_t seed) {
    if (n < 1000) {
        throw TooFewPoints("kl_mc needs at least 1000 samples");
    }
    Rng rng(seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = sample(p, rng);
        const double term = p.log_pdf(x) - q.log_pdf(x);
        sum += term;
        sum_sq += term * term;
    }
    const double nd = static_cast<double>(n);
    const double mean = sum / nd;
    const double var = std::max(sum_sq / nd - mean * mean, 0.0);
    return {mean, std::sqrt(var / nd), n};
}

double kl_gaussian(const Gaussian& p, const Gaussian& q) {
    const double mean_gap = p.mean - q.mean;
    return 0.5 * (p.variance / q.variance + mean_gap * mean_gap / q.variance - 1.0 +
                  std::log(q.variance / p.variance));
}

KlEstimate kl(const GaussianMixture& p, const GaussianMixture& q, std::size_t n,
              std::uint64_t seed) {
    if (p.component_count() == 1 && q.component_count() == 1) {
        return {kl_gaussian(p.components()[0].gaussian, q.components()[0].gaussian), 0.0, 0};
    }
    return kl_mc(p, q, n, seed);
}

}  // namespace qcd

#include "qcdkit/likelihood.hpp"

#include "qcdkit/errors.hpp"

namespace qcd {

double log_likelihood_ratio(const LikelihoodModel& model, double x) {
    return std::visit(
        [x](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, MixModel>) {
                return m.post.log_pdf(x) - m.pre.log_pdf(x);
            } else if constexpr (std::is_same_v<T, SinmixModel>) {
                return m.post_approx.log_pdf(x) - m.pre.log_pdf(x);
            } else if constexpr (std::is_same_v<T, SingleModel>) {
                return m.post_approx.log_pdf(x) - m.pre_approx.log_pdf(x);
            } else {
                return m.pre.log_pdf(x - m.min_shift) - m.pre.log_pdf(x);
            }
        },
        model);
}

SinmixModel make_sinmix(GaussianMixture pre, const MomentSummary& post_moments) {
    return {std::move(pre), Gaussian(post_moments.mean, post_moments.variance)};
}

SingleModel make_single(const MomentSummary& pre_moments, const MomentSummary& post_moments) {
    return {Gaussian(pre_moments.mean, pre_moments.variance),
            Gaussian(post_moments.mean, post_moments.variance)};
}

RobustShiftModel make_robust_shift(GaussianMixture pre, double min_shift) {
    if (!(min_shift > 0.0)) {
        throw InvalidDistribution("robust shift must be positive");
    }
    return {std::move(pre), min_shift};
}

}  // namespace qcd

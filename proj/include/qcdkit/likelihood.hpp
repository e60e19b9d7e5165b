#pragma once

#include <variant>

#include "qcdkit/gmm.hpp"

namespace qcd {

/// Both laws fully known as mixtures.
struct MixModel {
    GaussianMixture pre;
    GaussianMixture post;
};

/// Pre-change mixture known; post-change known only through its overall
/// moments and approximated by the matching single Gaussian.
struct SinmixModel {
    GaussianMixture pre;
    Gaussian post_approx;
};

/// Both laws known only through their overall moments.
struct SingleModel {
    Gaussian pre_approx;
    Gaussian post_approx;
};

/// No post-change knowledge: the pre-change law shifted by a putative
/// minimum gap serves as the surrogate post-change law.
struct RobustShiftModel {
    GaussianMixture pre;
    double min_shift = 1.0;  // > 0
};

/// The detector's assumed pre/post pair, in one of four knowledge regimes.
using LikelihoodModel = std::variant<MixModel, SinmixModel, SingleModel, RobustShiftModel>;

/// log of the (approximate) likelihood ratio at x. All densities pass
/// through the density floor, so the result is always finite.
double log_likelihood_ratio(const LikelihoodModel& model, double x);

/// Sinmix model from the post-change law's overall moments.
SinmixModel make_sinmix(GaussianMixture pre, const MomentSummary& post_moments);

/// Single model from both laws' overall moments.
SingleModel make_single(const MomentSummary& pre_moments, const MomentSummary& post_moments);

/// Robust shift model; min_shift must be positive.
RobustShiftModel make_robust_shift(GaussianMixture pre, double min_shift);

}  // namespace qcd

#include "qcdkit/metrics.hpp"

#include <cmath>

#include "qcdkit/errors.hpp"

namespace qcd {

namespace {

double displacement(const Point2& a, const Point2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

TrajectoryPair::TrajectoryPair(std::vector<Point2> predicted_, std::vector<Point2> truth_)
    : predicted(std::move(predicted_)), truth(std::move(truth_)) {
    if (predicted.empty() || predicted.size() != truth.size()) {
        throw ConfigError("trajectory pair needs equal, non-zero lengths");
    }
    for (const auto* track : {&predicted, &truth}) {
        for (const auto& p : *track) {
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
                throw NonFiniteValue("trajectory coordinates must be finite");
            }
        }
    }
}

double ade(const TrajectoryPair& pair) {
    double total = 0.0;
    for (std::size_t k = 0; k < pair.length(); ++k) {
        total += displacement(pair.predicted[k], pair.truth[k]);
    }
    return total / static_cast<double>(pair.length());
}

double fde(const TrajectoryPair& pair) {
    return displacement(pair.predicted.back(), pair.truth.back());
}

double rmse(const TrajectoryPair& pair) {
    double total = 0.0;
    for (std::size_t k = 0; k < pair.length(); ++k) {
        const double d = displacement(pair.predicted[k], pair.truth[k]);
        total += d * d;
    }
    return std::sqrt(total / static_cast<double>(pair.length()));
}

}  // namespace qcd

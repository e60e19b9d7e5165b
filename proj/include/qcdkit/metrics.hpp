#pragma once

#include <vector>

namespace qcd {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Predicted and ground-truth trajectory for one scene; equal lengths >= 1,
/// all coordinates finite.
struct TrajectoryPair {
    std::vector<Point2> predicted;
    std::vector<Point2> truth;

    TrajectoryPair(std::vector<Point2> predicted, std::vector<Point2> truth);
    std::size_t length() const { return predicted.size(); }
};

/// Mean per-frame displacement over the horizon.
double ade(const TrajectoryPair& pair);

/// Displacement at the final frame only.
double fde(const TrajectoryPair& pair);

/// Root of the mean squared per-frame displacement.
double rmse(const TrajectoryPair& pair);

}  // namespace qcd

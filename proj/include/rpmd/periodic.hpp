#pragma once

#include <Eigen/Core>

namespace rpmd {

// Maps each component into the half-open interval [-edge/2, edge/2).
// A component of exactly +edge/2 maps to -edge/2; -edge/2 is left unchanged.
Eigen::Vector3d minimum_image(const Eigen::Vector3d& displacement, double cell_edge);

}  // namespace rpmd

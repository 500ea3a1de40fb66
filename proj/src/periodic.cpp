#include "rpmd/periodic.hpp"

#include <cmath>

namespace rpmd {

Eigen::Vector3d minimum_image(const Eigen::Vector3d& displacement, double cell_edge) {
  Eigen::Vector3d out;
  for (int d = 0; d < 3; ++d) {
    out[d] = displacement[d] - cell_edge * std::floor(displacement[d] / cell_edge + 0.5);
  }
  return out;
}

}  // namespace rpmd

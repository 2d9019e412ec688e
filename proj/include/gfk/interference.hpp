#ifndef GFK_INTERFERENCE_HPP
#define GFK_INTERFERENCE_HPP

#include <span>
#include <vector>

#include "gfk/trajectory.hpp"
#include "gfk/vec3.hpp"

namespace gfk {

// Classical three-term platform model in the body frame: a permanent moment
// that rotates with the platform, an induced term linear in the ambient body-
// frame field, and an eddy term proportional to its time derivative.
struct InterferenceCoefficients {
  Vec3d permanent{0.0, 0.0, 0.0};        // nT, body frame
  Mat3d susceptibility{};                // dimensionless
  Mat3d eddy{};                          // seconds
};

// World-frame interference per sample. `ambient` is the clean field at each
// pose (world frame, nT). The body-frame derivative uses finite differences
// (forward at the first sample, backward afterwards), so at least 2 samples
// are required.
std::vector<Vec3d> platform_interference(std::span<const Pose> poses,
                                         std::span<const Vec3d> ambient,
                                         const InterferenceCoefficients& coef);

}  // namespace gfk

#endif

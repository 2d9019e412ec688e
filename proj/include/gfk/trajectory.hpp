#ifndef GFK_TRAJECTORY_HPP
#define GFK_TRAJECTORY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gfk/vec3.hpp"

namespace gfk {

enum class TrajectoryPattern { line, racetrack, spiral };

TrajectoryPattern parse_pattern(const std::string& name);
std::string pattern_name(TrajectoryPattern p);

// One timestamped pose: position in Earth-centered meters and a body-to-world
// rotation whose columns are (forward, left, up).
struct Pose {
  double t = 0.0;
  Vec3d position{0.0, 0.0, 0.0};
  Mat3d orientation = mat_identity();
};

// Smooth flight path sampled at a nominal rate with optional timing jitter:
// dt_i = (1/rate) * (1 + jitter * u), u uniform in [-1, 1]. Patterns fly at
// ~60 m/s a few hundred meters above the reference sphere near 45 degrees
// latitude. Racetracks close after an integer number of 60-second laps.
std::vector<Pose> gen_trajectory(TrajectoryPattern pattern, double duration_s,
                                 double rate_hz, double jitter, std::uint64_t seed);

}  // namespace gfk

#endif

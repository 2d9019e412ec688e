#include "gfk/trajectory.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "gfk/errors.hpp"

namespace gfk {

TrajectoryPattern parse_pattern(const std::string& name) {
  if (name == "line") return TrajectoryPattern::line;
  if (name == "racetrack") return TrajectoryPattern::racetrack;
  if (name == "spiral") return TrajectoryPattern::spiral;
  throw ConfigError("unknown trajectory pattern: " + name);
}

std::string pattern_name(TrajectoryPattern p) {
  switch (p) {
    case TrajectoryPattern::line: return "line";
    case TrajectoryPattern::racetrack: return "racetrack";
    case TrajectoryPattern::spiral: return "spiral";
  }
  throw ConfigError("invalid trajectory pattern value");
}

namespace {

constexpr double kEarthRadius = 6.371e6;  // m
constexpr double kAltitude = 300.0;       // m above the reference sphere
constexpr double kLapSeconds = 60.0;

struct LocalFrame {
  Vec3d base, east, north, up;
};

// Local tangent frame at 45 degrees latitude, longitude 0.
LocalFrame local_frame() {
  const double s = std::sqrt(0.5);
  LocalFrame f;
  f.up = {s, 0.0, s};
  f.base = f.up * (kEarthRadius + kAltitude);
  f.east = {0.0, 1.0, 0.0};
  f.north = cross(f.up, f.east);
  return f;
}

// Parametric curve and its velocity in the local (east, north, up) frame.
void local_curve(TrajectoryPattern pattern, double t, Vec3d& p, Vec3d& v) {
  switch (pattern) {
    case TrajectoryPattern::line: {
      p = {60.0 * t, 0.0, 0.1 * t};
      v = {60.0, 0.0, 0.1};
      return;
    }
    case TrajectoryPattern::racetrack: {
      const double w = 2.0 * M_PI / kLapSeconds;
      const double a = 900.0, b = 450.0;
      p = {a * std::sin(w * t), b * (1.0 - std::cos(w * t)), 0.0};
      v = {a * w * std::cos(w * t), b * w * std::sin(w * t), 0.0};
      return;
    }
    case TrajectoryPattern::spiral: {
      const double w = 2.0 * M_PI / 30.0;
      const double r0 = 300.0, growth = 5.0, climb = 1.5;
      const double r = r0 + growth * t;
      p = {r * std::cos(w * t) - r0, r * std::sin(w * t), climb * t};
      v = {growth * std::cos(w * t) - r * w * std::sin(w * t),
           growth * std::sin(w * t) + r * w * std::cos(w * t), climb};
      return;
    }
  }
  throw ConfigError("invalid trajectory pattern value");
}

Vec3d normalized(const Vec3d& a) {
  const double n = norm(a);
  return {a[0] / n, a[1] / n, a[2] / n};
}

}  // namespace

std::vector<Pose> gen_trajectory(TrajectoryPattern pattern, double duration_s,
                                 double rate_hz, double jitter, std::uint64_t seed) {
  if (duration_s <= 0.0) throw std::domain_error("trajectory duration must be positive");
  if (rate_hz <= 0.0) throw std::domain_error("sample rate must be positive");
  if (jitter < 0.0 || jitter >= 1.0)
    throw std::domain_error("timing jitter fraction must lie in [0, 1)");

  const LocalFrame f = local_frame();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  std::vector<Pose> poses;
  const double dt0 = 1.0 / rate_hz;
  const std::size_t n = static_cast<std::size_t>(std::floor(duration_s * rate_hz));
  poses.reserve(n);
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Vec3d pl, vl;
    local_curve(pattern, t, pl, vl);
    Pose pose;
    pose.t = t;
    pose.position = f.base + f.east * pl[0] + f.north * pl[1] + f.up * pl[2];
    const Vec3d vw = f.east * vl[0] + f.north * vl[1] + f.up * vl[2];
    const Vec3d fw = normalized(vw);
    Vec3d left = cross(f.up, fw);
    const double ln = norm(left);
    if (ln < 1e-9) left = f.north; else left = left * (1.0 / ln);
    const Vec3d up = cross(fw, left);
    for (int r = 0; r < 3; ++r) {
      pose.orientation[static_cast<std::size_t>(r)][0] = fw[static_cast<std::size_t>(r)];
      pose.orientation[static_cast<std::size_t>(r)][1] = left[static_cast<std::size_t>(r)];
      pose.orientation[static_cast<std::size_t>(r)][2] = up[static_cast<std::size_t>(r)];
    }
    poses.push_back(pose);
    t += dt0 * (1.0 + jitter * u(rng));
  }
  return poses;
}

}  // namespace gfk

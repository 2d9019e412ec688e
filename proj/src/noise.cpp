#include "gfk/noise.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "gfk/errors.hpp"

namespace gfk {

void NoiseConfig::validate() const {
  if (!(eddy_lambda > 0.0)) throw ConfigError("eddy decay rate must be positive");
  if (eddy_sigma < 0.0 || drift_rate < 0.0 || thermal_amplitude < 0.0 ||
      white_sigma < 0.0)
    throw ConfigError("noise amplitudes must be non-negative");
  if (!(thermal_period_hours > 0.0)) throw ConfigError("thermal period must be positive");
}

std::vector<Vec3d> sample_noise(const NoiseConfig& cfg, std::span<const double> ts,
                                std::uint64_t seed) {
  cfg.validate();
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (!(ts[i] > ts[i - 1]))
      throw std::domain_error("noise timestamps must be strictly increasing");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);

  // per-axis random drift slopes and thermal phases
  Vec3d slope, theta;
  for (int a = 0; a < 3; ++a) {
    slope[static_cast<std::size_t>(a)] = cfg.drift_rate / 3600.0 * gauss(rng);
    theta[static_cast<std::size_t>(a)] = phase(rng);
  }
  const double omega = 2.0 * M_PI / (cfg.thermal_period_hours * 3600.0);

  // stationary start for the mean-reverting component
  Vec3d eddy;
  for (int a = 0; a < 3; ++a) eddy[static_cast<std::size_t>(a)] = cfg.eddy_sigma * gauss(rng);

  std::vector<Vec3d> out;
  out.reserve(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i > 0) {
      const double dt = ts[i] - ts[i - 1];
      const double decay = std::exp(-cfg.eddy_lambda * dt);
      const double innovation = cfg.eddy_sigma * std::sqrt(1.0 - decay * decay);
      for (int a = 0; a < 3; ++a)
        eddy[static_cast<std::size_t>(a)] = decay * eddy[static_cast<std::size_t>(a)] + innovation * gauss(rng);
    }
    Vec3d n;
    for (int a = 0; a < 3; ++a)
      n[static_cast<std::size_t>(a)] =
          eddy[static_cast<std::size_t>(a)] + slope[static_cast<std::size_t>(a)] * ts[i] +
          cfg.thermal_amplitude * std::sin(omega * ts[i] + theta[static_cast<std::size_t>(a)]) +
          cfg.white_sigma * gauss(rng);
    out.push_back(n);
  }
  return out;
}

}  // namespace gfk

#ifndef GFK_NOISE_HPP
#define GFK_NOISE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "gfk/vec3.hpp"

namespace gfk {

// Sensor-noise generator parameters. The eddy component is a mean-reverting
// process with autocorrelation sigma^2 e^{-lambda |tau|}; drift is a random
// linear ramp; the thermal bias is a slow sinusoid; the floor is white.
struct NoiseConfig {
  double eddy_lambda = 0.5;          // 1/s, must be > 0
  double eddy_sigma = 5.0;           // nT
  double drift_rate = 2.0;           // nT/hour (1-sigma slope)
  double thermal_amplitude = 3.0;    // nT
  double thermal_period_hours = 6.0;
  double white_sigma = 1.0;          // nT

  void validate() const;
};

// Per-sample additive noise vectors at the given (increasing) timestamps,
// deterministic in the seed. The eddy component uses the exact discrete
// transition x_{k+1} = e^{-lambda dt} x_k + sigma sqrt(1 - e^{-2 lambda dt}) w.
std::vector<Vec3d> sample_noise(const NoiseConfig& cfg, std::span<const double> ts,
                                std::uint64_t seed);

}  // namespace gfk

#endif

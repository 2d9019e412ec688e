#ifndef GFK_DATASET_HPP
#define GFK_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gfk/geomag.hpp"
#include "gfk/interference.hpp"
#include "gfk/noise.hpp"
#include "gfk/trajectory.hpp"
#include "gfk/vec3.hpp"

namespace gfk {

struct FlightRecord {
  double t = 0.0;             // s
  Vec3d position{};           // m, Earth-centered
  Mat3d orientation{};        // body-to-world
  Vec3d clean{};              // nT, ground truth at the pose
  Vec3d measured{};           // nT, clean + interference + noise
  std::uint16_t context = 0;  // trajectory-pattern x noise-regime class
};

// Provenance of a dataset file: physics generator or cGAN synthesis.
enum class DataProvenance : std::uint16_t { physics = 0, gan = 1 };

struct FlightDataset {
  std::vector<FlightRecord> records;
  std::uint32_t context_classes = 9;
  DataProvenance provenance = DataProvenance::physics;
};

// Binary "MAGD" container, little-endian, bitwise-lossless for all fields.
void write_dataset(const FlightDataset& ds, const std::string& path);
FlightDataset read_dataset(const std::string& path);

// Human-readable mirror: header row, one record per line, 17 significant
// digits (enough to reconstruct every double exactly).
void export_csv(const FlightDataset& ds, const std::string& path);

// Noise regimes used for the context label grid (K = patterns x regimes = 9).
enum class NoiseRegime { calm = 0, moderate = 1, severe = 2 };
NoiseConfig regime_config(NoiseRegime regime);
std::uint16_t context_label(TrajectoryPattern pattern, NoiseRegime regime);

struct FlightConfig {
  TrajectoryPattern pattern = TrajectoryPattern::line;
  NoiseRegime regime = NoiseRegime::moderate;
  double duration_s = 60.0;
  double rate_hz = 10.0;
  double jitter = 0.05;
  std::uint64_t seed = 1;
  InterferenceCoefficients interference{
      {35.0, -20.0, 10.0},
      {{{0.012, 0.002, 0.0}, {0.002, 0.009, 0.001}, {0.0, 0.001, 0.015}}},
      {{{0.02, 0.0, 0.003}, {0.0, 0.015, 0.0}, {0.003, 0.0, 0.01}}}};
};

// Full generator: measured = clean + platform interference + sensor noise,
// exactly, for every record.
FlightDataset generate_flight(const GroundTruthField& gt, const FlightConfig& cfg);

}  // namespace gfk

#endif

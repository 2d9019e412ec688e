#ifndef GFK_TRAIN_HPP
#define GFK_TRAIN_HPP

#include <span>
#include <string>
#include <vector>

#include "gfk/dataset.hpp"
#include "gfk/denoiser.hpp"
#include "gfk/vec3.hpp"

namespace gfk {

// Root mean squared error over paired samples: sqrt(mean_t |pred - truth|^2),
// in the units of the inputs. Empty or mismatched sequences are an error.
double rmse(std::span<const Vec3d> pred, std::span<const Vec3d> truth);

// 10 log10(sum |truth|^2 / sum |pred - truth|^2) dB. Zero error energy
// returns +infinity; zero truth energy is a domain error.
double snr_db(std::span<const Vec3d> pred, std::span<const Vec3d> truth);

struct TrainConfig {
  Backbone backbone = Backbone::mlp;
  Constraint constraint = Constraint::none;
  double window_s = 10.0;  // seconds of history per prediction
  int batch = 128;
  int epochs = 40;
  double lr = 3e-3;
  double decay = 0.95;  // per-epoch learning-rate multiplier
  int patience = 5;     // early-stop epochs without validation improvement
  std::uint64_t seed = 1;
  int features = 16;
  int hidden = 24;
  double length_scale = 100.0;  // m per unit of scaled position
  // Spatial supervision: the window's field estimate is fitted at the sample
  // positions ending horizon_s seconds after the window, loss_points samples
  // deep. Multi-point fitting is what makes the physics constraints bind: a
  // single evaluation point leaves them vacuous.
  int loss_points = 3;
  // When set, training fits the noisy measured channel instead of the clean
  // reference (labels then exist on real recordings too). With a horizon
  // longer than the sensor-noise correlation time the label noise is nearly
  // independent of the input window, so the regression target is still the
  // clean field; reported RMSE/SNR always compare against the clean channel.
  bool fit_measured = false;
  double horizon_s = 0.0;
  double val_frac = 0.15;
  double test_frac = 0.15;

  void validate() const;
  std::string key() const;  // e.g. "ltc/div_free/seed3"
};

struct RunReport {
  TrainConfig config;
  bool failed = false;
  std::string error;
  double train_rmse = 0.0, val_rmse = 0.0, test_rmse = 0.0;  // nT
  double train_snr = 0.0, test_snr = 0.0;                    // dB
  std::vector<double> epoch_train_rmse, epoch_val_rmse;
  double wall_seconds = 0.0;
  // Stored test predictions/targets (nT) so the metrics are recomputable.
  std::vector<Vec3d> test_pred, test_truth;
};

struct TrainOutcome {
  DenoiserModel model;
  RunReport report;
};

// Trains a windowed denoiser on one dataset with a contiguous 70/15/15
// train/validation/test split (never shuffled across the boundary), Adam with
// exponential learning-rate decay, and early stopping on validation RMSE.
// The returned model is the best-validation checkpoint, never the last epoch.
TrainOutcome train_denoiser(const FlightDataset& ds, const TrainConfig& cfg);

// Runs every config on the shared dataset; failed cells are recorded in the
// report (failed flag + message) and the grid is still returned in order.
std::vector<RunReport> run_ablation(std::span<const TrainConfig> grid,
                                    const FlightDataset& ds);

void write_ablation_csv(std::span<const RunReport> reports, const std::string& path);
void write_curves_csv(const RunReport& report, const std::string& path);

}  // namespace gfk

#endif

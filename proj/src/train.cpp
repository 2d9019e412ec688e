#include "gfk/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "gfk/diff.hpp"
#include "gfk/optim.hpp"

namespace gfk {

double rmse(std::span<const Vec3d> pred, std::span<const Vec3d> truth) {
  if (pred.empty() || pred.size() != truth.size())
    throw std::domain_error("rmse requires equal nonempty sequences");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Vec3d e = pred[i] - truth[i];
    acc += dot(e, e);
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

double snr_db(std::span<const Vec3d> pred, std::span<const Vec3d> truth) {
  if (pred.empty() || pred.size() != truth.size())
    throw std::domain_error("snr requires equal nonempty sequences");
  double sig = 0.0, err = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sig += dot(truth[i], truth[i]);
    const Vec3d e = pred[i] - truth[i];
    err += dot(e, e);
  }
  if (!(sig > 0.0)) throw std::domain_error("snr requires nonzero truth energy");
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(sig / err);
}

void TrainConfig::validate() const {
  if (!(window_s > 0.0)) throw ConfigError("train: window_s must be positive");
  if (batch < 1 || epochs < 1 || patience < 1)
    throw ConfigError("train: batch, epochs and patience must be positive");
  if (!(lr > 0.0) || !(decay > 0.0) || decay > 1.0)
    throw ConfigError("train: lr must be positive and decay in (0, 1]");
  if (features < 1 || hidden < 1) throw ConfigError("train: widths must be positive");
  if (!(length_scale > 0.0)) throw ConfigError("train: length_scale must be positive");
  if (loss_points < 1) throw ConfigError("train: loss_points must be positive");
  if (!(horizon_s >= 0.0)) throw ConfigError("train: horizon_s must be non-negative");
  if (!(val_frac > 0.0) || !(test_frac > 0.0) || val_frac + test_frac >= 1.0)
    throw ConfigError("train: split fractions must be positive and sum below 1");
}

std::string TrainConfig::key() const {
  return std::string(backbone_name(backbone)) + "/" + constraint_name(constraint) +
         "/seed" + std::to_string(seed);
}

namespace {

struct SplitIndices {
  std::vector<std::size_t> train, val, test;  // window end indices
};

double median_dt(const FlightDataset& ds) {
  std::vector<double> dts;
  dts.reserve(ds.records.size());
  for (std::size_t i = 1; i < ds.records.size(); ++i)
    dts.push_back(ds.records[i].t - ds.records[i - 1].t);
  if (dts.empty()) throw ConfigError("train: dataset has fewer than 2 records");
  std::nth_element(dts.begin(), dts.begin() + static_cast<std::ptrdiff_t>(dts.size() / 2),
                   dts.end());
  return dts[dts.size() / 2];
}

SplitIndices contiguous_split(std::size_t n_records, int window, double val_frac,
                              double test_frac) {
  if (n_records < static_cast<std::size_t>(window))
    throw ConfigError("train: dataset shorter than one window");
  const std::size_t total = n_records - static_cast<std::size_t>(window) + 1;
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(total) * val_frac));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(total) * test_frac));
  const std::size_t n_train = total - n_val - n_test;
  if (n_train == 0 || n_val == 0 || n_test == 0)
    throw ConfigError("train: dataset too short for the requested split");
  SplitIndices s;
  const std::size_t first = static_cast<std::size_t>(window) - 1;
  for (std::size_t k = 0; k < total; ++k) {
    const std::size_t e = first + k;
    if (k < n_train)
      s.train.push_back(e);
    else if (k < n_train + n_val)
      s.val.push_back(e);
    else
      s.test.push_back(e);
  }
  return s;
}

double component_rms(const FlightDataset& ds, std::span<const std::size_t> ends,
                     bool measured_channel) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t e : ends) {
    const Vec3d& v = measured_channel ? ds.records[e].measured : ds.records[e].clean;
    acc += dot(v, v);
    n += 3;
  }
  const double rms = std::sqrt(acc / static_cast<double>(std::max<std::size_t>(n, 1)));
  return std::max(rms, 1e-9);
}

std::span<const FlightRecord> window_of(const FlightDataset& ds, std::size_t end,
                                        int window) {
  return {ds.records.data() + end + 1 - static_cast<std::size_t>(window),
          static_cast<std::size_t>(window)};
}

}  // namespace

TrainOutcome train_denoiser(const FlightDataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();

  const double dt = median_dt(ds);
  const double rate = 1.0 / dt;
  const int window = std::max(2, static_cast<int>(std::lround(cfg.window_s * rate)));

  DenoiserModel model;
  model.spec.backbone = cfg.backbone;
  model.spec.constraint = cfg.constraint;
  model.spec.window = window;
  model.spec.features = cfg.features;
  model.spec.hidden = cfg.hidden;
  model.spec.length_scale = cfg.length_scale;
  model.spec.rate_hz = rate;
  model.spec.validate();

  const auto h = static_cast<std::size_t>(std::lround(cfg.horizon_s * rate));
  if (h >= ds.records.size())
    throw ConfigError("train: horizon_s exceeds the dataset duration");
  // Window ends leave room for the supervision samples h steps ahead.
  const SplitIndices split =
      contiguous_split(ds.records.size() - h, window, cfg.val_frac, cfg.test_frac);
  std::vector<std::size_t> train_targets = split.train;
  for (std::size_t& e : train_targets) e += h;
  model.input_scale = component_rms(ds, split.train, true);
  model.field_scale = component_rms(ds, train_targets, false);
  model.params = denoiser_init(model.spec, cfg.seed);

  // Pre-encode every window once; the encodings are differentiation constants.
  const std::size_t first = static_cast<std::size_t>(window) - 1;
  std::vector<EncodedWindow> enc(ds.records.size() - first);
  for (std::size_t e = first; e < ds.records.size(); ++e)
    enc[e - first] = encode_window(model.spec, window_of(ds, e, window), model.input_scale);

  const double inv_fs = 1.0 / model.field_scale;
  const double inv_ls = 1.0 / model.spec.length_scale;
  // Scaled offset of sample s from the reference of the window ending at e.
  auto xi_of = [&](std::size_t e, std::size_t s) -> Vec3d {
    return (ds.records[s].position - enc[e - first].x_ref) * inv_ls;
  };
  // Reported metrics always score the prediction at the supervision point
  // (h samples past the window end) against the clean reference there.
  auto predict_nT = [&](std::span<const std::size_t> ends) {
    std::vector<Vec3d> out;
    out.reserve(ends.size());
    for (std::size_t e : ends) {
      const Vec3d xi = xi_of(e, e + h);
      out.push_back(denoiser_field<double>(model.spec,
                                           std::span<const double>(model.params),
                                           enc[e - first], xi) *
                    model.field_scale);
    }
    return out;
  };
  auto truths_of = [&](std::span<const std::size_t> ends) {
    std::vector<Vec3d> out;
    out.reserve(ends.size());
    for (std::size_t e : ends) out.push_back(ds.records[e + h].clean);
    return out;
  };
  const std::vector<Vec3d> val_truth = truths_of(split.val);

  RunReport rep;
  rep.config = cfg;

  std::mt19937_64 rng(cfg.seed ^ 0x2545f4914f6cdd1dULL);
  std::vector<std::size_t> order = split.train;
  AdamState opt;
  AdamConfig adam;
  adam.clip_norm = 10.0;

  std::vector<double> best_params = model.params;
  double best_val = std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    adam.lr = cfg.lr * std::pow(cfg.decay, epoch);
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_mse = 0.0;
    std::size_t epoch_n = 0;
    const int n_pts = std::min(cfg.loss_points, window);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      const double inv_b = 1.0 / static_cast<double>((stop - start) * static_cast<std::size_t>(n_pts));
      double batch_mse = 0.0;
      auto loss_fn = [&](std::span<const Var> p) -> Var {
        Var loss(0.0);
        for (std::size_t k = start; k < stop; ++k) {
          const std::size_t e = order[k];
          const EncodedWindow& w = enc[e - first];
          for (int q = 0; q < n_pts; ++q) {
            const std::size_t s = e + h - static_cast<std::size_t>(q);
            const Vec3d xiq = xi_of(e, s);
            const Vec3<Var> at{Var(xiq[0]), Var(xiq[1]), Var(xiq[2])};
            const Vec3<Var> pred = denoiser_field<Var>(model.spec, p, w, at);
            const FlightRecord& rec = ds.records[s];
            const Vec3d& target = cfg.fit_measured ? rec.measured : rec.clean;
            for (int m = 0; m < 3; ++m) {
              const Var err = pred[static_cast<std::size_t>(m)] -
                              Var(target[static_cast<std::size_t>(m)] * inv_fs);
              loss += err * err;
            }
          }
        }
        loss = loss * Var(inv_b);
        batch_mse = value(loss);
        return loss;
      };
      std::vector<double> grad = param_gradient(loss_fn, model.params);
      if (!std::isfinite(batch_mse))
        throw NumericError("train: non-finite loss in " + cfg.key());
      adam_update(adam, opt, model.params, grad);
      epoch_mse += batch_mse * static_cast<double>(stop - start);
      epoch_n += stop - start;
    }
    rep.epoch_train_rmse.push_back(
        std::sqrt(epoch_mse / static_cast<double>(epoch_n)) * model.field_scale);

    const double val_rmse = rmse(predict_nT(split.val), val_truth);
    rep.epoch_val_rmse.push_back(val_rmse);
    if (val_rmse < best_val - 1e-12) {
      best_val = val_rmse;
      best_params = model.params;
      stall = 0;
    } else if (++stall >= cfg.patience) {
      break;
    }
  }
  model.params = best_params;

  const auto train_pred = predict_nT(split.train);
  const auto train_truth = truths_of(split.train);
  rep.train_rmse = rmse(train_pred, train_truth);
  rep.train_snr = snr_db(train_pred, train_truth);
  rep.val_rmse = rmse(predict_nT(split.val), val_truth);
  rep.test_pred = predict_nT(split.test);
  rep.test_truth = truths_of(split.test);
  rep.test_rmse = rmse(rep.test_pred, rep.test_truth);
  rep.test_snr = snr_db(rep.test_pred, rep.test_truth);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  return {std::move(model), std::move(rep)};
}

std::vector<RunReport> run_ablation(std::span<const TrainConfig> grid,
                                    const FlightDataset& ds) {
  std::vector<RunReport> out;
  out.reserve(grid.size());
  for (const TrainConfig& cfg : grid) {
    try {
      out.push_back(train_denoiser(ds, cfg).report);
    } catch (const std::exception& e) {
      RunReport rep;
      rep.config = cfg;
      rep.failed = true;
      rep.error = e.what();
      out.push_back(std::move(rep));
    }
  }
  return out;
}

void write_ablation_csv(std::span<const RunReport> reports, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataFormatError("cannot open for writing: " + path);
  std::fputs(
      "backbone,constraint,seed,train_rmse_nT,val_rmse_nT,test_rmse_nT,"
      "train_snr_db,test_snr_db,wall_s,failed,error\n",
      f);
  for (const RunReport& r : reports) {
    std::string err = r.error;
    for (char& c : err)
      if (c == ',' || c == '\n') c = ';';
    std::fprintf(f, "%s,%s,%llu,%.10g,%.10g,%.10g,%.10g,%.10g,%.3f,%d,%s\n",
                 backbone_name(r.config.backbone), constraint_name(r.config.constraint),
                 static_cast<unsigned long long>(r.config.seed), r.train_rmse, r.val_rmse,
                 r.test_rmse, r.train_snr, r.test_snr, r.wall_seconds, r.failed ? 1 : 0,
                 err.c_str());
  }
  std::fclose(f);
}

void write_curves_csv(const RunReport& report, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataFormatError("cannot open for writing: " + path);
  std::fputs("epoch,train_rmse_nT,val_rmse_nT\n", f);
  for (std::size_t i = 0; i < report.epoch_train_rmse.size(); ++i)
    std::fprintf(f, "%zu,%.10g,%.10g\n", i, report.epoch_train_rmse[i],
                 report.epoch_val_rmse[i]);
  std::fclose(f);
}

}  // namespace gfk

// gfk: command-line front end for the geomagnetic denoising toolkit.
//
// Verbs: gen-data, train, denoise, eval, verify, gan-train.
// Exit codes: 0 success, 2 configuration error, 3 data-format error,
//             4 numeric failure, 5 property-verification failure.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gfk/checkpoint.hpp"
#include "gfk/config.hpp"
#include "gfk/dataset.hpp"
#include "gfk/denoiser.hpp"
#include "gfk/diff.hpp"
#include "gfk/gan.hpp"
#include "gfk/train.hpp"

namespace {

using namespace gfk;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  bool verbose = false;
};

int worker_cap() {
  const char* env = std::getenv("GFK_THREADS");
  if (!env) return 0;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || n < 1)
    throw ConfigError("GFK_THREADS must be a positive integer");
  return static_cast<int>(n);
}

std::string join(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

TrajectoryPattern pattern_of_label(int label) {
  return static_cast<TrajectoryPattern>(label / 3);
}
NoiseRegime regime_of_label(int label) { return static_cast<NoiseRegime>(label % 3); }

NoiseRegime parse_regime(const std::string& name) {
  if (name == "calm") return NoiseRegime::calm;
  if (name == "moderate") return NoiseRegime::moderate;
  if (name == "severe") return NoiseRegime::severe;
  throw ConfigError("unknown noise regime: " + name);
}
const char* regime_name(NoiseRegime r) {
  switch (r) {
    case NoiseRegime::calm: return "calm";
    case NoiseRegime::moderate: return "moderate";
    case NoiseRegime::severe: return "severe";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// checkpoint adapters

Checkpoint to_checkpoint(const DenoiserModel& m) {
  Checkpoint ck;
  ck.meta["kind"] = "denoiser";
  ck.meta["backbone"] = backbone_name(m.spec.backbone);
  ck.meta["constraint"] = constraint_name(m.spec.constraint);
  ck.meta["window"] = std::to_string(m.spec.window);
  ck.meta["features"] = std::to_string(m.spec.features);
  ck.meta["hidden"] = std::to_string(m.spec.hidden);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", m.spec.length_scale);
  ck.meta["length_scale"] = buf;
  std::snprintf(buf, sizeof buf, "%.17g", m.spec.rate_hz);
  ck.meta["rate_hz"] = buf;
  std::snprintf(buf, sizeof buf, "%.17g", m.input_scale);
  ck.meta["input_scale"] = buf;
  std::snprintf(buf, sizeof buf, "%.17g", m.field_scale);
  ck.meta["field_scale"] = buf;
  ck.arrays["params"] = m.params;
  return ck;
}

DenoiserModel denoiser_from_checkpoint(const Checkpoint& ck) {
  const auto meta = [&](const std::string& key) -> std::string {
    auto it = ck.meta.find(key);
    if (it == ck.meta.end()) throw DataFormatError("checkpoint misses key: " + key);
    return it->second;
  };
  if (meta("kind") != "denoiser")
    throw DataFormatError("checkpoint is not a denoiser model");
  DenoiserModel m;
  m.spec.backbone = parse_backbone(meta("backbone"));
  m.spec.constraint = parse_constraint(meta("constraint"));
  m.spec.window = std::stoi(meta("window"));
  m.spec.features = std::stoi(meta("features"));
  m.spec.hidden = std::stoi(meta("hidden"));
  m.spec.length_scale = std::stod(meta("length_scale"));
  m.spec.rate_hz = std::stod(meta("rate_hz"));
  m.input_scale = std::stod(meta("input_scale"));
  m.field_scale = std::stod(meta("field_scale"));
  auto it = ck.arrays.find("params");
  if (it == ck.arrays.end()) throw DataFormatError("checkpoint misses the params array");
  m.params = it->second;
  if (static_cast<int>(m.params.size()) != m.spec.param_count())
    throw DataFormatError("checkpoint parameter count does not match its spec");
  return m;
}

// ---------------------------------------------------------------------------
// verbs

int cmd_gen_data(const CommonArgs& args) {
  const ConfigMap cfg =
      args.config_path.empty() ? ConfigMap() : load_config(args.config_path);
  const std::string pattern_key = cfg.get_string("pattern", "all");
  const std::string regime_key = cfg.get_string("regime", "all");
  const bool csv = cfg.get_bool("csv", false);

  std::vector<TrajectoryPattern> patterns;
  if (pattern_key == "all")
    patterns = {TrajectoryPattern::line, TrajectoryPattern::racetrack,
                TrajectoryPattern::spiral};
  else
    patterns = {parse_pattern(pattern_key)};
  std::vector<NoiseRegime> regimes;
  if (regime_key == "all")
    regimes = {NoiseRegime::calm, NoiseRegime::moderate, NoiseRegime::severe};
  else
    regimes = {parse_regime(regime_key)};

  const GroundTruthField field = default_earth_field();
  for (TrajectoryPattern p : patterns)
    for (NoiseRegime r : regimes) {
      FlightConfig fc;
      fc.pattern = p;
      fc.regime = r;
      fc.duration_s = cfg.get_double("duration_s", 60.0);
      fc.rate_hz = cfg.get_double("rate_hz", 10.0);
      fc.jitter = cfg.get_double("jitter", 0.05);
      fc.seed = args.seed ^ (static_cast<std::uint64_t>(context_label(p, r)) << 32);
      const FlightDataset ds = generate_flight(field, fc);
      const std::string base = std::string("flight_") + pattern_name(p) + "_" + regime_name(r);
      write_dataset(ds, join(args.out_dir, base + ".magd"));
      if (csv) export_csv(ds, join(args.out_dir, base + ".csv"));
      if (args.verbose)
        std::printf("wrote %s (%zu records)\n", (base + ".magd").c_str(), ds.records.size());
    }
  return 0;
}

FlightDataset load_training_data(const ConfigMap& cfg) {
  FlightDataset ds = read_dataset(cfg.get_string("data"));
  if (cfg.get_bool("preprocess", true)) {
    GroundTruthField core = default_earth_field();
    core.sources.clear();
    ds = preprocess(ds, core).ds;
  }
  return ds;
}

TrainConfig train_config_from(const ConfigMap& cfg, std::uint64_t seed) {
  TrainConfig tc;
  tc.backbone = parse_backbone(cfg.get_string("backbone", "mlp"));
  tc.constraint = parse_constraint(cfg.get_string("constraint", "none"));
  tc.window_s = cfg.get_double("window_s", tc.window_s);
  tc.batch = static_cast<int>(cfg.get_int("batch", tc.batch));
  tc.epochs = static_cast<int>(cfg.get_int("epochs", tc.epochs));
  tc.lr = cfg.get_double("lr", tc.lr);
  tc.decay = cfg.get_double("decay", tc.decay);
  tc.patience = static_cast<int>(cfg.get_int("patience", tc.patience));
  tc.features = static_cast<int>(cfg.get_int("features", tc.features));
  tc.hidden = static_cast<int>(cfg.get_int("hidden", tc.hidden));
  tc.seed = seed;
  tc.validate();
  return tc;
}

int cmd_train(const CommonArgs& args) {
  const ConfigMap cfg = load_config(args.config_path);
  const FlightDataset ds = load_training_data(cfg);
  const TrainConfig tc = train_config_from(cfg, args.seed);
  const TrainOutcome out = train_denoiser(ds, tc);
  write_checkpoint(to_checkpoint(out.model), join(args.out_dir, "model.gfk"));
  const RunReport reports[] = {out.report};
  write_ablation_csv(reports, join(args.out_dir, "report.csv"));
  write_curves_csv(out.report, join(args.out_dir, "curves.csv"));
  if (args.verbose)
    std::printf("%s: test RMSE %.6g nT, test SNR %.6g dB\n", tc.key().c_str(),
                out.report.test_rmse, out.report.test_snr);
  return 0;
}

int cmd_denoise(const CommonArgs& args) {
  const ConfigMap cfg = load_config(args.config_path);
  const DenoiserModel model = denoiser_from_checkpoint(read_checkpoint(cfg.get_string("model")));
  const FlightDataset raw = read_dataset(cfg.get_string("data"));
  FlightDataset out;
  if (cfg.get_bool("preprocess", true)) {
    GroundTruthField core = default_earth_field();
    core.sources.clear();
    const PreprocessResult pre = preprocess(raw, core);
    out = denoise_dataset(model, pre.ds);
    // Back to physical units: the low-pass of the measurement stands in for
    // the unknown low-frequency clean component at inference time.
    for (std::size_t i = 0; i < out.records.size(); ++i) {
      out.records[i].clean = out.records[i].clean + pre.measured_low[i] + pre.core[i];
      out.records[i].measured = raw.records[i].measured;
    }
  } else {
    out = denoise_dataset(model, raw);
  }
  write_dataset(out, join(args.out_dir, "denoised.magd"));
  if (cfg.get_bool("csv", false)) export_csv(out, join(args.out_dir, "denoised.csv"));
  return 0;
}

int cmd_eval(const CommonArgs& args) {
  const ConfigMap cfg = load_config(args.config_path);
  const FlightDataset pred = read_dataset(cfg.get_string("pred"));
  const FlightDataset truth = read_dataset(cfg.get_string("truth"));
  if (pred.records.size() != truth.records.size())
    throw DataFormatError("eval: prediction and truth record counts differ");
  std::vector<Vec3d> p, t;
  p.reserve(pred.records.size());
  t.reserve(truth.records.size());
  for (std::size_t i = 0; i < pred.records.size(); ++i) {
    p.push_back(pred.records[i].clean);
    t.push_back(truth.records[i].clean);
  }
  const double e = rmse(p, t);
  const double s = snr_db(p, t);
  std::printf("rmse_nT %.10g\n", e);
  std::printf("snr_db %.10g\n", s);
  return 0;
}

int cmd_verify(const CommonArgs& args) {
  const ConfigMap cfg = load_config(args.config_path);
  const DenoiserModel model = denoiser_from_checkpoint(read_checkpoint(cfg.get_string("model")));
  std::string props = cfg.get_string("properties", "auto");
  if (props == "auto") {
    props = "gradient";
    if (model.spec.curl_output()) props += ",divergence";
    if (model.spec.invariant_inputs()) props += ",equivariance";
  }

  // Synthetic probe window: deterministic pseudo-flight geometry.
  std::mt19937_64 rng(args.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<FlightRecord> window(static_cast<std::size_t>(model.spec.window));
  for (int j = 0; j < model.spec.window; ++j) {
    auto& r = window[static_cast<std::size_t>(j)];
    r.t = static_cast<double>(j) / model.spec.rate_hz;
    r.position = Vec3d{60.0 * r.t + 3.0 * g(rng), 10.0 * g(rng), 8.0 * g(rng)};
    r.orientation = mat_identity();
    r.measured = Vec3d{model.input_scale * g(rng), model.input_scale * g(rng),
                       model.input_scale * g(rng)};
    r.clean = r.measured;
  }

  bool all_ok = true;
  auto report = [&](const char* name, bool ok) {
    std::printf("%-12s %s\n", name, ok ? "pass" : "FAIL");
    all_ok = all_ok && ok;
  };

  if (props.find("divergence") != std::string::npos) {
    double max_rel = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Vec3d x = window.back().position + Vec3d{30.0 * g(rng), 30.0 * g(rng), 30.0 * g(rng)};
      const double div = denoiser_divergence(model, window, x);
      const EncodedWindow enc = encode_window(model.spec, window, model.input_scale);
      const Vec3d xi = (x - enc.x_ref) * (1.0 / model.spec.length_scale);
      const Vec3d field = denoiser_field<double>(
                              model.spec, std::span<const double>(model.params), enc, xi) *
                          model.field_scale;
      const double scale = std::max(norm(field) / model.spec.length_scale, 1e-15);
      max_rel = std::max(max_rel, std::abs(div) / scale);
    }
    report("divergence", max_rel <= 1e-10);
  }

  if (props.find("equivariance") != std::string::npos) {
    double max_err = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      // random rotation from a normalized quaternion
      double q[4] = {g(rng), g(rng), g(rng), g(rng)};
      const double qn = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
      for (double& v : q) v /= qn;
      const double w = q[0], x = q[1], y = q[2], z = q[3];
      const Mat3d rot{{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
                       {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
                       {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
      const Vec3d shift{200.0 * g(rng), 200.0 * g(rng), 200.0 * g(rng)};
      std::vector<FlightRecord> moved = window;
      for (auto& r : moved) {
        r.position = mat_vec(rot, r.position) + shift;
        r.measured = mat_vec(rot, r.measured);
      }
      const Vec3d a = mat_vec(rot, denoise_at(model, window));
      const Vec3d b = denoise_at(model, moved);
      max_err = std::max(max_err, norm(a - b) / std::max(1e-12, norm(a)));
    }
    report("equivariance", max_err <= 1e-8);
  }

  if (props.find("gradient") != std::string::npos) {
    const EncodedWindow enc = encode_window(model.spec, window, model.input_scale);
    auto loss_d = [&](std::span<const double> p) {
      const Vec3d y = denoiser_field<double>(model.spec, p, enc, Vec3d{0, 0, 0});
      return dot(y, y);
    };
    const std::vector<double> grad = param_gradient(
        [&](std::span<const Var> p) {
          const Vec3<Var> y = denoiser_field<Var>(model.spec, p, enc,
                                                  Vec3<Var>{Var(0.0), Var(0.0), Var(0.0)});
          return y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        },
        model.params);
    bool ok = true;
    std::uniform_int_distribution<std::size_t> pick(0, model.params.size() - 1);
    for (int probe = 0; probe < 20; ++probe) {
      const std::size_t j = pick(rng);
      std::vector<double> th = model.params;
      const double h = 1e-6;
      th[j] += h;
      const double up = loss_d(th);
      th[j] -= 2.0 * h;
      const double dn = loss_d(th);
      const double fd = (up - dn) / (2.0 * h);
      if (std::abs(fd - grad[j]) > 1e-4 * std::max(1.0, std::abs(fd))) ok = false;
    }
    report("gradient", ok);
  }

  return all_ok ? 0 : 5;
}

int cmd_gan_train(const CommonArgs& args) {
  const ConfigMap cfg = load_config(args.config_path);
  const FlightDataset ds = read_dataset(cfg.get_string("data"));

  GanConfig gc;
  gc.classes = static_cast<int>(ds.context_classes);
  gc.seq_len = static_cast<int>(cfg.get_int("seq_len", 16));
  gc.latent = static_cast<int>(cfg.get_int("latent", gc.latent));
  gc.hidden = static_cast<int>(cfg.get_int("hidden", gc.hidden));
  gc.validate();
  const int steps = static_cast<int>(cfg.get_int("steps", 200));
  const int batch = static_cast<int>(cfg.get_int("batch", 8));
  if (steps < 1 || batch < 1) throw ConfigError("gan-train: steps and batch must be positive");

  // Real sequences: non-overlapping windows of measured residuals plus the dt
  // channel, scaled into the tanh range.
  const int T = gc.seq_len;
  if (static_cast<int>(ds.records.size()) < T)
    throw DataFormatError("gan-train: dataset shorter than one sequence");
  double max_abs = 1e-9, max_dt = 1e-9;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    for (int m = 0; m < 3; ++m)
      max_abs = std::max(max_abs, std::abs(ds.records[i].measured[static_cast<std::size_t>(m)]));
    if (i > 0) max_dt = std::max(max_dt, ds.records[i].t - ds.records[i - 1].t);
  }
  const double x_scale = 1.05 * max_abs;
  const double dt_scale = 1.05 * max_dt;
  std::vector<GanSample> pool;
  for (std::size_t start = 0; start + static_cast<std::size_t>(T) <= ds.records.size();
       start += static_cast<std::size_t>(T)) {
    GanSample s;
    s.label = ds.records[start].context;
    s.x.reserve(static_cast<std::size_t>(T * gc.channels));
    for (int j = 0; j < T; ++j) {
      const auto& r = ds.records[start + static_cast<std::size_t>(j)];
      for (int m = 0; m < 3; ++m)
        s.x.push_back(r.measured[static_cast<std::size_t>(m)] / x_scale);
      const double dt = j == 0 ? 0.0
                               : r.t - ds.records[start + static_cast<std::size_t>(j - 1)].t;
      s.x.push_back(dt / dt_scale);
    }
    pool.push_back(std::move(s));
  }

  GanTrainState state = gan_train_init(gc, args.seed);
  std::mt19937_64 rng(args.seed ^ 0x94d049bb133111ebULL);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  GanStepReport rep;
  for (int step = 0; step < steps; ++step) {
    std::vector<GanSample> batch_samples;
    batch_samples.reserve(static_cast<std::size_t>(batch));
    for (int i = 0; i < batch; ++i) batch_samples.push_back(pool[pick(rng)]);
    rep = gan_train_step(state, batch_samples);
    if (args.verbose && (step % 20 == 0 || step + 1 == steps))
      std::printf("step %d: loss_d %.4f loss_g %.4f adv_real %.3f adv_fake %.3f\n", step,
                  rep.loss_d, rep.loss_g, rep.adv_real, rep.adv_fake);
  }

  Checkpoint ck;
  ck.meta["kind"] = "gan";
  ck.meta["classes"] = std::to_string(gc.classes);
  ck.meta["seq_len"] = std::to_string(gc.seq_len);
  ck.meta["latent"] = std::to_string(gc.latent);
  ck.meta["hidden"] = std::to_string(gc.hidden);
  ck.arrays["params"] = state.params;
  write_checkpoint(ck, join(args.out_dir, "gan.gfk"));

  // Synthetic dataset: one generated sequence per class, provenance-tagged.
  FlightDataset synth;
  synth.context_classes = ds.context_classes;
  synth.provenance = DataProvenance::gan;
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double dt_nominal = dt_scale / 1.05;
  double t = 0.0;
  for (int c = 0; c < gc.classes; ++c) {
    std::vector<double> z(static_cast<std::size_t>(gc.latent));
    for (double& v : z) v = gauss(rng);
    const auto seq = generator_forward<double>(gc, std::span<const double>(state.params), z, c);
    for (int j = 0; j < T; ++j) {
      FlightRecord r;
      t += dt_nominal;
      r.t = t;
      r.orientation = mat_identity();
      for (int m = 0; m < 3; ++m)
        r.measured[static_cast<std::size_t>(m)] =
            seq[static_cast<std::size_t>(j * gc.channels + m)] * x_scale;
      r.clean = Vec3d{0.0, 0.0, 0.0};
      r.context = static_cast<std::uint16_t>(c);
      synth.records.push_back(r);
    }
  }
  write_dataset(synth, join(args.out_dir, "synthetic.magd"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geomagnetic field denoising toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  const auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", args.config_path, "key=value config file");
    if (need_config) opt->required();
    sub->add_option("--seed", args.seed, "run seed");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_flag("--verbose", args.verbose, "chatty progress output");
  };

  auto* gen = app.add_subcommand("gen-data", "generate synthetic flight datasets");
  add_common(gen, false);
  auto* train = app.add_subcommand("train", "train a denoiser");
  add_common(train, true);
  auto* denoise = app.add_subcommand("denoise", "apply a denoiser checkpoint");
  add_common(denoise, true);
  auto* evalc = app.add_subcommand("eval", "compare two datasets (RMSE/SNR)");
  add_common(evalc, true);
  auto* verify = app.add_subcommand("verify", "check model properties");
  add_common(verify, true);
  auto* gan = app.add_subcommand("gan-train", "train the sequence GAN");
  add_common(gan, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    worker_cap();  // validated here; the toolkit currently runs single-threaded
    if (!args.out_dir.empty() && args.out_dir != ".")
      std::filesystem::create_directories(args.out_dir);
    if (gen->parsed()) return cmd_gen_data(args);
    if (train->parsed()) return cmd_train(args);
    if (denoise->parsed()) return cmd_denoise(args);
    if (evalc->parsed()) return cmd_eval(args);
    if (verify->parsed()) return cmd_verify(args);
    if (gan->parsed()) return cmd_gan_train(args);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DataFormatError& e) {
    std::fprintf(stderr, "data format error: %s\n", e.what());
    return 3;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}

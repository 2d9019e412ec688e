#include "gfk/denoiser.hpp"

namespace gfk {

Backbone parse_backbone(const std::string& name) {
  if (name == "mlp") return Backbone::mlp;
  if (name == "cnn1d") return Backbone::cnn1d;
  if (name == "ltc") return Backbone::ltc;
  if (name == "contiformer") return Backbone::contiformer;
  throw ConfigError("unknown backbone: " + name);
}

Constraint parse_constraint(const std::string& name) {
  if (name == "none") return Constraint::none;
  if (name == "div_free") return Constraint::div_free;
  if (name == "equivariant") return Constraint::equivariant;
  if (name == "both") return Constraint::both;
  throw ConfigError("unknown constraint: " + name);
}

const char* backbone_name(Backbone b) {
  switch (b) {
    case Backbone::mlp: return "mlp";
    case Backbone::cnn1d: return "cnn1d";
    case Backbone::ltc: return "ltc";
    case Backbone::contiformer: return "contiformer";
  }
  return "?";
}

const char* constraint_name(Constraint c) {
  switch (c) {
    case Constraint::none: return "none";
    case Constraint::div_free: return "div_free";
    case Constraint::equivariant: return "equivariant";
    case Constraint::both: return "both";
  }
  return "?";
}

EncodedWindow encode_window(const DenoiserSpec& spec,
                            std::span<const FlightRecord> window, double input_scale) {
  spec.validate();
  if (static_cast<int>(window.size()) != spec.window)
    throw ContractError("encode_window: wrong number of samples");
  if (!(input_scale > 0.0)) throw ContractError("encode_window: input scale must be positive");

  EncodedWindow w;
  const int n = spec.window;
  w.x_ref = window.back().position;
  w.t_ref = window.back().t;
  w.stream.reserve(static_cast<std::size_t>(n * DenoiserSpec::kStepDim));
  w.dts.resize(static_cast<std::size_t>(n));
  w.xi.resize(static_cast<std::size_t>(n));
  w.bvec.resize(static_cast<std::size_t>(n));

  const double inv_s = 1.0 / input_scale;
  const double inv_l = 1.0 / spec.length_scale;
  for (int j = 0; j < n; ++j) {
    const FlightRecord& r = window[static_cast<std::size_t>(j)];
    const double dt = j == 0 ? 0.0 : r.t - window[static_cast<std::size_t>(j - 1)].t;
    if (j > 0 && !(dt > 0.0))
      throw DataFormatError("encode_window: timestamps must be strictly increasing");
    w.dts[static_cast<std::size_t>(j)] = dt;
    w.bvec[static_cast<std::size_t>(j)] = r.measured * inv_s;
    w.xi[static_cast<std::size_t>(j)] = (r.position - w.x_ref) * inv_l;

    if (!spec.invariant_inputs()) {
      for (int m = 0; m < 3; ++m)
        w.stream.push_back(w.bvec[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)]);
    } else {
      const Vec3d& b = w.bvec[static_cast<std::size_t>(j)];
      const double nb = std::sqrt(dot(b, b) + 1e-12);
      w.stream.push_back(nb);
      if (j == 0) {
        w.stream.push_back(1.0);
      } else {
        const Vec3d& bp = w.bvec[static_cast<std::size_t>(j - 1)];
        const double np = std::sqrt(dot(bp, bp) + 1e-12);
        w.stream.push_back(dot(b, bp) / (nb * np));
      }
      w.stream.push_back(dot(w.xi[static_cast<std::size_t>(j)], b) / nb);
    }
    w.stream.push_back(dt * spec.rate_hz);
  }
  return w;
}

std::vector<double> denoiser_init(const DenoiserSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::vector<double> params;
  switch (spec.backbone) {
    case Backbone::mlp:
      params = mlp_init(spec.mlp_backbone(), rng);
      break;
    case Backbone::cnn1d: {
      params.reserve(static_cast<std::size_t>(spec.cnn_param_count()));
      const int k = DenoiserSpec::kCnnKernel;
      const int dims[4] = {DenoiserSpec::kStepDim, spec.hidden, spec.hidden, spec.features};
      for (int layer = 0; layer < 3; ++layer) {
        const int cin = dims[layer];
        const int cout = dims[layer + 1];
        std::normal_distribution<double> g(0.0, std::sqrt(2.0 / static_cast<double>(cin * k + cout)));
        for (int o = 0; o < cout; ++o) {
          params.push_back(0.0);
          for (int i = 0; i < cin * k; ++i) params.push_back(g(rng));
        }
      }
      break;
    }
    case Backbone::ltc:
      params = ltc_init(spec.ltc_backbone(), rng);
      break;
    case Backbone::contiformer: {
      params = conti_attention_init(spec.conti_backbone(), rng);
      // Temper the raw unit-variance init so the softmax starts flat.
      for (double& p : params) p *= 0.2;
      break;
    }
  }
  std::mt19937_64 rng_head(seed ^ 0xa0761d6478bd642fULL);
  const MlpSpec head = spec.invariant_inputs() ? spec.coeff_head() : spec.direct_head();
  const auto hp = mlp_init(head, rng_head);
  params.insert(params.end(), hp.begin(), hp.end());
  if (spec.curl_output()) {
    if (spec.invariant_inputs()) {
      // Zero start: the shortcut is linear in its weights, so gradients still
      // flow, and the initial model matches the plain equivariant potential.
      params.insert(params.end(),
                    static_cast<std::size_t>(spec.eq_uniform_head().param_count()), 0.0);
    } else {
      const auto up = mlp_init(spec.uniform_head(), rng_head);
      params.insert(params.end(), up.begin(), up.end());
    }
  }
  return params;
}

Vec3d denoise_at(const DenoiserModel& model, std::span<const FlightRecord> window) {
  const EncodedWindow w = encode_window(model.spec, window, model.input_scale);
  const Vec3d xi{0.0, 0.0, 0.0};
  const Vec3d y = denoiser_field<double>(model.spec, std::span<const double>(model.params),
                                         w, xi);
  return y * model.field_scale;
}

FlightDataset denoise_dataset(const DenoiserModel& model, const FlightDataset& ds) {
  FlightDataset out = ds;
  const int win = model.spec.window;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    if (static_cast<int>(i) < win - 1) {
      out.records[i].clean = ds.records[i].measured;
      continue;
    }
    const std::span<const FlightRecord> window(
        ds.records.data() + i + 1 - static_cast<std::size_t>(win),
        static_cast<std::size_t>(win));
    out.records[i].clean = denoise_at(model, window);
  }
  return out;
}

double denoiser_divergence(const DenoiserModel& model,
                           std::span<const FlightRecord> window, const Vec3d& x) {
  const EncodedWindow w = encode_window(model.spec, window, model.input_scale);
  std::vector<Dual<double>> pd(model.params.begin(), model.params.end());
  const double inv_l = 1.0 / model.spec.length_scale;
  auto field = [&](const Vec3<Dual<double>>& xs) {
    Vec3<Dual<double>> xi;
    for (int m = 0; m < 3; ++m)
      xi[static_cast<std::size_t>(m)] =
          (xs[static_cast<std::size_t>(m)] - w.x_ref[static_cast<std::size_t>(m)]) * inv_l;
    Vec3<Dual<double>> y = denoiser_field<Dual<double>>(
        model.spec, std::span<const Dual<double>>(pd), w, xi);
    return y * model.field_scale;
  };
  return divergence(field, x);
}

PreprocessResult preprocess(const FlightDataset& ds, const GroundTruthField& core_model,
                            double cutoff_hz) {
  if (!(cutoff_hz > 0.0)) throw ConfigError("preprocess: cutoff must be positive");
  PreprocessResult res;
  res.ds = ds;
  const std::size_t n = ds.records.size();
  res.core.resize(n);
  res.clean_low.resize(n);
  res.measured_low.resize(n);
  if (n == 0) return res;

  std::vector<Vec3d> rm(n), rc(n);
  for (std::size_t i = 0; i < n; ++i) {
    res.core[i] = eval_field(core_model, ds.records[i].position);
    rm[i] = ds.records[i].measured - res.core[i];
    rc[i] = ds.records[i].clean - res.core[i];
  }

  // Zero-phase single-pole low-pass: forward then backward sweep with the
  // interval-exact smoothing factor 1 - exp(-dt/tau); high-pass = residual.
  const double tau = 1.0 / (2.0 * 3.14159265358979323846 * cutoff_hz);
  auto lowpass = [&](const std::vector<Vec3d>& x) {
    std::vector<Vec3d> fwd(n), out(n);
    fwd[0] = x[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double dt = ds.records[i].t - ds.records[i - 1].t;
      const double a = 1.0 - std::exp(-dt / tau);
      fwd[i] = fwd[i - 1] + (x[i] - fwd[i - 1]) * a;
    }
    out[n - 1] = fwd[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
      const double dt = ds.records[i + 1].t - ds.records[i].t;
      const double a = 1.0 - std::exp(-dt / tau);
      out[i] = out[i + 1] + (fwd[i] - out[i + 1]) * a;
    }
    return out;
  };

  res.measured_low = lowpass(rm);
  res.clean_low = lowpass(rc);
  for (std::size_t i = 0; i < n; ++i) {
    res.ds.records[i].measured = rm[i] - res.measured_low[i];
    res.ds.records[i].clean = rc[i] - res.clean_low[i];
  }
  return res;
}

Vec3d restore_clean(const PreprocessResult& pre, std::size_t i) {
  if (i >= pre.ds.records.size()) throw ContractError("restore_clean: index out of range");
  return pre.ds.records[i].clean + pre.clean_low[i] + pre.core[i];
}

}  // namespace gfk

#ifndef GFK_DENOISER_HPP
#define GFK_DENOISER_HPP

#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gfk/conti_attention.hpp"
#include "gfk/dataset.hpp"
#include "gfk/diff.hpp"
#include "gfk/dual.hpp"
#include "gfk/errors.hpp"
#include "gfk/ltc.hpp"
#include "gfk/nets.hpp"
#include "gfk/vec3.hpp"

namespace gfk {

enum class Backbone { mlp, cnn1d, ltc, contiformer };
enum class Constraint { none, div_free, equivariant, both };

Backbone parse_backbone(const std::string& name);
Constraint parse_constraint(const std::string& name);
const char* backbone_name(Backbone b);
const char* constraint_name(Constraint c);

// Windowed denoiser: a temporal backbone summarizes the measured-field window
// into a feature vector, and a constraint-specific head maps the features and
// an evaluation position to the predicted clean field. Predictions are in
// normalized units; DenoiserModel carries the physical scales.
//
// Heads by constraint:
//   none        raw MLP on [features; position]
//   div_free    the same MLP read as a vector potential; output is its curl
//   equivariant invariant coefficients combining the window's field vectors
//               and relative positions (output co-rotates with the inputs)
//   both        the equivariant combination read as a potential, then curl
struct DenoiserSpec {
  Backbone backbone = Backbone::mlp;
  Constraint constraint = Constraint::none;
  int window = 32;    // samples per window
  int features = 16;  // backbone output width
  int hidden = 24;    // backbone / head hidden width
  double length_scale = 100.0;  // m per unit of scaled position
  double rate_hz = 10.0;        // nominal rate; normalizes the dt channel

  static constexpr int kStepDim = 4;  // per-sample backbone inputs

  bool invariant_inputs() const {
    return constraint == Constraint::equivariant || constraint == Constraint::both;
  }
  bool curl_output() const {
    return constraint == Constraint::div_free || constraint == Constraint::both;
  }

  void validate() const {
    if (window < 2) throw ConfigError("denoiser: window must hold at least 2 samples");
    if (features < 1 || hidden < 1) throw ConfigError("denoiser: widths must be positive");
    if (!(length_scale > 0.0) || !(rate_hz > 0.0))
      throw ConfigError("denoiser: scales must be positive");
  }

  MlpSpec mlp_backbone() const { return {{window * kStepDim, hidden, features}}; }
  LtcCellSpec ltc_backbone() const { return {kStepDim, features}; }
  ContiAttentionSpec conti_backbone() const {
    ContiAttentionSpec s;
    s.sig.add(kScalar, kStepDim);
    s.out_sig.add(kScalar, features);
    s.mix_degrees = {0};
    s.quad_order = 4;
    return s;
  }
  // cnn1d: 3 temporal conv layers, kernel 5, zero-padded to constant length,
  // tanh activations, mean-pooled over time.
  static constexpr int kCnnKernel = 5;
  int cnn_param_count() const {
    const int k = kCnnKernel;
    return hidden * (1 + kStepDim * k) + hidden * (1 + hidden * k) +
           features * (1 + hidden * k);
  }

  int backbone_param_count() const {
    switch (backbone) {
      case Backbone::mlp: return mlp_backbone().param_count();
      case Backbone::cnn1d: return cnn_param_count();
      case Backbone::ltc: return ltc_backbone().param_count();
      case Backbone::contiformer: return conti_backbone().param_count();
    }
    throw ConfigError("unknown backbone");
  }

  // Raw head: [features; 3 position coords] -> 3 outputs (field or potential).
  MlpSpec direct_head() const { return {{features + 3, hidden, 3}}; }
  // Uniform-field shortcut for the curl head: an affine map features -> c with
  // the potential augmented by c x xi, whose curl is the constant field 2c.
  // A tanh layer mixes features and position additively, so without this term
  // the curl head cannot cheaply express the window-conditioned constant field
  // that dominates window-scale predictions, while the raw head gets it for
  // free by ignoring the position inputs.
  MlpSpec uniform_head() const { return {{features, 3}}; }
  // Equivariant head: [features; |r|^2; r.B] -> per-sample triple (c_j, d_j,
  // e_j) weighting B_j, r_j and r_j x B_j. The cross term matters for the
  // curl-constrained variant: curl(e (r x B)) = grad e x (r x B) - 2 e B, so
  // the curl can produce components along the measured field directions.
  MlpSpec coeff_head() const { return {{features + 2, hidden, 3}}; }
  // Equivariant analogue of the uniform shortcut: per-sample scalars u_j from
  // the features alone, entering the potential as mean_j u_j (xi x B_j). The
  // u_j do not depend on the evaluation position, so the curl is exactly
  // -2 mean_j u_j B_j -- a window-conditioned constant field spanning the
  // measured directions, which the position-dependent coefficients above can
  // only approximate through their gradient terms.
  MlpSpec eq_uniform_head() const { return {{features, window}}; }

  int head_param_count() const {
    if (invariant_inputs()) {
      int n = coeff_head().param_count();
      if (curl_output()) n += eq_uniform_head().param_count();
      return n;
    }
    int n = direct_head().param_count();
    if (curl_output()) n += uniform_head().param_count();
    return n;
  }
  int param_count() const { return backbone_param_count() + head_param_count(); }
};

// Window inputs precomputed as plain doubles (they are constants under
// differentiation). Positions are scaled offsets from the final sample.
struct EncodedWindow {
  std::vector<double> stream;  // window * kStepDim backbone inputs
  std::vector<double> dts;     // per-step interval, seconds
  std::vector<Vec3d> xi;       // (x_j - x_ref) / length_scale
  std::vector<Vec3d> bvec;     // measured / input_scale
  Vec3d x_ref{};               // m
  double t_ref = 0.0;          // s
};

EncodedWindow encode_window(const DenoiserSpec& spec,
                            std::span<const FlightRecord> window, double input_scale);

namespace detail {

template <class T>
std::vector<T> cnn_forward(const DenoiserSpec& spec, std::span<const T> params,
                           const std::vector<double>& stream) {
  using std::tanh;
  const int k = DenoiserSpec::kCnnKernel;
  const int W = spec.window;
  const int dims[4] = {DenoiserSpec::kStepDim, spec.hidden, spec.hidden, spec.features};
  std::vector<T> cur(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) cur[i] = T(stream[i]);
  std::size_t p = 0;
  for (int layer = 0; layer < 3; ++layer) {
    const int cin = dims[layer];
    const int cout = dims[layer + 1];
    std::vector<T> next(static_cast<std::size_t>(W * cout), T(0.0));
    for (int o = 0; o < cout; ++o) {
      const T* b = &params[p];
      const T* w = b + 1;  // cin * k taps, tap-major
      for (int t = 0; t < W; ++t) {
        T s = *b;
        for (int dt = 0; dt < k; ++dt) {
          const int src = t + dt - k / 2;
          if (src < 0 || src >= W) continue;  // zero padding
          for (int i = 0; i < cin; ++i)
            s = s + w[dt * cin + i] * cur[static_cast<std::size_t>(src * cin + i)];
        }
        next[static_cast<std::size_t>(t * cout + o)] = tanh(s);
      }
      p += static_cast<std::size_t>(1 + cin * k);
    }
    cur.swap(next);
  }
  // temporal mean pool
  std::vector<T> out(static_cast<std::size_t>(spec.features), T(0.0));
  for (int t = 0; t < W; ++t)
    for (int f = 0; f < spec.features; ++f)
      out[static_cast<std::size_t>(f)] += cur[static_cast<std::size_t>(t * spec.features + f)];
  const double inv = 1.0 / static_cast<double>(W);
  for (T& v : out) v = v * T(inv);
  return out;
}

}  // namespace detail

// Backbone feature vector from the encoded window; `params` is the backbone
// parameter slice.
template <class T>
std::vector<T> denoiser_features(const DenoiserSpec& spec, std::span<const T> params,
                                 const EncodedWindow& w) {
  if (static_cast<int>(params.size()) != spec.backbone_param_count())
    throw ContractError("denoiser backbone parameter count mismatch");
  switch (spec.backbone) {
    case Backbone::mlp: {
      std::vector<T> in(w.stream.size());
      for (std::size_t i = 0; i < w.stream.size(); ++i) in[i] = T(w.stream[i]);
      std::vector<T> out;
      mlp_forward<T, T>(spec.mlp_backbone(), params, std::span<const T>(in), out);
      return out;
    }
    case Backbone::cnn1d:
      return detail::cnn_forward(spec, params, w.stream);
    case Backbone::ltc: {
      const LtcCellSpec cell = spec.ltc_backbone();
      std::vector<T> h(static_cast<std::size_t>(spec.features), T(0.0));
      std::vector<T> x(static_cast<std::size_t>(DenoiserSpec::kStepDim));
      for (int j = 0; j < spec.window; ++j) {
        for (int i = 0; i < DenoiserSpec::kStepDim; ++i)
          x[static_cast<std::size_t>(i)] =
              T(w.stream[static_cast<std::size_t>(j * DenoiserSpec::kStepDim + i)]);
        h = ltc_step<T>(cell, params, std::span<const T>(h), std::span<const T>(x),
                        w.dts[static_cast<std::size_t>(j)]);
      }
      return h;
    }
    case Backbone::contiformer: {
      const ContiAttentionSpec att = spec.conti_backbone();
      std::vector<AttentionEvent<T>> events(static_cast<std::size_t>(spec.window));
      double t = 0.0;
      for (int j = 0; j < spec.window; ++j) {
        auto& e = events[static_cast<std::size_t>(j)];
        t += w.dts[static_cast<std::size_t>(j)];
        e.time = t;
        for (int m = 0; m < 3; ++m)
          e.position[static_cast<std::size_t>(m)] =
              T(w.xi[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)]);
        e.features = GeometricTensorT<T>::zeros(att.sig);
        auto* b = e.features.find(kScalar);
        for (int i = 0; i < DenoiserSpec::kStepDim; ++i)
          b->coeffs[static_cast<std::size_t>(i)] =
              T(w.stream[static_cast<std::size_t>(j * DenoiserSpec::kStepDim + i)]);
      }
      const auto out = conti_output<T>(att, params,
                                       std::span<const AttentionEvent<T>>(events),
                                       events.back());
      return out.find(kScalar)->coeffs;
    }
  }
  throw ConfigError("unknown backbone");
}

namespace detail {

// Raw 3-output head at scaled position xi (field for `none`, potential for
// `div_free`). TP is the position scalar type; features enter as constants.
template <class T, class TP>
Vec3<TP> direct_head_eval(const DenoiserSpec& spec, std::span<const T> head,
                          const std::vector<T>& feat, const Vec3<TP>& xi) {
  std::vector<TP> in;
  in.reserve(feat.size() + 3);
  for (const T& f : feat) in.push_back(TP(f));
  for (int m = 0; m < 3; ++m) in.push_back(xi[static_cast<std::size_t>(m)]);
  std::vector<TP> out;
  mlp_forward<T, TP>(spec.direct_head(), head, std::span<const TP>(in), out);
  return {out[0], out[1], out[2]};
}

// Equivariant combination: sum_j c_j B_j + d_j (xi - xi_j) + e_j (r_j x B_j),
// with the coefficients invariant functions of the features and of |r_j|^2
// and r_j . B_j. Every term co-rotates with the inputs under rigid motions.
template <class T, class TP>
Vec3<TP> equivariant_head_eval(const DenoiserSpec& spec, std::span<const T> head,
                               const std::vector<T>& feat, const EncodedWindow& w,
                               const Vec3<TP>& xi) {
  std::vector<TP> in(feat.size() + 2);
  for (std::size_t i = 0; i < feat.size(); ++i) in[i] = TP(feat[i]);
  Vec3<TP> acc{TP(0.0), TP(0.0), TP(0.0)};
  std::vector<TP> cd;
  for (int j = 0; j < spec.window; ++j) {
    const Vec3d& b = w.bvec[static_cast<std::size_t>(j)];
    const Vec3d& xj = w.xi[static_cast<std::size_t>(j)];
    Vec3<TP> r;
    for (int m = 0; m < 3; ++m)
      r[static_cast<std::size_t>(m)] =
          xi[static_cast<std::size_t>(m)] - TP(xj[static_cast<std::size_t>(m)]);
    in[feat.size()] = dot(r, r);
    in[feat.size() + 1] = r[0] * b[0] + r[1] * b[1] + r[2] * b[2];
    mlp_forward<T, TP>(spec.coeff_head(), head, std::span<const TP>(in), cd);
    const Vec3<TP> rxb{r[1] * b[2] - r[2] * b[1], r[2] * b[0] - r[0] * b[2],
                       r[0] * b[1] - r[1] * b[0]};
    for (int m = 0; m < 3; ++m)
      acc[static_cast<std::size_t>(m)] += cd[0] * b[static_cast<std::size_t>(m)] +
                                          cd[1] * r[static_cast<std::size_t>(m)] +
                                          cd[2] * rxb[static_cast<std::size_t>(m)];
  }
  return acc;
}

}  // namespace detail

// Normalized clean-field prediction at scaled position xi, differentiable in
// both the parameters (type T) and the position.
template <class T>
Vec3<T> denoiser_field(const DenoiserSpec& spec, std::span<const T> params,
                       const EncodedWindow& w, const Vec3<T>& xi) {
  spec.validate();
  if (static_cast<int>(params.size()) != spec.param_count())
    throw ContractError("denoiser parameter count mismatch");
  const auto bp = params.subspan(0, static_cast<std::size_t>(spec.backbone_param_count()));
  const auto hp = params.subspan(static_cast<std::size_t>(spec.backbone_param_count()));
  const std::vector<T> feat = denoiser_features<T>(spec, bp, w);

  switch (spec.constraint) {
    case Constraint::none:
      return detail::direct_head_eval<T, T>(spec, hp, feat, xi);
    case Constraint::equivariant:
      return detail::equivariant_head_eval<T, T>(spec, hp, feat, w, xi);
    case Constraint::div_free: {
      const auto np = static_cast<std::size_t>(spec.direct_head().param_count());
      std::vector<T> c;
      mlp_forward<T>(spec.uniform_head(), hp.subspan(np), std::span<const T>(feat), c);
      auto pot = [&](const Vec3<Dual<T>>& xs) {
        Vec3<Dual<T>> a =
            detail::direct_head_eval<T, Dual<T>>(spec, hp.subspan(0, np), feat, xs);
        a[0] = a[0] + (c[1] * xs[2] - c[2] * xs[1]);
        a[1] = a[1] + (c[2] * xs[0] - c[0] * xs[2]);
        a[2] = a[2] + (c[0] * xs[1] - c[1] * xs[0]);
        return a;
      };
      return curl(pot, xi);
    }
    case Constraint::both: {
      const auto np = static_cast<std::size_t>(spec.coeff_head().param_count());
      std::vector<T> u;
      mlp_forward<T>(spec.eq_uniform_head(), hp.subspan(np), std::span<const T>(feat), u);
      auto pot = [&](const Vec3<Dual<T>>& xs) {
        Vec3<Dual<T>> a =
            detail::equivariant_head_eval<T, Dual<T>>(spec, hp.subspan(0, np), feat, w, xs);
        const double inv_w = 1.0 / static_cast<double>(spec.window);
        for (int j = 0; j < spec.window; ++j) {
          const Vec3d& b = w.bvec[static_cast<std::size_t>(j)] * inv_w;
          const T& uj = u[static_cast<std::size_t>(j)];
          a[0] = a[0] + uj * (xs[1] * b[2] - xs[2] * b[1]);
          a[1] = a[1] + uj * (xs[2] * b[0] - xs[0] * b[2]);
          a[2] = a[2] + uj * (xs[0] * b[1] - xs[1] * b[0]);
        }
        return a;
      };
      return curl(pot, xi);
    }
  }
  throw ConfigError("unknown constraint");
}

struct DenoiserModel {
  DenoiserSpec spec;
  std::vector<double> params;
  double input_scale = 1.0;  // nT of measured residual per backbone input unit
  double field_scale = 1.0;  // nT per unit of network output
};

std::vector<double> denoiser_init(const DenoiserSpec& spec, std::uint64_t seed);

// Clean-field estimate (nT) at the final sample of the window.
Vec3d denoise_at(const DenoiserModel& model, std::span<const FlightRecord> window);

// Sliding-window denoising; the first window-1 records keep their measured
// value as the prediction (not enough history). Output stores predictions in
// the clean channel; measured and poses are copied unchanged.
FlightDataset denoise_dataset(const DenoiserModel& model, const FlightDataset& ds);

// Divergence (nT/m) of the map x -> prediction(window fixed, evaluated at x),
// taken at world position x.
double denoiser_divergence(const DenoiserModel& model,
                           std::span<const FlightRecord> window, const Vec3d& x);

// ---------------------------------------------------------------------------
// Preprocessing: core-field subtraction plus a zero-phase (forward-backward
// single-pole) high-pass on both the measured and clean channels. The removed
// low-frequency components are kept so the transform is exactly invertible.
struct PreprocessResult {
  FlightDataset ds;
  std::vector<Vec3d> core;          // subtracted core field per record
  std::vector<Vec3d> clean_low;     // removed low-frequency clean residual
  std::vector<Vec3d> measured_low;  // removed low-frequency measured residual
};

PreprocessResult preprocess(const FlightDataset& ds, const GroundTruthField& core_model,
                            double cutoff_hz = 1.0 / 3600.0);

// Exact inverse for the clean channel: filtered + removed low part + core.
Vec3d restore_clean(const PreprocessResult& pre, std::size_t i);

}  // namespace gfk

#endif

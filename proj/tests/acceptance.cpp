// Release acceptance suite. Each criterion prints exactly one PASS/FAIL line;
// the process exits nonzero if any criterion fails. Unlike the unit-test
// binaries this one runs end-to-end workloads (million-sample noise checks,
// the full backbone/constraint training ablation, a desk-scale GAN run), so
// expect a multi-minute wall time dominated by the ablation.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gfk/clebsch_gordan.hpp"
#include "gfk/conti_attention.hpp"
#include "gfk/dataset.hpp"
#include "gfk/denoiser.hpp"
#include "gfk/diff.hpp"
#include "gfk/equivariant.hpp"
#include "gfk/field_model.hpp"
#include "gfk/gan.hpp"
#include "gfk/latent_ode.hpp"
#include "gfk/ltc.hpp"
#include "gfk/noise.hpp"
#include "gfk/spherical.hpp"
#include "gfk/tape.hpp"
#include "gfk/tensor_product.hpp"
#include "gfk/train.hpp"
#include "gfk/wigner.hpp"
#include "test_util.hpp"

#if __has_include(<unsupported/Eigen/MatrixFunctions>)
#include <unsupported/Eigen/MatrixFunctions>
#define GFK_ACCEPT_HAVE_EIGEN 1
#endif

using namespace gfk;
using gfk::test::random_rotation;
using gfk::test::random_transform;
using gfk::test::random_unit;

namespace {

// ---------------------------------------------------------------------------
// Harness

int g_failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%-24s %s  %s\n", name, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// Hand-built window with nontrivial geometry, matching desk-scale encodings.
std::vector<FlightRecord> toy_window(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<FlightRecord> w(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    auto& r = w[static_cast<std::size_t>(j)];
    r.t = 0.1 * j;
    r.position = Vec3d{30.0 * j + 5.0 * g(rng), 20.0 * g(rng), 15.0 * g(rng)};
    r.orientation = mat_identity();
    r.measured = Vec3d{g(rng), g(rng), g(rng)};
    r.clean = r.measured;
  }
  return w;
}

DenoiserSpec small_spec(Backbone b, Constraint c, int window = 6) {
  DenoiserSpec s;
  s.backbone = b;
  s.constraint = c;
  s.window = window;
  s.features = 4;
  s.hidden = 5;
  s.rate_hz = 10.0;
  return s;
}

// ---------------------------------------------------------------------------
// Criterion 1: divergence identity on curl-constructed fields.

bool divergence_identity(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;

  // Two standalone vector-potential networks.
  for (std::uint64_t seed : {1ULL, 2ULL}) {
    const FieldModel m = FieldModel::random(MlpSpec{{3, 16, 16, 3}}, seed);
    std::mt19937_64 rng(100 + seed);
    std::normal_distribution<double> g(0.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
      const Vec3d x{g(rng), g(rng), g(rng)};
      const double div = field_divergence(m, x);
      const double scale = std::max(norm(curl_field(m, x)), 1e-12);
      worst = std::max(worst, std::abs(div) / scale);
    }
  }

  // Three curl-head denoisers across backbones and constraint variants.
  const std::pair<Backbone, Constraint> combos[] = {
      {Backbone::mlp, Constraint::div_free},
      {Backbone::mlp, Constraint::both},
      {Backbone::ltc, Constraint::div_free}};
  const auto window = toy_window(6, 7);
  std::mt19937_64 rng(55);
  std::normal_distribution<double> g(0.0, 25.0);
  for (const auto& [b, c] : combos) {
    DenoiserModel model;
    model.spec = small_spec(b, c);
    model.params = denoiser_init(model.spec, 17);
    model.field_scale = 40.0;
    const EncodedWindow enc = encode_window(model.spec, window, model.input_scale);
    for (int i = 0; i < 1000; ++i) {
      const Vec3d x = window.back().position + Vec3d{g(rng), g(rng), g(rng)};
      const double div = denoiser_divergence(model, window, x);
      const Vec3d xi = (x - enc.x_ref) * (1.0 / model.spec.length_scale);
      const Vec3d field =
          denoiser_field<double>(model.spec, std::span<const double>(model.params), enc,
                                 xi) *
          model.field_scale;
      const double scale = std::max(norm(field) / model.spec.length_scale, 1e-15);
      worst = std::max(worst, std::abs(div) / scale);
    }
  }

  const double dt = seconds_since(t0);
  detail = fmt("5 models x 1000 points, max rel divergence %.3g, %.1f s", worst, dt);
  return worst <= 1e-10 && dt < 10.0;
}

// ---------------------------------------------------------------------------
// Criterion 2: E(3)-equivariance of every equivariant component.

std::vector<FlightRecord> transform_window(const std::vector<FlightRecord>& w,
                                           const Mat3d& rot, const Vec3d& shift) {
  std::vector<FlightRecord> out = w;
  for (auto& r : out) {
    r.position = mat_vec(rot, r.position) + shift;
    r.orientation = mat_mul(rot, r.orientation);
    r.measured = mat_vec(rot, r.measured);
    r.clean = mat_vec(rot, r.clean);
  }
  return out;
}

GeometricTensor random_tensor(const Signature& sig, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  auto t = GeometricTensor::zeros(sig);
  for (auto& b : t.blocks)
    for (auto& c : b.coeffs) c = g(rng);
  return t;
}

bool equivariance(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;

  // Every backbone under both equivariant head variants, 100 transforms each.
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g(0.0, 200.0);
  for (Constraint c : {Constraint::equivariant, Constraint::both}) {
    for (Backbone b : {Backbone::mlp, Backbone::cnn1d, Backbone::ltc,
                       Backbone::contiformer}) {
      DenoiserModel model;
      model.spec = small_spec(b, c, b == Backbone::contiformer ? 4 : 6);
      model.params = denoiser_init(model.spec, 31);
      model.field_scale = 10.0;
      const auto window = toy_window(model.spec.window, 83);
      const Vec3d y = denoise_at(model, window);
      for (int trial = 0; trial < 100; ++trial) {
        const Mat3d rot = random_rotation(rng);
        const Vec3d shift{g(rng), g(rng), g(rng)};
        const Vec3d y_moved = denoise_at(model, transform_window(window, rot, shift));
        worst = std::max(worst,
                         norm(y_moved - mat_vec(rot, y)) / std::max(1.0, norm(y)));
      }
    }
  }

  // Equivariant message-passing layer.
  {
    EquivariantLayerSpec spec;
    spec.input.add(kScalar, 2);
    spec.input.add(kVector, 1);
    spec.output.add(kScalar, 1);
    spec.output.add(kVector, 2);
    std::mt19937_64 lr(7);
    const auto params = equivariant_layer_init(spec, lr);
    std::vector<EquivNode<double>> nodes(4);
    for (auto& n : nodes) {
      n.position = random_unit(lr) * 2.0;
      n.features = random_tensor(spec.input, lr);
    }
    const std::vector<int> nb{1, 2, 3};
    const auto out = equivariant_forward<double>(spec, std::span<const double>(params),
                                                 nodes, 0, std::span<const int>(nb));
    for (int trial = 0; trial < 100; ++trial) {
      const RigidTransform t = random_transform(lr, 3.0);
      std::vector<EquivNode<double>> moved = nodes;
      for (auto& n : moved) {
        n.position = mat_vec(t.rotation, n.position) + t.translation;
        n.features = rotate_tensor(n.features, t);
      }
      const auto got = equivariant_forward<double>(spec, std::span<const double>(params),
                                                   moved, 0, std::span<const int>(nb));
      const auto want = rotate_tensor(out, t);
      for (std::size_t bb = 0; bb < want.blocks.size(); ++bb)
        for (std::size_t cc = 0; cc < want.blocks[bb].coeffs.size(); ++cc)
          worst = std::max(worst, std::abs(got.blocks[bb].coeffs[cc] -
                                           want.blocks[bb].coeffs[cc]) /
                                      std::max(1.0, std::abs(want.blocks[bb].coeffs[cc])));
    }
  }

  // Equivariant recurrent cell.
  {
    std::mt19937_64 er(17);
    const EqLtcCellSpec spec{2, 2, 3, 2};
    const auto params = eq_ltc_init(spec, er);
    const auto h = random_tensor(spec.state_signature(), er);
    const auto x = random_tensor(spec.input_signature(), er);
    const auto out = eq_ltc_step<double>(spec, params, h, x, 0.35);
    for (int trial = 0; trial < 100; ++trial) {
      const RigidTransform t(random_rotation(er), Vec3d{0, 0, 0});
      const auto got = eq_ltc_step<double>(spec, params, rotate_tensor(h, t),
                                           rotate_tensor(x, t), 0.35);
      const auto want = rotate_tensor(out, t);
      for (std::size_t bb = 0; bb < want.blocks.size(); ++bb)
        for (std::size_t cc = 0; cc < want.blocks[bb].coeffs.size(); ++cc)
          worst = std::max(worst, std::abs(got.blocks[bb].coeffs[cc] -
                                           want.blocks[bb].coeffs[cc]) /
                                      std::max(1.0, std::abs(want.blocks[bb].coeffs[cc])));
    }
  }

  // Continuous-time attention output.
  {
    std::mt19937_64 ar(26);
    ContiAttentionSpec spec;
    spec.sig.add(kScalar, 2);
    spec.sig.add(kVector, 1);
    spec.out_sig.add(kScalar, 1);
    spec.out_sig.add(kVector, 1);
    const auto params = conti_attention_init(spec, ar);
    std::vector<AttentionEvent<double>> keys;
    for (int i = 0; i < 3; ++i)
      keys.push_back({random_unit(ar) * (1.0 + i), 0.2 * i, random_tensor(spec.sig, ar)});
    AttentionEvent<double> query{random_unit(ar) * 2.5, 1.1, random_tensor(spec.sig, ar)};
    const auto out = conti_output<double>(spec, params, keys, query);
    for (int trial = 0; trial < 100; ++trial) {
      const RigidTransform t = random_transform(ar, 2.0);
      auto apply = [&](const AttentionEvent<double>& e) {
        AttentionEvent<double> r;
        r.position = mat_vec(t.rotation, e.position) + t.translation;
        r.time = e.time;
        r.features = rotate_tensor(e.features, t);
        return r;
      };
      std::vector<AttentionEvent<double>> keys_t;
      for (const auto& k : keys) keys_t.push_back(apply(k));
      const auto got = conti_output<double>(spec, params, keys_t, apply(query));
      const auto want = rotate_tensor(out, t);
      for (std::size_t bb = 0; bb < want.blocks.size(); ++bb)
        for (std::size_t cc = 0; cc < want.blocks[bb].coeffs.size(); ++cc)
          worst = std::max(worst, std::abs(got.blocks[bb].coeffs[cc] -
                                           want.blocks[bb].coeffs[cc]) /
                                      std::max(1.0, std::abs(want.blocks[bb].coeffs[cc])));
    }
  }

  const double dt = seconds_since(t0);
  detail = fmt("100 transforms per combination, max rel err %.3g, %.1f s", worst, dt);
  return worst <= 1e-8 && dt < 60.0;
}

// ---------------------------------------------------------------------------
// Criterion 3: algebra oracles.

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

// Independent closed-form Clebsch-Gordan evaluation (Racah's finite sum).
double racah_cg(int l1, int m1, int l2, int m2, int l, int m) {
  if (m != m1 + m2 || l < std::abs(l1 - l2) || l > l1 + l2) return 0.0;
  if (std::abs(m) > l || std::abs(m1) > l1 || std::abs(m2) > l2) return 0.0;
  const double pre =
      std::sqrt((2.0 * l + 1.0) * factorial(l1 + l2 - l) * factorial(l1 - l2 + l) *
                factorial(-l1 + l2 + l) / factorial(l1 + l2 + l + 1)) *
      std::sqrt(factorial(l1 + m1) * factorial(l1 - m1) * factorial(l2 + m2) *
                factorial(l2 - m2) * factorial(l + m) * factorial(l - m));
  double sum = 0.0;
  for (int k = 0; k <= l1 + l2 - l; ++k) {
    const int a = l1 + l2 - l - k, b = l1 - m1 - k, c = l2 + m2 - k;
    const int d = l - l2 + m1 + k, e = l - l1 - m2 + k;
    if (a < 0 || b < 0 || c < 0 || d < 0 || e < 0) continue;
    const double term = 1.0 / (factorial(k) * factorial(a) * factorial(b) *
                               factorial(c) * factorial(d) * factorial(e));
    sum += (k % 2 == 0) ? term : -term;
  }
  return pre * sum;
}

// Real-basis coupling from complex coefficients through the explicit
// complex-to-real change of basis (phased to whichever part is live).
double real_coupling_oracle(int l1, int m1, int l2, int m2, int l, int m) {
  using cd = std::complex<double>;
  auto row = [](int mm) {
    std::vector<std::pair<int, cd>> r;
    const double is2 = 1.0 / std::sqrt(2.0);
    const double sg = (std::abs(mm) % 2 == 0) ? 1.0 : -1.0;
    if (mm == 0)
      r.push_back({0, cd(1, 0)});
    else if (mm > 0) {
      r.push_back({-mm, cd(is2, 0)});
      r.push_back({mm, cd(sg * is2, 0)});
    } else {
      r.push_back({mm, cd(0, is2)});
      r.push_back({-mm, cd(0, -sg * is2)});
    }
    return r;
  };
  cd acc(0, 0);
  for (auto& [mu1, u1] : row(m1))
    for (auto& [mu2, u2] : row(m2))
      for (auto& [mu, u3] : row(m)) {
        if (mu != mu1 + mu2) continue;
        acc += u1 * u2 * std::conj(u3) * racah_cg(l1, mu1, l2, mu2, l, mu);
      }
  return std::abs(acc.real()) >= std::abs(acc.imag()) ? acc.real() : acc.imag();
}

bool algebra_oracles(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();

  // Clebsch-Gordan against the closed-form finite sum, all l <= 2.
  double worst_cg = 0.0;
  for (int l1 = 0; l1 <= 2; ++l1)
    for (int l2 = 0; l2 <= 2; ++l2)
      for (int l = 0; l <= 4; ++l)
        for (int m1 = -l1; m1 <= l1; ++m1)
          for (int m2 = -l2; m2 <= l2; ++m2)
            for (int m = -l; m <= l; ++m) {
              double got;
              try {
                got = clebsch_gordan(l1, m1, l2, m2, l, m);
              } catch (const std::domain_error&) {
                continue;  // degrees outside the supported table
              }
              worst_cg = std::max(worst_cg,
                                  std::abs(got - racah_cg(l1, m1, l2, m2, l, m)));
            }

  // Rotation covariance of the harmonic coefficients.
  double worst_w = 0.0;
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const Mat3d rot = random_rotation(rng);
    const RigidTransform t(rot, Vec3d{0, 0, 0});
    const Vec3d u = random_unit(rng);
    for (int l = 0; l <= 2; ++l) {
      const auto d = wigner_matrix(l, t);
      const auto yu = eval_spherical_harmonics(l, u);
      const auto yru = eval_spherical_harmonics(l, mat_vec(rot, u));
      const auto dyu = d.apply(yu);
      for (std::size_t i = 0; i < yru.size(); ++i)
        worst_w = std::max(worst_w, std::abs(yru[i] - dyu[i]));
    }
  }

  // Coupled product against the brute-force double summation.
  double worst_tp = 0.0;
  std::mt19937_64 tr(8);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int l1 = 0; l1 <= 2; ++l1)
    for (int l2 = 0; l2 <= 2; ++l2)
      for (int l = std::abs(l1 - l2); l <= std::min(l1 + l2, 2); ++l) {
        std::vector<double> a(static_cast<std::size_t>(2 * l1 + 1));
        std::vector<double> b(static_cast<std::size_t>(2 * l2 + 1));
        for (double& v : a) v = uni(tr);
        for (double& v : b) v = uni(tr);
        const auto out = tensor_product_block<double>(l1, a, l2, b, l);
        for (int m = -l; m <= l; ++m) {
          double ref = 0.0;
          for (int m1 = -l1; m1 <= l1; ++m1)
            for (int m2 = -l2; m2 <= l2; ++m2)
              ref += real_coupling_oracle(l1, m1, l2, m2, l, m) *
                     a[static_cast<std::size_t>(m1 + l1)] *
                     b[static_cast<std::size_t>(m2 + l2)];
          worst_tp = std::max(worst_tp,
                              std::abs(out[static_cast<std::size_t>(m + l)] - ref));
        }
      }

  detail = fmt("CG dev %.3g, covariance dev %.3g, product dev %.3g, %.1f s",
               worst_cg, worst_w, worst_tp, seconds_since(t0));
  return worst_cg <= 1e-13 && worst_w <= 1e-10 && worst_tp <= 1e-12;
}

// ---------------------------------------------------------------------------
// Criterion 4: reverse-mode gradients vs central finite differences.

// Checks d(loss)/d(params) on 20 random coordinates of one module.
bool grad_check(const std::function<Var(std::span<const Var>)>& loss_var,
                const std::function<double(const std::vector<double>&)>& loss_d,
                std::vector<double> params, std::mt19937_64& rng, double& worst) {
  const std::vector<double> grad = param_gradient(loss_var, params);
  std::uniform_int_distribution<std::size_t> pick(0, params.size() - 1);
  bool ok = true;
  for (int probe = 0; probe < 20; ++probe) {
    const std::size_t k = pick(rng);
    const double eps = 1e-6 * std::max(1.0, std::abs(params[k]));
    auto p1 = params, p2 = params;
    p1[k] += eps;
    p2[k] -= eps;
    const double fd = (loss_d(p1) - loss_d(p2)) / (2.0 * eps);
    const double rel = std::abs(grad[k] - fd) / std::max(1.0, std::abs(fd));
    worst = std::max(worst, rel);
    ok = ok && rel <= 1e-4;
  }
  return ok;
}

bool gradient_correctness(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  bool ok = true;
  int modules = 0;

  // Plain MLP.
  {
    const MlpSpec spec{{4, 6, 3}};
    std::mt19937_64 ir(1);
    std::vector<double> params = mlp_init(spec, ir);
    std::vector<double> x(4);
    for (double& v : x) v = g(rng);
    auto val = [&](const std::vector<double>& p) {
      std::vector<double> out;
      mlp_forward<double>(spec, p, std::span<const double>(x), out);
      double s = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) s += (1.0 + i) * out[i] * out[i];
      return s;
    };
    auto varf = [&](std::span<const Var> p) {
      std::vector<Var> xv(x.begin(), x.end()), out;
      mlp_forward<Var>(spec, p, std::span<const Var>(xv), out);
      Var s(0.0);
      for (std::size_t i = 0; i < out.size(); ++i) s += (1.0 + i) * out[i] * out[i];
      return s;
    };
    ok = grad_check(varf, val, params, rng, worst) && ok;
    ++modules;
  }

  // Liquid recurrent cell.
  {
    const LtcCellSpec spec{2, 3};
    std::mt19937_64 ir(2);
    std::vector<double> params = ltc_init(spec, ir);
    std::vector<double> h(3), x(2);
    for (double& v : h) v = g(rng);
    for (double& v : x) v = g(rng);
    auto val = [&](const std::vector<double>& p) {
      const auto out = ltc_step<double>(spec, p, h, x, 0.7);
      double s = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) s += (1.0 + i) * out[i] * out[i];
      return s;
    };
    auto varf = [&](std::span<const Var> p) {
      const std::vector<Var> hv(h.begin(), h.end()), xv(x.begin(), x.end());
      const auto out = ltc_step<Var>(spec, p, hv, xv, 0.7);
      Var s(0.0);
      for (std::size_t i = 0; i < out.size(); ++i) s += (1.0 + i) * out[i] * out[i];
      return s;
    };
    ok = grad_check(varf, val, params, rng, worst) && ok;
    ++modules;
  }

  // Equivariant recurrent cell.
  {
    const EqLtcCellSpec spec{2, 1, 2, 1};
    std::mt19937_64 ir(3);
    std::vector<double> params = eq_ltc_init(spec, ir);
    const auto h = random_tensor(spec.state_signature(), ir);
    const auto x = random_tensor(spec.input_signature(), ir);
    auto score = [&](const auto& t) {
      using T = std::decay_t<decltype(t.blocks[0].coeffs[0])>;
      T s(0.0);
      double w = 1.0;
      for (const auto& b : t.blocks)
        for (const auto& c : b.coeffs) s += (w += 0.5) * c * c;
      return s;
    };
    auto val = [&](const std::vector<double>& p) {
      return score(eq_ltc_step<double>(spec, p, h, x, 0.4));
    };
    auto varf = [&](std::span<const Var> p) {
      GeometricTensorT<Var> hv = GeometricTensorT<Var>::zeros(spec.state_signature());
      GeometricTensorT<Var> xv = GeometricTensorT<Var>::zeros(spec.input_signature());
      for (std::size_t b = 0; b < hv.blocks.size(); ++b)
        for (std::size_t c = 0; c < hv.blocks[b].coeffs.size(); ++c)
          hv.blocks[b].coeffs[c] = Var(h.blocks[b].coeffs[c]);
      for (std::size_t b = 0; b < xv.blocks.size(); ++b)
        for (std::size_t c = 0; c < xv.blocks[b].coeffs.size(); ++c)
          xv.blocks[b].coeffs[c] = Var(x.blocks[b].coeffs[c]);
      return score(eq_ltc_step<Var>(spec, p, hv, xv, 0.4));
    };
    ok = grad_check(varf, val, params, rng, worst) && ok;
    ++modules;
  }

  // Continuous-time attention.
  {
    ContiAttentionSpec spec;
    spec.sig.add(kScalar, 2);
    spec.out_sig.add(kScalar, 2);
    std::mt19937_64 ir(4);
    std::vector<double> params = conti_attention_init(spec, ir);
    std::vector<AttentionEvent<double>> keys;
    for (int i = 0; i < 3; ++i)
      keys.push_back({random_unit(ir) * (1.0 + i), 0.3 * i, random_tensor(spec.sig, ir)});
    AttentionEvent<double> query{random_unit(ir) * 2.0, 1.2, random_tensor(spec.sig, ir)};
    auto val = [&](const std::vector<double>& p) {
      const auto out = conti_output<double>(spec, p, keys, query);
      double s = 0.0;
      for (const auto& b : out.blocks)
        for (double c : b.coeffs) s += c * c;
      return s;
    };
    auto varf = [&](std::span<const Var> p) {
      std::vector<AttentionEvent<Var>> kv;
      auto lift = [&](const AttentionEvent<double>& e) {
        AttentionEvent<Var> r;
        for (int m = 0; m < 3; ++m)
          r.position[static_cast<std::size_t>(m)] = Var(e.position[static_cast<std::size_t>(m)]);
        r.time = e.time;
        r.features = GeometricTensorT<Var>::zeros(spec.sig);
        for (std::size_t b = 0; b < e.features.blocks.size(); ++b)
          for (std::size_t c = 0; c < e.features.blocks[b].coeffs.size(); ++c)
            r.features.blocks[b].coeffs[c] = Var(e.features.blocks[b].coeffs[c]);
        return r;
      };
      for (const auto& k : keys) kv.push_back(lift(k));
      const auto out = conti_output<Var>(spec, p, kv, lift(query));
      Var s(0.0);
      for (const auto& b : out.blocks)
        for (const Var& c : b.coeffs) s += c * c;
      return s;
    };
    ok = grad_check(varf, val, params, rng, worst) && ok;
    ++modules;
  }

  // Latent dynamics integrator.
  {
    LatentOdeSpec spec;
    spec.dim = 3;
    spec.dynamics = MlpSpec{{4, 5, 3}};
    spec.max_step = 0.1;
    std::mt19937_64 ir(5);
    std::vector<double> params = mlp_init(spec.dynamics, ir);
    const std::vector<double> z0{0.3, -1.2, 0.8};
    auto val = [&](const std::vector<double>& p) {
      const auto z = latent_ode_integrate<double, double>(spec, p, z0, 0.0, 0.6);
      double s = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) s += (1.0 + i) * z[i] * z[i];
      return s;
    };
    auto varf = [&](std::span<const Var> p) {
      std::vector<Var> zv(z0.begin(), z0.end());
      const auto z = latent_ode_integrate<Var, Var>(spec, p, zv, 0.0, 0.6);
      Var s(0.0);
      for (std::size_t i = 0; i < z.size(); ++i) s += (1.0 + i) * z[i] * z[i];
      return s;
    };
    ok = grad_check(varf, val, params, rng, worst) && ok;
    ++modules;
  }

  // Vector-potential field network (through the curl).
  {
    const MlpSpec spec{{3, 8, 3}};
    std::mt19937_64 ir(6);
    std::vector<double> params = mlp_init(spec, ir);
    const Vec3d x{0.4, -0.2, 0.9};
    auto val = [&](const std::vector<double>& p) {
      const Vec3d b = curl_field<double>(spec, std::span<const double>(p), x);
      return b[0] * b[0] + 2.0 * b[1] * b[1] + 3.0 * b[2] * b[2];
    };
    auto varf = [&](std::span<const Var> p) {
      Vec3<Var> xv{Var(x[0]), Var(x[1]), Var(x[2])};
      const auto b = curl_field<Var, Var>(spec, p, xv);
      return b[0] * b[0] + 2.0 * b[1] * b[1] + 3.0 * b[2] * b[2];
    };
    ok = grad_check(varf, val, params, rng, worst) && ok;
    ++modules;
  }

  // Every denoiser backbone through the constrained prediction.
  {
    const auto window = toy_window(6, 55);
    for (Backbone b : {Backbone::mlp, Backbone::cnn1d, Backbone::ltc,
                       Backbone::contiformer}) {
      for (Constraint c : {Constraint::none, Constraint::both}) {
        const DenoiserSpec spec = small_spec(b, c);
        std::vector<double> params = denoiser_init(spec, 3);
        const EncodedWindow enc = encode_window(spec, window, 1.0);
        const Vec3d xi{0.05, -0.02, 0.01};
        auto val = [&](const std::vector<double>& p) {
          const Vec3d y =
              denoiser_field<double>(spec, std::span<const double>(p), enc,
                                     Vec3d{xi[0], xi[1], xi[2]});
          return y[0] * y[0] + 2.0 * y[1] * y[1] + 3.0 * y[2] * y[2];
        };
        auto varf = [&](std::span<const Var> p) {
          const Vec3<Var> at{Var(xi[0]), Var(xi[1]), Var(xi[2])};
          const auto y = denoiser_field<Var>(spec, p, enc, at);
          return y[0] * y[0] + 2.0 * y[1] * y[1] + 3.0 * y[2] * y[2];
        };
        ok = grad_check(varf, val, params, rng, worst) && ok;
        ++modules;
      }
    }
  }

  // Generator and discriminator of the conditional GAN.
  {
    GanConfig cfg;
    cfg.latent = 3;
    cfg.classes = 3;
    cfg.seq_len = 4;
    cfg.channels = 2;
    cfg.hidden = 5;
    cfg.embed = 2;
    std::vector<double> params = gan_init(cfg, 12);
    std::vector<double> z(static_cast<std::size_t>(cfg.latent));
    std::vector<double> xr(static_cast<std::size_t>(cfg.seq_len * cfg.channels));
    for (double& v : z) v = g(rng);
    for (double& v : xr) v = 0.5 * g(rng);
    auto val = [&](const std::vector<double>& p) {
      const auto fake = generator_forward<double>(cfg, p, z, 1);
      double s = 0.0;
      for (double v : fake) s += v;
      const auto dr = discriminator_forward<double, double>(
          cfg, p, std::span<const double>(xr), 2);
      s += dr.adv + std::log(dr.cls[0] + 0.1);
      const auto df = discriminator_forward<double, double>(
          cfg, p, std::span<const double>(fake), 0);
      return s + df.adv;
    };
    auto varf = [&](std::span<const Var> p) {
      const auto fake = generator_forward<Var>(cfg, p, z, 1);
      Var s(0.0);
      for (const Var& v : fake) s += v;
      std::vector<Var> xv(xr.begin(), xr.end());
      const auto dr = discriminator_forward<Var, Var>(cfg, p, std::span<const Var>(xv), 2);
      s += dr.adv + log(dr.cls[0] + Var(0.1));
      const auto df = discriminator_forward<Var, Var>(cfg, p,
                                                      std::span<const Var>(fake), 0);
      return s + df.adv;
    };
    ok = grad_check(varf, val, params, rng, worst) && ok;
    ++modules;
  }

  detail = fmt("%d modules x 20 probes, max rel err %.3g, %.1f s", modules, worst,
               seconds_since(t0));
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 5: ODE fidelity against independent integrators.

std::vector<double> rk4_frozen_decay(std::vector<double> h, const std::vector<double>& u,
                                     const std::vector<double>& tau, double total,
                                     double step) {
  const int n = std::max(1, static_cast<int>(std::llround(total / step)));
  const double dt = total / n;
  auto rhs = [&](const std::vector<double>& s) {
    std::vector<double> d(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) d[i] = (u[i] - s[i]) / tau[i];
    return d;
  };
  std::vector<double> tmp(h.size());
  for (int k = 0; k < n; ++k) {
    const auto k1 = rhs(h);
    for (std::size_t i = 0; i < h.size(); ++i) tmp[i] = h[i] + 0.5 * dt * k1[i];
    const auto k2 = rhs(tmp);
    for (std::size_t i = 0; i < h.size(); ++i) tmp[i] = h[i] + 0.5 * dt * k2[i];
    const auto k3 = rhs(tmp);
    for (std::size_t i = 0; i < h.size(); ++i) tmp[i] = h[i] + dt * k3[i];
    const auto k4 = rhs(tmp);
    for (std::size_t i = 0; i < h.size(); ++i)
      h[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return h;
}

std::vector<double> expm_apply(const std::vector<double>& a, int n,
                               const std::vector<double>& v, double t) {
#ifdef GFK_ACCEPT_HAVE_EIGEN
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = a[static_cast<std::size_t>(i * n + j)] * t;
  const Eigen::MatrixXd e = m.exp();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(i)] += e(i, j) * v[static_cast<std::size_t>(j)];
  return out;
#else
  std::vector<double> at(a.size());
  double nrm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    at[i] = a[i] * t;
    nrm += at[i] * at[i];
  }
  int squarings = 0;
  nrm = std::sqrt(nrm);
  while (nrm > 0.5) {
    nrm *= 0.5;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  std::vector<double> e(static_cast<std::size_t>(n * n), 0.0);
  std::vector<double> term(e.size(), 0.0);
  for (int i = 0; i < n; ++i)
    e[static_cast<std::size_t>(i * n + i)] = term[static_cast<std::size_t>(i * n + i)] = 1.0;
  for (int k = 1; k <= 60; ++k) {
    std::vector<double> nt(e.size(), 0.0);
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j)
          nt[static_cast<std::size_t>(i * n + j)] +=
              term[static_cast<std::size_t>(i * n + l)] *
              at[static_cast<std::size_t>(l * n + j)] * scale / k;
    term = nt;
    for (std::size_t i = 0; i < e.size(); ++i) e[i] += term[i];
  }
  for (int s = 0; s < squarings; ++s) {
    std::vector<double> sq(e.size(), 0.0);
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j)
          sq[static_cast<std::size_t>(i * n + j)] +=
              e[static_cast<std::size_t>(i * n + l)] * e[static_cast<std::size_t>(l * n + j)];
    e = sq;
  }
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(i)] +=
          e[static_cast<std::size_t>(i * n + j)] * v[static_cast<std::size_t>(j)];
  return out;
#endif
}

bool ode_fidelity(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_ltc = 0.0, worst_ode = 0.0, worst_att = 0.0;

  // Closed-form liquid cell update vs RK4 on the frozen-gate dynamics.
  {
    std::mt19937_64 rng(12);
    const LtcCellSpec spec{2, 4};
    const auto params = ltc_init(spec, rng);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> h(4), x(2);
      for (double& v : h) v = g(rng);
      for (double& v : x) v = g(rng);
      const auto gates = ltc_gates<double>(spec, params, h, x);
      double tau_min = gates.tau[0];
      for (double t : gates.tau) tau_min = std::min(tau_min, t);
      const double dt = 0.1 * tau_min;
      const auto got = ltc_step<double>(spec, params, h, x, dt);
      const auto want = rk4_frozen_decay(h, gates.u, gates.tau, dt, 1e-4 * tau_min);
      for (std::size_t i = 0; i < got.size(); ++i)
        worst_ltc = std::max(worst_ltc, rel_err(got[i], want[i]));
    }
  }

  // Latent integrator vs the matrix exponential on linear dynamics.
  {
    std::mt19937_64 rng(21);
    const int n = 4;
    std::normal_distribution<double> g(0.0, 0.3);
    std::vector<double> a(static_cast<std::size_t>(n * n));
    for (double& v : a) v = g(rng);
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i * n + i)] -= 0.5;

    LatentOdeSpec spec;
    spec.dim = n;
    spec.dynamics = MlpSpec{{n + 1, n}};
    std::vector<double> params(static_cast<std::size_t>(spec.param_count()), 0.0);
    for (int o = 0; o < n; ++o)
      for (int j = 0; j < n; ++j)
        params[static_cast<std::size_t>(o * (n + 2) + 1 + j)] =
            a[static_cast<std::size_t>(o * n + j)];
    spec.max_step = 0.05;

    std::vector<double> z0(static_cast<std::size_t>(n));
    for (double& v : z0) v = g(rng);
    const auto got = latent_ode_integrate<double, double>(spec, params, z0, 0.0, 1.0);
    const auto want = expm_apply(a, n, z0, 1.0);
    for (int i = 0; i < n; ++i)
      worst_ode = std::max(worst_ode, rel_err(got[static_cast<std::size_t>(i)],
                                              want[static_cast<std::size_t>(i)]));
  }

  // Attention quadrature vs a dense trapezoid oracle of the same integrand.
  {
    std::mt19937_64 rng(24);
    ContiAttentionSpec spec;
    spec.sig.add(kScalar, 2);
    spec.sig.add(kVector, 2);
    spec.out_sig.add(kScalar, 1);
    const auto params = conti_attention_init(spec, rng);

    for (int trial = 0; trial < 5; ++trial) {
      AttentionEvent<double> key{random_unit(rng) * 2.0, 0.3, random_tensor(spec.sig, rng)};
      AttentionEvent<double> query{random_unit(rng) * 3.0, 2.1,
                                   random_tensor(spec.sig, rng)};

      const EquivariantLinearSpec emb = spec.embed_spec();
      const int ne = emb.param_count();
      const std::span<const double> all(params);
      const auto q_at_key = equivariant_linear<double>(emb, all.subspan(0, ne), key.features);
      const auto q_at_query =
          equivariant_linear<double>(emb, all.subspan(0, ne), query.features);
      const auto k_emb = equivariant_linear<double>(emb, all.subspan(ne, ne), key.features);
      Vec3d d = query.position - key.position;
      const double rn = norm(d);
      const Vec3d dir{d[0] / rn, d[1] / rn, d[2] / rn};

      auto integrand = [&](double tau) {
        const double s = (tau - key.time) / (query.time - key.time);
        double acc = 0.0;
        for (const auto& qe : spec.sig.entries)
          for (const auto& ke : spec.sig.entries)
            for (int l : spec.mix_degrees) {
              const IrrepSpec irq = qe.irrep, irk = ke.irrep;
              if (irq.degree < std::abs(irk.degree - l) || irq.degree > irk.degree + l)
                continue;
              if (!(irq.parity == irk.parity * sh_parity(l))) continue;
              std::vector<double> y(static_cast<std::size_t>(2 * l + 1));
              real_sh_unchecked(l, dir, std::span<double>(y));
              const auto proj = tensor_product_block<double>(
                  irk.degree, std::span<const double>(k_emb.find(irk)->coeffs), l,
                  std::span<const double>(y), irq.degree);
              const auto* bk = q_at_key.find(irq);
              const auto* bq = q_at_query.find(irq);
              for (std::size_t i = 0; i < proj.size(); ++i)
                acc += ((1.0 - s) * bk->coeffs[i] + s * bq->coeffs[i]) * proj[i];
            }
        return acc;
      };

      double trap = 0.0;
      const int nt = 10000;
      const double h = (query.time - key.time) / nt;
      for (int i = 0; i <= nt; ++i) {
        const double w = (i == 0 || i == nt) ? 0.5 : 1.0;
        trap += w * integrand(key.time + i * h);
      }
      trap *= h / (query.time - key.time);

      const double got = conti_attention<double>(spec, params, query, key);
      worst_att = std::max(worst_att, rel_err(got, trap));
    }
  }

  detail = fmt("liquid cell %.3g, latent integrator %.3g, attention %.3g, %.1f s",
               worst_ltc, worst_ode, worst_att, seconds_since(t0));
  return worst_ltc <= 1e-6 && worst_ode <= 1e-6 && worst_att <= 1e-6;
}

// ---------------------------------------------------------------------------
// Criterion 6: mean-reverting noise autocorrelation.

bool noise_statistics(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  NoiseConfig cfg;
  cfg.eddy_lambda = 0.5;
  cfg.eddy_sigma = 5.0;
  cfg.white_sigma = 0.0;
  cfg.drift_rate = 0.0;
  cfg.thermal_amplitude = 0.0;

  const std::size_t n = 1000000;
  const double dt = 0.1;
  std::vector<double> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = dt * static_cast<double>(i);
  const auto noise = sample_noise(cfg, ts, 2024);

  // Empirical autocorrelation of the three components, pooled, lags 0..40.
  const int max_lag = 40;
  std::vector<double> r(static_cast<std::size_t>(max_lag + 1), 0.0);
  for (int lag = 0; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < n; ++i)
      acc += dot(noise[i], noise[i + static_cast<std::size_t>(lag)]);
    r[static_cast<std::size_t>(lag)] = acc / static_cast<double>(3 * (n - lag));
  }

  // Least-squares fit of log R(tau) against tau; R^2 of the fit.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::vector<double> xs, ys;
  for (int lag = 0; lag <= max_lag; ++lag) {
    if (r[static_cast<std::size_t>(lag)] <= 0.0) break;
    const double x = dt * lag, y = std::log(r[static_cast<std::size_t>(lag)]);
    xs.push_back(x);
    ys.push_back(y);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(xs.size());
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double icept = (sy - slope * sx) / m;
  double ss_res = 0.0, ss_tot = 0.0;
  const double ybar = sy / m;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double fit = icept + slope * xs[i];
    ss_res += (ys[i] - fit) * (ys[i] - fit);
    ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  const double r2 = 1.0 - ss_res / ss_tot;
  const double dtw = seconds_since(t0);
  detail = fmt("decay rate %.4f (configured %.2f), R^2 %.5f over %zu lags, %.1f s",
               -slope, cfg.eddy_lambda, r2, xs.size(), dtw);
  return r2 >= 0.99 && dtw < 30.0;
}

// ---------------------------------------------------------------------------
// Criterion 7: directional constraint ablation on the synthetic corpus.

GroundTruthField corpus_field() {
  GroundTruthField field = default_earth_field();
  field.sources.clear();
  // Jittered grid of shallow dipoles covering the whole flight region, so the
  // anomaly field is statistically stationary along every flight path.
  const double s = std::sqrt(0.5);
  const Vec3d up{s, 0.0, s};
  const Vec3d base = up * (6.371e6 + 300.0);
  const Vec3d east{0.0, 1.0, 0.0};
  const Vec3d north = cross(up, east);
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = -2; i <= 8; ++i)
    for (int j = -3; j <= 3; ++j) {
      const double ex = 1200.0 * i + 250.0 * g(rng);
      const double ny = 1200.0 * j + 250.0 * g(rng);
      const Vec3d pos = base + east * ex + north * ny - up * 1200.0;
      const Vec3d mom{6e8 * g(rng), 6e8 * g(rng), 6e8 * g(rng)};
      field.sources.push_back({pos, mom});
    }
  return field;
}

// Corpus and training protocol for the ablation; one dataset per
// (pattern, regime) cell, preprocessed against the core-only model.
struct AblationSetup {
  double duration_s = 120.0;
  double rate_hz = 5.0;
  double cutoff_hz = 0.01;
  double window_s = 2.0;
  int features = 8;
  int hidden = 12;
  int batch = 64;
  int epochs = 40;
  double lr = 3e-3;
  double length_scale = 400.0;
  int loss_points = 3;
};

bool directional_ablation(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const AblationSetup setup;
  const GroundTruthField field = corpus_field();
  GroundTruthField core = default_earth_field();
  core.sources.clear();

  std::vector<FlightDataset> corpus;
  for (int p = 0; p < 3; ++p)
    for (int r = 0; r < 3; ++r) {
      FlightConfig fc;
      fc.pattern = static_cast<TrajectoryPattern>(p);
      fc.regime = static_cast<NoiseRegime>(r);
      fc.duration_s = setup.duration_s;
      fc.rate_hz = setup.rate_hz;
      fc.seed = 1000 + static_cast<std::uint64_t>(p * 3 + r);
      corpus.push_back(preprocess(generate_flight(field, fc), core, setup.cutoff_hz).ds);
    }

  const Constraint cs[] = {Constraint::none, Constraint::div_free,
                           Constraint::equivariant, Constraint::both};
  const Backbone bs[] = {Backbone::mlp, Backbone::ltc};
  const std::uint64_t seeds[] = {1, 2, 3};

  bool all_ok = true;
  std::string summary;
  for (Backbone b : bs) {
    // pooled test RMSE / SNR per (seed, constraint)
    double rmse_tab[3][4], snr_tab[3][4];
    for (int si = 0; si < 3; ++si) {
      double err2[4] = {0, 0, 0, 0};
      double sig2 = 0.0;
      std::size_t count = 0;
      for (const FlightDataset& ds : corpus) {
        for (int ci = 0; ci < 4; ++ci) {
          TrainConfig cfg;
          cfg.backbone = b;
          cfg.constraint = cs[ci];
          cfg.window_s = setup.window_s;
          cfg.epochs = setup.epochs;
          cfg.features = setup.features;
          cfg.hidden = setup.hidden;
          cfg.lr = setup.lr;
          cfg.batch = setup.batch;
          cfg.length_scale = setup.length_scale;
          cfg.loss_points = setup.loss_points;
          cfg.seed = seeds[si];
          const RunReport rep = train_denoiser(ds, cfg).report;
          for (std::size_t i = 0; i < rep.test_pred.size(); ++i) {
            const Vec3d e = rep.test_pred[i] - rep.test_truth[i];
            err2[ci] += dot(e, e);
            if (ci == 0) {
              sig2 += dot(rep.test_truth[i], rep.test_truth[i]);
              ++count;
            }
          }
        }
      }
      for (int ci = 0; ci < 4; ++ci) {
        rmse_tab[si][ci] = std::sqrt(err2[ci] / static_cast<double>(count));
        snr_tab[si][ci] = 10.0 * std::log10(sig2 / err2[ci]);
      }
    }

    auto ordered = [](const double v[4]) {
      // v: none, div_free, equivariant, both
      return v[3] < v[1] && v[3] < v[2] && v[1] < v[0] && v[2] < v[0];
    };
    auto snr_ordered = [](const double v[4]) {
      return v[3] > v[1] && v[3] > v[2] && v[1] > v[0] && v[2] > v[0];
    };
    int good_seeds = 0;
    for (int si = 0; si < 3; ++si)
      if (ordered(rmse_tab[si]) && snr_ordered(snr_tab[si])) ++good_seeds;

    double med_rmse[4], med_snr[4];
    for (int ci = 0; ci < 4; ++ci) {
      double r[3] = {rmse_tab[0][ci], rmse_tab[1][ci], rmse_tab[2][ci]};
      double s[3] = {snr_tab[0][ci], snr_tab[1][ci], snr_tab[2][ci]};
      std::sort(r, r + 3);
      std::sort(s, s + 3);
      med_rmse[ci] = r[1];
      med_snr[ci] = s[1];
    }
    const bool backbone_ok =
        good_seeds >= 2 && ordered(med_rmse) && snr_ordered(med_snr);
    all_ok = all_ok && backbone_ok;
    summary += fmt("%s[%d/3 seeds, med base/div/equi/both %.1f/%.1f/%.1f/%.1f] ",
                   backbone_name(b), good_seeds, med_rmse[0], med_rmse[1], med_rmse[2],
                   med_rmse[3]);
  }

  detail = summary + fmt("%.0f s", seconds_since(t0));
  return all_ok;
}

// ---------------------------------------------------------------------------
// Criterion 8: metric identities.

bool metric_identities(std::string& detail) {
  const std::vector<Vec3d> truth = {{10, 0, 0}, {0, 20, 0}, {3, -4, 12}};
  std::vector<Vec3d> tenth = truth;
  for (std::size_t i = 0; i < truth.size(); ++i) tenth[i] = truth[i] + truth[i] * 0.1;
  const double snr_tenth = snr_db(tenth, truth);

  std::vector<Vec3d> doubled = truth;
  for (std::size_t i = 0; i < truth.size(); ++i)
    doubled[i] = truth[i] + (tenth[i] - truth[i]) * 2.0;
  const double drop = snr_db(tenth, truth) - snr_db(doubled, truth);

  const std::vector<Vec3d> zt = {{0, 0, 0}, {0, 0, 0}};
  const std::vector<Vec3d> zp = {{1, 0, 0}, {0, 2, 0}};
  const double r1 = rmse(zp, zt);
  const double r2 = rmse(zp, zp);
  const std::vector<Vec3d> unit = {{3, 4, 0}};
  const std::vector<Vec3d> zero1 = {{0, 0, 0}};
  const double r3 = rmse(unit, zero1);

  detail = fmt("tenth-error SNR %.9f dB, doubling drop %.9f dB", snr_tenth, drop);
  return std::abs(snr_tenth - 20.0) <= 1e-9 && std::abs(drop - 6.0206) <= 1e-6 &&
         std::abs(r1 - std::sqrt(2.5)) <= 1e-12 && r2 == 0.0 &&
         std::abs(r3 - std::sqrt(25.0 / 3.0)) <= 1e-12;
}

// ---------------------------------------------------------------------------
// Criterion 9: conditional GAN desk-scale protocol.

bool gan_protocol(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const GroundTruthField field = corpus_field();
  GroundTruthField core = default_earth_field();
  core.sources.clear();

  GanConfig cfg;
  cfg.latent = 8;
  cfg.classes = 9;
  cfg.seq_len = 16;
  cfg.channels = 3;
  cfg.hidden = 20;
  cfg.embed = 6;
  cfg.cls_weight = 2.0;

  // Real windows per class from the physics generator, scaled into (-1, 1).
  std::vector<std::vector<GanSample>> train_per_class(9);
  std::vector<GanSample> held_out;
  for (int p = 0; p < 3; ++p)
    for (int r = 0; r < 3; ++r) {
      FlightConfig fc;
      fc.pattern = static_cast<TrajectoryPattern>(p);
      fc.regime = static_cast<NoiseRegime>(r);
      fc.duration_s = 120.0;
      fc.rate_hz = 5.0;
      fc.seed = 500 + static_cast<std::uint64_t>(p * 3 + r);
      const FlightDataset ds = preprocess(generate_flight(field, fc), core, 0.01).ds;
      const int label = p * 3 + r;
      double max_abs = 0.0;
      for (const auto& rec : ds.records)
        for (int m = 0; m < 3; ++m)
          max_abs = std::max(max_abs, std::abs(rec.measured[static_cast<std::size_t>(m)]));
      const double scale = 1.0 / (1.05 * std::max(max_abs, 1e-9));
      std::vector<GanSample> windows;
      for (std::size_t s = 0; s + static_cast<std::size_t>(cfg.seq_len) <= ds.records.size();
           s += static_cast<std::size_t>(cfg.seq_len)) {
        GanSample smp;
        smp.label = label;
        smp.x.reserve(static_cast<std::size_t>(cfg.seq_len * cfg.channels));
        for (int tix = 0; tix < cfg.seq_len; ++tix) {
          const auto& rec = ds.records[s + static_cast<std::size_t>(tix)];
          for (int m = 0; m < 3; ++m)
            smp.x.push_back(rec.measured[static_cast<std::size_t>(m)] * scale);
        }
        windows.push_back(std::move(smp));
      }
      // last fifth of each class's windows held out for the accuracy check
      const std::size_t cut = windows.size() - windows.size() / 5;
      for (std::size_t i = 0; i < windows.size(); ++i)
        (i < cut ? train_per_class[static_cast<std::size_t>(label)] : held_out)
            .push_back(windows[i]);
    }

  GanTrainState state = gan_train_init(cfg, 7);
  std::mt19937_64 rng(123);
  double last_d = 0.0, last_g = 0.0;
  bool finite = true;
  for (int step = 0; step < 200; ++step) {
    // class-balanced batch: two random training windows per class
    std::vector<GanSample> batch;
    for (int c = 0; c < 9; ++c) {
      auto& pool = train_per_class[static_cast<std::size_t>(c)];
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      batch.push_back(pool[pick(rng)]);
      batch.push_back(pool[pick(rng)]);
    }
    const GanStepReport rep = gan_train_step(state, batch);
    last_d = rep.loss_d;
    last_g = rep.loss_g;
    finite = finite && std::isfinite(rep.loss_d) && std::isfinite(rep.loss_g);
  }

  // Class-head accuracy on the held-out real windows.
  std::size_t correct = 0;
  for (const GanSample& s : held_out) {
    double best = -1.0;
    int arg = -1;
    const auto out = discriminator_forward<double, double>(
        state.config, state.params, std::span<const double>(s.x), s.label);
    for (int c = 0; c < 9; ++c)
      if (value(out.cls[static_cast<std::size_t>(c)]) > best) {
        best = value(out.cls[static_cast<std::size_t>(c)]);
        arg = c;
      }
    if (arg == s.label) ++correct;
  }
  const double acc = static_cast<double>(correct) / static_cast<double>(held_out.size());

  // Spectral norms of the four recurrent matrices after the run.
  const GanLayout l = GanLayout::make(cfg);
  double min_sigma = 1e9, max_sigma = 0.0;
  const int offs[4] = {l.rec_gate(l.g_cell, l.g_in), l.rec_cand(l.g_cell, l.g_in),
                       l.rec_gate(l.d_cell, l.d_in), l.rec_cand(l.d_cell, l.d_in)};
  std::vector<double> u(static_cast<std::size_t>(l.hidden), 1.0);
  for (int k = 0; k < 4; ++k) {
    std::vector<double> uk = u;
    const double sigma = spectral_norm_estimate(
        std::span<const double>(state.params.data() + offs[k],
                                static_cast<std::size_t>(l.hidden * l.hidden)),
        l.hidden, l.hidden, uk, 60);
    min_sigma = std::min(min_sigma, sigma);
    max_sigma = std::max(max_sigma, sigma);
  }

  detail = fmt("200 steps (loss_d %.3f, loss_g %.3f), held-out class acc %.3f "
               "(chance 0.111), recurrent sigma [%.3f, %.3f], %.0f s",
               last_d, last_g, acc, min_sigma, max_sigma, seconds_since(t0));
  return finite && acc >= 2.0 / 9.0 && min_sigma >= 0.9 && max_sigma <= 1.1;
}

// ---------------------------------------------------------------------------
// Criterion 10: bitwise round trip and run-to-run determinism.

bool roundtrip_determinism(std::string& detail) {
  // Bitwise dataset round trip, including negative zero and denormals.
  FlightDataset ds;
  ds.context_classes = 9;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 64; ++i) {
    FlightRecord r;
    r.t = 0.1 * i;
    r.position = Vec3d{g(rng) * 1e6, g(rng) * 1e6, g(rng) * 1e6};
    r.orientation = mat_identity();
    r.clean = Vec3d{g(rng), -0.0, 1e-308};
    r.measured = Vec3d{g(rng), g(rng), g(rng)};
    r.context = static_cast<std::uint16_t>(i % 9);
    ds.records.push_back(r);
  }
  const std::string path = "acceptance_roundtrip.magd";
  write_dataset(ds, path);
  const FlightDataset back = read_dataset(path);
  std::remove(path.c_str());
  bool bitwise = back.records.size() == ds.records.size() &&
                 back.context_classes == ds.context_classes &&
                 back.provenance == ds.provenance;
  auto same_bits = [](double a, double b) {
    return std::memcmp(&a, &b, sizeof a) == 0;
  };
  for (std::size_t i = 0; bitwise && i < ds.records.size(); ++i) {
    const auto& a = ds.records[i];
    const auto& b = back.records[i];
    bitwise = same_bits(a.t, b.t) && a.context == b.context;
    for (int m = 0; bitwise && m < 3; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      bitwise = same_bits(a.position[mi], b.position[mi]) &&
                same_bits(a.clean[mi], b.clean[mi]) &&
                same_bits(a.measured[mi], b.measured[mi]);
      for (int k = 0; bitwise && k < 3; ++k)
        bitwise = same_bits(a.orientation[mi][static_cast<std::size_t>(k)],
                            b.orientation[mi][static_cast<std::size_t>(k)]);
    }
  }

  // Identical (config, seed) training runs agree to 1e-9.
  const GroundTruthField field = corpus_field();
  GroundTruthField core = default_earth_field();
  core.sources.clear();
  FlightConfig fc;
  fc.pattern = TrajectoryPattern::racetrack;
  fc.regime = NoiseRegime::moderate;
  fc.duration_s = 40.0;
  fc.rate_hz = 5.0;
  fc.seed = 42;
  const FlightDataset flight = preprocess(generate_flight(field, fc), core, 0.01).ds;
  TrainConfig cfg;
  cfg.window_s = 2.0;
  cfg.epochs = 3;
  cfg.features = 6;
  cfg.hidden = 8;
  cfg.seed = 5;
  const RunReport a = train_denoiser(flight, cfg).report;
  const RunReport b = train_denoiser(flight, cfg).report;
  const double dr = std::abs(a.test_rmse - b.test_rmse);
  const double dt = std::abs(a.train_rmse - b.train_rmse);

  detail = fmt("round trip %s, repeat-run RMSE delta %.3g",
               bitwise ? "bitwise" : "MISMATCH", std::max(dr, dt));
  return bitwise && dr <= 1e-9 && dt <= 1e-9;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    bool (*fn)(std::string&);
  };
  const Criterion criteria[] = {
      {"divergence-identity", divergence_identity},
      {"equivariance", equivariance},
      {"algebra-oracles", algebra_oracles},
      {"gradient-correctness", gradient_correctness},
      {"ode-fidelity", ode_fidelity},
      {"noise-statistics", noise_statistics},
      {"metric-identities", metric_identities},
      {"roundtrip-determinism", roundtrip_determinism},
      {"gan-protocol", gan_protocol},
      {"directional-ablation", directional_ablation},
  };
  for (const Criterion& c : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    report(c.name, ok, detail);
  }
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}

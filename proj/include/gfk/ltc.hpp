#ifndef GFK_LTC_HPP
#define GFK_LTC_HPP

#include <cmath>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "gfk/equivariant.hpp"
#include "gfk/irreps.hpp"
#include "gfk/nets.hpp"

namespace gfk {

// Liquid time-constant cell with the closed-form interval update
//   h_i <- exp(-dt/tau_i) h_i + (1 - exp(-dt/tau_i)) u_i,
//   u_i = sigmoid(Wx_i x + Wh_i h + b_i).
// tau and u are frozen at interval start (zero-order hold), which makes the
// update exact for the frozen linear ODE; the RK4 oracle in the tests
// quantifies the residual against the continuously varying dynamics.
struct LtcCellSpec {
  int input_dim = 0;
  int hidden_dim = 0;
  double tau_min = 1e-3;  // seconds
  double tau_max = 1e3;

  // Layout: per unit [b, Wx row, Wh row] for u, then the same shape again
  // for the time-constant network.
  int unit_params() const { return 1 + input_dim + hidden_dim; }
  int param_count() const { return 2 * hidden_dim * unit_params(); }
};

template <class T>
struct LtcGates {
  std::vector<T> u;    // saturation targets, in (0, 1)
  std::vector<T> tau;  // time constants, clamped to [tau_min, tau_max]
};

template <class T>
LtcGates<T> ltc_gates(const LtcCellSpec& spec, std::span<const T> params,
                      std::span<const T> h, std::span<const T> x) {
  if (static_cast<int>(params.size()) != spec.param_count())
    throw ContractError("ltc parameter count mismatch");
  if (static_cast<int>(h.size()) != spec.hidden_dim ||
      static_cast<int>(x.size()) != spec.input_dim)
    throw ContractError("ltc state/input size mismatch");
  LtcGates<T> g;
  g.u.reserve(static_cast<std::size_t>(spec.hidden_dim));
  g.tau.reserve(static_cast<std::size_t>(spec.hidden_dim));
  const int up = spec.unit_params();
  const double span_tau = spec.tau_max - spec.tau_min;
  for (int pass = 0; pass < 2; ++pass)
    for (int i = 0; i < spec.hidden_dim; ++i) {
      const T* p = params.data() + (pass * spec.hidden_dim + i) * up;
      T s = p[0];
      for (int j = 0; j < spec.input_dim; ++j) s = s + p[1 + j] * x[static_cast<std::size_t>(j)];
      for (int j = 0; j < spec.hidden_dim; ++j)
        s = s + p[1 + spec.input_dim + j] * h[static_cast<std::size_t>(j)];
      if (pass == 0)
        g.u.push_back(sigmoid(s));
      else
        g.tau.push_back(spec.tau_min + span_tau * sigmoid(s));
    }
  return g;
}

// Closed-form decay toward the frozen targets over dt seconds.
template <class T>
std::vector<T> ltc_apply(std::span<const T> h, const LtcGates<T>& gates, double dt) {
  if (dt < 0.0) throw std::domain_error("ltc_apply requires dt >= 0");
  using std::exp;
  std::vector<T> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const T decay = exp((-dt) / gates.tau[i]);
    out[i] = decay * h[i] + (T(1.0) - decay) * gates.u[i];
  }
  return out;
}

template <class T>
std::vector<T> ltc_step(const LtcCellSpec& spec, std::span<const T> params,
                        std::span<const T> h, std::span<const T> x, double dt) {
  return ltc_apply(std::span<const T>(h), ltc_gates(spec, params, h, x), dt);
}

inline std::vector<double> ltc_init(const LtcCellSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(
                                               spec.input_dim + spec.hidden_dim + 1)));
  std::vector<double> p(static_cast<std::size_t>(spec.param_count()));
  for (double& w : p) w = g(rng);
  // bias the time-constant heads so initial tau sits near one second
  const int up = spec.unit_params();
  const double b = std::log((1.0 - spec.tau_min) / (spec.tau_max - 1.0));
  for (int i = 0; i < spec.hidden_dim; ++i)
    p[static_cast<std::size_t>((spec.hidden_dim + i) * up)] = b;
  return p;
}

// Equivariant LTC cell. The state is n_scalar copies of 0e plus n_vector
// copies of 1o. Scalar channels evolve as a plain cell driven by the scalar
// input channels alone (so vector content can never leak into them); each
// vector channel evolves with one shared gate applied identically to its
// three components, toward a target mixed linearly (scalar weights) from the
// input and state vectors. Vector gates see only invariants: input scalars
// and channel norms. Channels of different irrep types are never mixed.
struct EqLtcCellSpec {
  int in_scalar = 0, in_vector = 0;  // input signature: in_scalar x 0e + in_vector x 1o
  int n_scalar = 0, n_vector = 0;    // state signature
  double tau_min = 1e-3;
  double tau_max = 1e3;

  Signature input_signature() const {
    Signature s;
    if (in_scalar > 0) s.add(kScalar, in_scalar);
    if (in_vector > 0) s.add(kVector, in_vector);
    return s;
  }
  Signature state_signature() const {
    Signature s;
    if (n_scalar > 0) s.add(kScalar, n_scalar);
    if (n_vector > 0) s.add(kVector, n_vector);
    return s;
  }

  int invariant_dim() const { return in_scalar + in_vector + n_vector; }

  LtcCellSpec scalar_cell() const { return {in_scalar, n_scalar, tau_min, tau_max}; }

  // Layout: [scalar cell][A: n_vector x in_vector][B: n_vector x n_vector]
  //         [vector tau rows: n_vector x (1 + invariant_dim)]
  int param_count() const {
    return scalar_cell().param_count() + n_vector * in_vector +
           n_vector * n_vector + n_vector * (1 + invariant_dim());
  }
};

// Invariant feature vector seen by the gates: input scalars, input vector
// norms, state vector norms (norms use a 1e-12 softening under the root).
template <class T>
std::vector<T> eq_ltc_invariants(const EqLtcCellSpec& spec,
                                 const GeometricTensorT<T>& h,
                                 const GeometricTensorT<T>& x) {
  using std::sqrt;
  std::vector<T> inv;
  inv.reserve(static_cast<std::size_t>(spec.invariant_dim()));
  if (spec.in_scalar > 0) {
    const auto* b = x.find(kScalar);
    for (int c = 0; c < spec.in_scalar; ++c) inv.push_back(b->coeffs[static_cast<std::size_t>(c)]);
  }
  auto push_norms = [&inv](const typename GeometricTensorT<T>::Block* b, int count) {
    for (int c = 0; c < count; ++c) {
      T n2 = T(0.0);
      for (int m = 0; m < 3; ++m) {
        const T& v = b->coeffs[static_cast<std::size_t>(c * 3 + m)];
        n2 += v * v;
      }
      inv.push_back(sqrt(n2 + 1e-12));
    }
  };
  if (spec.in_vector > 0) push_norms(x.find(kVector), spec.in_vector);
  if (spec.n_vector > 0) push_norms(h.find(kVector), spec.n_vector);
  return inv;
}

template <class T>
GeometricTensorT<T> eq_ltc_step(const EqLtcCellSpec& spec, std::span<const T> params,
                                const GeometricTensorT<T>& h,
                                const GeometricTensorT<T>& x, double dt) {
  if (dt < 0.0) throw std::domain_error("eq_ltc_step requires dt >= 0");
  if (!(h.signature() == spec.state_signature()) ||
      !(x.signature() == spec.input_signature()))
    throw ContractError("eq_ltc_step signature mismatch");
  if (static_cast<int>(params.size()) != spec.param_count())
    throw ContractError("eq_ltc parameter count mismatch");
  using std::exp;

  const std::vector<T> inv = eq_ltc_invariants(spec, h, x);
  GeometricTensorT<T> out = GeometricTensorT<T>::zeros(spec.state_signature());

  // scalar channels: plain LTC over the scalar input channels only
  const LtcCellSpec sc = spec.scalar_cell();
  int off = sc.param_count();
  if (spec.n_scalar > 0) {
    const auto* hb = h.find(kScalar);
    const std::span<const T> xs(inv.data(), static_cast<std::size_t>(spec.in_scalar));
    const auto next = ltc_step<T>(sc, params.subspan(0, static_cast<std::size_t>(off)),
                                  std::span<const T>(hb->coeffs), xs, dt);
    auto* ob = out.find(kScalar);
    ob->coeffs.assign(next.begin(), next.end());
  }

  // vector channels
  if (spec.n_vector > 0) {
    const T* A = params.data() + off;
    const T* B = A + spec.n_vector * spec.in_vector;
    const T* tau_rows = B + spec.n_vector * spec.n_vector;
    const auto* hv = h.find(kVector);
    const auto* xv = spec.in_vector > 0 ? x.find(kVector) : nullptr;
    auto* ov = out.find(kVector);
    const double span_tau = spec.tau_max - spec.tau_min;
    for (int c = 0; c < spec.n_vector; ++c) {
      // target u_c: scalar-weighted mix of input and state vectors
      Vec3<T> u{T(0.0), T(0.0), T(0.0)};
      for (int d = 0; d < spec.in_vector; ++d)
        for (int m = 0; m < 3; ++m)
          u[static_cast<std::size_t>(m)] += A[c * spec.in_vector + d] * xv->coeffs[static_cast<std::size_t>(d * 3 + m)];
      for (int d = 0; d < spec.n_vector; ++d)
        for (int m = 0; m < 3; ++m)
          u[static_cast<std::size_t>(m)] += B[c * spec.n_vector + d] * hv->coeffs[static_cast<std::size_t>(d * 3 + m)];
      // invariant gate
      const T* tr = tau_rows + c * (1 + spec.invariant_dim());
      T s = tr[0];
      for (int j = 0; j < spec.invariant_dim(); ++j) s = s + tr[1 + j] * inv[static_cast<std::size_t>(j)];
      const T tau = spec.tau_min + span_tau * sigmoid(s);
      const T decay = exp((-dt) / tau);
      for (int m = 0; m < 3; ++m)
        ov->coeffs[static_cast<std::size_t>(c * 3 + m)] =
            decay * hv->coeffs[static_cast<std::size_t>(c * 3 + m)] +
            (T(1.0) - decay) * u[static_cast<std::size_t>(m)];
    }
  }
  return out;
}

inline std::vector<double> eq_ltc_init(const EqLtcCellSpec& spec, std::mt19937_64& rng) {
  std::vector<double> p = ltc_init(spec.scalar_cell(), rng);
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(
                                               std::max(1, spec.in_vector + spec.n_vector))));
  const int extra = spec.param_count() - spec.scalar_cell().param_count();
  for (int i = 0; i < extra; ++i) p.push_back(g(rng));
  return p;
}

}  // namespace gfk

#endif

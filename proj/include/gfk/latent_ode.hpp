#ifndef GFK_LATENT_ODE_HPP
#define GFK_LATENT_ODE_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfk/dual.hpp"
#include "gfk/errors.hpp"
#include "gfk/nets.hpp"

namespace gfk {

// Latent dynamics dz/dt = f(z, t) with f a small MLP taking [z; t], integrated
// with classical fixed-substep RK4. Substeps never exceed max_step seconds.
struct LatentOdeSpec {
  int dim = 0;
  MlpSpec dynamics;       // input_dim must be dim + 1, output_dim must be dim
  double max_step = 0.1;  // seconds

  int param_count() const { return dynamics.param_count(); }
};

template <class TW, class TX = TW>
std::vector<TX> latent_ode_rhs(const LatentOdeSpec& spec, std::span<const TW> params,
                               std::span<const TX> z, double t) {
  if (spec.dynamics.input_dim() != spec.dim + 1 || spec.dynamics.output_dim() != spec.dim)
    throw ContractError("latent ode dynamics must map [z; t] -> dz/dt");
  std::vector<TX> in(z.begin(), z.end());
  in.push_back(TX(t));
  std::vector<TX> out;
  mlp_forward<TW, TX>(spec.dynamics, params, std::span<const TX>(in), out);
  return out;
}

template <class TW, class TX = TW>
std::vector<TX> latent_ode_integrate(const LatentOdeSpec& spec, std::span<const TW> params,
                                     std::span<const TX> z0, double t0, double t1) {
  if (!(t1 >= t0)) throw std::domain_error("latent_ode_integrate requires t1 >= t0");
  if (static_cast<int>(z0.size()) != spec.dim)
    throw ContractError("latent ode state size mismatch");
  std::vector<TX> z(z0.begin(), z0.end());
  if (t1 == t0) return z;

  const double total = t1 - t0;
  const int n_steps = std::max(1, static_cast<int>(std::ceil(total / spec.max_step - 1e-12)));
  const double h = total / n_steps;

  std::vector<TX> tmp(z.size());
  for (int s = 0; s < n_steps; ++s) {
    const double t = t0 + s * h;
    const auto k1 = latent_ode_rhs<TW, TX>(spec, params, std::span<const TX>(z), t);
    for (std::size_t i = 0; i < z.size(); ++i) tmp[i] = z[i] + (0.5 * h) * k1[i];
    const auto k2 = latent_ode_rhs<TW, TX>(spec, params, std::span<const TX>(tmp), t + 0.5 * h);
    for (std::size_t i = 0; i < z.size(); ++i) tmp[i] = z[i] + (0.5 * h) * k2[i];
    const auto k3 = latent_ode_rhs<TW, TX>(spec, params, std::span<const TX>(tmp), t + 0.5 * h);
    for (std::size_t i = 0; i < z.size(); ++i) tmp[i] = z[i] + h * k3[i];
    const auto k4 = latent_ode_rhs<TW, TX>(spec, params, std::span<const TX>(tmp), t + h);
    for (std::size_t i = 0; i < z.size(); ++i)
      z[i] = z[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    for (const TX& v : z)
      if (!std::isfinite(value_of(v)))
        throw NumericError("latent ode state became non-finite at t = " +
                           std::to_string(t + h));
  }
  return z;
}

}  // namespace gfk

#endif

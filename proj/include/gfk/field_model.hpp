#ifndef GFK_FIELD_MODEL_HPP
#define GFK_FIELD_MODEL_HPP

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "gfk/diff.hpp"
#include "gfk/nets.hpp"
#include "gfk/vec3.hpp"

namespace gfk {

// Vector-potential network A_theta. When divergence_free is set the public
// field output is defined exclusively as the curl of the potential; the raw
// potential is never exposed as a field.
struct FieldModel {
  MlpSpec potential{{3, 64, 64, 3}};
  std::vector<double> params;
  bool divergence_free = true;
  bool equivariant = false;

  static FieldModel random(const MlpSpec& spec, std::uint64_t seed) {
    FieldModel m;
    m.potential = spec;
    std::mt19937_64 rng(seed);
    m.params = mlp_init(spec, rng);
    return m;
  }
};

// A_theta(x), in nT*m. Smooth in x; deterministic.
template <class TW, class TX = TW>
Vec3<TX> potential_forward(const MlpSpec& spec, std::span<const TW> params,
                           const Vec3<TX>& x) {
  std::vector<TX> out;
  mlp_forward<TW, TX>(spec, params, std::span<const TX>(x.data(), 3), out);
  return {out[0], out[1], out[2]};
}

inline Vec3d potential_forward(const FieldModel& m, const Vec3d& x) {
  for (double p : m.params)
    if (!std::isfinite(p)) throw NumericError("non-finite potential parameter");
  return potential_forward<double>(m.potential, std::span<const double>(m.params), x);
}

// B_theta = curl A_theta, computed with exact forward-mode derivatives.
template <class TW, class TX = TW>
Vec3<TX> curl_field(const MlpSpec& spec, std::span<const TW> params, const Vec3<TX>& x) {
  auto potential = [&](const Vec3<Dual<TX>>& xs) {
    return potential_forward<TW, Dual<TX>>(spec, params, xs);
  };
  return curl(potential, x);
}

inline Vec3d curl_field(const FieldModel& m, const Vec3d& x) {
  if (!m.divergence_free)
    throw ContractError("curl_field requires the divergence_free flag");
  for (double p : m.params)
    if (!std::isfinite(p)) throw NumericError("non-finite potential parameter");
  return curl_field<double>(m.potential, std::span<const double>(m.params), x);
}

// Divergence diagnostic of the curl construction (an identity, ~machine eps).
inline double field_divergence(const FieldModel& m, const Vec3d& x) {
  auto field = [&](const Vec3<Dual<double>>& xs) {
    return curl_field<double, Dual<double>>(m.potential,
                                            std::span<const double>(m.params), xs);
  };
  return divergence(field, x);
}

}  // namespace gfk

#endif

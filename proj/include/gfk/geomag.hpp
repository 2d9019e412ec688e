#ifndef GFK_GEOMAG_HPP
#define GFK_GEOMAG_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gfk/dual.hpp"
#include "gfk/errors.hpp"
#include "gfk/spherical.hpp"
#include "gfk/vec3.hpp"

namespace gfk {

// One point-dipole source: a position (m, Earth-centered) and a magnetic
// moment (A·m²). Fields are returned in nT.
struct DipoleSource {
  Vec3d position{0.0, 0.0, 0.0};
  Vec3d moment{0.0, 0.0, 0.0};
};

// Optional core-field model loaded from a spherical-harmonic coefficient
// file: potential V(r) = R · sum c_lm (R/r)^{l+1} Y_lm(r_hat), coefficients in
// nT at the reference radius, real harmonics in this library's normalization.
struct HarmonicCore {
  double reference_radius = 6.371e6;  // m
  struct Coefficient {
    int degree = 0;
    int order = 0;  // signed, -l..l in the real basis
    double value = 0.0;
  };
  std::vector<Coefficient> coefficients;
};

// Analytic ground truth: a tilted core dipole (or a harmonic core model when
// provided) plus point-dipole crustal anomalies. Superpositions of harmonic
// potentials are divergence-free identically.
struct GroundTruthField {
  std::vector<DipoleSource> sources;  // core first, then anomalies
  std::vector<HarmonicCore> core_models;
  double exclusion_radius = 1.0;  // m
};

// Earth-like default: dipole moment ~7.94e22 A·m² tilted ~11 degrees.
GroundTruthField default_earth_field();

// Parse "degree order value" lines (comments start with '#').
HarmonicCore load_core_coefficients(const std::string& path);

inline constexpr double kMu0Over4PiNT = 100.0;  // 1e-7 T·m/A in nT·m³/(A·m²)

// Point-dipole field, templated so spatial derivatives can flow through.
template <class T>
Vec3<T> dipole_field(const DipoleSource& src, const Vec3<T>& x) {
  using std::sqrt;
  const Vec3<T> r{x[0] - src.position[0], x[1] - src.position[1],
                  x[2] - src.position[2]};
  const T r2 = dot(r, r);
  const T rn = sqrt(r2);
  const T inv3 = 1.0 / (r2 * rn);
  const T mdotr = src.moment[0] * r[0] + src.moment[1] * r[1] + src.moment[2] * r[2];
  Vec3<T> b;
  for (int i = 0; i < 3; ++i)
    b[static_cast<std::size_t>(i)] =
        kMu0Over4PiNT * inv3 *
        (3.0 * mdotr * r[static_cast<std::size_t>(i)] / r2 - T(src.moment[static_cast<std::size_t>(i)]));
  return b;
}

// B = -grad V for the harmonic core potential, via forward-mode derivatives.
template <class T>
Vec3<T> harmonic_core_field(const HarmonicCore& core, const Vec3<T>& x) {
  using D = Dual<T>;
  Vec3<D> xd{D::seeded(x[0], 0), D::seeded(x[1], 1), D::seeded(x[2], 2)};
  using std::sqrt;
  const D r = sqrt(dot(xd, xd));
  const Vec3<D> u{xd[0] / r, xd[1] / r, xd[2] / r};
  int l_max = 0;
  for (const auto& c : core.coefficients) l_max = std::max(l_max, c.degree);
  std::vector<std::vector<D>> y(static_cast<std::size_t>(l_max) + 1);
  for (int l = 0; l <= l_max; ++l) {
    y[static_cast<std::size_t>(l)].resize(static_cast<std::size_t>(2 * l + 1));
    real_sh_unchecked(l, u, std::span<D>(y[static_cast<std::size_t>(l)]));
  }
  const double R = core.reference_radius;
  D v = D(T(0.0));
  for (const auto& c : core.coefficients) {
    D radial = D(T(1.0));
    const D ratio = R / r;
    for (int k = 0; k <= c.degree; ++k) radial = radial * ratio;
    v = v + c.value * radial * y[static_cast<std::size_t>(c.degree)]
                               [static_cast<std::size_t>(c.order + c.degree)];
  }
  v = R * v;
  return {-v.d[0], -v.d[1], -v.d[2]};
}

// Total ground-truth field at a position; throws inside any source's
// exclusion radius where the dipole expression is singular.
template <class T>
Vec3<T> eval_field_t(const GroundTruthField& gt, const Vec3<T>& x) {
  Vec3<T> b{T(0.0), T(0.0), T(0.0)};
  for (const auto& src : gt.sources) {
    const Vec3<T> r{x[0] - src.position[0], x[1] - src.position[1],
                    x[2] - src.position[2]};
    if (value_of(dot(r, r)) < gt.exclusion_radius * gt.exclusion_radius)
      throw NumericError("field evaluation inside a source exclusion radius");
    b = b + dipole_field(src, x);
  }
  for (const auto& core : gt.core_models) b = b + harmonic_core_field(core, x);
  return b;
}

inline Vec3d eval_field(const GroundTruthField& gt, const Vec3d& x) {
  return eval_field_t(gt, x);
}

}  // namespace gfk

#endif

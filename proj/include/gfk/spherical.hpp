#ifndef GFK_SPHERICAL_HPP
#define GFK_SPHERICAL_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "gfk/irreps.hpp"
#include "gfk/vec3.hpp"

namespace gfk {

// Real spherical harmonics, components ordered m = -l..l, normalized over the
// sphere, without the Condon-Shortley phase. The l = 1 triple is
// sqrt(3/4pi) * (y, z, x). Everything is polynomial in the Cartesian
// components of the unit vector, so evaluation is smooth and works for any
// differentiable scalar type.
namespace detail {

inline double sh_norm(int l, int m) {
  double ratio = 1.0;  // (l-m)! / (l+m)!
  for (int k = l - m + 1; k <= l + m; ++k) ratio /= static_cast<double>(k);
  return std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI) * ratio);
}

}  // namespace detail

// Evaluate all 2l+1 real harmonics of degree l at a unit direction.
// `out` must have size 2l+1. No norm check: callers own the precondition.
template <class T>
void real_sh_unchecked(int l, const Vec3<T>& u, std::span<T> out) {
  const T& x = u[0];
  const T& y = u[1];
  const T& z = u[2];
  // a_m + i b_m = (x + i y)^m
  std::vector<T> a(static_cast<std::size_t>(l) + 1), b(static_cast<std::size_t>(l) + 1);
  a[0] = T(1.0);
  b[0] = T(0.0);
  for (int m = 1; m <= l; ++m) {
    a[static_cast<std::size_t>(m)] = a[static_cast<std::size_t>(m - 1)] * x - b[static_cast<std::size_t>(m - 1)] * y;
    b[static_cast<std::size_t>(m)] = a[static_cast<std::size_t>(m - 1)] * y + b[static_cast<std::size_t>(m - 1)] * x;
  }
  // p[m] = P_l^m(z) / sin^m(theta): polynomial in z, no Condon-Shortley.
  std::vector<T> p(static_cast<std::size_t>(l) + 1);
  for (int m = 0; m <= l; ++m) {
    double dfact = 1.0;  // (2m-1)!!
    for (int k = 3; k <= 2 * m - 1; k += 2) dfact *= static_cast<double>(k);
    T pmm = T(dfact);
    if (m == l) {
      p[static_cast<std::size_t>(m)] = pmm;
      continue;
    }
    T pm1 = z * (2.0 * m + 1.0) * pmm;  // P_{m+1}^m
    if (m + 1 == l) {
      p[static_cast<std::size_t>(m)] = pm1;
      continue;
    }
    T prev2 = pmm, prev1 = pm1;
    T cur = prev1;
    for (int ll = m + 2; ll <= l; ++ll) {
      cur = (z * (2.0 * ll - 1.0) * prev1 - (ll - 1.0 + m) * prev2) * (1.0 / (ll - m));
      prev2 = prev1;
      prev1 = cur;
    }
    p[static_cast<std::size_t>(m)] = cur;
  }
  const double sqrt2 = std::sqrt(2.0);
  out[static_cast<std::size_t>(l)] = detail::sh_norm(l, 0) * p[0];
  for (int m = 1; m <= l; ++m) {
    const double nm = sqrt2 * detail::sh_norm(l, m);
    out[static_cast<std::size_t>(l + m)] = nm * p[static_cast<std::size_t>(m)] * a[static_cast<std::size_t>(m)];
    out[static_cast<std::size_t>(l - m)] = nm * p[static_cast<std::size_t>(m)] * b[static_cast<std::size_t>(m)];
  }
}

// Checked double-precision evaluation (the public geom_algebra surface).
inline std::vector<double> eval_spherical_harmonics(int l, const Vec3d& u,
                                                    int l_max = kDefaultLMax) {
  if (l < 0 || l > l_max)
    throw ContractError("spherical harmonic degree " + std::to_string(l) +
                        " above configured maximum " + std::to_string(l_max));
  const double n = norm(u);
  if (std::abs(n - 1.0) > 1e-9)
    throw std::domain_error("spherical harmonics require a unit direction");
  std::vector<double> out(static_cast<std::size_t>(2 * l + 1));
  real_sh_unchecked(l, u, std::span<double>(out));
  return out;
}

}  // namespace gfk

#endif

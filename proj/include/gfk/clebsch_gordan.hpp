#ifndef GFK_CLEBSCH_GORDAN_HPP
#define GFK_CLEBSCH_GORDAN_HPP

#include <vector>

#include "gfk/irreps.hpp"

namespace gfk {

// Standard Clebsch-Gordan coefficient <l1 m1 l2 m2 | l m> in the complex
// (Condon-Shortley) basis, evaluated with the Racah factorial formula using
// exact integer factorials. Zero whenever m != m1 + m2 or the triangle
// inequality fails. Degrees are limited to kMaxCachedDegree.
double clebsch_gordan(int l1, int m1, int l2, int m2, int l, int m);

// Coupling tensor for the real spherical-harmonic basis used throughout this
// library. Obtained from the complex coefficients by the complex-to-real
// change of basis plus a per-(l1,l2,l) phase that makes every entry real.
// The m = m1 + m2 selection rule of the complex basis does not survive the
// transform; the equivariance property does, and is what the tests check.
struct CouplingTensor {
  int l1 = 0, l2 = 0, l = 0;

  struct Entry {
    int m1, m2, m;
    double value;
  };
  std::vector<Entry> nonzeros;
  std::vector<double> dense;  // (2l1+1) x (2l2+1) x (2l+1)

  double at(int m1, int m2, int m) const {
    const std::size_t i =
        static_cast<std::size_t>(((m1 + l1) * (2 * l2 + 1) + (m2 + l2)) * (2 * l + 1) + (m + l));
    return dense[i];
  }
};

// Cached, built on first use, read-only afterwards; safe for concurrent use.
const CouplingTensor& real_coupling(int l1, int l2, int l);

}  // namespace gfk

#endif

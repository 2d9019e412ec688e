#include "gfk/clebsch_gordan.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <mutex>
#include <stdexcept>

#include "gfk/errors.hpp"

namespace gfk {

namespace {

// Exact integer factorials; 20! still fits in 64 bits and long double keeps
// full integer precision through the Racah sum for degrees <= 4.
long double factorial(int n) {
  static const std::array<unsigned long long, 21> table = [] {
    std::array<unsigned long long, 21> f{};
    f[0] = 1;
    for (int i = 1; i <= 20; ++i) f[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(i - 1)] * static_cast<unsigned long long>(i);
    return f;
  }();
  return static_cast<long double>(table.at(static_cast<std::size_t>(n)));
}

long double racah_cg(int j1, int m1, int j2, int m2, int J, int M) {
  if (M != m1 + m2) return 0.0L;
  if (J < std::abs(j1 - j2) || J > j1 + j2) return 0.0L;

  const long double delta =
      std::sqrt(factorial(j1 + j2 - J) * factorial(j1 - j2 + J) *
                factorial(-j1 + j2 + J) / factorial(j1 + j2 + J + 1));
  const long double pref = std::sqrt(
      (2.0L * J + 1.0L) * factorial(J + M) * factorial(J - M) * factorial(j1 - m1) *
      factorial(j1 + m1) * factorial(j2 - m2) * factorial(j2 + m2));

  const int kmin = std::max({0, j2 - J - m1, j1 - J + m2});
  const int kmax = std::min({j1 + j2 - J, j1 - m1, j2 + m2});
  long double sum = 0.0L;
  for (int k = kmin; k <= kmax; ++k) {
    const long double term =
        1.0L / (factorial(k) * factorial(j1 + j2 - J - k) * factorial(j1 - m1 - k) *
                factorial(j2 + m2 - k) * factorial(J - j2 + m1 + k) *
                factorial(J - j1 - m2 + k));
    sum += (k % 2 == 0 ? term : -term);
  }
  return delta * pref * sum;
}

using cplx = std::complex<long double>;

// Row m of the complex-to-real change of basis for degree l: the real
// harmonic of order m as a combination of complex harmonics of orders +-|m|.
// Matches the (Condon-Shortley complex, CS-free real) conventions of
// real_sh_unchecked.
std::array<std::pair<int, cplx>, 2> real_row(int l, int m) {
  (void)l;
  const long double inv_sqrt2 = 0.7071067811865475244008443621048490393L;
  const long double sgn = (std::abs(m) % 2 == 0) ? 1.0L : -1.0L;
  if (m == 0) return {{{0, cplx(1.0L, 0.0L)}, {0, cplx(0.0L, 0.0L)}}};
  if (m > 0)
    return {{{-m, cplx(inv_sqrt2, 0.0L)}, {m, cplx(sgn * inv_sqrt2, 0.0L)}}};
  // m < 0
  return {{{m, cplx(0.0L, inv_sqrt2)}, {-m, cplx(0.0L, -sgn * inv_sqrt2)}}};
}

CouplingTensor build_real_coupling(int l1, int l2, int l) {
  CouplingTensor t;
  t.l1 = l1;
  t.l2 = l2;
  t.l = l;
  const int d1 = 2 * l1 + 1, d2 = 2 * l2 + 1, d3 = 2 * l + 1;
  std::vector<cplx> z(static_cast<std::size_t>(d1 * d2 * d3), cplx(0.0L, 0.0L));

  for (int m1 = -l1; m1 <= l1; ++m1) {
    const auto r1 = real_row(l1, m1);
    for (int m2 = -l2; m2 <= l2; ++m2) {
      const auto r2 = real_row(l2, m2);
      for (int m = -l; m <= l; ++m) {
        const auto r3 = real_row(l, m);
        cplx acc(0.0L, 0.0L);
        for (const auto& [mu1, u1] : r1) {
          if (u1 == cplx(0.0L, 0.0L)) continue;
          for (const auto& [mu2, u2] : r2) {
            if (u2 == cplx(0.0L, 0.0L)) continue;
            for (const auto& [mu3, u3] : r3) {
              if (u3 == cplx(0.0L, 0.0L)) continue;
              if (mu3 != mu1 + mu2) continue;
              acc += u1 * u2 * std::conj(u3) *
                     racah_cg(l1, mu1, l2, mu2, l, mu3);
            }
          }
        }
        z[static_cast<std::size_t>((m1 + l1) * d2 * d3 + (m2 + l2) * d3 + (m + l))] = acc;
      }
    }
  }

  // Each (l1,l2,l) block is either purely real or purely imaginary; pick the
  // live part (a uniform per-block phase, which preserves equivariance).
  long double re_norm = 0.0L, im_norm = 0.0L;
  for (const cplx& c : z) {
    re_norm = std::max(re_norm, std::abs(c.real()));
    im_norm = std::max(im_norm, std::abs(c.imag()));
  }
  const bool use_imag = im_norm > re_norm;
  if (std::min(re_norm, im_norm) > 1e-12L)
    throw NumericError("real coupling block has mixed phase");

  t.dense.resize(z.size(), 0.0);
  for (int m1 = -l1; m1 <= l1; ++m1)
    for (int m2 = -l2; m2 <= l2; ++m2)
      for (int m = -l; m <= l; ++m) {
        const std::size_t i =
            static_cast<std::size_t>((m1 + l1) * d2 * d3 + (m2 + l2) * d3 + (m + l));
        const double v = static_cast<double>(use_imag ? z[i].imag() : z[i].real());
        if (std::abs(v) < 1e-14) continue;
        t.dense[i] = v;
        t.nonzeros.push_back({m1, m2, m, v});
      }
  return t;
}

}  // namespace

double clebsch_gordan(int l1, int m1, int l2, int m2, int l, int m) {
  if (l1 < 0 || l2 < 0 || l < 0 || l1 > 2 * kMaxCachedDegree ||
      l2 > 2 * kMaxCachedDegree || l > 2 * kMaxCachedDegree)
    throw ContractError("Clebsch-Gordan degree out of supported range");
  if (std::abs(m1) > l1 || std::abs(m2) > l2)
    throw std::domain_error("Clebsch-Gordan order |m| exceeds degree");
  if (std::abs(m) > l) return 0.0;  // no such output component
  return static_cast<double>(racah_cg(l1, m1, l2, m2, l, m));
}

const CouplingTensor& real_coupling(int l1, int l2, int l) {
  constexpr int n = kMaxCachedDegree + 1;
  if (l1 < 0 || l2 < 0 || l < 0 || l1 > kMaxCachedDegree ||
      l2 > kMaxCachedDegree || l > kMaxCachedDegree)
    throw ContractError("real coupling degree out of cached range");
  if (l < std::abs(l1 - l2) || l > l1 + l2)
    throw ContractError("real coupling violates the triangle inequality");

  static std::array<CouplingTensor, n * n * n> cache;
  static std::once_flag built;
  std::call_once(built, [] {
    for (int a = 0; a <= kMaxCachedDegree; ++a)
      for (int b = 0; b <= kMaxCachedDegree; ++b)
        for (int c = std::abs(a - b); c <= std::min(a + b, kMaxCachedDegree); ++c)
          cache[static_cast<std::size_t>((a * n + b) * n + c)] = build_real_coupling(a, b, c);
  });
  return cache[static_cast<std::size_t>((l1 * n + l2) * n + l)];
}

}  // namespace gfk

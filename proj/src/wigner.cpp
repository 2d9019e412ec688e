#include "gfk/wigner.hpp"

#include <cmath>

#include "gfk/errors.hpp"

namespace gfk {

RigidTransform::RigidTransform(const Mat3d& r, const Vec3d& t)
    : rotation(r), translation(t) {
  // ||R^T R - I|| and det within 1e-12 of a proper rotation.
  double max_dev = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += r[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
      max_dev = std::max(max_dev, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  const double det =
      r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) -
      r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0]) +
      r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
  if (max_dev > 1e-12 || std::abs(det - 1.0) > 1e-12)
    throw ContractError("rotation must be orthonormal with det +1");
}

std::vector<double> SquareMatrix::apply(const std::vector<double>& v) const {
  if (static_cast<int>(v.size()) != n) throw ContractError("matrix-vector size mismatch");
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(i)] += (*this)(i, j) * v[static_cast<std::size_t>(j)];
  return out;
}

SquareMatrix SquareMatrix::mul(const SquareMatrix& other) const {
  if (other.n != n) throw ContractError("matrix-matrix size mismatch");
  SquareMatrix out(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double aik = (*this)(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < n; ++j) out(i, j) += aik * other(k, j);
    }
  return out;
}

namespace {

// Ivanic-Ruedenberg recursion (with the published erratum's coefficients).
// Indexing helpers treat m, n in [-l, l].

struct Recursion {
  // D1 in real-harmonic order (m = -1, 0, 1) <-> (y, z, x).
  double r[3][3];
  double d1(int i, int j) const { return r[i + 1][j + 1]; }

  double prior(const SquareMatrix& mprev, int lprev, int a, int b) const {
    return mprev(a + lprev, b + lprev);
  }

  double P(int i, int l, const SquareMatrix& mprev, int a, int b) const {
    const int lp = l - 1;
    if (b == l)
      return d1(i, 1) * prior(mprev, lp, a, lp) - d1(i, -1) * prior(mprev, lp, a, -lp);
    if (b == -l)
      return d1(i, 1) * prior(mprev, lp, a, -lp) + d1(i, -1) * prior(mprev, lp, a, lp);
    return d1(i, 0) * prior(mprev, lp, a, b);
  }

  double U(int l, const SquareMatrix& mp, int m, int n) const { return P(0, l, mp, m, n); }

  double V(int l, const SquareMatrix& mp, int m, int n) const {
    if (m == 0) return P(1, l, mp, 1, n) + P(-1, l, mp, -1, n);
    if (m > 0) {
      const double s = (m == 1) ? std::sqrt(2.0) : 1.0;
      const double t = (m == 1) ? 0.0 : 1.0;
      return P(1, l, mp, m - 1, n) * s - P(-1, l, mp, -m + 1, n) * t;
    }
    const double s = (m == -1) ? std::sqrt(2.0) : 1.0;
    const double t = (m == -1) ? 0.0 : 1.0;
    return P(1, l, mp, m + 1, n) * t + P(-1, l, mp, -m - 1, n) * s;
  }

  double W(int l, const SquareMatrix& mp, int m, int n) const {
    if (m == 0) return 0.0;
    if (m > 0) return P(1, l, mp, m + 1, n) + P(-1, l, mp, -m - 1, n);
    return P(1, l, mp, m - 1, n) - P(-1, l, mp, -m + 1, n);
  }
};

}  // namespace

SquareMatrix wigner_matrix(int l, const RigidTransform& g, int l_max) {
  if (l < 0 || l > l_max)
    throw ContractError("Wigner degree above configured maximum");
  SquareMatrix m0(1);
  m0(0, 0) = 1.0;
  if (l == 0) return m0;

  Recursion rec{};
  const Mat3d& rot = g.rotation;
  const int axis[3] = {1, 2, 0};  // (m=-1,0,1) -> (y,z,x)
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      rec.r[i][j] = rot[static_cast<std::size_t>(axis[i])][static_cast<std::size_t>(axis[j])];

  SquareMatrix cur(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cur(i, j) = rec.r[i][j];

  for (int ll = 2; ll <= l; ++ll) {
    SquareMatrix next(2 * ll + 1);
    for (int m = -ll; m <= ll; ++m)
      for (int n = -ll; n <= ll; ++n) {
        const double denom =
            (std::abs(n) < ll) ? static_cast<double>((ll + n) * (ll - n))
                               : static_cast<double>(2 * ll * (2 * ll - 1));
        const int am = std::abs(m);
        const double u = std::sqrt(static_cast<double>((ll + m) * (ll - m)) / denom);
        const double v = 0.5 *
                         std::sqrt((1.0 + (m == 0 ? 1.0 : 0.0)) *
                                   static_cast<double>((ll + am - 1) * (ll + am)) / denom) *
                         (m == 0 ? -1.0 : 1.0);
        const double w = -0.5 *
                         std::sqrt(static_cast<double>((ll - am - 1) * (ll - am)) / denom) *
                         (m == 0 ? 0.0 : 1.0);
        double acc = 0.0;
        if (u != 0.0) acc += u * rec.U(ll, cur, m, n);
        if (v != 0.0) acc += v * rec.V(ll, cur, m, n);
        if (w != 0.0) acc += w * rec.W(ll, cur, m, n);
        next(m + ll, n + ll) = acc;
      }
    cur = next;
  }
  return cur;
}

GeometricTensor rotate_tensor(const GeometricTensor& t, const RigidTransform& g,
                              int l_max) {
  GeometricTensor out = t;
  for (auto& block : out.blocks) {
    const int l = block.irrep.degree;
    if (l == 0) continue;
    const SquareMatrix d = wigner_matrix(l, g, l_max);
    const int dim = block.irrep.dim();
    for (int c = 0; c < block.multiplicity; ++c) {
      std::vector<double> v(block.coeffs.begin() + c * dim,
                            block.coeffs.begin() + (c + 1) * dim);
      const std::vector<double> rv = d.apply(v);
      std::copy(rv.begin(), rv.end(), block.coeffs.begin() + c * dim);
    }
  }
  return out;
}

}  // namespace gfk

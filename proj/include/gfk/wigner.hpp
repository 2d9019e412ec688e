#ifndef GFK_WIGNER_HPP
#define GFK_WIGNER_HPP

#include <vector>

#include "gfk/irreps.hpp"
#include "gfk/vec3.hpp"

namespace gfk {

// Rigid transformation g = (R, t) with R a proper rotation.
struct RigidTransform {
  Mat3d rotation = mat_identity();
  Vec3d translation{0.0, 0.0, 0.0};

  RigidTransform() = default;
  RigidTransform(const Mat3d& r, const Vec3d& t);

  Vec3d apply(const Vec3d& x) const { return mat_vec(rotation, x) + translation; }
};

// Small square matrix of dimension 2l+1, row-major.
struct SquareMatrix {
  int n = 0;
  std::vector<double> a;

  explicit SquareMatrix(int dim) : n(dim), a(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), 0.0) {}
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * n + j)]; }

  std::vector<double> apply(const std::vector<double>& v) const;
  SquareMatrix mul(const SquareMatrix& other) const;
};

// Rotation matrix D^(l)(R) acting on real spherical-harmonic coefficients:
// Y^(l)(R u) = D^(l)(R) Y^(l)(u). Computed by the Ivanic-Ruedenberg
// recursion directly from the 3x3 rotation; the translation part of g is
// ignored (harmonics depend on direction only).
SquareMatrix wigner_matrix(int l, const RigidTransform& g, int l_max = kDefaultLMax);

// Rotate every block of a geometric tensor by the matching D^(l). Parity has
// no effect under proper rotations.
GeometricTensor rotate_tensor(const GeometricTensor& t, const RigidTransform& g,
                              int l_max = kDefaultLMax);

}  // namespace gfk

#endif

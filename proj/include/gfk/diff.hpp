#ifndef GFK_DIFF_HPP
#define GFK_DIFF_HPP

#include <array>
#include <span>
#include <vector>

#include "gfk/dual.hpp"
#include "gfk/tape.hpp"
#include "gfk/vec3.hpp"

namespace gfk {

// Exact spatial Jacobian of a 3-vector valued map, entry (k, j) = df^k/dx^j.
// The map must be callable on Vec3<Dual<T>>; no finite differencing is done.
template <class T, class F>
std::array<Vec3<T>, 3> spatial_jacobian(F&& f, const Vec3<T>& x) {
  Vec3<Dual<T>> xs{Dual<T>::seeded(x[0], 0), Dual<T>::seeded(x[1], 1),
                   Dual<T>::seeded(x[2], 2)};
  const Vec3<Dual<T>> y = f(xs);
  std::array<Vec3<T>, 3> jac;
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j) jac[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = y[static_cast<std::size_t>(k)].d[static_cast<std::size_t>(j)];
  return jac;
}

// Trace of the spatial Jacobian.
template <class T, class F>
T divergence(F&& f, const Vec3<T>& x) {
  const auto jac = spatial_jacobian(f, x);
  return jac[0][0] + jac[1][1] + jac[2][2];
}

// Curl of a 3-vector map: (curl f)_i = eps_ijk df^k/dx^j.
template <class T, class F>
Vec3<T> curl(F&& f, const Vec3<T>& x) {
  const auto jac = spatial_jacobian(f, x);
  return {jac[2][1] - jac[1][2], jac[0][2] - jac[2][0], jac[1][0] - jac[0][1]};
}

// Reverse-mode gradient of a scalar program over a flat parameter vector.
// `loss` is evaluated once under recording: it receives a span of leaf Vars
// mirroring `theta` and returns the loss Var.
template <class F>
std::vector<double> param_gradient(F&& loss, std::span<const double> theta) {
  if (theta.empty()) throw NumericError("param_gradient over an empty recording");
  Tape tape;
  Tape::Scope scope(tape);
  std::vector<Var> vars(theta.size());
  std::vector<int32_t> leaves(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    vars[i] = Var::leaf(theta[i]);
    leaves[i] = vars[i].idx;
  }
  const Var l = loss(std::span<const Var>(vars));
  if (l.idx < 0) return std::vector<double>(theta.size(), 0.0);  // constant loss
  return tape.gradient(l.idx, leaves);
}

}  // namespace gfk

#endif

#ifndef GFK_TENSOR_PRODUCT_HPP
#define GFK_TENSOR_PRODUCT_HPP

#include <cstdlib>
#include <span>
#include <vector>

#include "gfk/clebsch_gordan.hpp"
#include "gfk/irreps.hpp"

namespace gfk {

// Equivariant tensor product of a degree-l1 block (multiplicity x (2l1+1))
// with a single degree-l2 vector, projected onto degree l_out. Component m of
// the output is the Clebsch-Gordan weighted double sum over (m1, m2), using
// the real-basis coupling tensors.
template <class T>
std::vector<T> tensor_product_block(int l1, std::span<const T> t, int l2,
                                    std::span<const T> y, int l_out) {
  if (l_out < std::abs(l1 - l2) || l_out > l1 + l2)
    throw ContractError("tensor product output degree violates the selection rule");
  const int d1 = 2 * l1 + 1;
  const int dout = 2 * l_out + 1;
  const int mult = static_cast<int>(t.size()) / d1;
  if (static_cast<int>(t.size()) != mult * d1 || static_cast<int>(y.size()) != 2 * l2 + 1)
    throw ContractError("tensor product input size mismatch");

  const CouplingTensor& cg = real_coupling(l1, l2, l_out);
  std::vector<T> out(static_cast<std::size_t>(mult * dout), T(0.0));
  for (int c = 0; c < mult; ++c) {
    const T* tc = t.data() + c * d1;
    T* oc = out.data() + c * dout;
    for (const auto& e : cg.nonzeros)
      oc[e.m + l_out] += e.value * tc[e.m1 + l1] * y[static_cast<std::size_t>(e.m2 + l2)];
  }
  return out;
}

// Block-level wrapper with parity bookkeeping: the output parity is the
// product of the input parity and the natural parity (-1)^l2 of Y^(l2).
template <class T>
typename GeometricTensorT<T>::Block tensor_product(
    const typename GeometricTensorT<T>::Block& tb, int l2, std::span<const T> y,
    int l_out) {
  typename GeometricTensorT<T>::Block out;
  out.irrep = IrrepSpec(l_out, tb.irrep.parity * sh_parity(l2));
  out.multiplicity = tb.multiplicity;
  out.coeffs = tensor_product_block<T>(tb.irrep.degree, std::span<const T>(tb.coeffs),
                                       l2, y, l_out);
  return out;
}

}  // namespace gfk

#endif

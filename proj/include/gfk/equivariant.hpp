#ifndef GFK_EQUIVARIANT_HPP
#define GFK_EQUIVARIANT_HPP

#include <cmath>
#include <cstdio>
#include <random>
#include <span>
#include <vector>

#include "gfk/dual.hpp"
#include "gfk/irreps.hpp"
#include "gfk/nets.hpp"
#include "gfk/spherical.hpp"
#include "gfk/tensor_product.hpp"
#include "gfk/vec3.hpp"

namespace gfk {

template <class T>
struct EquivNode {
  Vec3<T> position;
  GeometricTensorT<T> features;
};

// Tensor-product message layer (one hop of Eq.-11-style message passing).
// Each admissible path (out irrep, in irrep, filter degree l) carries a
// multiplicity_out x multiplicity_in matrix of scalar weights, modulated by a
// learnable radial function of the neighbor distance.
struct EquivariantLayerSpec {
  Signature input;
  Signature output;
  std::vector<int> filter_degrees{0, 1, 2};
  MlpSpec radial{{1, 8, 1}};   // widths[end] is overwritten to the path count
  double radial_scale = 1.0;   // ||r_ij|| is divided by this before the MLP

  struct Path {
    int out_entry, in_entry, filter;
  };

  std::vector<Path> paths() const {
    std::vector<Path> out;
    for (std::size_t oe = 0; oe < output.entries.size(); ++oe)
      for (std::size_t ie = 0; ie < input.entries.size(); ++ie)
        for (int l : filter_degrees) {
          const IrrepSpec& iro = output.entries[oe].irrep;
          const IrrepSpec& iri = input.entries[ie].irrep;
          if (iro.degree < std::abs(iri.degree - l) || iro.degree > iri.degree + l)
            continue;
          if (!(iro.parity == iri.parity * sh_parity(l))) continue;
          out.push_back({static_cast<int>(oe), static_cast<int>(ie), l});
        }
    return out;
  }

  MlpSpec radial_spec() const {
    MlpSpec r = radial;
    r.widths.back() = static_cast<int>(paths().size());
    return r;
  }

  // Layout: [radial params][per-path weight matrices, path order].
  int param_count() const {
    int n = radial_spec().param_count();
    for (const Path& p : paths())
      n += output.entries[static_cast<std::size_t>(p.out_entry)].multiplicity *
           input.entries[static_cast<std::size_t>(p.in_entry)].multiplicity;
    return n;
  }
};

inline std::vector<double> equivariant_layer_init(const EquivariantLayerSpec& spec,
                                                  std::mt19937_64& rng) {
  std::vector<double> params = mlp_init(spec.radial_spec(), rng);
  const auto paths = spec.paths();
  for (const auto& p : paths) {
    const int mo = spec.output.entries[static_cast<std::size_t>(p.out_entry)].multiplicity;
    const int mi = spec.input.entries[static_cast<std::size_t>(p.in_entry)].multiplicity;
    std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(mi)));
    for (int k = 0; k < mo * mi; ++k) params.push_back(g(rng));
  }
  return params;
}

// Message-passing forward for one node: the triple sum over neighbors, input
// irreps and filter degrees. Coincident positions contribute through l = 0
// filters only (the spherical angle is undefined there). An empty
// neighborhood yields the zero output tensor with a logged warning.
template <class T>
GeometricTensorT<T> equivariant_forward(const EquivariantLayerSpec& spec,
                                        std::span<const T> params,
                                        std::span<const EquivNode<T>> nodes, int i,
                                        std::span<const int> neighbors) {
  if (!(nodes[static_cast<std::size_t>(i)].features.signature() == spec.input))
    throw ContractError("node features do not match the layer input signature");
  auto out = GeometricTensorT<T>::zeros(spec.output);
  if (neighbors.empty()) {
    static bool warned = false;
    if (!warned) {
      std::fprintf(stderr, "gfk: equivariant_forward on an empty neighborhood, returning zeros\n");
      warned = true;
    }
    return out;
  }

  const auto paths = spec.paths();
  const MlpSpec radial = spec.radial_spec();
  const int radial_np = radial.param_count();
  const std::span<const T> radial_params = params.subspan(0, static_cast<std::size_t>(radial_np));

  // per-path weight matrix offsets
  std::vector<int> offsets(paths.size());
  {
    int off = radial_np;
    for (std::size_t p = 0; p < paths.size(); ++p) {
      offsets[p] = off;
      off += spec.output.entries[static_cast<std::size_t>(paths[p].out_entry)].multiplicity *
             spec.input.entries[static_cast<std::size_t>(paths[p].in_entry)].multiplicity;
    }
    if (off != static_cast<int>(params.size()))
      throw ContractError("equivariant layer parameter count mismatch");
  }

  int max_filter = 0;
  for (int l : spec.filter_degrees) max_filter = std::max(max_filter, l);

  const EquivNode<T>& node_i = nodes[static_cast<std::size_t>(i)];
  for (int j : neighbors) {
    const EquivNode<T>& node_j = nodes[static_cast<std::size_t>(j)];
    if (!(node_j.features.signature() == spec.input))
      throw ContractError("neighbor features do not match the layer input signature");
    const Vec3<T> rij = node_j.position - node_i.position;
    const T r2 = dot(rij, rij);
    const bool degenerate = value_of(r2) < 1e-24;

    // Y^(l)(r_ij direction) for every filter degree.
    using std::sqrt;
    std::vector<std::vector<T>> y(static_cast<std::size_t>(max_filter) + 1);
    T rnorm = T(0.0);
    if (!degenerate) {
      rnorm = sqrt(r2);
      const Vec3<T> dir{rij[0] / rnorm, rij[1] / rnorm, rij[2] / rnorm};
      for (int l = 0; l <= max_filter; ++l) {
        y[static_cast<std::size_t>(l)].resize(static_cast<std::size_t>(2 * l + 1));
        real_sh_unchecked(l, dir, std::span<T>(y[static_cast<std::size_t>(l)]));
      }
    } else {
      y[0] = {T(0.28209479177387814)};  // 1/(2 sqrt(pi))
    }

    // radial gates
    std::vector<T> gates;
    {
      const T rs[1] = {rnorm * (1.0 / spec.radial_scale)};
      mlp_forward<T>(radial, radial_params, std::span<const T>(rs, 1), gates);
    }

    for (std::size_t p = 0; p < paths.size(); ++p) {
      const auto& path = paths[p];
      if (degenerate && path.filter != 0) continue;
      const auto& in_entry = spec.input.entries[static_cast<std::size_t>(path.in_entry)];
      const auto& out_entry = spec.output.entries[static_cast<std::size_t>(path.out_entry)];
      const auto* in_block = node_j.features.find(in_entry.irrep);
      const std::vector<T> msg = tensor_product_block<T>(
          in_entry.irrep.degree, std::span<const T>(in_block->coeffs), path.filter,
          std::span<const T>(y[static_cast<std::size_t>(path.filter)]), out_entry.irrep.degree);

      auto* out_block = out.find(out_entry.irrep);
      const int dout = out_entry.irrep.dim();
      const int mi = in_entry.multiplicity;
      const int mo = out_entry.multiplicity;
      const T* w = params.data() + offsets[p];
      for (int a = 0; a < mo; ++a)
        for (int b = 0; b < mi; ++b) {
          const T wg = w[a * mi + b] * gates[p];
          for (int m = 0; m < dout; ++m)
            out_block->coeffs[static_cast<std::size_t>(a * dout + m)] +=
                wg * msg[static_cast<std::size_t>(b * dout + m)];
        }
    }
  }
  return out;
}

// All-other-nodes neighborhood convenience overload.
template <class T>
GeometricTensorT<T> equivariant_forward(const EquivariantLayerSpec& spec,
                                        std::span<const T> params,
                                        std::span<const EquivNode<T>> nodes, int i) {
  std::vector<int> nb;
  for (int j = 0; j < static_cast<int>(nodes.size()); ++j)
    if (j != i) nb.push_back(j);
  return equivariant_forward(spec, params, nodes, i, std::span<const int>(nb));
}

// Pointwise equivariant linear map: mixes channels within each irrep only.
// Parameters: one multiplicity_out x multiplicity_in matrix per shared irrep,
// in canonical irrep order of `output`.
struct EquivariantLinearSpec {
  Signature input;
  Signature output;

  int param_count() const {
    int n = 0;
    for (const auto& oe : output.entries)
      for (const auto& ie : input.entries)
        if (oe.irrep == ie.irrep) n += oe.multiplicity * ie.multiplicity;
    return n;
  }
};

template <class T>
GeometricTensorT<T> equivariant_linear(const EquivariantLinearSpec& spec,
                                       std::span<const T> params,
                                       const GeometricTensorT<T>& in) {
  auto out = GeometricTensorT<T>::zeros(spec.output);
  int off = 0;
  for (const auto& oe : spec.output.entries)
    for (const auto& ie : spec.input.entries) {
      if (!(oe.irrep == ie.irrep)) continue;
      const auto* in_block = in.find(ie.irrep);
      if (!in_block) throw ContractError("equivariant_linear: missing input block");
      auto* out_block = out.find(oe.irrep);
      const int d = oe.irrep.dim();
      for (int a = 0; a < oe.multiplicity; ++a)
        for (int b = 0; b < ie.multiplicity; ++b) {
          const T& w = params[static_cast<std::size_t>(off + a * ie.multiplicity + b)];
          for (int m = 0; m < d; ++m)
            out_block->coeffs[static_cast<std::size_t>(a * d + m)] +=
                w * in_block->coeffs[static_cast<std::size_t>(b * d + m)];
        }
      off += oe.multiplicity * ie.multiplicity;
    }
  if (off != static_cast<int>(params.size()))
    throw ContractError("equivariant_linear parameter count mismatch");
  return out;
}

// Gated nonlinearity: tanh on scalar channels, norm-gated scaling on higher
// irreps (one sigmoid gate per channel; gates depend on invariants only).
// Parameters: (a, b) per non-scalar channel, in block order.
template <class T>
GeometricTensorT<T> norm_gate(std::span<const T> params, const GeometricTensorT<T>& in) {
  using std::tanh;
  GeometricTensorT<T> out = in;
  int off = 0;
  for (auto& block : out.blocks) {
    const int d = block.irrep.dim();
    if (block.irrep.degree == 0) {
      for (auto& c : block.coeffs) c = tanh(c);
      continue;
    }
    for (int ch = 0; ch < block.multiplicity; ++ch) {
      T n2 = T(0.0);
      for (int m = 0; m < d; ++m) {
        const T& c = block.coeffs[static_cast<std::size_t>(ch * d + m)];
        n2 += c * c;
      }
      using std::sqrt;
      const T n = sqrt(n2 + 1e-12);
      const T gate = sigmoid(params[static_cast<std::size_t>(off)] * n +
                             params[static_cast<std::size_t>(off + 1)]);
      off += 2;
      for (int m = 0; m < d; ++m)
        block.coeffs[static_cast<std::size_t>(ch * d + m)] *= gate;
    }
  }
  if (off != static_cast<int>(params.size()))
    throw ContractError("norm_gate parameter count mismatch");
  return out;
}

inline int norm_gate_param_count(const Signature& sig) {
  int n = 0;
  for (const auto& e : sig.entries)
    if (e.irrep.degree > 0) n += 2 * e.multiplicity;
  return n;
}

}  // namespace gfk

#endif

#ifndef GFK_CONTI_ATTENTION_HPP
#define GFK_CONTI_ATTENTION_HPP

#include <cmath>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "gfk/equivariant.hpp"
#include "gfk/irreps.hpp"
#include "gfk/spherical.hpp"
#include "gfk/tensor_product.hpp"
#include "gfk/vec3.hpp"

namespace gfk {

// Mean of f over [a, b] by fixed-order Gauss-Legendre quadrature
// (orders 2, 4 and 8 are tabulated). Exact for polynomials of degree
// < 2*order; b == a returns f(a), the continuous limit.
template <class T, class F>
T gauss_legendre_mean(F&& f, double a, double b, int order = 8) {
  if (!(b >= a)) throw std::domain_error("gauss_legendre_mean requires b >= a");
  if (b == a) return f(a);
  static const double x2[] = {0.5773502691896257};
  static const double w2[] = {1.0};
  static const double x4[] = {0.3399810435848563, 0.8611363115940526};
  static const double w4[] = {0.6521451548625461, 0.3478548451374538};
  static const double x8[] = {0.1834346424956498, 0.5255324099163290,
                              0.7966664774136267, 0.9602898564975363};
  static const double w8[] = {0.3626837833783620, 0.3137066458778873,
                              0.2223810344533745, 0.1012285362903763};
  const double* xs;
  const double* ws;
  int half;
  switch (order) {
    case 2: xs = x2; ws = w2; half = 1; break;
    case 4: xs = x4; ws = w4; half = 2; break;
    case 8: xs = x8; ws = w8; half = 4; break;
    default: throw ContractError("unsupported quadrature order");
  }
  const double mid = 0.5 * (a + b);
  const double rad = 0.5 * (b - a);
  T acc = T(0.0);
  for (int i = 0; i < half; ++i)
    acc += ws[i] * (f(mid - rad * xs[i]) + f(mid + rad * xs[i]));
  return 0.5 * acc;  // node weights sum to 2 on [-1, 1]
}

// One observation event: a position, a timestamp and a feature tensor.
template <class T>
struct AttentionEvent {
  Vec3<T> position;
  double time = 0.0;
  GeometricTensorT<T> features;
};

// Single-head continuous-time attention over irregular events. The query,
// key and value embeddings are channel-mixing equivariant linear maps of the
// event features; the attention coefficient is the interval mean, over the
// span between key and query times, of the query path contracted with the
// tensor product of the (constant) key embedding and spherical harmonics of
// the key-to-query direction. The query path interpolates linearly in time
// between the embedding at the key event and the embedding at the query
// event. Values are extrapolated linearly in time via a second learned map.
struct ContiAttentionSpec {
  Signature sig;      // feature signature shared by all events
  Signature out_sig;  // output signature of conti_output
  std::vector<int> mix_degrees{0, 1, 2};
  int quad_order = 8;

  EquivariantLinearSpec embed_spec() const { return {sig, sig}; }

  struct Path {
    int out_entry, in_entry, filter;
  };

  // Admissible (output irrep, value irrep, mixing degree) triples.
  std::vector<Path> paths() const {
    std::vector<Path> out;
    for (std::size_t oe = 0; oe < out_sig.entries.size(); ++oe)
      for (std::size_t ie = 0; ie < sig.entries.size(); ++ie)
        for (int l : mix_degrees) {
          const IrrepSpec& iro = out_sig.entries[oe].irrep;
          const IrrepSpec& iri = sig.entries[ie].irrep;
          if (iro.degree < std::abs(iri.degree - l) || iro.degree > iri.degree + l)
            continue;
          if (!(iro.parity == iri.parity * sh_parity(l))) continue;
          out.push_back({static_cast<int>(oe), static_cast<int>(ie), l});
        }
    return out;
  }

  // Layout: [Q][K][V][V time-slope][per-path output matrices, path order].
  int param_count() const {
    int n = 4 * embed_spec().param_count();
    for (const Path& p : paths())
      n += out_sig.entries[static_cast<std::size_t>(p.out_entry)].multiplicity *
           sig.entries[static_cast<std::size_t>(p.in_entry)].multiplicity;
    return n;
  }
};

inline std::vector<double> conti_attention_init(const ContiAttentionSpec& spec,
                                                std::mt19937_64& rng) {
  std::vector<double> params;
  params.reserve(static_cast<std::size_t>(spec.param_count()));
  std::normal_distribution<double> g(0.0, 1.0);
  const int ne = spec.embed_spec().param_count();
  for (int i = 0; i < 4 * ne; ++i) params.push_back(g(rng));
  for (const auto& p : spec.paths()) {
    const int mo = spec.out_sig.entries[static_cast<std::size_t>(p.out_entry)].multiplicity;
    const int mi = spec.sig.entries[static_cast<std::size_t>(p.in_entry)].multiplicity;
    std::normal_distribution<double> gw(0.0, 1.0 / std::sqrt(static_cast<double>(mi)));
    for (int k = 0; k < mo * mi; ++k) params.push_back(gw(rng));
  }
  return params;
}

namespace detail {

// Spherical harmonics of the key-to-query direction per needed degree.
// Coincident positions leave only the degree-0 entry populated.
template <class T>
std::vector<std::vector<T>> mixing_harmonics(const Vec3<T>& from, const Vec3<T>& to,
                                             int max_degree, bool& degenerate) {
  using std::sqrt;
  std::vector<std::vector<T>> y(static_cast<std::size_t>(max_degree) + 1);
  const Vec3<T> d = to - from;
  const T r2 = dot(d, d);
  degenerate = value_of(r2) < 1e-24;
  if (degenerate) {
    y[0] = {T(0.28209479177387814)};  // 1/(2 sqrt(pi))
    return y;
  }
  const T rn = sqrt(r2);
  const Vec3<T> dir{d[0] / rn, d[1] / rn, d[2] / rn};
  for (int l = 0; l <= max_degree; ++l) {
    y[static_cast<std::size_t>(l)].resize(static_cast<std::size_t>(2 * l + 1));
    real_sh_unchecked(l, dir, std::span<T>(y[static_cast<std::size_t>(l)]));
  }
  return y;
}

}  // namespace detail

// Attention coefficient alpha(query; key) per Eq.-12-style interval mean.
template <class T>
T conti_attention(const ContiAttentionSpec& spec, std::span<const T> params,
                  const AttentionEvent<T>& query, const AttentionEvent<T>& key) {
  if (!(query.time >= key.time))
    throw std::domain_error("conti_attention requires query time >= key time");
  if (!(query.features.signature() == spec.sig) ||
      !(key.features.signature() == spec.sig))
    throw ContractError("conti_attention signature mismatch");
  if (static_cast<int>(params.size()) != spec.param_count())
    throw ContractError("conti_attention parameter count mismatch");

  const EquivariantLinearSpec emb = spec.embed_spec();
  const int ne = emb.param_count();
  const auto qp = params.subspan(0, static_cast<std::size_t>(ne));
  const auto kp = params.subspan(static_cast<std::size_t>(ne), static_cast<std::size_t>(ne));

  const GeometricTensorT<T> q_at_key = equivariant_linear(emb, qp, key.features);
  const GeometricTensorT<T> q_at_query = equivariant_linear(emb, qp, query.features);
  const GeometricTensorT<T> k_emb = equivariant_linear(emb, kp, key.features);

  int max_degree = 0;
  for (int l : spec.mix_degrees) max_degree = std::max(max_degree, l);
  bool degenerate = false;
  const auto y = detail::mixing_harmonics(key.position, query.position, max_degree,
                                          degenerate);

  // Contract the interpolated query path with [K x Y^(l)] projected onto each
  // matching irrep, at interpolation fraction s in [0, 1].
  auto integrand = [&](double tau) -> T {
    const double span_t = query.time - key.time;
    const double s = span_t > 0.0 ? (tau - key.time) / span_t : 0.0;
    T acc = T(0.0);
    for (std::size_t qe = 0; qe < spec.sig.entries.size(); ++qe) {
      const IrrepSpec& irq = spec.sig.entries[qe].irrep;
      const int mult = spec.sig.entries[qe].multiplicity;
      const int dq = irq.dim();
      const auto* bq_key = q_at_key.find(irq);
      const auto* bq_query = q_at_query.find(irq);
      for (std::size_t ke = 0; ke < spec.sig.entries.size(); ++ke) {
        const IrrepSpec& irk = spec.sig.entries[ke].irrep;
        for (int l : spec.mix_degrees) {
          if (degenerate && l != 0) continue;
          if (irq.degree < std::abs(irk.degree - l) || irq.degree > irk.degree + l)
            continue;
          if (!(irq.parity == irk.parity * sh_parity(l))) continue;
          const auto* bk = k_emb.find(irk);
          const std::vector<T> proj = tensor_product_block<T>(
              irk.degree, std::span<const T>(bk->coeffs), l,
              std::span<const T>(y[static_cast<std::size_t>(l)]), irq.degree);
          const int cmax = std::min(mult, spec.sig.entries[ke].multiplicity);
          for (int c = 0; c < cmax; ++c)
            for (int m = 0; m < dq; ++m) {
              const std::size_t idx = static_cast<std::size_t>(c * dq + m);
              const T qv = (1.0 - s) * bq_key->coeffs[idx] + s * bq_query->coeffs[idx];
              acc += qv * proj[idx];
            }
        }
      }
    }
    return acc;
  };

  return gauss_legendre_mean<T>(integrand, key.time, query.time, spec.quad_order);
}

// Eq.-13-style output: softmax-normalized attention weights over keys, values
// extrapolated linearly to the query time, tensor-mixed with spherical
// harmonics of each key-to-query direction through learned path matrices.
template <class T>
GeometricTensorT<T> conti_output(const ContiAttentionSpec& spec,
                                 std::span<const T> params,
                                 std::span<const AttentionEvent<T>> keys,
                                 const AttentionEvent<T>& query) {
  if (keys.empty()) throw ContractError("conti_output requires at least one key");
  const EquivariantLinearSpec emb = spec.embed_spec();
  const int ne = emb.param_count();
  const auto vp = params.subspan(static_cast<std::size_t>(2 * ne), static_cast<std::size_t>(ne));
  const auto vtp = params.subspan(static_cast<std::size_t>(3 * ne), static_cast<std::size_t>(ne));
  const auto paths = spec.paths();

  std::vector<T> alpha;
  alpha.reserve(keys.size());
  for (const auto& key : keys) alpha.push_back(conti_attention(spec, params, query, key));

  // softmax over keys (shifted by the largest raw coefficient)
  double shift = value_of(alpha[0]);
  for (const T& a : alpha) shift = std::max(shift, value_of(a));
  using std::exp;
  std::vector<T> weight;
  weight.reserve(keys.size());
  T total = T(0.0);
  for (const T& a : alpha) {
    weight.push_back(exp(a - shift));
    total += weight.back();
  }
  for (T& w : weight) w = w / total;

  // per-path matrix offsets after the four embedding maps
  std::vector<int> offsets(paths.size());
  {
    int off = 4 * ne;
    for (std::size_t p = 0; p < paths.size(); ++p) {
      offsets[p] = off;
      off += spec.out_sig.entries[static_cast<std::size_t>(paths[p].out_entry)].multiplicity *
             spec.sig.entries[static_cast<std::size_t>(paths[p].in_entry)].multiplicity;
    }
  }

  int max_degree = 0;
  for (int l : spec.mix_degrees) max_degree = std::max(max_degree, l);

  auto out = GeometricTensorT<T>::zeros(spec.out_sig);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& key = keys[i];
    const GeometricTensorT<T> v0 = equivariant_linear(emb, vp, key.features);
    const GeometricTensorT<T> vslope = equivariant_linear(emb, vtp, key.features);
    GeometricTensorT<T> v = v0;
    const double dt = query.time - key.time;
    for (std::size_t b = 0; b < v.blocks.size(); ++b)
      for (std::size_t c = 0; c < v.blocks[b].coeffs.size(); ++c)
        v.blocks[b].coeffs[c] =
            weight[i] * (v.blocks[b].coeffs[c] + dt * vslope.blocks[b].coeffs[c]);

    bool degenerate = false;
    const auto y = detail::mixing_harmonics(key.position, query.position, max_degree,
                                            degenerate);
    for (std::size_t p = 0; p < paths.size(); ++p) {
      const auto& path = paths[p];
      if (degenerate && path.filter != 0) continue;
      const auto& in_entry = spec.sig.entries[static_cast<std::size_t>(path.in_entry)];
      const auto& out_entry = spec.out_sig.entries[static_cast<std::size_t>(path.out_entry)];
      const auto* vb = v.find(in_entry.irrep);
      const std::vector<T> msg = tensor_product_block<T>(
          in_entry.irrep.degree, std::span<const T>(vb->coeffs), path.filter,
          std::span<const T>(y[static_cast<std::size_t>(path.filter)]),
          out_entry.irrep.degree);
      auto* ob = out.find(out_entry.irrep);
      const int dout = out_entry.irrep.dim();
      const T* w = params.data() + offsets[p];
      for (int a = 0; a < out_entry.multiplicity; ++a)
        for (int b = 0; b < in_entry.multiplicity; ++b) {
          const T& wab = w[a * in_entry.multiplicity + b];
          for (int m = 0; m < dout; ++m)
            ob->coeffs[static_cast<std::size_t>(a * dout + m)] +=
                wab * msg[static_cast<std::size_t>(b * dout + m)];
        }
    }
  }
  return out;
}

}  // namespace gfk

#endif

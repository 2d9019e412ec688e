#ifndef GFK_NETS_HPP
#define GFK_NETS_HPP

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "gfk/errors.hpp"
#include "gfk/tape.hpp"

namespace gfk {

// Fully connected network with tanh hidden activations. Parameters live in a
// caller-owned flat array so the same spec can run on doubles, Vars or Duals.
struct MlpSpec {
  std::vector<int> widths;     // e.g. {3, 64, 64, 3}
  bool tanh_output = false;

  int param_count() const {
    int n = 0;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i)
      n += widths[i + 1] * (widths[i] + 1);
    return n;
  }
  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
};

// TW: weight scalar type, TX: activation scalar type (TW * TX -> TX must
// exist; e.g. Var weights flowing through Dual<Var> activations).
template <class TW, class TX = TW>
void mlp_forward(const MlpSpec& spec, std::span<const TW> params,
                 std::span<const TX> input, std::vector<TX>& output) {
  if (static_cast<int>(input.size()) != spec.input_dim())
    throw ContractError("mlp input size mismatch");
  if (static_cast<int>(params.size()) != spec.param_count())
    throw ContractError("mlp parameter count mismatch");

  using std::tanh;
  std::vector<TX> cur(input.begin(), input.end());
  std::vector<TX> next;
  std::size_t p = 0;
  for (std::size_t layer = 0; layer + 1 < spec.widths.size(); ++layer) {
    const int nin = spec.widths[layer];
    const int nout = spec.widths[layer + 1];
    next.assign(static_cast<std::size_t>(nout), TX(0.0));
    for (int o = 0; o < nout; ++o) {
      TX s = TX(params[p++]);  // bias first
      for (int i = 0; i < nin; ++i) s = s + params[p++] * cur[static_cast<std::size_t>(i)];
      const bool last = (layer + 2 == spec.widths.size());
      next[static_cast<std::size_t>(o)] = (!last || spec.tanh_output) ? tanh(s) : s;
    }
    cur.swap(next);
  }
  output = std::move(cur);
}

// Xavier-style initialization, deterministic in the seed.
inline std::vector<double> mlp_init(const MlpSpec& spec, std::mt19937_64& rng) {
  std::vector<double> params;
  params.reserve(static_cast<std::size_t>(spec.param_count()));
  for (std::size_t layer = 0; layer + 1 < spec.widths.size(); ++layer) {
    const int nin = spec.widths[layer];
    const int nout = spec.widths[layer + 1];
    const double scale = std::sqrt(2.0 / static_cast<double>(nin + nout));
    std::normal_distribution<double> g(0.0, scale);
    for (int o = 0; o < nout; ++o) {
      params.push_back(0.0);  // bias
      for (int i = 0; i < nin; ++i) params.push_back(g(rng));
    }
  }
  return params;
}

}  // namespace gfk

#endif

#ifndef GFK_OPTIM_HPP
#define GFK_OPTIM_HPP

#include <cmath>
#include <span>
#include <vector>

#include "gfk/errors.hpp"

namespace gfk {

// Adam with decoupled weight decay and optional global-norm clipping.
struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled (applied to parameters directly)
  double clip_norm = 0.0;     // 0 disables clipping
};

struct AdamState {
  std::vector<double> m, v;
  long step = 0;
};

// Scales the gradient so its global L2 norm is at most max_norm; returns the
// pre-clip norm.
inline double clip_global_norm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double n = std::sqrt(sq);
  if (max_norm > 0.0 && n > max_norm) {
    const double s = max_norm / n;
    for (double& g : grad) g *= s;
  }
  return n;
}

inline void adam_update(const AdamConfig& cfg, AdamState& state,
                        std::span<double> params, std::span<double> grad) {
  if (params.size() != grad.size()) throw ContractError("parameter/gradient size mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size())
    throw ContractError("optimizer state size mismatch");
  for (double g : grad)
    if (!std::isfinite(g)) throw NumericError("non-finite gradient in optimizer update");

  if (cfg.clip_norm > 0.0) clip_global_norm(grad, cfg.clip_norm);
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double mh = state.m[i] / bc1;
    const double vh = state.v[i] / bc2;
    params[i] -= cfg.lr * (mh / (std::sqrt(vh) + cfg.eps) + cfg.weight_decay * params[i]);
  }
}

}  // namespace gfk

#endif

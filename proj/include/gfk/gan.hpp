#ifndef GFK_GAN_HPP
#define GFK_GAN_HPP

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "gfk/errors.hpp"
#include "gfk/optim.hpp"
#include "gfk/tape.hpp"

namespace gfk {

// Conditional sequence GAN: recurrent generator and a recurrent
// discriminator with an adversarial head and a class head.
struct GanConfig {
  int latent = 16;
  int classes = 9;   // K context classes
  int seq_len = 32;  // T steps per sequence
  int channels = 4;  // C output channels
  int hidden = 32;
  int embed = 8;              // learned class-embedding width
  double smooth = 0.9;        // one-sided label-smoothing target for real data
  double cls_weight = 1.0;    // weight of the class-head cross-entropy terms
  bool flip_fake_sign = false;  // use +E[log(1-D)] on fakes instead of -E[...]

  void validate() const {
    if (classes < 2) throw ConfigError("gan: need at least 2 classes");
    if (seq_len < 2) throw ConfigError("gan: sequence length must be >= 2");
    if (latent < 1 || channels < 1 || hidden < 1 || embed < 1)
      throw ConfigError("gan: dimensions must be positive");
    if (cls_weight < 0.0) throw ConfigError("gan: class weight must be >= 0");
    if (!(smooth > 0.0 && smooth <= 1.0))
      throw ConfigError("gan: smoothing target must be in (0, 1]");
  }
};

// Flat parameter offsets. Each recurrent cell block is laid out as
// [b_g(H), W_g(H*in), U_g(H*H), b_h(H), W_h(H*in), U_h(H*H)] so the
// recurrent matrices U_g/U_h are contiguous for spectral normalization.
// The four power-iteration vectors live at the tail of the same vector.
struct GanLayout {
  int latent, classes, seq_len, channels, hidden, embed;
  int g_in;  // generator cell input width (expansion output)
  int d_in;  // discriminator cell input width (channels + embed)

  int g_embed, g_exp, g_cell, g_out;
  int d_embed, d_cell, d_adv, d_cls;
  int power;  // 4 * hidden doubles: G U_g, G U_h, D U_g, D U_h
  int total;

  int g_begin, g_end;  // generator slice [g_begin, g_end)
  int d_begin, d_end;  // discriminator slice

  int cell_size(int in) const { return 2 * (hidden + hidden * in + hidden * hidden); }
  // Offsets of the two H*H recurrent matrices inside a cell block.
  int rec_gate(int cell_off, int in) const { return cell_off + hidden + hidden * in; }
  int rec_cand(int cell_off, int in) const {
    return rec_gate(cell_off, in) + hidden * hidden + hidden + hidden * in;
  }

  static GanLayout make(const GanConfig& cfg) {
    cfg.validate();
    GanLayout l;
    l.latent = cfg.latent;
    l.classes = cfg.classes;
    l.seq_len = cfg.seq_len;
    l.channels = cfg.channels;
    l.hidden = cfg.hidden;
    l.embed = cfg.embed;
    l.g_in = cfg.hidden;
    l.d_in = cfg.channels + cfg.embed;

    int p = 0;
    l.g_begin = p;
    l.g_embed = p;
    p += cfg.classes * cfg.embed;
    l.g_exp = p;
    p += cfg.hidden * (cfg.latent + cfg.embed + 1 + 1);  // bias-first rows, +1 time input
    l.g_cell = p;
    p += l.cell_size(l.g_in);
    l.g_out = p;
    p += cfg.channels * (cfg.hidden + 1);
    l.g_end = p;

    l.d_begin = p;
    l.d_embed = p;
    p += cfg.classes * cfg.embed;
    l.d_cell = p;
    p += l.cell_size(l.d_in);
    l.d_adv = p;
    p += cfg.hidden + 1;
    l.d_cls = p;
    p += cfg.classes * (cfg.hidden + 1);
    l.d_end = p;

    l.power = p;
    p += 4 * cfg.hidden;
    l.total = p;
    return l;
  }
};

namespace detail {

// y[o] = params[off + o*(in+1)] + sum_i params[...] * x[i]  (bias-first rows)
template <class T, class TX>
void gan_affine(std::span<const T> params, int off, int in, int out,
                const std::vector<TX>& x, std::vector<T>& y) {
  y.assign(static_cast<std::size_t>(out), T(0.0));
  std::size_t p = static_cast<std::size_t>(off);
  for (int o = 0; o < out; ++o) {
    T s = params[p++];
    for (int i = 0; i < in; ++i) s = s + params[p++] * x[static_cast<std::size_t>(i)];
    y[static_cast<std::size_t>(o)] = s;
  }
}

// Single update-gate recurrent cell on a cell block at `off`.
template <class T>
void gan_cell_step(const GanLayout& l, std::span<const T> params, int off, int in,
                   const std::vector<T>& x, std::vector<T>& h) {
  using std::tanh;
  const int H = l.hidden;
  std::vector<T> g(static_cast<std::size_t>(H)), cand(static_cast<std::size_t>(H));
  std::size_t p = static_cast<std::size_t>(off);
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<T>& dst = pass == 0 ? g : cand;
    const T* b = &params[p];
    const T* W = b + H;
    const T* U = W + static_cast<std::size_t>(H) * static_cast<std::size_t>(in);
    for (int o = 0; o < H; ++o) {
      T s = b[o];
      for (int i = 0; i < in; ++i)
        s = s + W[o * in + i] * x[static_cast<std::size_t>(i)];
      for (int i = 0; i < H; ++i)
        s = s + U[o * H + i] * h[static_cast<std::size_t>(i)];
      dst[static_cast<std::size_t>(o)] = pass == 0 ? sigmoid(s) : tanh(s);
    }
    p += static_cast<std::size_t>(H) * static_cast<std::size_t>(1 + in + H);
  }
  for (int o = 0; o < H; ++o) {
    const std::size_t k = static_cast<std::size_t>(o);
    h[k] = (T(1.0) - g[k]) * h[k] + g[k] * cand[k];
  }
}

}  // namespace detail

// Maps (z, class) to a tanh-bounded T x C sequence (row-major, step-major).
// The latent/class pair is linearly expanded per step together with the
// normalized time fraction, then run through the recurrent cell.
template <class T>
std::vector<T> generator_forward(const GanConfig& cfg, std::span<const T> params,
                                 std::span<const double> z, int c) {
  using std::tanh;
  const GanLayout l = GanLayout::make(cfg);
  if (static_cast<int>(params.size()) != l.total)
    throw ContractError("gan parameter count mismatch");
  if (static_cast<int>(z.size()) != cfg.latent)
    throw ContractError("gan latent size mismatch");
  if (c < 0 || c >= cfg.classes) throw std::domain_error("gan class label out of range");

  const int exp_in = cfg.latent + cfg.embed + 1;
  std::vector<T> zc(static_cast<std::size_t>(exp_in));
  for (int i = 0; i < cfg.latent; ++i) zc[static_cast<std::size_t>(i)] = T(z[static_cast<std::size_t>(i)]);
  for (int i = 0; i < cfg.embed; ++i)
    zc[static_cast<std::size_t>(cfg.latent + i)] =
        params[static_cast<std::size_t>(l.g_embed + c * cfg.embed + i)];

  std::vector<T> h(static_cast<std::size_t>(cfg.hidden), T(0.0));
  std::vector<T> u, head;
  std::vector<T> out;
  out.reserve(static_cast<std::size_t>(cfg.seq_len * cfg.channels));
  for (int t = 0; t < cfg.seq_len; ++t) {
    zc[static_cast<std::size_t>(exp_in - 1)] =
        T(static_cast<double>(t) / static_cast<double>(cfg.seq_len - 1));
    detail::gan_affine(params, l.g_exp, exp_in, cfg.hidden, zc, u);
    detail::gan_cell_step(l, params, l.g_cell, l.g_in, u, h);
    detail::gan_affine(params, l.g_out, cfg.hidden, cfg.channels, h, head);
    for (int k = 0; k < cfg.channels; ++k) out.push_back(tanh(head[static_cast<std::size_t>(k)]));
  }
  return out;
}

template <class T>
struct DiscOutput {
  T adv;               // sigmoid, strictly in (0, 1)
  std::vector<T> cls;  // softmax over classes, sums to 1
};

// Scores a T x C sequence; the class embedding is appended to every step.
template <class T, class TX>
DiscOutput<T> discriminator_forward(const GanConfig& cfg, std::span<const T> params,
                                    std::span<const TX> x, int c) {
  using std::exp;
  const GanLayout l = GanLayout::make(cfg);
  if (static_cast<int>(params.size()) != l.total)
    throw ContractError("gan parameter count mismatch");
  if (static_cast<int>(x.size()) != cfg.seq_len * cfg.channels)
    throw ContractError("gan sequence shape mismatch");
  if (c < 0 || c >= cfg.classes) throw std::domain_error("gan class label out of range");

  std::vector<T> step(static_cast<std::size_t>(l.d_in));
  for (int i = 0; i < cfg.embed; ++i)
    step[static_cast<std::size_t>(cfg.channels + i)] =
        params[static_cast<std::size_t>(l.d_embed + c * cfg.embed + i)];

  std::vector<T> h(static_cast<std::size_t>(cfg.hidden), T(0.0));
  for (int t = 0; t < cfg.seq_len; ++t) {
    for (int k = 0; k < cfg.channels; ++k)
      step[static_cast<std::size_t>(k)] = T(x[static_cast<std::size_t>(t * cfg.channels + k)]);
    detail::gan_cell_step(l, params, l.d_cell, l.d_in, step, h);
  }

  DiscOutput<T> outp;
  std::vector<T> adv_v, logits;
  detail::gan_affine(params, l.d_adv, cfg.hidden, 1, h, adv_v);
  outp.adv = sigmoid(adv_v[0]);
  detail::gan_affine(params, l.d_cls, cfg.hidden, cfg.classes, h, logits);
  double shift = value(logits[0]);
  for (const T& s : logits) shift = std::max(shift, value(s));
  T denom(0.0);
  outp.cls.reserve(logits.size());
  for (const T& s : logits) {
    outp.cls.push_back(exp(s - T(shift)));
    denom = denom + outp.cls.back();
  }
  for (T& p : outp.cls) p = p / denom;
  return outp;
}

// One real (sequence, label) training example; x is seq_len * channels.
struct GanSample {
  std::vector<double> x;
  int label = 0;
};

struct GanStepReport {
  double loss_d = 0.0;
  double loss_g = 0.0;
  double loss_adv_real = 0.0;  // real-sample adversarial part of loss_d
  double adv_real = 0.0;       // batch-mean discriminator score on real data
  double adv_fake = 0.0;
};

struct GanTrainState {
  GanConfig config;
  std::vector<double> params;
  AdamState opt_g, opt_d;
  std::mt19937_64 rng;
};

// Deterministic initialization. The class-embedding rows and the class-head
// rows start identical across classes, so relabeling classes and re-training
// with the same seed permutes the class-head outputs exactly.
std::vector<double> gan_init(const GanConfig& cfg, std::uint64_t seed);

GanTrainState gan_train_init(const GanConfig& cfg, std::uint64_t seed);

// One alternating update: discriminator step, generator step, then one power
// iteration of spectral normalization on the four recurrent matrices.
GanStepReport gan_train_step(GanTrainState& state, std::span<const GanSample> batch);

// Power-iteration estimate of the top singular value of a rows x cols matrix
// (row-major); `u` (size rows) carries the iteration state across calls.
double spectral_norm_estimate(std::span<const double> mat, int rows, int cols,
                              std::span<double> u, int iterations);

}  // namespace gfk

#endif

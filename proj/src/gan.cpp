#include "gfk/gan.hpp"

#include <cmath>
#include <string>

#include "gfk/diff.hpp"

namespace gfk {

namespace {

double normalize(std::span<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double n = std::sqrt(sq);
  if (n > 1e-30)
    for (double& x : v) x /= n;
  return n;
}

void fill_normal(std::span<double> dst, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, scale);
  for (double& x : dst) x = g(rng);
}

// Bias-first affine rows: zero biases, scaled normal weights.
void fill_affine(std::span<double> dst, int in, int out, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(2.0 / static_cast<double>(in + out)));
  std::size_t p = 0;
  for (int o = 0; o < out; ++o) {
    dst[p++] = 0.0;
    for (int i = 0; i < in; ++i) dst[p++] = g(rng);
  }
}

// Cell block [b_g, W_g, U_g, b_h, W_h, U_h]: zero biases, scaled weights.
void fill_cell(std::span<double> dst, int in, int hidden, std::mt19937_64& rng) {
  std::size_t p = 0;
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < hidden; ++i) dst[p++] = 0.0;
    std::normal_distribution<double> gw(0.0, std::sqrt(1.0 / static_cast<double>(in)));
    for (int i = 0; i < hidden * in; ++i) dst[p++] = gw(rng);
    std::normal_distribution<double> gu(0.0, std::sqrt(1.0 / static_cast<double>(hidden)));
    for (int i = 0; i < hidden * hidden; ++i) dst[p++] = gu(rng);
  }
}

}  // namespace

std::vector<double> gan_init(const GanConfig& cfg, std::uint64_t seed) {
  const GanLayout l = GanLayout::make(cfg);
  std::vector<double> params(static_cast<std::size_t>(l.total), 0.0);
  std::span<double> all(params);
  std::mt19937_64 rng(seed);

  // Identical embedding rows across classes keep the initialization invariant
  // under class relabeling; training then differentiates classes covariantly.
  std::vector<double> row(static_cast<std::size_t>(cfg.embed));
  fill_normal(row, 0.1, rng);
  for (int c = 0; c < cfg.classes; ++c)
    for (int i = 0; i < cfg.embed; ++i)
      params[static_cast<std::size_t>(l.g_embed + c * cfg.embed + i)] = row[static_cast<std::size_t>(i)];

  const int exp_in = cfg.latent + cfg.embed + 1;
  fill_affine(all.subspan(static_cast<std::size_t>(l.g_exp),
                          static_cast<std::size_t>(cfg.hidden * (exp_in + 1))),
              exp_in, cfg.hidden, rng);
  fill_cell(all.subspan(static_cast<std::size_t>(l.g_cell),
                        static_cast<std::size_t>(l.cell_size(l.g_in))),
            l.g_in, cfg.hidden, rng);
  fill_affine(all.subspan(static_cast<std::size_t>(l.g_out),
                          static_cast<std::size_t>(cfg.channels * (cfg.hidden + 1))),
              cfg.hidden, cfg.channels, rng);

  fill_normal(row, 0.1, rng);
  for (int c = 0; c < cfg.classes; ++c)
    for (int i = 0; i < cfg.embed; ++i)
      params[static_cast<std::size_t>(l.d_embed + c * cfg.embed + i)] = row[static_cast<std::size_t>(i)];
  fill_cell(all.subspan(static_cast<std::size_t>(l.d_cell),
                        static_cast<std::size_t>(l.cell_size(l.d_in))),
            l.d_in, cfg.hidden, rng);
  fill_affine(all.subspan(static_cast<std::size_t>(l.d_adv),
                          static_cast<std::size_t>(cfg.hidden + 1)),
              cfg.hidden, 1, rng);
  // Class head starts at zero: uniform predictions, symmetric across classes.

  for (int m = 0; m < 4; ++m) {
    auto u = all.subspan(static_cast<std::size_t>(l.power + m * cfg.hidden),
                         static_cast<std::size_t>(cfg.hidden));
    fill_normal(u, 1.0, rng);
    normalize(u);
  }
  return params;
}

GanTrainState gan_train_init(const GanConfig& cfg, std::uint64_t seed) {
  GanTrainState st;
  st.config = cfg;
  st.params = gan_init(cfg, seed);
  st.rng.seed(seed ^ 0xd1b54a32d192ed03ULL);
  return st;
}

double spectral_norm_estimate(std::span<const double> mat, int rows, int cols,
                              std::span<double> u, int iterations) {
  if (static_cast<int>(mat.size()) != rows * cols)
    throw ContractError("spectral norm: matrix size mismatch");
  if (static_cast<int>(u.size()) != rows)
    throw ContractError("spectral norm: iteration vector size mismatch");
  std::vector<double> v(static_cast<std::size_t>(cols), 0.0);
  std::vector<double> mu(static_cast<std::size_t>(rows), 0.0);
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    for (int j = 0; j < cols; ++j) {
      double s = 0.0;
      for (int i = 0; i < rows; ++i) s += mat[static_cast<std::size_t>(i * cols + j)] * u[static_cast<std::size_t>(i)];
      v[static_cast<std::size_t>(j)] = s;
    }
    if (normalize(v) <= 1e-30) return 0.0;
    for (int i = 0; i < rows; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols; ++j) s += mat[static_cast<std::size_t>(i * cols + j)] * v[static_cast<std::size_t>(j)];
      mu[static_cast<std::size_t>(i)] = s;
    }
    sigma = normalize(mu);
    if (sigma <= 1e-30) return 0.0;
    for (int i = 0; i < rows; ++i) u[static_cast<std::size_t>(i)] = mu[static_cast<std::size_t>(i)];
  }
  return sigma;
}

GanStepReport gan_train_step(GanTrainState& st, std::span<const GanSample> batch) {
  const GanConfig& cfg = st.config;
  const GanLayout l = GanLayout::make(cfg);
  if (batch.empty()) throw ContractError("gan: empty training batch");
  if (static_cast<int>(st.params.size()) != l.total)
    throw ContractError("gan parameter count mismatch");
  for (const GanSample& s : batch) {
    if (static_cast<int>(s.x.size()) != cfg.seq_len * cfg.channels)
      throw ContractError("gan sequence shape mismatch");
    if (s.label < 0 || s.label >= cfg.classes)
      throw std::domain_error("gan class label out of range");
  }

  AdamConfig opt;
  opt.lr = 1e-4;
  opt.beta1 = 0.5;
  opt.beta2 = 0.999;
  opt.clip_norm = 1.0;

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> zs(batch.size());
  for (auto& z : zs) {
    z.resize(static_cast<std::size_t>(cfg.latent));
    for (double& x : z) x = gauss(st.rng);
  }

  // Fakes for the discriminator step are generated with frozen parameters;
  // the generator slice receives no gradient from this loss anyway.
  std::vector<std::vector<double>> fakes(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i)
    fakes[i] = generator_forward<double>(cfg, std::span<const double>(st.params),
                                         zs[i], batch[i].label);

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  GanStepReport rep;

  auto d_loss = [&](std::span<const Var> p) -> Var {
    Var loss(0.0);
    double adv_real = 0.0, adv_fake = 0.0, real_part = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const int c = batch[i].label;
      const auto dr = discriminator_forward<Var, double>(cfg, p, std::span<const double>(batch[i].x), c);
      const auto df = discriminator_forward<Var, double>(cfg, p, std::span<const double>(fakes[i]), c);
      adv_real += value(dr.adv);
      adv_fake += value(df.adv);
      // Real scores target the smoothed label; fakes use the standard
      // -log(1 - D) term unless the flipped-sign variant is requested.
      Var item = -(Var(cfg.smooth) * log(dr.adv) +
                   Var(1.0 - cfg.smooth) * log(Var(1.0) - dr.adv));
      real_part += value(item);
      const Var fake_term = log(Var(1.0) - df.adv);
      item = item + (cfg.flip_fake_sign ? fake_term : -fake_term);
      item = item - Var(cfg.cls_weight) * log(dr.cls[static_cast<std::size_t>(c)]);
      loss = loss + item;
    }
    loss = loss * Var(inv_n);
    rep.loss_d = value(loss);
    rep.loss_adv_real = real_part * inv_n;
    rep.adv_real = adv_real * inv_n;
    rep.adv_fake = adv_fake * inv_n;
    return loss;
  };
  std::vector<double> grad = param_gradient(d_loss, st.params);
  if (!std::isfinite(rep.loss_d))
    throw NumericError("gan: non-finite discriminator loss " + std::to_string(rep.loss_d));
  {
    const std::size_t off = static_cast<std::size_t>(l.d_begin);
    const std::size_t n = static_cast<std::size_t>(l.d_end - l.d_begin);
    adam_update(opt, st.opt_d, std::span<double>(st.params).subspan(off, n),
                std::span<double>(grad).subspan(off, n));
  }

  auto g_loss = [&](std::span<const Var> p) -> Var {
    Var loss(0.0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const int c = batch[i].label;
      const std::vector<Var> fake = generator_forward<Var>(cfg, p, zs[i], c);
      const auto df = discriminator_forward<Var, Var>(cfg, p, std::span<const Var>(fake), c);
      // Non-saturating generator objective plus the class term on fakes.
      loss = loss - log(df.adv) -
             Var(cfg.cls_weight) * log(df.cls[static_cast<std::size_t>(c)]);
    }
    loss = loss * Var(inv_n);
    rep.loss_g = value(loss);
    return loss;
  };
  grad = param_gradient(g_loss, st.params);
  if (!std::isfinite(rep.loss_g))
    throw NumericError("gan: non-finite generator loss " + std::to_string(rep.loss_g));
  {
    const std::size_t off = static_cast<std::size_t>(l.g_begin);
    const std::size_t n = static_cast<std::size_t>(l.g_end - l.g_begin);
    adam_update(opt, st.opt_g, std::span<double>(st.params).subspan(off, n),
                std::span<double>(grad).subspan(off, n));
  }

  // One power iteration per recurrent matrix, then rescale to unit spectral
  // norm estimate.
  const int H = cfg.hidden;
  const int mats[4] = {l.rec_gate(l.g_cell, l.g_in), l.rec_cand(l.g_cell, l.g_in),
                       l.rec_gate(l.d_cell, l.d_in), l.rec_cand(l.d_cell, l.d_in)};
  for (int m = 0; m < 4; ++m) {
    std::span<double> mat =
        std::span<double>(st.params).subspan(static_cast<std::size_t>(mats[m]),
                                             static_cast<std::size_t>(H * H));
    std::span<double> u =
        std::span<double>(st.params).subspan(static_cast<std::size_t>(l.power + m * H),
                                             static_cast<std::size_t>(H));
    const double sigma = spectral_norm_estimate(mat, H, H, u, 1);
    if (sigma > 1e-12)
      for (double& w : mat) w /= sigma;
  }
  return rep;
}

}  // namespace gfk

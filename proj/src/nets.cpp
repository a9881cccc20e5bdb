// Copyright 2026 The WDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wdp/nets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include "wdp/latent_model.hpp"

namespace wdp {

void AffineNet::validate() const {
  if (weight.rows() != weight.cols()) throw InvalidInput("net weight must be square");
  if (weight.rows() != bias.size()) throw InvalidInput("net bias length must match weight");
  if (!weight.allFinite() || !bias.allFinite()) throw NumericalError("net parameters are not finite");
}

AffineNet AffineNet::identity(int dim, NetRole role) {
  if (dim < 1) throw InvalidInput("net dimension must be positive");
  return AffineNet{Matrix::Identity(dim, dim), Vector::Zero(dim), role};
}

AffineNet AffineNet::near_identity(int dim, NetRole role, double scale, std::uint64_t seed) {
  AffineNet net = identity(dim, role);
  Rng rng(seed);
  const double sd = scale / std::sqrt(static_cast<double>(dim));
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) net.weight(r, c) += sd * rng.normal();
  return net;
}

namespace {

Matrix apply_affine(const AffineNet& net, const Matrix& z, NetRole expected, const char* what) {
  if (net.role != expected) throw InvalidInput(std::string(what) + ": net has the wrong role");
  if (z.size() != net.dim()) {
    throw InvalidInput(std::string(what) + ": input has " + std::to_string(z.size()) +
                       " elements, net expects " + std::to_string(net.dim()));
  }
  Vector out = net.weight * flatten(z) + net.bias;
  return unflatten(out, static_cast<int>(z.rows()), static_cast<int>(z.cols()));
}

}  // namespace

Matrix protect(const AffineNet& net, const Matrix& z_private) {
  return apply_affine(net, z_private, NetRole::kProtection, "protect");
}

Matrix deprotect(const AffineNet& net, const Matrix& y_private) {
  return apply_affine(net, y_private, NetRole::kDeprotection, "deprotect");
}

double loss(const Matrix& z, const Matrix& s1, const Matrix& z1_private, const Matrix& z2_private,
            double lambda) {
  if (z.rows() != s1.rows() || z.cols() != s1.cols()) throw InvalidInput("loss: z / s1 shape mismatch");
  if (z1_private.rows() != z2_private.rows() || z1_private.cols() != z2_private.cols()) {
    throw InvalidInput("loss: private shape mismatch");
  }
  const double recon = (z - s1).squaredNorm() / static_cast<double>(z.size());
  const double fake = z1_private.size() == 0
                          ? 0.0
                          : (z1_private - z2_private).squaredNorm() / static_cast<double>(z1_private.size());
  return recon + lambda * fake;
}

double lr_at(const LrSchedule& s, double epoch) {
  if (!(epoch >= 0.0)) throw InvalidInput("lr_at: epoch must be >= 0");
  double t = epoch;
  double period = s.t0;
  if (s.t_mult == 1.0) {
    t = std::fmod(epoch, period);
  } else {
    while (t >= period) {
      t -= period;
      period *= s.t_mult;
    }
  }
  return s.lr_min + 0.5 * (s.lr0 - s.lr_min) * (1.0 + std::cos(std::numbers::pi * t / period));
}

void TrainConfig::validate() const {
  if (!(lambda >= 0.0)) throw InvalidInput("lambda must be >= 0");
  if (!(lr0 > 0.0)) throw InvalidInput("lr0 must be > 0");
  if (!(lr_min >= 0.0 && lr_min <= lr0)) throw InvalidInput("lr_min must be in [0, lr0]");
  if (epochs < 1) throw InvalidInput("epochs must be >= 1");
  if (batch_size < 1) throw InvalidInput("batch_size must be >= 1");
  if (!(t0 > 0.0)) throw InvalidInput("t0 must be > 0");
  if (!(t_mult >= 1.0)) throw InvalidInput("t_mult must be >= 1");
  if (!(init_scale >= 0.0)) throw InvalidInput("init_scale must be >= 0");
}

Gradients loss_and_gradients(const AffineNet& protection, const AffineNet& deprotection,
                             const Matrix& privates, const Matrix& commons, const StepNoise& noise,
                             double lambda) {
  const Eigen::Index batch = privates.rows();
  const Eigen::Index d = privates.cols();
  const Eigen::Index total = d + commons.cols();
  if (batch == 0) throw InvalidInput("empty batch");
  if (commons.rows() != batch || noise.targets.rows() != batch || noise.channel_private.rows() != batch ||
      noise.channel_common.rows() != batch) {
    throw InvalidInput("batch row counts disagree");
  }
  if (protection.dim() != d || deprotection.dim() != d) throw InvalidInput("net dimension mismatch");

  // Forward: Q = P W1^T + b1, Yp = Q + Ep, R = Yp W2^T + b2.
  Matrix q = privates * protection.weight.transpose();
  q.rowwise() += protection.bias.transpose();
  const Matrix yp = q + noise.channel_private;
  Matrix r = yp * deprotection.weight.transpose();
  r.rowwise() += deprotection.bias.transpose();

  const Matrix recon_err = r - privates;
  const Matrix fake_err = q - noise.targets;
  const double common_sq = noise.channel_common.squaredNorm();

  Gradients g;
  g.loss = ((recon_err.squaredNorm() + common_sq) / double(total) + lambda * fake_err.squaredNorm() / double(d)) /
           double(batch);

  const Matrix g_r = (2.0 / (double(total) * double(batch))) * recon_err;
  g.d_deprotection_weight = g_r.transpose() * yp;
  g.d_deprotection_bias = g_r.colwise().sum().transpose();

  const Matrix g_q = g_r * deprotection.weight + (2.0 * lambda / (double(d) * double(batch))) * fake_err;
  g.d_protection_weight = g_q.transpose() * privates;
  g.d_protection_bias = g_q.colwise().sum().transpose();
  return g;
}

StepNoise draw_step_noise(const AffineNet& protection, const Matrix& privates, const Matrix& commons,
                          const DpParams& dp, const std::optional<ClipBounds>& clip_bounds,
                          const ChannelConfig& channel, Rng& rng) {
  const Eigen::Index batch = privates.rows();
  const Eigen::Index d = privates.cols();
  const Eigen::Index c = commons.cols();

  StepNoise n;
  n.targets = clip_bounds ? clip(privates, *clip_bounds) : privates;
  const double scale = dp.scale();
  for (Eigen::Index j = 0; j < batch; ++j)
    for (Eigen::Index i = 0; i < d; ++i) n.targets(j, i) += draw_laplace(rng, scale);

  // Noise is i.i.d. across elements, so the order in which the transmitted
  // vector is laid out does not matter; private elements take the first d.
  n.channel_private.resize(batch, d);
  n.channel_common.resize(batch, c);
  for (Eigen::Index j = 0; j < batch; ++j) {
    const Vector q = protection.weight * privates.row(j).transpose() + protection.bias;
    const double energy = q.squaredNorm() + commons.row(j).squaredNorm();
    Vector e = channel_noise(d + c, channel, rng);
    if (energy > 0.0) {
      const double gain = std::sqrt(channel.power * double((d + c + 1) / 2) / energy);
      e /= gain;
    }
    n.channel_private.row(j) = e.head(d).transpose();
    n.channel_common.row(j) = e.tail(c).transpose();
  }
  return n;
}

double train_step(AffineNet& protection, AffineNet& deprotection, const Matrix& privates,
                  const Matrix& commons, const DpParams& dp, const std::optional<ClipBounds>& clip_bounds,
                  const ChannelConfig& channel, double lambda, double lr, Rng& rng) {
  const StepNoise noise = draw_step_noise(protection, privates, commons, dp, clip_bounds, channel, rng);
  const Gradients g = loss_and_gradients(protection, deprotection, privates, commons, noise, lambda);
  if (!std::isfinite(g.loss)) throw NumericalError("non-finite training loss");
  protection.weight.noalias() -= lr * g.d_protection_weight;
  protection.bias.noalias() -= lr * g.d_protection_bias;
  deprotection.weight.noalias() -= lr * g.d_deprotection_weight;
  deprotection.bias.noalias() -= lr * g.d_deprotection_bias;
  return g.loss;
}

TrainResult train(const TrainingSet& data, const DpParams& dp, const std::optional<ClipBounds>& clip_bounds,
                  const ChannelConfig& channel, const TrainConfig& cfg) {
  cfg.validate();
  channel.validate();
  const Eigen::Index n = data.size();
  if (n == 0) throw InvalidInput("training set is empty");
  if (data.commons.rows() != n) throw InvalidInput("training set row counts disagree");
  const int d = static_cast<int>(data.privates.cols());

  TrainResult out{
      AffineNet::near_identity(d, NetRole::kProtection, cfg.init_scale, derive_seed(cfg.seed, "init_protection")),
      AffineNet::near_identity(d, NetRole::kDeprotection, cfg.init_scale,
                               derive_seed(cfg.seed, "init_deprotection")),
      {}};
  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  Rng noise_rng(derive_seed(cfg.seed, "noise"));
  const std::optional<ClipBounds> bounds = cfg.clip_before_noise ? clip_bounds : std::nullopt;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const LrSchedule schedule = cfg.schedule();
  Matrix privates, commons;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(schedule, epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    double loss_sum = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
      privates.resize(len, data.privates.cols());
      commons.resize(len, data.commons.cols());
      for (Eigen::Index j = 0; j < len; ++j) {
        privates.row(j) = data.privates.row(order[start + j]);
        commons.row(j) = data.commons.row(order[start + j]);
      }
      double batch_loss;
      try {
        batch_loss = train_step(out.protection, out.deprotection, privates, commons, dp, bounds, channel,
                                cfg.lambda, lr, noise_rng);
      } catch (const NumericalError&) {
        std::ostringstream msg;
        msg << "non-finite training loss at epoch " << epoch << ", batch " << batches << " (lr " << lr << ")";
        throw NumericalError(msg.str());
      }
      loss_sum += batch_loss;
      ++batches;
    }
    out.curve.push_back({epoch, lr, loss_sum / batches});
  }
  return out;
}

}  // namespace wdp

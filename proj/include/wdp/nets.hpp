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

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wdp/channel.hpp"
#include "wdp/dp.hpp"
#include "wdp/rng.hpp"
#include "wdp/types.hpp"

namespace wdp {

enum class NetRole { kProtection, kDeprotection };

// Single fully-connected layer y = W vec(z) + b acting on the row-major
// flattened private codes.
struct AffineNet {
  Matrix weight;
  Vector bias;
  NetRole role = NetRole::kProtection;

  int dim() const { return static_cast<int>(bias.size()); }
  void validate() const;

  static AffineNet identity(int dim, NetRole role);
  // W = I + (scale / sqrt(D)) G with G standard normal, b = 0.
  static AffineNet near_identity(int dim, NetRole role, double scale, std::uint64_t seed);
};

Matrix protect(const AffineNet& net, const Matrix& z_private);
Matrix deprotect(const AffineNet& net, const Matrix& y_private);

// MSE(z, s1) + lambda * MSE(z1_private, z2_private), means over elements.
double loss(const Matrix& z, const Matrix& s1, const Matrix& z1_private, const Matrix& z2_private,
            double lambda);

// Cosine annealing with warm restarts. Cycle i has length t0 * t_mult^i.
struct LrSchedule {
  double lr0 = 3e-4;
  double lr_min = 0.0;
  double t0 = 10.0;
  double t_mult = 2.0;
};

double lr_at(const LrSchedule& schedule, double epoch);

struct TrainConfig {
  double lambda = 1e-3;
  double lr0 = 3e-4;
  double lr_min = 0.0;
  int epochs = 100;
  int batch_size = 512;
  double t0 = 10.0;
  double t_mult = 2.0;
  double init_scale = 0.01;
  // Clip the private codes to the dataset bounds before adding the genuine
  // noise that forms the protection target.
  bool clip_before_noise = true;
  std::uint64_t seed = 0;

  LrSchedule schedule() const { return {lr0, lr_min, t0, t_mult}; }
  void validate() const;
};

// A set of latents already split and flattened: row j of `privates` is
// vec(Z_private) of sample j, row j of `commons` is vec(Z_common).
struct TrainingSet {
  Matrix privates;
  Matrix commons;

  Eigen::Index size() const { return privates.rows(); }
};

// Noise realizations for one batch. Treated as constants by the backward
// pass. `targets` is the genuine-DP private latent Z1_private; the channel
// terms are the additive noise after undoing the power-normalization gain.
struct StepNoise {
  Matrix targets;
  Matrix channel_private;
  Matrix channel_common;
};

struct Gradients {
  double loss = 0.0;
  Matrix d_protection_weight;
  Vector d_protection_bias;
  Matrix d_deprotection_weight;
  Vector d_deprotection_bias;
};

// Batch-mean loss of the full path and its gradient with respect to both
// nets, for rows `privates` / `commons` and fixed noise.
Gradients loss_and_gradients(const AffineNet& protection, const AffineNet& deprotection,
                             const Matrix& privates, const Matrix& commons, const StepNoise& noise,
                             double lambda);

// Draws fresh genuine-DP targets and channel noise for a batch.
StepNoise draw_step_noise(const AffineNet& protection, const Matrix& privates, const Matrix& commons,
                          const DpParams& dp, const std::optional<ClipBounds>& clip_bounds,
                          const ChannelConfig& channel, Rng& rng);

// One plain gradient-descent update of both nets. Returns the batch loss
// evaluated before the update.
double train_step(AffineNet& protection, AffineNet& deprotection, const Matrix& privates,
                  const Matrix& commons, const DpParams& dp, const std::optional<ClipBounds>& clip_bounds,
                  const ChannelConfig& channel, double lambda, double lr, Rng& rng);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
};

struct TrainResult {
  AffineNet protection;
  AffineNet deprotection;
  std::vector<EpochRecord> curve;
};

TrainResult train(const TrainingSet& data, const DpParams& dp, const std::optional<ClipBounds>& clip_bounds,
                  const ChannelConfig& channel, const TrainConfig& cfg);

}  // namespace wdp

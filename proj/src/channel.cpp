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

#include "wdp/channel.hpp"

#include <cmath>

namespace wdp {

void ChannelConfig::validate() const {
  if (!(power > 0.0) || !std::isfinite(power)) throw InvalidInput("channel power must be > 0");
  if (std::isnan(snr_db)) throw InvalidInput("snr_db is NaN");
}

double ChannelConfig::noise_variance() const {
  validate();
  if (std::isinf(snr_db)) return snr_db > 0 ? 0.0 : INFINITY;
  return power / std::pow(10.0, snr_db / 10.0);
}

Normalized power_normalize(const Vector& v, double power) {
  if (v.size() == 0) throw InvalidInput("cannot normalize an empty vector");
  if (!(power > 0.0)) throw InvalidInput("channel power must be > 0");
  const double symbols = static_cast<double>((v.size() + 1) / 2);
  const double energy = v.squaredNorm();
  if (energy == 0.0) throw InvalidInput("cannot normalize an all-zero vector");
  const double gain = std::sqrt(power * symbols / energy);
  return Normalized{v * gain, gain};
}

Vector channel_noise(Eigen::Index length, const ChannelConfig& cfg, Rng& rng) {
  const double variance = cfg.noise_variance();
  Vector noise = Vector::Zero(length);
  if (variance == 0.0) return noise;
  const double component_sd = std::sqrt(variance / 2.0);
  const Eigen::Index symbols = (length + 1) / 2;
  for (Eigen::Index s = 0; s < symbols; ++s) {
    const double re = component_sd * rng.normal();
    const double im = component_sd * rng.normal();
    noise[2 * s] = re;
    if (2 * s + 1 < length) noise[2 * s + 1] = im;
  }
  return noise;
}

Vector channel_noise(Eigen::Index length, const ChannelConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  return channel_noise(length, cfg, rng);
}

Vector transmit(const Vector& z2, const ChannelConfig& cfg, std::uint64_t seed) {
  return z2 + channel_noise(z2.size(), cfg, seed);
}

Vector send_normalized(const Vector& z2, const ChannelConfig& cfg, std::uint64_t seed) {
  Normalized n = power_normalize(z2, cfg.power);
  return transmit(n.signal, cfg, seed) / n.gain;
}

}  // namespace wdp

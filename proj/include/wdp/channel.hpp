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

#include "wdp/rng.hpp"
#include "wdp/types.hpp"

namespace wdp {

// AWGN link. SNR is P / sigma^2 with P the average power per complex symbol.
struct ChannelConfig {
  double snr_db = 20.0;
  double power = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  // sigma^2 = P / 10^(snr_db / 10); zero for an infinite SNR.
  double noise_variance() const;
};

struct Normalized {
  Vector signal;
  double gain = 1.0;
};

// Scales v so the mean power per complex symbol (consecutive real pairs, odd
// lengths padded with a zero) equals P. Receivers divide by `gain`.
Normalized power_normalize(const Vector& v, double power);

// Circular complex Gaussian noise with variance sigma^2 per symbol, unpacked
// to reals (re, im, re, im, ...). An odd length drops the padded imaginary
// component.
Vector channel_noise(Eigen::Index length, const ChannelConfig& cfg, Rng& rng);
Vector channel_noise(Eigen::Index length, const ChannelConfig& cfg, std::uint64_t seed);

// z2 + channel_noise(z2.size(), cfg, seed).
Vector transmit(const Vector& z2, const ChannelConfig& cfg, std::uint64_t seed);

// Normalize, send, and undo the gain: what a receiver holding the gain sees.
Vector send_normalized(const Vector& z2, const ChannelConfig& cfg, std::uint64_t seed);

}  // namespace wdp

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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "wdp/channel.hpp"
#include "wdp/rng.hpp"

namespace wdp {
namespace {

Vector gaussian(Eigen::Index n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

TEST(ChannelConfig, NoiseVarianceFromSnr) {
  ChannelConfig c;
  EXPECT_NEAR(c.noise_variance(), 0.01, 1e-15);
  c.power = 2.0;
  c.snr_db = 10.0;
  EXPECT_NEAR(c.noise_variance(), 0.2, 1e-15);
  c.snr_db = std::numeric_limits<double>::infinity();
  EXPECT_EQ(c.noise_variance(), 0.0);
  c.power = 0.0;
  EXPECT_THROW(c.validate(), InvalidInput);
}

TEST(PowerNormalize, UnitPowerInputHasUnitGain) {
  Vector v = Vector::Zero(8);
  v.head(4).setConstant(std::sqrt(1.0));  // four symbols carrying one unit each
  const Normalized n = power_normalize(v, 1.0);
  EXPECT_DOUBLE_EQ(n.gain, 1.0);
}

TEST(PowerNormalize, ScaledInputHasReciprocalGain) {
  Vector v = gaussian(64, 1);
  v *= std::sqrt(32.0) / v.norm();
  const Normalized n = power_normalize(3.0 * v, 1.0);
  EXPECT_NEAR(n.gain, 1.0 / 3.0, 1e-15);
}

TEST(PowerNormalize, OutputPowerIsExact) {
  for (Eigen::Index len : {7, 96, 128}) {
    const Normalized n = power_normalize(gaussian(len, 2, 5.0), 1.7);
    const double symbols = static_cast<double>((len + 1) / 2);
    EXPECT_NEAR(n.signal.squaredNorm() / symbols, 1.7, 1e-12);
  }
}

TEST(PowerNormalize, RejectsDegenerateInput) {
  EXPECT_THROW(power_normalize(Vector(), 1.0), InvalidInput);
  EXPECT_THROW(power_normalize(Vector::Zero(4), 1.0), InvalidInput);
}

TEST(Transmit, InfiniteSnrIsIdentity) {
  ChannelConfig c;
  c.snr_db = std::numeric_limits<double>::infinity();
  const Vector v = gaussian(33, 3);
  EXPECT_TRUE((transmit(v, c, 9).array() == v.array()).all());
  EXPECT_TRUE((send_normalized(v, c, 9) - v).cwiseAbs().maxCoeff() < 1e-15);
}

TEST(Transmit, SeedsControlTheNoise) {
  const ChannelConfig c;
  const Vector v = gaussian(32, 4);
  EXPECT_TRUE((transmit(v, c, 1).array() == transmit(v, c, 1).array()).all());
  EXPECT_FALSE((transmit(v, c, 1).array() == transmit(v, c, 2).array()).all());
}

TEST(Transmit, EmpiricalSnrOverOneMillionSymbols) {
  const ChannelConfig c;
  const Eigen::Index len = 2'000'000;
  const Normalized sent = power_normalize(gaussian(len, 5), c.power);
  const Vector received = transmit(sent.signal, c, 6);
  const double signal_power = sent.signal.squaredNorm() / (len / 2);
  const double noise_power = (received - sent.signal).squaredNorm() / (len / 2);
  const double snr = 10.0 * std::log10(signal_power / noise_power);
  EXPECT_GE(snr, 19.8);
  EXPECT_LE(snr, 20.2);
}

TEST(Transmit, ComponentsHaveHalfVarianceAndAreUncorrelated) {
  const ChannelConfig c;
  const Eigen::Index symbols = 1'000'000;
  const Vector e = channel_noise(2 * symbols, c, 7);
  double re2 = 0, im2 = 0, cross = 0, re_mean = 0, im_mean = 0;
  for (Eigen::Index s = 0; s < symbols; ++s) {
    re_mean += e[2 * s];
    im_mean += e[2 * s + 1];
  }
  re_mean /= symbols;
  im_mean /= symbols;
  for (Eigen::Index s = 0; s < symbols; ++s) {
    const double re = e[2 * s] - re_mean, im = e[2 * s + 1] - im_mean;
    re2 += re * re;
    im2 += im * im;
    cross += re * im;
  }
  const double half = c.noise_variance() / 2.0;
  EXPECT_NEAR(re2 / symbols, half, 0.01 * half);
  EXPECT_NEAR(im2 / symbols, half, 0.01 * half);
  EXPECT_LT(std::abs(cross / std::sqrt(re2 * im2)), 0.01);
}

TEST(Transmit, OddLengthKeepsLength) {
  const Vector v = gaussian(5, 8);
  EXPECT_EQ(send_normalized(v, ChannelConfig{}, 1).size(), 5);
}

}  // namespace
}  // namespace wdp

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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wdp/dp.hpp"
#include "wdp/rng.hpp"

namespace wdp {
namespace {

// Sort-then-interpolate between the two nearest order statistics.
double quantile_oracle(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] * (1.0 - (pos - lo)) + v[hi] * (pos - lo);
}

std::vector<Matrix> normal_dataset(int count, int m, int k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Matrix> out;
  for (int n = 0; n < count; ++n) {
    Matrix z(m, k);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
    out.push_back(z);
  }
  return out;
}

double laplace_cdf(double x, double b) { return x < 0 ? 0.5 * std::exp(x / b) : 1.0 - 0.5 * std::exp(-x / b); }

TEST(ClipBounds, DegenerateDatasetCollapses) {
  const std::vector<Matrix> one = {Matrix::Constant(3, 4, 2.5)};
  const ClipBounds b = compute_clip_bounds(one);
  EXPECT_EQ(b.a, 2.5);
  EXPECT_EQ(b.b, 2.5);
}

TEST(ClipBounds, MatchesSortedQuantileOracle) {
  Matrix z(1, 1000);
  std::vector<double> values(1000);
  // Shuffled so the implementation cannot rely on input order.
  std::iota(values.begin(), values.end(), 1.0);
  Rng rng(4);
  std::shuffle(values.begin(), values.end(), rng.engine());
  for (int i = 0; i < 1000; ++i) z(0, i) = values[i];
  const std::vector<Matrix> data = {z};
  const ClipBounds b = compute_clip_bounds(data, 0.005, 0.995);
  EXPECT_DOUBLE_EQ(b.a, quantile_oracle(values, 0.005));
  EXPECT_DOUBLE_EQ(b.b, quantile_oracle(values, 0.995));
  EXPECT_DOUBLE_EQ(b.a, 5.995);
  EXPECT_DOUBLE_EQ(b.b, 995.005);
}

TEST(ClipBounds, SymmetricDataGivesSymmetricBounds) {
  auto data = normal_dataset(20, 4, 4, 11);
  const std::size_t n = data.size();
  for (std::size_t i = 0; i < n; ++i) data.push_back(-data[i]);
  const ClipBounds b = compute_clip_bounds(data);
  EXPECT_NEAR(b.a, -b.b, 1e-12);
}

TEST(ClipBounds, RejectsBadQuantiles) {
  const auto data = normal_dataset(2, 2, 2, 1);
  EXPECT_THROW(compute_clip_bounds(data, 0.6, 0.4), InvalidInput);
  EXPECT_THROW(compute_clip_bounds(data, -0.1, 0.5), InvalidInput);
  EXPECT_THROW(compute_clip_bounds({}, 0.1, 0.9), InvalidInput);
}

TEST(Clip, InRangeIsUnchangedAndClipIsIdempotent) {
  const auto data = normal_dataset(10, 8, 16, 2);
  const ClipBounds b = compute_clip_bounds(data);
  const Matrix inside = Matrix::Constant(2, 2, 0.5 * (b.a + b.b));
  EXPECT_TRUE((clip(inside, b).array() == inside.array()).all());
  for (const auto& z : data) {
    const Matrix once = clip(z, b);
    EXPECT_TRUE((clip(once, b).array() == once.array()).all());
    EXPECT_EQ(((once.array() < b.a) || (once.array() > b.b)).count(), 0);
  }
}

TEST(Sensitivity, ClosedFormArithmetic) {
  EXPECT_DOUBLE_EQ(sensitivity_closed_form({1.0, 4.0}, 4), 6.0);
  EXPECT_EQ(sensitivity_closed_form({2.0, 2.0}, 10), 0.0);
}

TEST(Sensitivity, PaperConfigurationReproducesPublishedValue) {
  // 28 codes x 512 dims.
  const long long n = 28LL * 512;
  const double width = 351.88 / std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(width, 2.9389, 5e-5);
  EXPECT_NEAR(sensitivity_closed_form({-width / 2, width / 2}, n), 351.88, 1e-9);
}

TEST(Sensitivity, ExtremalPairAttainsClosedForm) {
  const ClipBounds b{-1.7, 2.3};
  const std::vector<Matrix> pair = {Matrix::Constant(8, 16, b.a), Matrix::Constant(8, 16, b.b)};
  EXPECT_EQ(sensitivity_bruteforce(pair), sensitivity_closed_form(b, 128));
}

TEST(Sensitivity, IdenticalLatentsHaveZeroSensitivity) {
  const std::vector<Matrix> same(5, Matrix::Constant(3, 3, 0.7));
  EXPECT_EQ(sensitivity_bruteforce(same), 0.0);
}

TEST(Sensitivity, BruteForceNeverExceedsClosedForm) {
  const auto raw = normal_dataset(50, 8, 16, 21);
  const ClipBounds b = compute_clip_bounds(raw);
  std::vector<Matrix> clipped;
  for (const auto& z : raw) clipped.push_back(clip(z, b));
  // Independent exhaustive scan.
  double best = 0.0;
  for (std::size_t i = 0; i < clipped.size(); ++i)
    for (std::size_t j = i + 1; j < clipped.size(); ++j) best = std::max(best, (clipped[i] - clipped[j]).norm());
  EXPECT_NEAR(sensitivity_bruteforce(clipped), best, 1e-12);
  EXPECT_LE(sensitivity_bruteforce(clipped), sensitivity_closed_form(b, 128));
}

TEST(Laplace, ZeroScaleGivesZeros) {
  EXPECT_EQ(sample_laplace(100, 0.0, 3).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Laplace, SameSeedSameSamples) {
  EXPECT_TRUE((sample_laplace(1000, 1.5, 9).array() == sample_laplace(1000, 1.5, 9).array()).all());
  EXPECT_FALSE((sample_laplace(1000, 1.5, 9).array() == sample_laplace(1000, 1.5, 10).array()).all());
}

TEST(Laplace, MomentsAtOneMillionSamples) {
  const Vector x = sample_laplace(1'000'000, 2.0, 17);
  const double mean_abs = x.cwiseAbs().mean();
  EXPECT_GE(mean_abs, 1.99);
  EXPECT_LE(mean_abs, 2.01);
  std::vector<double> a(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) a[i] = std::abs(x[i]);
  std::nth_element(a.begin(), a.begin() + a.size() / 2, a.end());
  EXPECT_NEAR(a[a.size() / 2], 2.0 * std::log(2.0), 0.01 * 2.0 * std::log(2.0));
}

TEST(Laplace, KolmogorovSmirnovAgainstAnalyticCdf) {
  const double b = 1.3;
  const Vector x = sample_laplace(1'000'000, b, 23);
  std::vector<double> v(x.data(), x.data() + x.size());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = laplace_cdf(v[i], b);
    ks = std::max({ks, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  EXPECT_LT(ks, 0.005);
}

TEST(Laplace, LikelihoodRatioOnNeighboringInputsIsBoundedByEpsilon) {
  // One-element query; neighbors differ by the sensitivity.
  const double eps = 1.0;
  const double delta_f = 1.0;
  const DpParams p(eps, delta_f, 1);
  const int n = 1'000'000;
  const double lo = -3.0, width = 0.25;
  const int bins = 28;
  std::vector<double> h0(bins), h1(bins);
  const Vector n0 = sample_laplace(n, p.scale(), 31);
  const Vector n1 = sample_laplace(n, p.scale(), 32);
  for (int i = 0; i < n; ++i) {
    const double y0 = 0.0 + n0[i];
    const double y1 = delta_f + n1[i];
    const int b0 = static_cast<int>(std::floor((y0 - lo) / width));
    const int b1 = static_cast<int>(std::floor((y1 - lo) / width));
    if (b0 >= 0 && b0 < bins) ++h0[b0];
    if (b1 >= 0 && b1 < bins) ++h1[b1];
  }
  for (int k = 0; k < bins; ++k) {
    ASSERT_GT(h0[k], 1000);
    ASSERT_GT(h1[k], 1000);
    EXPECT_LE(std::abs(std::log(h0[k] / h1[k])), eps + 0.1) << "bin " << k;
  }
}

TEST(ApplyDp, NoiseIsTheSeededSampler) {
  Matrix z(4, 5);
  Rng rng(1);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
  const DpParams p(2.0, 10.0, 20);
  const Matrix y = apply_dp(z, p, 77);
  const Vector noise = sample_laplace(20, 5.0, 77);
  const Matrix diff = y - z;
  for (Eigen::Index i = 0; i < diff.size(); ++i) EXPECT_NEAR(diff.data()[i], noise[i], 1e-12);
}

TEST(ApplyDp, HugeBudgetIsNearlyTheIdentity) {
  const Matrix z = Matrix::Constant(10, 10, 0.3);
  const DpParams p(1e12, 351.88, 100);
  EXPECT_LT((apply_dp(z, p, 5) - z).cwiseAbs().maxCoeff(), 1e-6 * 351.88);
}

TEST(ApplyDp, FittedScaleAtUnitBudget) {
  const Matrix z = Matrix::Zero(400, 250);
  const DpParams p(1.0, 351.88, z.size());
  const Matrix noise = apply_dp(z, p, 8) - z;
  const LaplaceFit fit = fit_laplace_scale({noise.data(), static_cast<std::size_t>(noise.size())});
  EXPECT_NEAR(fit.scale_hat, 351.88, 0.02 * 351.88);
}

TEST(Fit, KnownScaleIsRecovered) {
  const Vector x = sample_laplace(100'000, 5.0, 41);
  EXPECT_NEAR(fit_laplace_scale({x.data(), std::size_t(x.size())}).scale_hat, 5.0, 0.1);
}

TEST(Fit, TrivialCases) {
  const std::vector<double> zeros(10, 0.0);
  EXPECT_EQ(fit_laplace_scale(zeros).scale_hat, 0.0);
  const std::vector<double> pm = {-1.0, 1.0};
  EXPECT_EQ(fit_laplace_scale(pm).scale_hat, 1.0);
  EXPECT_THROW(fit_laplace_scale({}), InvalidInput);
}

TEST(ApproximateEpsilon, Arithmetic) {
  EXPECT_EQ(approximate_epsilon({0.0, 351.88, 1}, 351.88).value(), 1.0);
  EXPECT_NEAR(approximate_epsilon({0.0, 35.188, 1}, 351.88).value(), 10.0, 1e-12);
  EXPECT_FALSE(approximate_epsilon({0.0, 0.0, 1}, 351.88).has_value());
}

TEST(ApproximateEpsilon, RoundTripRecoversBudget) {
  for (double eps : {1.0, 10.0, 100.0}) {
    const Matrix z = Matrix::Zero(1000, 100);
    const Matrix noise = apply_dp(z, DpParams(eps, 351.88, z.size()), derive_seed(3, static_cast<std::uint64_t>(eps)));
    const auto got =
        approximate_epsilon(fit_laplace_scale({noise.data(), std::size_t(noise.size())}), 351.88).value();
    EXPECT_NEAR(got, eps, 0.03 * eps);
  }
}

TEST(DpParams, RejectsBadValues) {
  EXPECT_THROW(DpParams(0.0, 1.0, 1), InvalidInput);
  EXPECT_THROW(DpParams(1.0, -1.0, 1), InvalidInput);
  EXPECT_THROW(DpParams(1.0, 1.0, 0), InvalidInput);
  EXPECT_EQ(DpParams(4.0, 2.0, 1).scale(), 0.5);
}

}  // namespace
}  // namespace wdp

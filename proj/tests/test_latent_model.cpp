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

#include <Eigen/QR>

#include "wdp/latent_model.hpp"
#include "wdp/rng.hpp"

namespace wdp {
namespace {

Matrix random_codes(int m, int k, std::uint64_t seed) {
  Rng rng(seed);
  Matrix z(m, k);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
  return z;
}

TEST(Generator, ZeroCodesGiveZeroImage) {
  const GeneratorModel g(GeneratorSpec{});
  const Image x = generate(g, Matrix::Zero(8, 16));
  EXPECT_EQ(x.size(), 96);
  EXPECT_EQ(x.pixels.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Generator, GoldenFirstCodeImage) {
  const GeneratorModel g(GeneratorSpec{});
  Matrix z = Matrix::Zero(8, 16);
  z.row(0).setOnes();
  const Image x = generate(g, z);
  EXPECT_NEAR(x.pixels[0], 0.036588063877948378, 1e-15);
  EXPECT_NEAR(x.pixels[1], 0.071358429148115826, 1e-15);
  EXPECT_NEAR(x.pixels[17], 0.049511298815271464, 1e-15);
  EXPECT_NEAR(x.pixels[42], 0.054937662902070479, 1e-15);
  EXPECT_NEAR(x.pixels[95], 0.094038618867515328, 1e-15);
  EXPECT_NEAR(x.pixels.norm(), 0.65621793588071897, 1e-14);
  // Same thing through the public map: the row sums of the first code's block.
  const Eigen::VectorXd oracle = g.block_map(0).rowwise().sum();
  EXPECT_LT((x.pixels - oracle).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Generator, SharedCodesTouchEveryBlock) {
  const GeneratorModel g(GeneratorSpec{});
  for (int code = 0; code < g.shared_count(); ++code) {
    Matrix z = Matrix::Zero(8, 16);
    z.row(code).setOnes();
    const Image x = generate(g, z);
    for (int local = g.shared_count(); local < g.m(); ++local) {
      const auto [begin, len] = g.pixel_block(local);
      EXPECT_GT(x.pixels.segment(begin, len).cwiseAbs().maxCoeff(), 0.0) << "code " << code;
    }
  }
}

TEST(Generator, LocalCodesStayInTheirBlock) {
  const GeneratorModel g(GeneratorSpec{});
  const Matrix base = random_codes(8, 16, 3);
  const Image x0 = generate(g, base);
  for (int code = g.shared_count(); code < g.m(); ++code) {
    Matrix z = base;
    z.row(code) += random_codes(1, 16, 100 + code);
    const Vector diff = generate(g, z).pixels - x0.pixels;
    const auto [begin, len] = g.pixel_block(code);
    EXPECT_EQ(len, g.block_size());
    for (int p = 0; p < g.d(); ++p) {
      if (p < begin || p >= begin + len) EXPECT_EQ(diff[p], 0.0) << "code " << code << " pixel " << p;
    }
    EXPECT_GT(diff.segment(begin, len).norm(), 0.0);
  }
}

TEST(Generator, Linearity) {
  const GeneratorModel g(GeneratorSpec{});
  const Matrix a = random_codes(8, 16, 1);
  const Matrix b = random_codes(8, 16, 2);
  const Vector lhs = generate(g, Matrix(a + b)).pixels;
  const Vector rhs = generate(g, a).pixels + generate(g, b).pixels;
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Generator, RejectsWrongShape) {
  const GeneratorModel g(GeneratorSpec{});
  EXPECT_THROW(generate(g, Matrix::Zero(7, 16)), InvalidInput);
}

TEST(Inversion, MatchesMinimumNormLeastSquares) {
  const GeneratorModel g(GeneratorSpec{});
  const Eigen::MatrixXd& a = g.synthesis();
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Matrix z_star = random_codes(8, 16, 50 + s);
    const Image x = generate(g, z_star);
    EXPECT_LE(invert(g, x, InversionConfig{}).final_mse, 1e-8);
    InversionConfig converged;
    converged.tol = 1e-28;
    converged.max_iters = 5000;
    const Inversion inv = invert(g, x, converged);
    const Eigen::VectorXd oracle = cod.solve(x.pixels);
    const Vector got = flatten(inv.codes);
    EXPECT_LT((got - oracle).norm() / oracle.norm(), 1e-6);
  }
}

TEST(Inversion, ZeroImageStopsImmediately) {
  const GeneratorModel g(GeneratorSpec{});
  const Inversion inv = invert(g, Image{Vector::Zero(96)}, InversionConfig{});
  EXPECT_EQ(inv.iterations, 0);
  EXPECT_EQ(inv.codes.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Inversion, StepBeyondStabilityLimitDiverges) {
  const GeneratorModel g(GeneratorSpec{});
  InversionConfig cfg;
  cfg.step_size = 1e3;
  ASSERT_GT(cfg.step_size, 2.0 / g.lipschitz());
  const Image x = generate(g, random_codes(8, 16, 9));
  EXPECT_THROW(invert(g, x, cfg), DivergenceError);
}

TEST(Inversion, RejectsBadConfig) {
  const GeneratorModel g(GeneratorSpec{});
  const Image x{Vector::Zero(96)};
  InversionConfig cfg;
  cfg.max_iters = 0;
  EXPECT_THROW(invert(g, x, cfg), InvalidInput);
  cfg = {};
  cfg.step_size = 0.0;
  EXPECT_THROW(invert(g, x, cfg), InvalidInput);
  cfg = {};
  cfg.tol = -1.0;
  EXPECT_THROW(invert(g, x, cfg), InvalidInput);
}

TEST(Partition, PaperLayoutOnTwentyEightCodes) {
  const PrivateIndex idx({0, 1, 3, 4, 5, 6, 7}, 28);
  const LatentCodes z(random_codes(28, 4, 5), idx);
  const Partition p = partition(z);
  EXPECT_EQ(p.private_codes.rows(), 7);
  EXPECT_EQ(p.common_codes.rows(), 21);
}

TEST(Partition, AllPrivateLeavesCommonEmpty) {
  const PrivateIndex idx({0, 1, 2, 3}, 4);
  const Partition p = partition(LatentCodes(random_codes(4, 3, 5), idx));
  EXPECT_EQ(p.common_codes.rows(), 0);
  EXPECT_EQ(p.private_codes.rows(), 4);
}

TEST(Partition, CombineIsExactInverse) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    std::vector<int> chosen;
    for (int i = 0; i < 8; ++i)
      if (rng.uniform() < 0.5) chosen.push_back(i);
    if (chosen.empty()) chosen.push_back(static_cast<int>(s % 8));
    const PrivateIndex idx(chosen, 8);
    const LatentCodes z(random_codes(8, 16, 1000 + s), idx);
    const Partition p = partition(z);
    const LatentCodes back = combine(p.private_codes, p.common_codes, idx);
    EXPECT_TRUE((back.codes.array() == z.codes.array()).all());
  }
}

TEST(Partition, ZeroingPrivateChangesOnlyPrivateRows) {
  const PrivateIndex idx({0, 1, 3, 4, 5, 6}, 8);
  const LatentCodes z(random_codes(8, 16, 77), idx);
  const Partition p = partition(z);
  const LatentCodes out = combine(Matrix::Zero(p.private_codes.rows(), 16), p.common_codes, idx);
  for (int r = 0; r < 8; ++r) {
    if (idx.contains(r)) {
      EXPECT_EQ(out.codes.row(r).cwiseAbs().maxCoeff(), 0.0);
    } else {
      EXPECT_TRUE((out.codes.row(r).array() == z.codes.row(r).array()).all());
    }
  }
}

TEST(Partition, CombineBuildsReceivedCodesElementwise) {
  const PrivateIndex idx({0, 1, 3, 4, 5, 6}, 8);
  const Matrix common = random_codes(2, 16, 8);
  const Matrix priv = random_codes(6, 16, 9);
  const LatentCodes z = combine(priv, common, idx);
  int pi = 0;
  int ci = 0;
  for (int r = 0; r < 8; ++r) {
    const Matrix& src = idx.contains(r) ? priv : common;
    const int row = idx.contains(r) ? pi++ : ci++;
    for (int c = 0; c < 16; ++c) EXPECT_EQ(z.codes(r, c), src(row, c));
  }
}

TEST(PrivateIndex, RejectsBadIndices) {
  EXPECT_THROW(PrivateIndex({}, 8), InvalidInput);
  EXPECT_THROW(PrivateIndex({1, 1}, 8), InvalidInput);
  EXPECT_THROW(PrivateIndex({8}, 8), InvalidInput);
  EXPECT_THROW(PrivateIndex({-1}, 8), InvalidInput);
}

TEST(Flatten, RoundTripsCodeByCode) {
  const Matrix z = random_codes(3, 4, 2);
  const Vector f = flatten(z);
  EXPECT_EQ(f[4], z(1, 0));
  EXPECT_TRUE((unflatten(f, 3, 4).array() == z.array()).all());
}

}  // namespace
}  // namespace wdp

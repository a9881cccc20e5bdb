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
#include <span>
#include <vector>

#include "wdp/types.hpp"

namespace wdp {

// Grayscale image as a flat pixel vector. Intensities are nominally in
// [0, 1] but are only clamped on export.
struct Image {
  Vector pixels;

  Eigen::Index size() const { return pixels.size(); }
};

// Sorted, duplicate-free, nonempty subset of {0, ..., m-1} naming the
// private codes.
class PrivateIndex {
 public:
  PrivateIndex(std::vector<int> indices, int code_count);

  const std::vector<int>& indices() const { return indices_; }
  int code_count() const { return code_count_; }
  int private_count() const { return static_cast<int>(indices_.size()); }
  int common_count() const { return code_count_ - private_count(); }
  bool contains(int code) const;

  friend bool operator==(const PrivateIndex&, const PrivateIndex&) = default;

 private:
  std::vector<int> indices_;
  int code_count_;
};

// The disentangled representation: m codes of k dims each, with the
// private/common split attached.
struct LatentCodes {
  LatentCodes(Matrix codes, PrivateIndex private_idx);

  Matrix codes;
  PrivateIndex private_idx;

  int code_count() const { return static_cast<int>(codes.rows()); }
  int code_dim() const { return static_cast<int>(codes.cols()); }
};

struct GeneratorSpec {
  int d = 96;
  int m = 8;
  int k = 16;
  int shared_count = 2;
  std::uint64_t seed = 42;
  // Local blocks are scaled orthonormal maps; shared codes add a dense
  // Gaussian layer whose per-pixel standard deviation is shared_scale for
  // standard-normal latents.
  double local_scale = 0.25;
  double shared_scale = 0.1;
};

// Seeded linear synthesis model x = sum_i A_i z_i.
//
// Shared codes (i < shared_count) touch every pixel. Local code i touches
// only pixel block i - shared_count; blocks are contiguous with size
// floor(d / (m - shared_count)). Immutable after construction.
class GeneratorModel {
 public:
  explicit GeneratorModel(const GeneratorSpec& spec);

  int d() const { return spec_.d; }
  int m() const { return spec_.m; }
  int k() const { return spec_.k; }
  int shared_count() const { return spec_.shared_count; }
  int block_size() const { return block_size_; }
  std::uint64_t seed() const { return spec_.seed; }
  const GeneratorSpec& spec() const { return spec_; }

  // d x k map of code i.
  Eigen::Ref<const Eigen::MatrixXd> block_map(int code) const;
  // d x (m*k) stacked synthesis matrix acting on row-major flattened codes.
  const Eigen::MatrixXd& synthesis() const { return synthesis_; }
  // First pixel and length of the block owned by local code i.
  std::pair<int, int> pixel_block(int code) const;
  // Largest eigenvalue of the Hessian of the inversion MSE, 2/d * A^T A.
  double lipschitz() const { return lipschitz_; }

 private:
  GeneratorSpec spec_;
  int block_size_;
  Eigen::MatrixXd synthesis_;
  double lipschitz_;
};

enum class InversionInit { kZero, kSeededRandom };

struct InversionConfig {
  int max_iters = 2000;
  double step_size = 400.0;
  double tol = 1e-8;
  InversionInit init = InversionInit::kZero;
  std::uint64_t init_seed = 0;

  void validate() const;
};

struct Inversion {
  Matrix codes;
  int iterations = 0;
  double final_mse = 0.0;
};

Image generate(const GeneratorModel& model, const Matrix& codes);
Image generate(const GeneratorModel& model, const LatentCodes& z);

// Gradient descent on MSE(generate(z), x). Stops once the MSE drops to
// cfg.tol or after cfg.max_iters updates; throws DivergenceError when the
// loss stops being finite.
Inversion invert(const GeneratorModel& model, const Image& x, const InversionConfig& cfg);

struct Partition {
  Matrix private_codes;
  Matrix common_codes;
};

Partition partition(const LatentCodes& z);
LatentCodes combine(const Matrix& private_codes, const Matrix& common_codes,
                    const PrivateIndex& private_idx);

// Row-major flatten / unflatten helpers used across modules.
Vector flatten(const Matrix& codes);
Matrix unflatten(const Eigen::Ref<const Vector>& flat, int rows, int cols);

double mse(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

}  // namespace wdp

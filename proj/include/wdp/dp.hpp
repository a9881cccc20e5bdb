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
#include <span>
#include <vector>

#include "wdp/rng.hpp"
#include "wdp/types.hpp"

namespace wdp {

// Clip range [a, b] taken as the q_low / q_high empirical quantiles of every
// scalar element in a latent dataset.
struct ClipBounds {
  double a = 0.0;
  double b = 0.0;
  double q_low = 0.005;
  double q_high = 0.995;

  void validate() const;
};

// Laplace mechanism parameters. The noise scale is always delta_f / epsilon.
class DpParams {
 public:
  DpParams(double epsilon, double delta_f, long long n_elements);

  double epsilon() const { return epsilon_; }
  double delta_f() const { return delta_f_; }
  long long n_elements() const { return n_elements_; }
  double scale() const { return delta_f_ / epsilon_; }

 private:
  double epsilon_;
  double delta_f_;
  long long n_elements_;
};

struct LaplaceFit {
  double location = 0.0;
  double scale_hat = 0.0;
  std::size_t sample_count = 0;
};

// Empirical quantile with linear interpolation between the closest order
// statistics (h = (N - 1) q). `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double q);

ClipBounds compute_clip_bounds(std::span<const Matrix> dataset, double q_low = 0.005, double q_high = 0.995);

Matrix clip(const Matrix& z, const ClipBounds& bounds);

// Euclidean distance, summed sequentially so that both sensitivity routes
// produce bit-identical results on the extremal pair.
double l2_distance(std::span<const double> x, std::span<const double> y);

// Delta_f = || b 1_n - a 1_n ||_2 = (b - a) sqrt(n).
double sensitivity_closed_form(const ClipBounds& bounds, long long n);

// Largest pairwise l2 distance between flattened latents; O(N^2) scan.
double sensitivity_bruteforce(std::span<const Matrix> clipped_dataset);

// One Lap(0, scale) draw by inverse CDF from the given stream.
double draw_laplace(Rng& rng, double scale);

// i.i.d. Lap(0, scale) by inverse CDF: x = -scale sgn(u) ln(1 - 2|u|),
// u ~ U(-1/2, 1/2).
Vector sample_laplace(std::size_t count, double scale, std::uint64_t seed);

// z_private + N with N_ij ~ Lap(0, delta_f / epsilon), drawn row-major from
// sample_laplace(z.size(), scale, seed).
Matrix apply_dp(const Matrix& z_private, const DpParams& params, std::uint64_t seed);

// Maximum-likelihood Laplace scale for a known location of zero: mean |x|.
LaplaceFit fit_laplace_scale(std::span<const double> samples);

// epsilon' = delta_f / s. Returns nullopt when the fitted scale is zero
// (no measurable noise, epsilon' unbounded).
std::optional<double> approximate_epsilon(const LaplaceFit& fit, double delta_f);

}  // namespace wdp

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

#include "wdp/dp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wdp/rng.hpp"

namespace wdp {

void ClipBounds::validate() const {
  if (!(a <= b)) throw InvalidInput("clip bounds require a <= b");
  if (!(q_low >= 0.0 && q_low < q_high && q_high <= 1.0)) {
    throw InvalidInput("clip quantiles require 0 <= q_low < q_high <= 1");
  }
}

DpParams::DpParams(double epsilon, double delta_f, long long n_elements)
    : epsilon_(epsilon), delta_f_(delta_f), n_elements_(n_elements) {
  if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be > 0");
  if (!(delta_f >= 0.0) || !std::isfinite(delta_f)) throw InvalidInput("delta_f must be finite and >= 0");
  if (n_elements < 1) throw InvalidInput("n_elements must be >= 1");
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidInput("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

ClipBounds compute_clip_bounds(std::span<const Matrix> dataset, double q_low, double q_high) {
  ClipBounds out{0.0, 0.0, q_low, q_high};
  if (!(q_low >= 0.0 && q_low < q_high && q_high <= 1.0)) {
    throw InvalidInput("clip quantiles require 0 <= q_low < q_high <= 1");
  }
  std::vector<double> values;
  for (const Matrix& z : dataset) values.insert(values.end(), z.data(), z.data() + z.size());
  if (values.empty()) throw InvalidInput("clip bounds need a nonempty dataset");
  std::sort(values.begin(), values.end());
  out.a = quantile_sorted(values, q_low);
  out.b = quantile_sorted(values, q_high);
  return out;
}

Matrix clip(const Matrix& z, const ClipBounds& bounds) {
  bounds.validate();
  return z.cwiseMax(bounds.a).cwiseMin(bounds.b);
}

double l2_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("l2_distance size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

double sensitivity_closed_form(const ClipBounds& bounds, long long n) {
  bounds.validate();
  if (n < 1) throw InvalidInput("sensitivity needs n >= 1");
  const std::vector<double> low(static_cast<std::size_t>(n), bounds.a);
  const std::vector<double> high(static_cast<std::size_t>(n), bounds.b);
  return l2_distance(high, low);
}

double sensitivity_bruteforce(std::span<const Matrix> clipped_dataset) {
  if (clipped_dataset.size() < 2) throw InvalidInput("brute-force sensitivity needs at least 2 latents");
  double best = 0.0;
  for (std::size_t i = 0; i < clipped_dataset.size(); ++i) {
    const Matrix& zi = clipped_dataset[i];
    for (std::size_t j = i + 1; j < clipped_dataset.size(); ++j) {
      const Matrix& zj = clipped_dataset[j];
      if (zi.size() != zj.size()) throw InvalidInput("latents in dataset differ in size");
      best = std::max(best, l2_distance({zi.data(), std::size_t(zi.size())}, {zj.data(), std::size_t(zj.size())}));
    }
  }
  return best;
}

double draw_laplace(Rng& rng, double scale) {
  double u;
  do {
    u = rng.uniform() - 0.5;
  } while (u == -0.5);
  const double sgn = (u > 0.0) - (u < 0.0);
  return -scale * sgn * std::log(1.0 - 2.0 * std::abs(u));
}

Vector sample_laplace(std::size_t count, double scale, std::uint64_t seed) {
  if (!(scale >= 0.0)) throw InvalidInput("Laplace scale must be >= 0");
  Rng rng(seed);
  Vector out(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) out[static_cast<Eigen::Index>(i)] = draw_laplace(rng, scale);
  return out;
}

Matrix apply_dp(const Matrix& z_private, const DpParams& params, std::uint64_t seed) {
  Vector noise = sample_laplace(static_cast<std::size_t>(z_private.size()), params.scale(), seed);
  Matrix out = z_private;
  Eigen::Map<Vector>(out.data(), out.size()) += noise;
  return out;
}

LaplaceFit fit_laplace_scale(std::span<const double> samples) {
  if (samples.empty()) throw InvalidInput("Laplace fit needs samples");
  double acc = 0.0;
  for (double x : samples) {
    if (!std::isfinite(x)) throw InvalidInput("Laplace fit got a non-finite sample");
    acc += std::abs(x);
  }
  return LaplaceFit{0.0, acc / static_cast<double>(samples.size()), samples.size()};
}

std::optional<double> approximate_epsilon(const LaplaceFit& fit, double delta_f) {
  if (fit.scale_hat == 0.0) return std::nullopt;
  return delta_f / fit.scale_hat;
}

}  // namespace wdp

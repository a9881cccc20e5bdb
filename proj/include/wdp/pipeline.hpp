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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wdp/channel.hpp"
#include "wdp/io.hpp"
#include "wdp/latent_model.hpp"
#include "wdp/nets.hpp"

namespace wdp {

// Everything a transmission needs. Without nets the system is the
// unprotected baseline: Z is sent as-is and Bob generates directly.
struct System {
  std::shared_ptr<const GeneratorModel> generator;
  InversionConfig inversion;
  PrivateIndex private_idx;
  std::optional<NetPair> nets;
  ChannelConfig channel;
  double delta_f = 0.0;
  double match_threshold = 0.9;
};

struct LinkSeeds {
  std::uint64_t bob = 0;
  std::uint64_t eve = 0;
};

struct TransmissionResult {
  Image x_hat_bob;
  Image x_hat_eve;
  // Per-image estimate from this image's fake noise; nullopt when the
  // protection added none.
  std::optional<double> epsilon_prime;
  double recon_mse_bob = 0.0;
  double recon_mse_eve = 0.0;
  double psnr_bob = 0.0;
  double psnr_eve = 0.0;
  double similarity_bob = 0.0;
  double similarity_eve = 0.0;
  bool identity_match_bob = false;
  bool identity_match_eve = false;
  // Z2_private - Z_private, flattened; empty for the baseline.
  Vector fake_noise;
};

// PSNR for pixel range [0, 1]: 10 log10(1 / mse).
double psnr(double mse);

double cosine_similarity(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

// Inverts both images and compares their flattened latents.
double identity_similarity(const Image& x_src, const Image& x_rec, const GeneratorModel& generator,
                           const InversionConfig& inversion);
bool identity_match(const Image& x_src, const Image& x_rec, const GeneratorModel& generator, double threshold,
                    const InversionConfig& inversion = {});

// Alice: invert, partition, protect, recombine, normalize. Bob: receive,
// split, deprotect, recombine, generate. Eve: generate from what she hears.
TransmissionResult transmit_image(const Image& x, const System& system, const LinkSeeds& seeds);

enum class Party { kBob, kEve };

// Fraction of results whose reconstruction is judged a different identity.
double fppsr(std::span<const TransmissionResult> results, Party party);

struct SweepRow {
  double epsilon = 0.0;  // +inf on the baseline row
  std::optional<double> epsilon_prime;
  double mse_bob = 0.0;
  double mse_eve = 0.0;
  double psnr_bob = 0.0;
  double psnr_eve = 0.0;
  double fppsr_bob = 0.0;
  double fppsr_eve = 0.0;
  bool is_baseline = false;
};

// Means over the results in index order; epsilon' is fitted on the pooled
// fake noise of every image.
SweepRow summarize(std::span<const TransmissionResult> results, double epsilon, double delta_f, bool is_baseline);

// Runs transmit_image over a test set with per-image seeds. `threads` > 1
// splits images across workers; results stay in index order.
std::vector<TransmissionResult> evaluate(std::span<const Image> images, const System& system,
                                         std::span<const LinkSeeds> seeds, int threads = 1);

// The unprotected benchmark over a test set.
SweepRow run_baseline(std::span<const Image> images, const System& system_without_protection,
                      std::span<const LinkSeeds> seeds, int threads = 1);

struct SweepReport {
  std::vector<SweepRow> rows;  // protected rows ascending in epsilon, baseline last

  const SweepRow& baseline() const;
  std::string to_csv() const;
};

inline constexpr const char* kReportHeader =
    "epsilon,epsilon_prime,mse_bob,mse_eve,psnr_bob,psnr_eve,fppsr_bob,fppsr_eve,is_baseline";

// One CSV line (no newline) with fixed 6-decimal formatting.
std::string format_row(const SweepRow& row);

}  // namespace wdp

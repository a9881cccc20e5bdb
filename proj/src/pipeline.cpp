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

#include "wdp/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <thread>

#include "wdp/dp.hpp"

namespace wdp {

double psnr(double mse) { return 10.0 * std::log10(1.0 / mse); }

double cosine_similarity(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  if (a.size() != b.size()) throw InvalidInput("cosine similarity size mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw InvalidInput("zero-norm embedding");
  return a.dot(b) / (na * nb);
}

double identity_similarity(const Image& x_src, const Image& x_rec, const GeneratorModel& generator,
                           const InversionConfig& inversion) {
  const Inversion src = invert(generator, x_src, inversion);
  const Inversion rec = invert(generator, x_rec, inversion);
  return cosine_similarity(flatten(src.codes), flatten(rec.codes));
}

bool identity_match(const Image& x_src, const Image& x_rec, const GeneratorModel& generator, double threshold,
                    const InversionConfig& inversion) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidInput("identity threshold must be in (0, 1)");
  return identity_similarity(x_src, x_rec, generator, inversion) >= threshold;
}

TransmissionResult transmit_image(const Image& x, const System& system, const LinkSeeds& seeds) {
  if (!system.generator) throw InvalidInput("system has no generator");
  const GeneratorModel& gen = *system.generator;
  const PrivateIndex& idx = system.private_idx;
  if (idx.code_count() != gen.m()) throw InvalidInput("private index does not match generator code count");

  // Alice.
  const LatentCodes z(invert(gen, x, system.inversion).codes, idx);
  const Partition parts = partition(z);
  Matrix z2 = z.codes;
  TransmissionResult out;
  if (system.nets) {
    const int d = idx.private_count() * gen.k();
    if (system.nets->protection.dim() != d) {
      throw InvalidInput("nets expect D=" + std::to_string(system.nets->protection.dim()) +
                         ", private partition has D=" + std::to_string(d));
    }
    const Matrix protected_codes = protect(system.nets->protection, parts.private_codes);
    out.fake_noise = flatten(Matrix(protected_codes - parts.private_codes));
    z2 = combine(protected_codes, parts.common_codes, idx).codes;
  }
  const Normalized sent = power_normalize(flatten(z2), system.channel.power);

  // Both receivers know the gain.
  const Vector y1 = transmit(sent.signal, system.channel, seeds.bob) / sent.gain;
  const Vector y2 = transmit(sent.signal, system.channel, seeds.eve) / sent.gain;

  // Bob.
  Matrix s1 = unflatten(y1, gen.m(), gen.k());
  if (system.nets) {
    const Partition received = partition(LatentCodes(s1, idx));
    s1 = combine(deprotect(system.nets->deprotection, received.private_codes), received.common_codes, idx).codes;
  }
  out.x_hat_bob = generate(gen, s1);
  // Eve.
  out.x_hat_eve = generate(gen, unflatten(y2, gen.m(), gen.k()));

  out.recon_mse_bob = mse(out.x_hat_bob.pixels, x.pixels);
  out.recon_mse_eve = mse(out.x_hat_eve.pixels, x.pixels);
  out.psnr_bob = psnr(out.recon_mse_bob);
  out.psnr_eve = psnr(out.recon_mse_eve);

  const Vector source_embedding = flatten(z.codes);
  out.similarity_bob =
      cosine_similarity(source_embedding, flatten(invert(gen, out.x_hat_bob, system.inversion).codes));
  out.similarity_eve =
      cosine_similarity(source_embedding, flatten(invert(gen, out.x_hat_eve, system.inversion).codes));
  out.identity_match_bob = out.similarity_bob >= system.match_threshold;
  out.identity_match_eve = out.similarity_eve >= system.match_threshold;

  if (out.fake_noise.size() > 0) {
    out.epsilon_prime = approximate_epsilon(
        fit_laplace_scale({out.fake_noise.data(), std::size_t(out.fake_noise.size())}), system.delta_f);
  }

  if (!std::isfinite(out.recon_mse_bob) || !std::isfinite(out.recon_mse_eve) || std::isnan(out.psnr_bob) ||
      std::isnan(out.psnr_eve) || !std::isfinite(out.similarity_bob) || !std::isfinite(out.similarity_eve)) {
    throw NumericalError("non-finite transmission metric (mse_bob " + std::to_string(out.recon_mse_bob) +
                         ", mse_eve " + std::to_string(out.recon_mse_eve) + ")");
  }
  return out;
}

double fppsr(std::span<const TransmissionResult> results, Party party) {
  if (results.empty()) throw InvalidInput("fppsr needs results");
  std::size_t different = 0;
  for (const auto& r : results) {
    const bool match = party == Party::kBob ? r.identity_match_bob : r.identity_match_eve;
    if (!match) ++different;
  }
  return static_cast<double>(different) / static_cast<double>(results.size());
}

SweepRow summarize(std::span<const TransmissionResult> results, double epsilon, double delta_f, bool is_baseline) {
  if (results.empty()) throw InvalidInput("cannot summarize an empty result set");
  SweepRow row;
  row.epsilon = epsilon;
  row.is_baseline = is_baseline;
  std::vector<double> pooled;
  for (const auto& r : results) {
    row.mse_bob += r.recon_mse_bob;
    row.mse_eve += r.recon_mse_eve;
    row.psnr_bob += r.psnr_bob;
    row.psnr_eve += r.psnr_eve;
    pooled.insert(pooled.end(), r.fake_noise.data(), r.fake_noise.data() + r.fake_noise.size());
  }
  const double n = static_cast<double>(results.size());
  row.mse_bob /= n;
  row.mse_eve /= n;
  row.psnr_bob /= n;
  row.psnr_eve /= n;
  row.fppsr_bob = fppsr(results, Party::kBob);
  row.fppsr_eve = fppsr(results, Party::kEve);
  if (!pooled.empty()) row.epsilon_prime = approximate_epsilon(fit_laplace_scale(pooled), delta_f);
  return row;
}

std::vector<TransmissionResult> evaluate(std::span<const Image> images, const System& system,
                                         std::span<const LinkSeeds> seeds, int threads) {
  if (images.size() != seeds.size()) throw InvalidInput("one seed pair per image required");
  std::vector<TransmissionResult> results(images.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads < 1 ? 1 : threads, images.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < images.size(); ++i) results[i] = transmit_image(images[i], system, seeds[i]);
    return results;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < images.size(); i += workers) {
          results[i] = transmit_image(images[i], system, seeds[i]);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

SweepRow run_baseline(std::span<const Image> images, const System& system_without_protection,
                      std::span<const LinkSeeds> seeds, int threads) {
  if (system_without_protection.nets) throw InvalidInput("baseline system must not carry nets");
  const auto results = evaluate(images, system_without_protection, seeds, threads);
  return summarize(results, std::numeric_limits<double>::infinity(), system_without_protection.delta_f, true);
}

const SweepRow& SweepReport::baseline() const {
  for (const auto& r : rows)
    if (r.is_baseline) return r;
  throw InvalidInput("report has no baseline row");
}

std::string format_row(const SweepRow& row) {
  const double eps_prime = row.epsilon_prime.value_or(std::numeric_limits<double>::infinity());
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d", row.epsilon, eps_prime, row.mse_bob,
                row.mse_eve, row.psnr_bob, row.psnr_eve, row.fppsr_bob, row.fppsr_eve, row.is_baseline ? 1 : 0);
  return buf;
}

std::string SweepReport::to_csv() const {
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& r : rows) out += format_row(r) + "\n";
  return out;
}

}  // namespace wdp

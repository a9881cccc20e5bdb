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

#include "wdp/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <exception>
#include <iostream>
#include <thread>

#include "json.hpp"
#include "wdp/rng.hpp"

namespace wdp {
namespace {

// Runs body(i) for i in [0, n) on `threads` workers; each index is touched by
// exactly one worker, so writes to per-index slots need no locking.
template <typename F>
void parallel_for(std::size_t n, int threads, F&& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::max(threads, 1), n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

const char* const kStreams[] = {"train_data", "test_data", "calib_data", "train",
                                "bob",        "eve",       "calib_bob",  "calib_eve"};

std::vector<LinkSeeds> link_seeds(std::uint64_t bob_stream, std::uint64_t eve_stream, std::size_t count) {
  std::vector<LinkSeeds> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = {derive_seed(bob_stream, i), derive_seed(eve_stream, i)};
  return out;
}

std::vector<Matrix> invert_all(const GeneratorModel& gen, const std::vector<Image>& images,
                               const InversionConfig& inversion, int threads) {
  std::vector<Matrix> out(images.size());
  parallel_for(images.size(), threads, [&](std::size_t i) { out[i] = invert(gen, images[i], inversion).codes; });
  return out;
}

}  // namespace

std::string per_image_csv(const std::vector<TransmissionResult>& results) {
  std::string out = "idx,mse_bob,mse_eve,psnr_bob,psnr_eve,similarity_bob,similarity_eve,match_bob,match_eve,epsilon_prime\n";
  char buf[512];
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.6f,%.6f,%.9f,%.9f,%d,%d,%.6f\n", i, r.recon_mse_bob,
                  r.recon_mse_eve, r.psnr_bob, r.psnr_eve, r.similarity_bob, r.similarity_eve,
                  r.identity_match_bob ? 1 : 0, r.identity_match_eve ? 1 : 0,
                  r.epsilon_prime.value_or(std::numeric_limits<double>::infinity()));
    out += buf;
  }
  return out;
}

namespace {

void log_row(const char* what, const SweepRow& row) {
  std::fprintf(stderr, "[%s] eps=%s eps'=%.3f mse_bob=%.6g mse_eve=%.6g fppsr_bob=%.3f fppsr_eve=%.3f\n", what,
               row.is_baseline ? "baseline" : epsilon_tag(row.epsilon).c_str(),
               row.epsilon_prime.value_or(std::numeric_limits<double>::infinity()), row.mse_bob, row.mse_eve,
               row.fppsr_bob, row.fppsr_eve);
}

}  // namespace

std::string SeedManifest::to_text() const {
  std::string out = "# child = mix64(parent ^ mix64(fnv1a(stream))); per-image seeds: mix64(child ^ mix64(index))\n";
  out += "master = " + std::to_string(master) + "\n";
  for (const char* name : kStreams) out += std::string(name) + " = " + std::to_string(streams.at(name)) + "\n";
  return out;
}

SeedManifest make_seed_manifest(const RunConfig& cfg) {
  SeedManifest m{cfg.seed, {}};
  for (const char* name : kStreams) m.streams[name] = derive_seed(cfg.seed, name);
  return m;
}

std::vector<Image> synthesize_images(const GeneratorModel& generator, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Image> out;
  out.reserve(static_cast<std::size_t>(count));
  Matrix z(generator.m(), generator.k());
  for (int n = 0; n < count; ++n) {
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
    out.push_back(generate(generator, z));
  }
  return out;
}

TrainingSet make_training_set(const std::vector<Matrix>& latents, const PrivateIndex& idx) {
  if (latents.empty()) throw InvalidInput("training set needs latents");
  const Eigen::Index k = latents.front().cols();
  TrainingSet set{Matrix(static_cast<Eigen::Index>(latents.size()), idx.private_count() * k),
                  Matrix(static_cast<Eigen::Index>(latents.size()), idx.common_count() * k)};
  for (std::size_t j = 0; j < latents.size(); ++j) {
    const Partition p = partition(LatentCodes(latents[j], idx));
    set.privates.row(static_cast<Eigen::Index>(j)) = flatten(p.private_codes).transpose();
    if (set.commons.cols() > 0) set.commons.row(static_cast<Eigen::Index>(j)) = flatten(p.common_codes).transpose();
  }
  return set;
}

TrainConfig Experiment::train_config() const {
  TrainConfig t;
  t.lambda = cfg.lambda;
  t.lr0 = cfg.lr0;
  t.lr_min = cfg.lr_min;
  t.epochs = cfg.epochs;
  t.batch_size = cfg.batch_size;
  t.t0 = cfg.t0;
  t.t_mult = cfg.t_mult;
  t.init_scale = cfg.init_scale;
  t.clip_before_noise = cfg.clip_before_noise;
  t.seed = seeds.at("train");
  return t;
}

System Experiment::system(std::optional<NetPair> nets) const {
  return System{generator, inversion, private_idx, std::move(nets), channel, delta_f, match_threshold};
}

DpParams Experiment::dp(double epsilon) const { return DpParams(epsilon, delta_f, sensitivity_n); }

double calibrate_threshold(const Experiment& exp) {
  const auto images = synthesize_images(*exp.generator, exp.cfg.calib_size, exp.seeds.at("calib_data"));
  const auto seeds = link_seeds(exp.seeds.at("calib_bob"), exp.seeds.at("calib_eve"), images.size());
  System baseline = exp.system(std::nullopt);
  baseline.match_threshold = 0.5;
  const auto results = evaluate(images, baseline, seeds, exp.cfg.threads);
  std::vector<double> sims;
  for (const auto& r : results) sims.push_back(r.similarity_bob);
  std::sort(sims.begin(), sims.end());
  return quantile_sorted(sims, exp.cfg.calib_quantile);
}

Experiment prepare_experiment(const RunConfig& cfg) {
  GeneratorSpec spec;
  spec.d = cfg.d;
  spec.m = cfg.m;
  spec.k = cfg.k;
  spec.shared_count = cfg.shared_count;
  spec.seed = cfg.gen_seed;
  spec.local_scale = cfg.local_scale;
  spec.shared_scale = cfg.shared_scale;

  Experiment exp{cfg,
                 make_seed_manifest(cfg),
                 std::make_shared<const GeneratorModel>(spec),
                 PrivateIndex(cfg.private_idx, cfg.m),
                 InversionConfig{cfg.inv_max_iters, cfg.inv_step_size, cfg.inv_tol, InversionInit::kZero, 0},
                 ChannelConfig{cfg.snr_db, cfg.power, 0},
                 {}, {}, {}, 0, 0.0, {}, {}, 0.0, false};

  const auto train_images = synthesize_images(*exp.generator, cfg.train_size, exp.seeds.at("train_data"));
  exp.train_latents = invert_all(*exp.generator, train_images, exp.inversion, cfg.threads);
  exp.bounds = compute_clip_bounds(exp.train_latents, cfg.q_low, cfg.q_high);
  exp.sensitivity_n = static_cast<long long>(cfg.sensitivity_scope == SensitivityScope::kFull
                                                 ? cfg.m
                                                 : exp.private_idx.private_count()) *
                      cfg.k;
  exp.delta_f = sensitivity_closed_form(exp.bounds, exp.sensitivity_n);
  exp.train_set = make_training_set(exp.train_latents, exp.private_idx);

  exp.test_images = synthesize_images(*exp.generator, cfg.test_size, exp.seeds.at("test_data"));
  exp.test_seeds = link_seeds(exp.seeds.at("bob"), exp.seeds.at("eve"), exp.test_images.size());

  if (cfg.match_threshold) {
    exp.match_threshold = *cfg.match_threshold;
  } else {
    exp.match_threshold = calibrate_threshold(exp);
    exp.threshold_calibrated = true;
  }
  return exp;
}

std::string epsilon_tag(double epsilon) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, epsilon);
  return std::string(buf, ptr);
}

std::filesystem::path OutputLayout::checkpoint(double epsilon) const {
  return root / "checkpoints" / ("eps_" + epsilon_tag(epsilon) + ".wdpc");
}
std::filesystem::path OutputLayout::checkpoint_sidecar(double epsilon) const {
  return root / "checkpoints" / ("eps_" + epsilon_tag(epsilon) + ".json");
}
std::filesystem::path OutputLayout::loss_curve(double epsilon) const {
  return root / "train" / ("eps_" + epsilon_tag(epsilon) + "_loss.csv");
}
std::filesystem::path OutputLayout::eval_metrics(double epsilon) const {
  return root / "eval" / ("eps_" + epsilon_tag(epsilon) + ".csv");
}
std::filesystem::path OutputLayout::image_dir(const std::string& tag) const { return root / ("eps_" + tag); }

std::string checkpoint_sidecar_json(const Experiment& exp, double epsilon) {
  const RunConfig& c = exp.cfg;
  const TrainConfig t = exp.train_config();
  nlohmann::json j;
  j["format"] = "WDPC";
  j["version"] = kCheckpointVersion;
  j["epsilon"] = epsilon;
  j["delta_f"] = exp.delta_f;
  j["D"] = exp.private_idx.private_count() * c.k;
  j["train_config"] = {{"lambda", t.lambda},
                       {"lr0", t.lr0},
                       {"lr_min", t.lr_min},
                       {"epochs", t.epochs},
                       {"batch_size", t.batch_size},
                       {"t0", t.t0},
                       {"t_mult", t.t_mult},
                       {"init_scale", t.init_scale},
                       {"clip_before_noise", t.clip_before_noise},
                       {"seed", t.seed}};
  j["data"] = {{"seed", c.seed},
               {"train_size", c.train_size},
               {"d", c.d},
               {"m", c.m},
               {"k", c.k},
               {"shared_count", c.shared_count},
               {"private_idx", exp.private_idx.indices()},
               {"gen_seed", c.gen_seed},
               {"local_scale", c.local_scale},
               {"shared_scale", c.shared_scale},
               {"inv_max_iters", c.inv_max_iters},
               {"inv_step_size", c.inv_step_size},
               {"inv_tol", c.inv_tol},
               {"q_low", c.q_low},
               {"q_high", c.q_high},
               {"sensitivity_scope", c.sensitivity_scope == SensitivityScope::kFull ? "full" : "private"},
               {"snr_db", c.snr_db},
               {"power", c.power}};
  return j.dump(2) + "\n";
}

NetPair train_and_save(const Experiment& exp, double epsilon, const OutputLayout& out) {
  std::fprintf(stderr, "[train] eps=%s D=%d delta_f=%.4f\n", epsilon_tag(epsilon).c_str(),
               exp.private_idx.private_count() * exp.cfg.k, exp.delta_f);
  TrainResult result = train(exp.train_set, exp.dp(epsilon), exp.bounds, exp.channel, exp.train_config());
  NetPair nets{std::move(result.protection), std::move(result.deprotection)};
  write_checkpoint(out.checkpoint(epsilon), nets);
  write_file(out.checkpoint_sidecar(epsilon), checkpoint_sidecar_json(exp, epsilon));
  std::string curve = "epoch,lr,loss\n";
  char buf[128];
  for (const auto& e : result.curve) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g\n", e.epoch, e.lr, e.mean_loss);
    curve += buf;
  }
  write_file(out.loss_curve(epsilon), curve);
  return nets;
}

namespace {

bool checkpoint_is_current(const Experiment& exp, double epsilon, const OutputLayout& out) {
  if (!std::filesystem::exists(out.checkpoint(epsilon)) || !std::filesystem::exists(out.checkpoint_sidecar(epsilon))) {
    return false;
  }
  return read_file(out.checkpoint_sidecar(epsilon)) == checkpoint_sidecar_json(exp, epsilon);
}

}  // namespace

NetPair load_or_train(const Experiment& exp, double epsilon, const OutputLayout& out) {
  if (checkpoint_is_current(exp, epsilon, out)) return read_checkpoint(out.checkpoint(epsilon));
  if (exp.cfg.no_train) {
    throw MissingArtifact("missing checkpoint for epsilon " + epsilon_tag(epsilon) + " (" +
                          out.checkpoint(epsilon).string() + ")");
  }
  return train_and_save(exp, epsilon, out);
}

void write_run_manifest(const Experiment& exp, const OutputLayout& out) {
  write_file(out.root / "config.resolved", exp.cfg.resolved_text());
  std::string seeds = exp.seeds.to_text();
  seeds += "gen_seed = " + std::to_string(exp.cfg.gen_seed) + "\n";
  write_file(out.root / "seeds.used", seeds);
  char buf[256];
  std::snprintf(buf, sizeof buf, "match_threshold = %.17g\ncalibrated = %s\ndelta_f = %.17g\nclip_a = %.17g\nclip_b = %.17g\n",
                exp.match_threshold, exp.threshold_calibrated ? "true" : "false", exp.delta_f, exp.bounds.a,
                exp.bounds.b);
  write_file(out.root / "calibration.txt", buf);
}

void dump_images(const std::vector<TransmissionResult>& results, const OutputLayout& out, const std::string& tag) {
  const auto dir = out.image_dir(tag);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::string name = "img_" + std::to_string(i) + ".pgm";
    write_pgm(dir / "bob" / name, results[i].x_hat_bob);
    write_pgm(dir / "eve" / name, results[i].x_hat_eve);
  }
}

SweepReport run_sweep(const RunConfig& cfg) {
  const Experiment exp = prepare_experiment(cfg);
  const OutputLayout out{cfg.out};
  write_run_manifest(exp, out);

  std::vector<double> epsilons = cfg.epsilons;
  std::sort(epsilons.begin(), epsilons.end());
  if (cfg.no_train) {
    std::string missing;
    for (double e : epsilons) {
      if (!checkpoint_is_current(exp, e, out)) missing += (missing.empty() ? "" : ", ") + epsilon_tag(e);
    }
    if (!missing.empty()) throw MissingArtifact("missing checkpoint for epsilon: " + missing);
  }

  SweepReport report;
  for (double e : epsilons) {
    const NetPair nets = load_or_train(exp, e, out);
    const auto results = evaluate(exp.test_images, exp.system(nets), exp.test_seeds, cfg.threads);
    write_file(out.eval_metrics(e), per_image_csv(results));
    if (cfg.dump_images) dump_images(results, out, epsilon_tag(e));
    report.rows.push_back(summarize(results, e, exp.delta_f, false));
    log_row("sweep", report.rows.back());
  }
  const auto base = evaluate(exp.test_images, exp.system(std::nullopt), exp.test_seeds, cfg.threads);
  if (cfg.dump_images) dump_images(base, out, "baseline");
  report.rows.push_back(summarize(base, std::numeric_limits<double>::infinity(), exp.delta_f, true));
  log_row("sweep", report.rows.back());
  write_file(out.report(), report.to_csv());
  return report;
}

}  // namespace wdp

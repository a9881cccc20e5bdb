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

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "wdp/config.hpp"
#include "wdp/dp.hpp"
#include "wdp/io.hpp"
#include "wdp/pipeline.hpp"

namespace wdp {

// Named seed streams derived from the master seed by derive_seed().
struct SeedManifest {
  std::uint64_t master = 0;
  std::map<std::string, std::uint64_t> streams;

  std::uint64_t at(const std::string& name) const { return streams.at(name); }
  std::string to_text() const;
};

SeedManifest make_seed_manifest(const RunConfig& cfg);

// Synthetic images generated from i.i.d. standard-normal latents.
std::vector<Image> synthesize_images(const GeneratorModel& generator, int count, std::uint64_t seed);

// Everything derived from a RunConfig before any nets are trained: the
// generator, the three data splits (inverted on Alice's side), clip bounds,
// sensitivity, the identity threshold, and per-image link seeds.
struct Experiment {
  RunConfig cfg;
  SeedManifest seeds;
  std::shared_ptr<const GeneratorModel> generator;
  PrivateIndex private_idx;
  InversionConfig inversion;
  ChannelConfig channel;

  std::vector<Matrix> train_latents;
  TrainingSet train_set;
  ClipBounds bounds;
  long long sensitivity_n = 0;
  double delta_f = 0.0;

  std::vector<Image> test_images;
  std::vector<LinkSeeds> test_seeds;
  double match_threshold = 0.0;
  bool threshold_calibrated = false;

  TrainConfig train_config() const;
  System system(std::optional<NetPair> nets) const;
  DpParams dp(double epsilon) const;
};

Experiment prepare_experiment(const RunConfig& cfg);

// Rows of a flattened training set from inverted latents.
TrainingSet make_training_set(const std::vector<Matrix>& latents, const PrivateIndex& idx);

// Threshold = calib_quantile-quantile of Bob's baseline similarities on a
// separate calibration split.
double calibrate_threshold(const Experiment& exp);

// Filesystem layout under cfg.out.
struct OutputLayout {
  std::filesystem::path root;

  std::filesystem::path checkpoint(double epsilon) const;
  std::filesystem::path checkpoint_sidecar(double epsilon) const;
  std::filesystem::path loss_curve(double epsilon) const;
  std::filesystem::path eval_metrics(double epsilon) const;
  std::filesystem::path image_dir(const std::string& tag) const;
  std::filesystem::path report() const { return root / "report.csv"; }
  std::filesystem::path baseline() const { return root / "baseline.csv"; }
};

// Shortest round-trip spelling used in file names ("1", "0.5", "800").
std::string epsilon_tag(double epsilon);

// JSON sidecar describing how a checkpoint was produced; also the cache key.
std::string checkpoint_sidecar_json(const Experiment& exp, double epsilon);

// Trains nets for one budget and writes the checkpoint, sidecar and loss
// curve.
NetPair train_and_save(const Experiment& exp, double epsilon, const OutputLayout& out);

// Loads the cached checkpoint when its sidecar matches the current
// configuration; otherwise trains, unless cfg.no_train is set.
NetPair load_or_train(const Experiment& exp, double epsilon, const OutputLayout& out);

// One row per test image: reconstruction and identity metrics for both
// receivers, plus the image's own fitted epsilon'.
std::string per_image_csv(const std::vector<TransmissionResult>& results);

// Writes config.resolved, seeds.used and calibration.txt.
void write_run_manifest(const Experiment& exp, const OutputLayout& out);

void dump_images(const std::vector<TransmissionResult>& results, const OutputLayout& out, const std::string& tag);

// Trains or loads one net pair per budget, evaluates each on the test set,
// adds the baseline row, and writes report.csv (plus image dumps).
SweepReport run_sweep(const RunConfig& cfg);

}  // namespace wdp

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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wdp/types.hpp"

namespace wdp {

// Bad key, unparsable value, or violated invariant in the run configuration.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, std::string where, const std::string& message)
      : Error("config error: key '" + key + "' (" + where + "): " + message),
        key_(std::move(key)),
        where_(std::move(where)) {}
  const std::string& key() const { return key_; }
  const std::string& where() const { return where_; }

 private:
  std::string key_;
  std::string where_;
};

enum class SensitivityScope { kFull, kPrivate };

// Every tunable as one flat document. Defaults follow the published training
// settings where one exists and desk-scale dimensions otherwise.
struct RunConfig {
  std::uint64_t seed = 1;

  // Generator.
  int d = 96;
  int m = 8;
  int k = 16;
  int shared_count = 2;
  std::vector<int> private_idx = {0, 1, 3, 4, 5, 6};
  std::uint64_t gen_seed = 42;
  double local_scale = 0.25;
  double shared_scale = 0.1;

  // Inversion.
  int inv_max_iters = 2000;
  double inv_step_size = 400.0;
  double inv_tol = 1e-8;

  // Privacy.
  double q_low = 0.005;
  double q_high = 0.995;
  SensitivityScope sensitivity_scope = SensitivityScope::kFull;
  bool clip_before_noise = true;
  double epsilon = 1.0;
  std::vector<double> epsilons = {1, 3, 5, 8, 10, 15, 30, 100, 300, 800};

  // Channel.
  double snr_db = 20.0;
  double power = 1.0;

  // Training.
  double lambda = 1e-3;
  double lr0 = 3e-4;
  double lr_min = 0.0;
  int epochs = 100;
  int batch_size = 512;
  double t0 = 10.0;
  double t_mult = 2.0;
  double init_scale = 0.01;

  // Data and evaluation.
  int train_size = 4096;
  int test_size = 500;
  int calib_size = 200;
  double calib_quantile = 0.02;
  std::optional<double> match_threshold;  // nullopt = calibrate
  int threads = 1;
  bool dump_images = true;
  bool no_train = false;
  std::string out = "out";

  // key = value lines in schema order, one per key.
  std::string resolved_text() const;
};

// Snake-case schema keys, in the order they are echoed.
const std::vector<std::string>& config_keys();

// `--batch-size` style spelling of a key.
std::string flag_name(const std::string& key);

// Resolution order: defaults, then the file (if any), then WDP_OUT for `out`,
// then flags. Each flag is a (key, value) pair with the key in snake case.
// Throws ConfigError naming the key and the line or flag that set it.
RunConfig resolve_config(const std::optional<std::string>& file_text,
                         const std::vector<std::pair<std::string, std::string>>& flags,
                         const std::optional<std::string>& env_out = std::nullopt);

RunConfig parse_config_text(const std::string& text);

}  // namespace wdp

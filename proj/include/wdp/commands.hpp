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

#include <iosfwd>
#include <string>
#include <vector>

#include "wdp/config.hpp"

namespace wdp::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kMissingArtifact = 3,
  kNumerical = 4,
};

// Each command writes its artifacts under cfg.out, with config.resolved and
// seeds.used alongside them, and prints its CSV summary to `out`. Errors
// propagate as exceptions.
void cmd_train(const RunConfig& cfg, std::ostream& out);
void cmd_eval(const RunConfig& cfg, std::ostream& out);
void cmd_sweep(const RunConfig& cfg, std::ostream& out);
void cmd_baseline(const RunConfig& cfg, std::ostream& out);

// Parses argv (argv[0] is the program name), resolves the configuration,
// dispatches to a subcommand and maps failures to an exit code. Errors are
// written to `err` as one JSON object per line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// {"error":KIND,"subcommand":CMD,"message":MSG} on one line.
std::string error_line(const std::string& kind, const std::string& subcommand, const std::string& message);

}  // namespace wdp::cli

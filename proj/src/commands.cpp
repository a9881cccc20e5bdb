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

#include "wdp/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wdp/experiment.hpp"

namespace wdp::cli {
namespace {

const std::vector<std::string> kBoolKeys = {"clip_before_noise", "dump_images", "no_train"};

bool is_bool_key(const std::string& key) {
  return std::find(kBoolKeys.begin(), kBoolKeys.end(), key) != kBoolKeys.end();
}

std::string summary_csv(const SweepRow& row) { return std::string(kReportHeader) + "\n" + format_row(row) + "\n"; }

std::vector<TransmissionResult> evaluate_test_set(const Experiment& exp, std::optional<NetPair> nets) {
  return evaluate(exp.test_images, exp.system(std::move(nets)), exp.test_seeds, exp.cfg.threads);
}

}  // namespace

std::string error_line(const std::string& kind, const std::string& subcommand, const std::string& message) {
  nlohmann::json j;
  j["error"] = kind;
  j["subcommand"] = subcommand;
  j["message"] = message;
  return j.dump();
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
  const Experiment exp = prepare_experiment(cfg);
  const OutputLayout layout{cfg.out};
  write_run_manifest(exp, layout);
  train_and_save(exp, cfg.epsilon, layout);
  out << "checkpoint," << layout.checkpoint(cfg.epsilon).string() << "\n"
      << "loss_curve," << layout.loss_curve(cfg.epsilon).string() << "\n";
}

void cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const Experiment exp = prepare_experiment(cfg);
  const OutputLayout layout{cfg.out};
  write_run_manifest(exp, layout);
  // Evaluation never trains; a stale or absent checkpoint is an error.
  RunConfig no_train = cfg;
  no_train.no_train = true;
  Experiment view = exp;
  view.cfg = no_train;
  const NetPair nets = load_or_train(view, cfg.epsilon, layout);
  const auto results = evaluate_test_set(exp, nets);
  write_file(layout.eval_metrics(cfg.epsilon), per_image_csv(results));
  if (cfg.dump_images) dump_images(results, layout, epsilon_tag(cfg.epsilon));
  out << summary_csv(summarize(results, cfg.epsilon, exp.delta_f, false));
}

void cmd_sweep(const RunConfig& cfg, std::ostream& out) { out << run_sweep(cfg).to_csv(); }

void cmd_baseline(const RunConfig& cfg, std::ostream& out) {
  const Experiment exp = prepare_experiment(cfg);
  const OutputLayout layout{cfg.out};
  write_run_manifest(exp, layout);
  const auto results = evaluate_test_set(exp, std::nullopt);
  if (cfg.dump_images) dump_images(results, layout, "baseline");
  const std::string csv =
      summary_csv(summarize(results, std::numeric_limits<double>::infinity(), exp.delta_f, true));
  write_file(layout.baseline(), csv);
  out << csv;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wiretap semantic transmission with learned DP-style latent protection", "wdp"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file");

  std::map<std::string, std::string> values;
  for (const auto& key : config_keys()) {
    if (is_bool_key(key)) {
      app.add_flag(flag_name(key) + "{true}", values[key], "config key " + key);
    } else {
      app.add_option(flag_name(key), values[key], "config key " + key);
    }
  }

  std::string chosen;
  const std::pair<const char*, const char*> subcommands[] = {
      {"train", "train protection nets for one epsilon"},
      {"eval", "evaluate a saved checkpoint for one epsilon"},
      {"sweep", "train or load and evaluate every epsilon, write report.csv"},
      {"baseline", "evaluate transmission without protection"}};
  for (const auto& [name, help] : subcommands) {
    app.add_subcommand(name, help)->fallthrough()->callback([&chosen, name = name] { chosen = name; });
  }
  const std::map<std::string, void (*)(const RunConfig&, std::ostream&)> commands = {
      {"train", cmd_train}, {"eval", cmd_eval}, {"sweep", cmd_sweep}, {"baseline", cmd_baseline}};

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << error_line("usage", chosen, e.what()) << "\n";
    return kConfig;
  }

  try {
    std::optional<std::string> file_text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("config", "--config", "cannot read '" + config_path + "'");
      std::ostringstream ss;
      ss << in.rdbuf();
      file_text = ss.str();
    }
    std::vector<std::pair<std::string, std::string>> flags;
    for (const auto& key : config_keys()) {
      if (app.count(flag_name(key)) > 0) flags.emplace_back(key, values[key]);
    }
    std::optional<std::string> env_out;
    if (const char* v = std::getenv("WDP_OUT")) env_out = v;
    const RunConfig cfg = resolve_config(file_text, flags, env_out);
    commands.at(chosen)(cfg, out);
    return kOk;
  } catch (const ConfigError& e) {
    err << error_line("config", chosen, e.what()) << "\n";
    return kConfig;
  } catch (const MissingArtifact& e) {
    err << error_line("missing_artifact", chosen, e.what()) << "\n";
    return kMissingArtifact;
  } catch (const DivergenceError& e) {
    err << error_line("numerical", chosen, e.what()) << "\n";
    return kNumerical;
  } catch (const NumericalError& e) {
    err << error_line("numerical", chosen, e.what()) << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << error_line("error", chosen, e.what()) << "\n";
    return kFailure;
  }
}

}  // namespace wdp::cli

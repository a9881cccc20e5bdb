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

#include "wdp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace wdp {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Thrown by value parsers; rewrapped as ConfigError with the key location.
struct BadValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

long long parse_int(const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) throw BadValue("expected an integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& v) {
  double out = 0.0;
  const char* begin = v.data();
  if (!v.empty() && v.front() == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) throw BadValue("expected a number, got '" + v + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw BadValue("expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw BadValue("expected true/false, got '" + v + "'");
}

int parse_int32(const std::string& v) {
  const long long x = parse_int(v);
  if (x < INT32_MIN || x > INT32_MAX) throw BadValue("integer out of range: " + v);
  return static_cast<int>(x);
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& v, F&& one) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw BadValue("empty list element in '" + v + "'");
    out.push_back(one(item));
  }
  return out;
}

std::string fmt_real(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

template <typename T, typename F>
std::string fmt_list(const std::vector<T>& xs, F&& one) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += one(xs[i]);
  }
  return out;
}

struct KeySpec {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define WDP_INT(field) \
  KeySpec { #field, [](RunConfig& c, const std::string& v) { c.field = parse_int32(v); }, \
            [](const RunConfig& c) { return std::to_string(c.field); } }
#define WDP_REAL(field) \
  KeySpec { #field, [](RunConfig& c, const std::string& v) { c.field = parse_real(v); }, \
            [](const RunConfig& c) { return fmt_real(c.field); } }
#define WDP_U64(field) \
  KeySpec { #field, [](RunConfig& c, const std::string& v) { c.field = parse_u64(v); }, \
            [](const RunConfig& c) { return std::to_string(c.field); } }
#define WDP_BOOL(field) \
  KeySpec { #field, [](RunConfig& c, const std::string& v) { c.field = parse_bool(v); }, \
            [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); } }

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys = {
      WDP_U64(seed),
      WDP_INT(d),
      WDP_INT(m),
      WDP_INT(k),
      WDP_INT(shared_count),
      KeySpec{"private_idx",
              [](RunConfig& c, const std::string& v) { c.private_idx = parse_list<int>(v, parse_int32); },
              [](const RunConfig& c) {
                return fmt_list(c.private_idx, [](int i) { return std::to_string(i); });
              }},
      WDP_U64(gen_seed),
      WDP_REAL(local_scale),
      WDP_REAL(shared_scale),
      WDP_INT(inv_max_iters),
      WDP_REAL(inv_step_size),
      WDP_REAL(inv_tol),
      WDP_REAL(q_low),
      WDP_REAL(q_high),
      KeySpec{"sensitivity_scope",
              [](RunConfig& c, const std::string& v) {
                if (v == "full") {
                  c.sensitivity_scope = SensitivityScope::kFull;
                } else if (v == "private") {
                  c.sensitivity_scope = SensitivityScope::kPrivate;
                } else {
                  throw BadValue("expected full or private, got '" + v + "'");
                }
              },
              [](const RunConfig& c) {
                return std::string(c.sensitivity_scope == SensitivityScope::kFull ? "full" : "private");
              }},
      WDP_BOOL(clip_before_noise),
      WDP_REAL(epsilon),
      KeySpec{"epsilons",
              [](RunConfig& c, const std::string& v) { c.epsilons = parse_list<double>(v, parse_real); },
              [](const RunConfig& c) { return fmt_list(c.epsilons, fmt_real); }},
      WDP_REAL(snr_db),
      WDP_REAL(power),
      WDP_REAL(lambda),
      WDP_REAL(lr0),
      WDP_REAL(lr_min),
      WDP_INT(epochs),
      WDP_INT(batch_size),
      WDP_REAL(t0),
      WDP_REAL(t_mult),
      WDP_REAL(init_scale),
      WDP_INT(train_size),
      WDP_INT(test_size),
      WDP_INT(calib_size),
      WDP_REAL(calib_quantile),
      KeySpec{"match_threshold",
              [](RunConfig& c, const std::string& v) {
                if (v == "auto") {
                  c.match_threshold.reset();
                } else {
                  c.match_threshold = parse_real(v);
                }
              },
              [](const RunConfig& c) {
                return c.match_threshold ? fmt_real(*c.match_threshold) : std::string("auto");
              }},
      WDP_INT(threads),
      WDP_BOOL(dump_images),
      WDP_BOOL(no_train),
      KeySpec{"out", [](RunConfig& c, const std::string& v) { c.out = v; },
              [](const RunConfig& c) { return c.out; }},
  };
  return keys;
}

#undef WDP_INT
#undef WDP_REAL
#undef WDP_U64
#undef WDP_BOOL

const KeySpec* find_key(const std::string& name) {
  for (const auto& k : schema())
    if (k.name == name) return &k;
  return nullptr;
}

void apply(RunConfig& cfg, std::map<std::string, std::string>& origin, const std::string& key,
           const std::string& value, const std::string& where) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw ConfigError(key, where, "unknown key");
  try {
    spec->set(cfg, value);
  } catch (const BadValue& e) {
    throw ConfigError(key, where, e.what());
  }
  origin[key] = where;
}

void validate(const RunConfig& c, const std::map<std::string, std::string>& origin) {
  auto fail = [&](const std::string& key, const std::string& msg) {
    const auto it = origin.find(key);
    throw ConfigError(key, it == origin.end() ? "default" : it->second, msg);
  };
  if (c.d < 1) fail("d", "must be >= 1");
  if (c.m < 1) fail("m", "must be >= 1");
  if (c.k < 1) fail("k", "must be >= 1");
  if (c.shared_count < 0 || c.shared_count >= c.m) fail("shared_count", "must be in [0, m)");
  if (c.d < c.m - c.shared_count) fail("d", "must be at least the number of local codes");
  if (c.private_idx.empty()) fail("private_idx", "must name at least one code");
  {
    std::set<int> seen;
    for (int i : c.private_idx) {
      if (i < 0 || i >= c.m) fail("private_idx", "index " + std::to_string(i) + " outside [0, m)");
      if (!seen.insert(i).second) fail("private_idx", "duplicate index " + std::to_string(i));
    }
  }
  if (!(c.local_scale > 0.0)) fail("local_scale", "must be > 0");
  if (!(c.shared_scale >= 0.0)) fail("shared_scale", "must be >= 0");
  if (c.inv_max_iters < 1) fail("inv_max_iters", "must be >= 1");
  if (!(c.inv_step_size > 0.0)) fail("inv_step_size", "must be > 0");
  if (!(c.inv_tol >= 0.0)) fail("inv_tol", "must be >= 0");
  if (!(c.q_low >= 0.0 && c.q_low < 1.0)) fail("q_low", "must be in [0, 1)");
  if (!(c.q_high > c.q_low && c.q_high <= 1.0)) fail("q_high", "must be in (q_low, 1]");
  if (!(c.epsilon > 0.0)) fail("epsilon", "must be > 0");
  if (c.epsilons.empty()) fail("epsilons", "must list at least one budget");
  {
    std::set<double> seen;
    for (double e : c.epsilons) {
      if (!(e > 0.0) || !std::isfinite(e)) fail("epsilons", "every budget must be finite and > 0");
      if (!seen.insert(e).second) fail("epsilons", "duplicate budget " + fmt_real(e));
    }
  }
  if (std::isnan(c.snr_db)) fail("snr_db", "must be a number");
  if (!(c.power > 0.0) || !std::isfinite(c.power)) fail("power", "must be > 0");
  if (!(c.lambda >= 0.0)) fail("lambda", "must be >= 0");
  if (!(c.lr0 > 0.0)) fail("lr0", "must be > 0");
  if (!(c.lr_min >= 0.0 && c.lr_min <= c.lr0)) fail("lr_min", "must be in [0, lr0]");
  if (c.epochs < 1) fail("epochs", "must be >= 1");
  if (c.batch_size < 1) fail("batch_size", "must be >= 1");
  if (!(c.t0 > 0.0)) fail("t0", "must be > 0");
  if (!(c.t_mult >= 1.0)) fail("t_mult", "must be >= 1");
  if (!(c.init_scale >= 0.0)) fail("init_scale", "must be >= 0");
  if (c.train_size < 2) fail("train_size", "must be >= 2");
  if (c.test_size < 1) fail("test_size", "must be >= 1");
  if (c.calib_size < 1) fail("calib_size", "must be >= 1");
  if (!(c.calib_quantile > 0.0 && c.calib_quantile < 1.0)) fail("calib_quantile", "must be in (0, 1)");
  if (c.match_threshold && !(*c.match_threshold > 0.0 && *c.match_threshold < 1.0)) {
    fail("match_threshold", "must be in (0, 1) or auto");
  }
  if (c.threads < 1) fail("threads", "must be >= 1");
  if (c.out.empty()) fail("out", "must not be empty");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& k : schema()) out.push_back(k.name);
    return out;
  }();
  return names;
}

std::string flag_name(const std::string& key) {
  std::string out = "--" + key;
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

std::string RunConfig::resolved_text() const {
  std::string out;
  for (const auto& k : schema()) out += k.name + " = " + k.get(*this) + "\n";
  return out;
}

RunConfig resolve_config(const std::optional<std::string>& file_text,
                         const std::vector<std::pair<std::string, std::string>>& flags,
                         const std::optional<std::string>& env_out) {
  RunConfig cfg;
  std::map<std::string, std::string> origin;
  if (file_text) {
    std::istringstream in(*file_text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      const std::string where = "line " + std::to_string(lineno);
      if (eq == std::string::npos) throw ConfigError(line, where, "expected key = value");
      apply(cfg, origin, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
    }
  }
  if (env_out && !env_out->empty()) apply(cfg, origin, "out", *env_out, "env WDP_OUT");
  for (const auto& [key, value] : flags) apply(cfg, origin, key, trim(value), "flag " + flag_name(key));
  validate(cfg, origin);
  return cfg;
}

RunConfig parse_config_text(const std::string& text) { return resolve_config(text, {}); }

}  // namespace wdp

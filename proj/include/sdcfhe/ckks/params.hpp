/*
 * Copyright 2026 The sdcfhe Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sdcfhe/ring/modarith.hpp"

namespace sdcfhe {

// Scheme parameters. The modulus chain is q_0 (base), q_1..q_L (rescale
// primes near Delta) followed by the special primes p_0..p_{K-1} used by key
// switching.
struct CkksParams {
  std::string name = "custom";
  std::size_t n = 2048;
  int log_delta = 30;
  int depth = 2;
  int base_bits = 50;
  int rescale_bits = 30;
  int special_bits = 50;
  int special_count = 0;  // 0: enough special primes to cover Q_L
  double noise_stddev = 3.2;
  bool insecure = true;

  std::size_t slots() const { return n / 2; }
  double delta() const { return std::ldexp(1.0, log_delta); }
  int log_q_bits() const { return base_bits + depth * rescale_bits; }

  int resolved_special_count() const {
    if (special_count > 0) return special_count;
    return (log_q_bits() + special_bits - 1) / special_bits;
  }

  // Base, rescale and special primes: L + 2 for a single special prime,
  // L + 1 + K in general.
  std::size_t chain_length() const {
    return static_cast<std::size_t>(depth) + 1 + static_cast<std::size_t>(resolved_special_count());
  }

  void validate() const {
    if (n < 8 || (n & (n - 1)) != 0) throw ConfigError("n must be a power of two >= 8");
    if (depth < 1) throw ConfigError("depth must be at least 1");
    if (log_delta < 10 || log_delta > 60) throw ConfigError("log_delta must be in [10, 60]");
    if (std::abs(rescale_bits - log_delta) > 1) {
      throw ConfigError("rescale primes must lie within one bit of Delta");
    }
    for (int b : {base_bits, rescale_bits + 1, special_bits}) {
      if (b < 20 || b > kMaxPrimeBits) throw ConfigError("prime widths must be in [20, 62]");
    }
    if (base_bits <= log_delta) throw ConfigError("base prime must exceed Delta");
    if (special_count < 0) throw ConfigError("special_count must be non-negative");
    if (!(noise_stddev > 0.0)) throw ConfigError("noise_stddev must be positive");
  }

  bool operator==(const CkksParams&) const = default;
};

inline CkksParams desk_preset(int index) {
  if (index < 1 || index > 4) throw ConfigError("DESK presets are DESK1..DESK4");
  CkksParams p;
  p.name = "DESK" + std::to_string(index);
  p.n = 2048;
  p.log_delta = 30;
  p.depth = 2 * index;
  p.base_bits = 50;
  p.rescale_bits = 30;
  p.special_bits = 50;
  p.insecure = true;
  return p;
}

inline CkksParams paper_preset(int index) {
  if (index < 1 || index > 4) throw ConfigError("PAPER-SET presets are PAPER-SET1..PAPER-SET4");
  CkksParams p;
  p.name = "PAPER-SET" + std::to_string(index);
  p.n = 32768;
  p.log_delta = 50;
  p.depth = 2 * index;
  p.base_bits = 60;
  p.rescale_bits = 50;
  p.special_bits = 60;
  p.insecure = false;
  return p;
}

inline std::vector<std::string> preset_names() {
  return {"DESK1", "DESK2", "DESK3", "DESK4", "PAPER-SET1", "PAPER-SET2", "PAPER-SET3", "PAPER-SET4"};
}

inline CkksParams preset(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up.size() == 5 && up.starts_with("DESK")) return desk_preset(up[4] - '0');
  if (up.size() == 10 && up.starts_with("PAPER-SET")) return paper_preset(up[9] - '0');
  throw ConfigError("unknown preset: " + std::string(name));
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& v, const std::string& key, int line) {
  T out{};
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("line " + std::to_string(line) + ": bad value for " + key + ": " + v);
  }
  return out;
}

}  // namespace detail

// Key-value parameter file. Lines are `key = value`; `#` starts a comment.
// `preset` (if present) must come first and seeds every other field.
//
//   preset        DESK1..DESK4 | PAPER-SET1..PAPER-SET4
//   name          free-form label
//   n             ring degree
//   log_delta     scaling factor exponent
//   depth         number of rescale primes L
//   base_bits     width of q_0
//   rescale_bits  target width of q_1..q_L
//   special_bits  width of each special prime
//   special_count number of special primes (0 = automatic)
//   noise_stddev  Gaussian error standard deviation
inline CkksParams parse_params(std::istream& in) {
  CkksParams p;
  std::string raw;
  int line = 0;
  bool any = false;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = detail::trim(std::string_view(raw).substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = detail::trim(std::string_view(text).substr(0, eq));
    const std::string value = detail::trim(std::string_view(text).substr(eq + 1));
    if (key == "preset") {
      if (any) throw ConfigError("line " + std::to_string(line) + ": preset must be the first key");
      p = preset(value);
    } else if (key == "name") {
      p.name = value;
    } else if (key == "n") {
      p.n = detail::parse_number<std::size_t>(value, key, line);
    } else if (key == "log_delta") {
      p.log_delta = detail::parse_number<int>(value, key, line);
    } else if (key == "depth") {
      p.depth = detail::parse_number<int>(value, key, line);
    } else if (key == "base_bits") {
      p.base_bits = detail::parse_number<int>(value, key, line);
    } else if (key == "rescale_bits") {
      p.rescale_bits = detail::parse_number<int>(value, key, line);
    } else if (key == "special_bits") {
      p.special_bits = detail::parse_number<int>(value, key, line);
    } else if (key == "special_count") {
      p.special_count = detail::parse_number<int>(value, key, line);
    } else if (key == "noise_stddev") {
      p.noise_stddev = detail::parse_number<double>(value, key, line);
    } else {
      throw ConfigError("line " + std::to_string(line) + ": unknown key " + key);
    }
    any = true;
  }
  p.insecure = p.n < 32768;
  p.validate();
  return p;
}

inline CkksParams parse_params(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_params(in);
}

inline CkksParams load_params_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open parameter file " + path);
  return parse_params(in);
}

inline std::string format_params(const CkksParams& p) {
  std::ostringstream o;
  o << "name = " << p.name << "\n"
    << "n = " << p.n << "\n"
    << "log_delta = " << p.log_delta << "\n"
    << "depth = " << p.depth << "\n"
    << "base_bits = " << p.base_bits << "\n"
    << "rescale_bits = " << p.rescale_bits << "\n"
    << "special_bits = " << p.special_bits << "\n"
    << "special_count = " << p.resolved_special_count() << "\n"
    << "noise_stddev = " << p.noise_stddev << "\n";
  return o.str();
}

}  // namespace sdcfhe

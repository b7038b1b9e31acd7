// Copyright 2026 The xsep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// Run configuration: line-based `key = value` text, `#` starts a comment.
// Unknown and repeated keys are rejected; the whole configuration is
// validated after parsing. List values are comma-separated; a single value
// is broadcast to every scale.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xsep/dictlearn.hpp"
#include "xsep/io.hpp"
#include "xsep/metrics.hpp"
#include "xsep/patching.hpp"
#include "xsep/separation.hpp"

namespace xsep {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::vector<ScaleParams> scales{{8, 4}, {8, 4}, {8, 7}};
  std::size_t s_z = 10;
  std::size_t s_v = 8;
  std::size_t atoms_common = 256;
  std::size_t atoms_innovation = 256;
  std::size_t train_patches = 46000;
  std::size_t trained_scales = 2;  // coarser scales re-use the last trained triple
  std::size_t iterations = 50;
  double objective_tol = 1e-4;
  std::uint64_t seed = 1;
  double lowpass_split = 0.5;
  std::size_t mca_s1 = 18;
  std::size_t mca_s2 = 18;
  SsimParams ssim;
  std::size_t synth_size = 256;

  SeparationConfig separation() const { return {scales, s_z, s_v, lowpass_split}; }

  LearnConfig learning() const { return {s_z, s_v, iterations, objective_tol, seed}; }

  void validate() const {
    auto check = [](bool ok, const std::string& what) {
      if (!ok) throw ConfigError("config: " + what);
    };
    check(!scales.empty(), "scales must be >= 1");
    for (std::size_t l = 0; l < scales.size(); ++l) {
      const auto& sp = scales[l];
      const std::string at = " at scale " + std::to_string(l + 1);
      check(sp.patch_side >= 1, "patch side must be positive" + at);
      check(sp.step >= 1 && sp.step <= sp.patch_side, "step must satisfy 1 <= step <= patch side" + at);
      const std::size_t n = sp.patch_dim();
      check(s_z + s_v <= 2 * n, "s_z + s_v exceeds the coupled signal length" + at);
      check(2 * s_z + s_v <= 3 * n, "2 s_z + s_v exceeds the stacked signal length" + at);
      check(mca_s1 + mca_s2 <= n, "mca_s1 + mca_s2 exceeds the patch dimension" + at);
    }
    check(atoms_common >= 1 && atoms_innovation >= 1, "atom counts must be positive");
    check(s_z <= atoms_common, "s_z exceeds atoms_common");
    check(s_v <= atoms_innovation, "s_v exceeds atoms_innovation");
    check(mca_s1 <= atoms_common + atoms_innovation && mca_s2 <= atoms_common + atoms_innovation,
          "MCA budgets exceed the X-ray dictionary size");
    check(train_patches >= 1, "train_patches must be positive");
    check(trained_scales >= 1 && trained_scales <= scales.size(),
          "trained_scales must lie in 1..scales");
    for (std::size_t l = trained_scales; l < scales.size(); ++l)
      check(scales[l].patch_side == scales[trained_scales - 1].patch_side,
            "untrained scale " + std::to_string(l + 1) +
                " must share the patch side of the last trained scale");
    check(lowpass_split >= 0.0 && lowpass_split <= 1.0, "lowpass_split must lie in [0, 1]");
    check(synth_size >= scales.front().patch_side, "synth_size smaller than the finest patch");
    try {
      ssim.validate();
    } catch (const ContractViolation& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  std::string to_text() const {
    std::ostringstream os;
    os.precision(17);
    auto list = [&](auto get) {
      std::string s;
      for (std::size_t l = 0; l < scales.size(); ++l)
        s += (l ? "," : "") + std::to_string(get(scales[l]));
      return s;
    };
    os << "scales = " << scales.size() << "\n";
    os << "patch_sides = " << list([](const ScaleParams& s) { return s.patch_side; }) << "\n";
    os << "steps = " << list([](const ScaleParams& s) { return s.step; }) << "\n";
    os << "s_z = " << s_z << "\ns_v = " << s_v << "\n";
    os << "atoms_common = " << atoms_common << "\natoms_innovation = " << atoms_innovation << "\n";
    os << "train_patches = " << train_patches << "\ntrained_scales = " << trained_scales << "\n";
    os << "iterations = " << iterations << "\nobjective_tol = " << objective_tol << "\n";
    os << "seed = " << seed << "\nlowpass_split = " << lowpass_split << "\n";
    os << "mca_s1 = " << mca_s1 << "\nmca_s2 = " << mca_s2 << "\n";
    os << "ssim_window = " << ssim.window_side << "\nssim_sigma = " << ssim.sigma << "\n";
    os << "ssim_k1 = " << ssim.k1 << "\nssim_k2 = " << ssim.k2 << "\n";
    os << "ssim_range = ";
    if (ssim.dynamic_range)
      os << *ssim.dynamic_range;
    else
      os << "auto";
    os << "\nsynth_size = " << synth_size << "\n";
    return os.str();
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view text, const std::string& where) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError(where + ": cannot parse '" + std::string(text) + "'");
  return v;
}

inline std::vector<std::size_t> parse_list(std::string_view text, const std::string& where) {
  std::vector<std::size_t> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_number<std::size_t>(trim(text.substr(0, comma)), where));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text, const std::string& name = "<config>") {
  RunConfig cfg;
  std::set<std::string> seen;
  std::size_t scale_count = cfg.scales.size();
  std::vector<std::size_t> sides;
  std::vector<std::size_t> steps;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (const auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = detail::trim(sv);
    if (sv.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    const std::string key(detail::trim(sv.substr(0, eq)));
    const std::string_view val = detail::trim(sv.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    using detail::parse_number;
    if (key == "scales") scale_count = parse_number<std::size_t>(val, where);
    else if (key == "patch_sides") sides = detail::parse_list(val, where);
    else if (key == "steps") steps = detail::parse_list(val, where);
    else if (key == "s_z") cfg.s_z = parse_number<std::size_t>(val, where);
    else if (key == "s_v") cfg.s_v = parse_number<std::size_t>(val, where);
    else if (key == "atoms_common") cfg.atoms_common = parse_number<std::size_t>(val, where);
    else if (key == "atoms_innovation") cfg.atoms_innovation = parse_number<std::size_t>(val, where);
    else if (key == "train_patches") cfg.train_patches = parse_number<std::size_t>(val, where);
    else if (key == "trained_scales") cfg.trained_scales = parse_number<std::size_t>(val, where);
    else if (key == "iterations") cfg.iterations = parse_number<std::size_t>(val, where);
    else if (key == "objective_tol") cfg.objective_tol = parse_number<double>(val, where);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(val, where);
    else if (key == "lowpass_split") cfg.lowpass_split = parse_number<double>(val, where);
    else if (key == "mca_s1") cfg.mca_s1 = parse_number<std::size_t>(val, where);
    else if (key == "mca_s2") cfg.mca_s2 = parse_number<std::size_t>(val, where);
    else if (key == "ssim_window") cfg.ssim.window_side = parse_number<std::size_t>(val, where);
    else if (key == "ssim_sigma") cfg.ssim.sigma = parse_number<double>(val, where);
    else if (key == "ssim_k1") cfg.ssim.k1 = parse_number<double>(val, where);
    else if (key == "ssim_k2") cfg.ssim.k2 = parse_number<double>(val, where);
    else if (key == "ssim_range") {
      if (val == "auto")
        cfg.ssim.dynamic_range.reset();
      else
        cfg.ssim.dynamic_range = parse_number<double>(val, where);
    } else if (key == "synth_size") cfg.synth_size = parse_number<std::size_t>(val, where);
    else throw ConfigError(where + ": unknown key '" + key + "'");
  }

  if (scale_count == 0) throw ConfigError(name + ": scales must be >= 1");
  auto expand = [&](std::vector<std::size_t> v, std::size_t fallback, const char* key) {
    if (v.empty()) v.assign(scale_count, fallback);
    if (v.size() == 1) v.assign(scale_count, v.front());
    if (v.size() != scale_count)
      throw ConfigError(name + ": " + key + " lists " + std::to_string(v.size()) +
                        " values for " + std::to_string(scale_count) + " scales");
    return v;
  };
  const RunConfig defaults;
  std::vector<std::size_t> default_sides, default_steps;
  for (std::size_t l = 0; l < scale_count; ++l) {
    const auto& d = defaults.scales[std::min(l, defaults.scales.size() - 1)];
    default_sides.push_back(d.patch_side);
    default_steps.push_back(d.step);
  }
  if (sides.empty()) sides = default_sides;
  if (steps.empty()) steps = default_steps;
  sides = expand(sides, 0, "patch_sides");
  steps = expand(steps, 0, "steps");
  cfg.scales.clear();
  for (std::size_t l = 0; l < scale_count; ++l) cfg.scales.push_back({sides[l], steps[l]});
  if (cfg.trained_scales > scale_count && !seen.count("trained_scales"))
    cfg.trained_scales = scale_count;
  cfg.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path), path.string());
}

}  // namespace xsep

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

// Command implementations behind the xsep executable. Each returns a process
// exit status (0 on success, 1 on any failure after printing "error: ...").

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "xsep/config.hpp"
#include "xsep/dictlearn.hpp"
#include "xsep/io.hpp"
#include "xsep/metrics.hpp"
#include "xsep/separation.hpp"
#include "xsep/synth.hpp"

namespace xsep {

struct CommandIo {
  std::ostream& out;
  std::ostream& err;
};

struct CommonArgs {
  std::optional<std::string> config;  // default configuration when unset
  std::optional<std::uint64_t> seed;  // overrides the config seed
};

inline RunConfig resolve_config(const CommonArgs& args) {
  RunConfig cfg = args.config ? load_run_config(*args.config) : RunConfig{};
  if (args.seed) cfg.seed = *args.seed;
  return cfg;
}

inline std::string format_ssim(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

namespace detail {

template <class Fn>
int run_command(CommandIo io, Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline std::string metrics_text(const std::string& method, double ssim_value, const RunConfig& cfg) {
  std::string s = "method=" + method + "\n";
  s += "ssim=" + format_ssim(ssim_value) + "\n";
  s += "ssim_window=" + std::to_string(cfg.ssim.window_side) + "\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "ssim_sigma=%.17g\nssim_k1=%.17g\nssim_k2=%.17g\n", cfg.ssim.sigma,
                cfg.ssim.k1, cfg.ssim.k2);
  s += buf;
  if (cfg.ssim.dynamic_range) {
    std::snprintf(buf, sizeof buf, "ssim_range=%.17g\n", *cfg.ssim.dynamic_range);
    s += buf;
  } else {
    s += "ssim_range=auto\n";
  }
  return s;
}

inline void write_separation(const std::string& prefix, const std::string& method,
                             const SeparationResult& res, const RunConfig& cfg, std::ostream& out) {
  const double s = ssim(res.side1, res.side2, cfg.ssim);
  // Render everything first so a failure leaves no outputs behind.
  const std::string side1 = encode_pgm(res.side1);
  const std::string side2 = encode_pgm(res.side2);
  const std::string metrics = metrics_text(method, s, cfg);
  write_file_atomic(prefix + "_side1.pgm", side1);
  write_file_atomic(prefix + "_side2.pgm", side2);
  write_file_atomic(prefix + "_metrics.txt", metrics);
  out << "ssim=" << format_ssim(s) << "\n";
}

inline std::vector<CoupledDictionaryTriple> load_dicts_for(const std::string& path,
                                                           const RunConfig& cfg) {
  auto dicts = read_dict_file(path);
  if (dicts.size() < cfg.scales.size())
    throw ContractViolation(path + " holds " + std::to_string(dicts.size()) +
                            " scales, configuration needs " + std::to_string(cfg.scales.size()));
  for (std::size_t l = 0; l < cfg.scales.size(); ++l)
    if (dicts[l].patch_dim() != cfg.scales[l].patch_dim())
      throw ContractViolation(path + ": scale " + std::to_string(l + 1) + " atoms have " +
                              std::to_string(dicts[l].patch_dim()) + " pixels, patches have " +
                              std::to_string(cfg.scales[l].patch_dim()));
  return dicts;
}

}  // namespace detail

struct TrainArgs {
  CommonArgs common;
  std::vector<std::pair<std::string, std::string>> pairs;  // (visual, xray)
  std::string out;
};

/// Trains the finest `trained_scales` triples; coarser scales re-use the last.
inline int cmd_train(const TrainArgs& args, CommandIo io) {
  return detail::run_command(io, [&] {
    const RunConfig cfg = resolve_config(args.common);
    require(!args.pairs.empty(), "train: no image pairs given");
    require(!args.out.empty(), "train: --out is required");
    std::vector<std::pair<Image, Image>> images;
    for (const auto& [vis, xr] : args.pairs) {
      Image v = read_pgm(vis).image;
      Image x = read_pgm(xr).image;
      if (!v.same_shape(x))
        throw ContractViolation("visual " + vis + " is " + shape_string(v) + " but X-ray " + xr +
                                " is " + shape_string(x));
      images.emplace_back(std::move(v), std::move(x));
    }
    std::vector<CoupledDictionaryTriple> triples;
    for (std::size_t l = 1; l <= cfg.trained_scales; ++l) {
      const SampledPatches sp =
          sample_training_patches(images, cfg.train_patches, cfg.scales, l, cfg.seed + l - 1);
      if (sp.with_replacement)
        io.err << "warning: scale " << l << " has " << sp.available
               << " distinct patch positions, fewer than train_patches = " << cfg.train_patches
               << "; sampling with replacement\n";
      const TrainResult res = train(sp.set, cfg.atoms_common, cfg.atoms_innovation, cfg.learning());
      for (const auto& e : res.trace) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "scale=%zu iter=%zu objective=%.10g replaced=%zu\n", l,
                      e.iteration + 1, e.after_coding, e.replaced_atoms);
        io.out << buf;
      }
      triples.push_back(res.dicts);
      triples.back().scale = l;
    }
    while (triples.size() < cfg.scales.size()) {
      triples.push_back(triples.back());
      triples.back().scale = triples.size();
    }
    write_dict_file(args.out, triples);
  });
}

struct SeparateArgs {
  CommonArgs common;
  std::string mixed, visual1, visual2;
  std::string dict;
  std::string out;  // prefix
};

inline int cmd_separate(const SeparateArgs& args, CommandIo io) {
  return detail::run_command(io, [&] {
    const RunConfig cfg = resolve_config(args.common);
    require(!args.dict.empty(), "separate: --dict is required");
    require(!args.out.empty(), "separate: --out is required");
    const Image m = read_pgm(args.mixed).image;
    const Image y1 = read_pgm(args.visual1).image;
    const Image y2 = read_pgm(args.visual2).image;
    const auto dicts = detail::load_dicts_for(args.dict, cfg);
    const SeparationResult res = separate_image(m, y1, y2, dicts, cfg.separation());
    detail::write_separation(args.out, "proposed", res, cfg, io.out);
  });
}

struct McaArgs {
  CommonArgs common;
  std::string mixed;
  std::string dict1, dict2;
  std::string out;
};

/// Baseline: each dictionary file contributes its X-ray atoms [Phi_c Phi].
inline int cmd_mca(const McaArgs& args, CommandIo io) {
  return detail::run_command(io, [&] {
    const RunConfig cfg = resolve_config(args.common);
    require(!args.dict1.empty() && !args.dict2.empty(), "mca: two --dict files are required");
    require(!args.out.empty(), "mca: --out is required");
    const Image m = read_pgm(args.mixed).image;
    std::vector<Mat> l1, l2;
    for (const auto& t : detail::load_dicts_for(args.dict1, cfg)) l1.push_back(t.xray_dictionary());
    for (const auto& t : detail::load_dicts_for(args.dict2, cfg)) l2.push_back(t.xray_dictionary());
    const SeparationResult res = mca_separate(m, l1, l2, cfg.mca_s1, cfg.mca_s2, cfg.separation());
    detail::write_separation(args.out, "mca", res, cfg, io.out);
  });
}

struct SsimArgs {
  CommonArgs common;
  std::string a, b;
};

inline int cmd_ssim(const SsimArgs& args, CommandIo io) {
  return detail::run_command(io, [&] {
    const RunConfig cfg = resolve_config(args.common);
    const Image a = read_pgm(args.a).image;
    const Image b = read_pgm(args.b).image;
    io.out << "ssim=" << format_ssim(ssim(a, b, cfg.ssim)) << "\n";
  });
}

struct SynthArgs {
  CommonArgs common;
  std::string out;  // directory
};

/// Writes visual{1,2}.pgm, xray{1,2}.pgm, mixed.pgm, the train_* panels,
/// truth.cdl and codes.txt into the output directory.
inline int cmd_synth(const SynthArgs& args, CommandIo io) {
  return detail::run_command(io, [&] {
    const RunConfig cfg = resolve_config(args.common);
    require(!args.out.empty(), "synth: --out is required");
    const SynthScene scene = synthesize(cfg, cfg.seed);
    const std::filesystem::path dir(args.out);
    std::filesystem::create_directories(dir);
    const std::pair<const char*, const Image*> images[] = {
        {"visual1.pgm", &scene.visual1},           {"visual2.pgm", &scene.visual2},
        {"xray1.pgm", &scene.xray1},               {"xray2.pgm", &scene.xray2},
        {"mixed.pgm", &scene.mixed},               {"train_visual1.pgm", &scene.train_visual1},
        {"train_visual2.pgm", &scene.train_visual2}, {"train_xray1.pgm", &scene.train_xray1},
        {"train_xray2.pgm", &scene.train_xray2}};
    for (const auto& [name, img] : images) write_pgm(dir / name, *img);
    write_dict_file(dir / "truth.cdl", scene.truth);
    write_file_atomic(dir / "codes.txt", scene.codes);
    io.out << "wrote " << std::size(images) << " images to " << dir.string() << "\n";
  });
}

}  // namespace xsep

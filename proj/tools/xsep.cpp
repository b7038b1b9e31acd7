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

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xsep/commands.hpp"

namespace {

void add_common(CLI::App* cmd, xsep::CommonArgs& common, std::string& config) {
  cmd->add_option("--config", config, "run configuration (key = value)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", common.seed, "override the configured seed");
}

void finish_common(xsep::CommonArgs& common, const std::string& config) {
  if (!config.empty()) common.config = config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xsep: guided separation of mixed X-ray images of double-sided paintings"};
  app.require_subcommand(1);
  xsep::CommandIo io{std::cout, std::cerr};

  std::string config;

  xsep::TrainArgs train;
  std::vector<std::string> train_images;
  auto* c_train = app.add_subcommand("train", "learn coupled dictionaries from visual/X-ray pairs");
  add_common(c_train, train.common, config);
  c_train->add_option("--out", train.out, "dictionary file to write")->required();
  c_train->add_option("images", train_images, "VISUAL XRAY [VISUAL XRAY ...]")->required();

  xsep::SeparateArgs sep;
  auto* c_sep = app.add_subcommand("separate", "split a mixed X-ray using both visual images");
  add_common(c_sep, sep.common, config);
  c_sep->add_option("--dict", sep.dict, "dictionary file")->required();
  c_sep->add_option("--out", sep.out, "output prefix")->required();
  c_sep->add_option("mixed", sep.mixed)->required();
  c_sep->add_option("visual1", sep.visual1)->required();
  c_sep->add_option("visual2", sep.visual2)->required();

  xsep::McaArgs mca;
  std::vector<std::string> mca_dicts;
  auto* c_mca = app.add_subcommand("mca", "MCA baseline with one dictionary file per side");
  add_common(c_mca, mca.common, config);
  c_mca->add_option("--dict", mca_dicts, "dictionary file, given twice (side 1, side 2)")
      ->required()
      ->expected(2);
  c_mca->add_option("--out", mca.out, "output prefix")->required();
  c_mca->add_option("mixed", mca.mixed)->required();

  xsep::SsimArgs ss;
  auto* c_ssim = app.add_subcommand("ssim", "structural similarity of two images");
  add_common(c_ssim, ss.common, config);
  c_ssim->add_option("a", ss.a)->required();
  c_ssim->add_option("b", ss.b)->required();

  xsep::SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "generate a planted double-sided scene");
  add_common(c_synth, synth.common, config);
  c_synth->add_option("--out", synth.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // help prints and succeeds; misuse is exit 2
  }

  if (c_train->parsed()) {
    finish_common(train.common, config);
    if (train_images.size() % 2 != 0) {
      std::cerr << "error: train expects VISUAL XRAY pairs, got " << train_images.size()
                << " paths\n";
      return 2;
    }
    for (std::size_t i = 0; i < train_images.size(); i += 2)
      train.pairs.emplace_back(train_images[i], train_images[i + 1]);
    return xsep::cmd_train(train, io);
  }
  if (c_sep->parsed()) {
    finish_common(sep.common, config);
    return xsep::cmd_separate(sep, io);
  }
  if (c_mca->parsed()) {
    finish_common(mca.common, config);
    mca.dict1 = mca_dicts.at(0);
    mca.dict2 = mca_dicts.at(1);
    return xsep::cmd_mca(mca, io);
  }
  if (c_ssim->parsed()) {
    finish_common(ss.common, config);
    return xsep::cmd_ssim(ss, io);
  }
  finish_common(synth.common, config);
  return xsep::cmd_synth(synth, io);
}

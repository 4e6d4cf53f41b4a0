// Copyright 2026 The spkreassign Authors
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

#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "spkreassign/experiment.h"

namespace {

// "--a.b value" or "--a.b=value" pairs left over by the parser.
std::vector<std::pair<std::string, std::string>> ParseOverrides(
    const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& a = extras[i];
    if (a.rfind("--", 0) != 0 || a.size() <= 2) {
      throw spkr::ConfigError("unexpected argument '" + a + "'");
    }
    const std::string body = a.substr(2);
    const std::size_t eq = body.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(body.substr(0, eq), body.substr(eq + 1));
    } else if (i + 1 < extras.size()) {
      out.emplace_back(body, extras[++i]);
    } else {
      throw spkr::ConfigError("override '" + a + "' has no value");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speaker identity reassignment testbed"};
  app.require_subcommand(1);
  app.allow_extras();

  std::string config_path;
  std::string seed, workers, out;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--workers", workers, "parallel scene workers");
  app.add_option("--out", out, "output directory");

  std::string scene_id;
  int track = 0;
  std::string wav_out;
  std::vector<CLI::App*> subs = {
      app.add_subcommand("gen", "render a scene batch"),
      app.add_subcommand("train", "distill the student from the teacher"),
      app.add_subcommand("run", "simulate tracker, reassign and score"),
      app.add_subcommand("sweep", "repeat run along one configuration axis"),
      app.add_subcommand("eval", "rescore the timelines of an earlier run"),
      app.add_subcommand("beamform", "write one beamformed track as mono WAV"),
  };
  for (CLI::App* s : subs) {
    s->allow_extras();
    s->fallthrough();
  }
  subs[5]->add_option("--scene", scene_id, "scene directory name")->required();
  subs[5]->add_option("--track", track, "ground-truth track index");
  subs[5]->add_option("--wav", wav_out, "output WAV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? spkr::kExitOk : spkr::kExitUsage;
  }

  try {
    std::vector<std::string> extras = app.remaining();
    CLI::App* chosen = app.get_subcommands().front();
    for (const std::string& x : chosen->remaining()) extras.push_back(x);
    auto overrides = ParseOverrides(extras);
    if (!seed.empty()) overrides.emplace_back("seed", seed);
    if (!workers.empty()) overrides.emplace_back("workers", workers);
    if (!out.empty()) overrides.emplace_back("out", out);
    const spkr::ExperimentConfig cfg = spkr::LoadConfig(config_path, overrides);

    const std::string name = chosen->get_name();
    if (name == "gen") return spkr::CmdGen(cfg);
    if (name == "train") return spkr::CmdTrain(cfg);
    if (name == "run") return spkr::CmdRun(cfg);
    if (name == "sweep") return spkr::CmdSweep(cfg);
    if (name == "eval") return spkr::CmdEval(cfg);
    return spkr::CmdBeamform(cfg, scene_id, track, wav_out);
  } catch (const spkr::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return spkr::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return spkr::kExitRuntime;
  }
}

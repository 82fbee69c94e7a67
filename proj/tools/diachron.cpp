// Copyright 2026 The Diachron Authors.
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

// diachron: time-sliced embeddings and group association analysis.
//
//   diachron synth   --config run.cfg [SPEC]  write a planted synthetic corpus
//   diachron train   --config run.cfg         train one embedding per slice
//   diachron analyze --config run.cfg         profiles, WEAT, events, drift
//   diachron report  --config run.cfg         validate and print a report
//
// Any config key can be overridden with --section.key=value.
// Exit codes: 0 success, 1 internal error, 2 user or config error.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diachron/diachron.hpp"

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitUser = 2;

struct GlobalFlags {
  std::string config;
  std::optional<int> workers;
  bool strict = false;
  std::optional<std::uint64_t> seed;
  std::string out;
};

diachron::Config build_config(const GlobalFlags& flags, const std::vector<std::string>& extras) {
  diachron::Config cfg;
  if (!flags.config.empty()) cfg = diachron::Config::load(flags.config);
  for (const auto& arg : extras) {
    if (!arg.starts_with("--") || arg.find('=') == std::string::npos) {
      throw diachron::UserError("unexpected argument '" + arg + "' (overrides look like --key=value)");
    }
    const auto eq = arg.find('=');
    cfg.set(arg.substr(2, eq - 2), arg.substr(eq + 1));
  }
  if (flags.workers) cfg.set("workers", std::to_string(*flags.workers));
  if (flags.strict) cfg.set("strict", "true");
  if (flags.seed) cfg.set("seed", std::to_string(*flags.seed));
  if (!flags.out.empty()) cfg.set("out", flags.out);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-sliced word embeddings and social-group association analysis"};
  app.require_subcommand(1);
  GlobalFlags flags;
  std::string synth_spec, synth_output;

  auto add_common = [&](CLI::App* sub) {
    sub->allow_extras();
    sub->add_option("--config", flags.config, "key=value config file");
    sub->add_option("--workers", flags.workers, "training threads per slice");
    sub->add_flag("--strict", flags.strict, "single worker, bit-identical output");
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_option("--out", flags.out, "output directory (default $DIACHRON_OUT)");
  };
  auto* synth = app.add_subcommand("synth", "generate a planted synthetic corpus");
  add_common(synth);
  synth->add_option("spec", synth_spec, "plant specification file");
  synth->add_option("--output", synth_output, "corpus file to write");
  auto* train = app.add_subcommand("train", "train embeddings for every time slice");
  add_common(train);
  auto* analyze = app.add_subcommand("analyze", "compute profiles, WEAT, events and drift");
  add_common(analyze);
  auto* report = app.add_subcommand("report", "validate a report directory and print tables");
  add_common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUser;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    auto cfg = build_config(flags, active->remaining());
    if (!synth_spec.empty()) cfg.set("synth.spec", synth_spec);
    if (!synth_output.empty()) cfg.set("synth.output", synth_output);
    const auto run = diachron::RunConfig::from(cfg);
    if (active == synth) {
      diachron::cmd_synth(run, std::cout);
    } else if (active == train) {
      diachron::cmd_train(run, std::cout);
    } else if (active == analyze) {
      diachron::cmd_analyze(run, std::cout);
    } else {
      diachron::cmd_report(run, std::cout);
    }
  } catch (const diachron::UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return EXIT_SUCCESS;
}

/* Copyright 2026 The pfsim Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// pfsim command-line driver.
//
//   pfsim <infer|train|power|dlrm|validate|sweep> --config FILE
//         [--output PATH] [--format csv|json] [--jobs N] [--override KEY=VALUE]...
//
// Exit status: 0 on success, 1 for invalid input, 2 when the simulation
// itself fails.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pfsim/config.h"
#include "pfsim/errors.h"

namespace {

struct Args {
  std::string config;
  std::string output;
  std::string format;
  int jobs = 1;
  std::vector<std::string> overrides;
};

int execute(pfsim::Mode mode, const Args& args) {
  pfsim::RunConfig cfg = pfsim::load_config(args.config, args.overrides, mode);
  if (!args.format.empty()) cfg.format = pfsim::parse_format(args.format);
  if (!args.output.empty()) cfg.output = args.output;
  const pfsim::RunReport report = pfsim::run(cfg, args.jobs);
  if (cfg.output) {
    pfsim::write_report(report, cfg.format, *cfg.output);
  } else {
    std::cout << pfsim::emit(report, cfg.format);
  }
  for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytic performance and energy simulator for LLM and DLRM workloads"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pfsim::kToolVersion));

  Args args;
  pfsim::Mode chosen = pfsim::Mode::infer;
  const std::vector<std::pair<pfsim::Mode, std::string>> commands = {
      {pfsim::Mode::infer, "Inference latency, throughput, speedups and breakdowns"},
      {pfsim::Mode::train, "Training step time and plan search"},
      {pfsim::Mode::power, "Communication energy, electronic vs photonic"},
      {pfsim::Mode::dlrm, "Embedding pooling, distributed vs shared fabric"},
      {pfsim::Mode::validate, "Compare sweep predictions with measurements"},
      {pfsim::Mode::sweep, "Evaluate an inference grid"},
  };
  for (const auto& [mode, help] : commands) {
    CLI::App* sub = app.add_subcommand(std::string(pfsim::to_string(mode)), help);
    sub->add_option("--config", args.config, "Configuration file (JSON)")->required();
    sub->add_option("--output", args.output, "Write the report here instead of stdout");
    sub->add_option("--format", args.format, "Report format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--jobs", args.jobs, "Worker threads for sweeps")
        ->check(CLI::PositiveNumber);
    sub->add_option("--override", args.overrides, "Set a config value, e.g. options.reserve_fraction=0.1")
        ->allow_extra_args(false);
    const pfsim::Mode m = mode;
    sub->callback([&chosen, m] { chosen = m; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    return execute(chosen, args);
  } catch (const pfsim::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

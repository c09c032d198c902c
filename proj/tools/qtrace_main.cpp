// Copyright 2026 The qtrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qtrace/cli/app.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace {

struct Overrides {
  std::string config_path;
  std::vector<int> powers;
  std::optional<int> order;
  std::optional<std::string> estimator, strategy, mode, format, output;
  std::optional<std::uint64_t> shots, trials, seed;
};

void apply(const Overrides& o, qtrace::cli::RunConfig& c) {
  using qtrace::cli::ConfigError;
  if (!o.powers.empty()) {
    for (int m : o.powers)
      if (m < 1) throw ConfigError("--power", "must be >= 1");
    c.params.powers = o.powers;
  }
  if (o.order) {
    if (*o.order < 1) throw ConfigError("--order", "must be >= 1");
    c.params.order = *o.order;
  }
  if (o.estimator) c.params.estimator = *o.estimator;
  if (o.strategy) c.params.strategy = *o.strategy;
  if (o.mode) c.params.mode = *o.mode;
  if (o.shots) {
    if (*o.shots == 0) throw ConfigError("--shots", "must be >= 1");
    c.params.shots = *o.shots;
  }
  if (o.trials) {
    if (*o.trials == 0) throw ConfigError("--trials", "must be >= 1");
    c.params.trials = *o.trials;
  }
  if (o.seed) c.seed = *o.seed;
  if (o.format) c.format = *o.format == "json" ? qtrace::cli::OutputFormat::kJson : qtrace::cli::OutputFormat::kCsv;
  if (o.output) c.output_path = *o.output;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qtrace: trace-of-power and entropy estimators for mixed states"};
  app.require_subcommand(0, 1);

  Overrides o;
  bool golden = false;
  app.add_flag("--golden", golden, "run the regression against the bundled four-component model");
  app.add_option("--config", o.config_path, "run configuration (JSON); defaults to the bundled model");
  app.add_option("--power", o.powers, "power m of Tr{rho^m}; repeatable");
  app.add_option("--order", o.order, "truncation order of the entropy series");
  app.add_option("--estimator", o.estimator)->check(CLI::IsMember({"oracle", "ht", "gst"}));
  app.add_option("--strategy", o.strategy)->check(CLI::IsMember({"enumerate", "mc"}));
  app.add_option("--mode", o.mode)->check(CLI::IsMember({"exact", "shots", "gaussian"}));
  app.add_option("--shots", o.shots);
  app.add_option("--trials", o.trials);
  app.add_option("--seed", o.seed);
  app.add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--output", o.output, "output path, - for stdout");

  const std::pair<const char*, const char*> commands[] = {
      {"oracle", "exact Tr{rho^m} and Tr{G^k} from the dense density matrix"},
      {"ht", "Tr{rho^m} with the Hadamard-test estimator"},
      {"gst", "Tr{rho^m} and Tr{G^k} with subspace gate-set tomography"},
      {"entropy", "truncated series for Tr{rho ln rho}"},
      {"sweep", "one estimator over a list of values of one parameter"},
      {"bounds", "shot counts and error-bound estimates"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    qtrace::cli::report_error(std::cerr, "usage", e.what());
    return qtrace::cli::kExitSchema;
  }

  if (golden) return qtrace::cli::run_golden(std::cout);

  const auto subs = app.get_subcommands();
  if (subs.empty()) {
    qtrace::cli::report_error(std::cerr, "usage", "a subcommand is required (oracle, ht, gst, entropy, sweep, bounds)");
    return qtrace::cli::kExitSchema;
  }
  const std::string name = subs.front()->get_name();

  qtrace::cli::RunConfig config;
  try {
    config = o.config_path.empty() ? qtrace::cli::parse_config(qtrace::cli::kReferenceConfig)
                                   : qtrace::cli::load_config(o.config_path);
    apply(o, config);
    if (name == "ht" || name == "gst") config.params.estimator = name;
  } catch (const qtrace::cli::ConfigError& e) {
    qtrace::cli::report_error(std::cerr, "schema", e.what(), {{"field", e.field()}});
    return qtrace::cli::kExitSchema;
  } catch (const std::invalid_argument& e) {
    qtrace::cli::report_error(std::cerr, "invalid-argument", e.what());
    return qtrace::cli::kExitSchema;
  }
  return qtrace::cli::run(config, qtrace::cli::command_from_string(name));
}

// Copyright 2026 The qprivnet authors
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

// Thin front end over the C API: argument parsing, status-to-exit-code
// mapping, nothing else. All computation lives behind qpn_run_scenario.

#include <CLI11.hpp>
#include <qprivnet.h>

#include <cstdio>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Networked-sensing privacy auditor: runs a configured scenario "
               "and writes summary, CSV results, plot data and a manifest."};
  app.set_version_flag("--version", qpn_version());

  std::string verb;
  std::string config;
  std::string out_dir;
  unsigned long long seed = 0;
  long long trials = -1;
  bool strict_value = true;

  app.add_option("verb", verb,
                 "scenario to run: qfim | privacy | simulate | advantage | audit | compose "
                 "(defaults to the config's run.scenario)");
  app.add_option("--config", config, "configuration file (sectioned key = value text)")
      ->required();
  CLI::Option* seed_opt = app.add_option("--seed", seed, "override the run seed");
  app.add_option("--trials", trials, "override the Monte-Carlo trial count");
  app.add_option("--out", out_dir,
                 "output root; default: config run.out, then QPRIVNET_OUT_DIR, then cwd");
  CLI::Option* strict_opt =
      app.add_flag("--strict,!--no-strict", strict_value,
                   "treat unknown configuration keys as errors (default: on)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad invocation is a configuration error
  }

  qpn_run_options opt;
  opt.verb = verb.empty() ? nullptr : verb.c_str();
  opt.has_seed = seed_opt->count() > 0 ? 1 : 0;
  opt.seed = seed;
  opt.trials = trials;
  opt.out_dir = out_dir.empty() ? nullptr : out_dir.c_str();
  opt.strict = strict_opt->count() > 0 ? (strict_value ? 1 : 0) : -1;

  const qpn_status status = qpn_run_scenario(config.c_str(), &opt);
  if (status != QPN_OK) std::fprintf(stderr, "error: %s\n", qpn_last_error());
  switch (status) {
    case QPN_OK: return 0;
    case QPN_CONFIG:
    case QPN_INVALID:
    case QPN_IO: return 2;
    case QPN_BUDGET: return 4;
    case QPN_INVARIANT:
    case QPN_INTERNAL: return 3;
  }
  return 3;
}

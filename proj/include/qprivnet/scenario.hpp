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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Scenario orchestration: configuration ingestion, dispatch into the
// numerical modules, and persistence of results. A run writes summary.txt,
// results.csv, plot.csv and manifest.txt into a deterministic directory;
// identical (config, seed) pairs reproduce the result files byte for byte
// (only the manifest carries timestamps).
namespace qpn::scenario {

inline constexpr const char* kVersion = "1.0.0";

enum class Kind { Qfim, Privacy, Simulate, Advantage, Audit, Compose };

const char* kind_name(Kind k);
std::optional<Kind> kind_from_name(const std::string& name);

struct RunConfig {
  Kind kind = Kind::Privacy;
  std::string config_path;

  std::uint64_t seed = 1;
  bool seed_set = false;
  long trials = 100000;
  int rounds = 1;

  int n = 0;
  std::vector<int> dishonest;

  std::string state_kind = "ghz";  // ghz | plus-product | depolarized-ghz | file
  double depol_p = 0.0;
  std::string state_path;

  std::string enc_kind = "mean";  // mean | file
  std::string enc_path;
  std::vector<double> a;  // optional direction override (phase-generator family)

  std::optional<double> epsilon, lambda, delta;  // verification composition
  std::optional<double> eps1, eps2;              // sequential composition

  std::string out_dir;  // [run] out, overridable
};

// Command-line and environment overrides applied during parsing.
struct ParseOverrides {
  std::optional<std::string> verb;  // scenario name, wins over the config key
  std::optional<std::uint64_t> seed;
  std::optional<long> trials;
  std::optional<std::string> out_dir;
  bool strict = true;  // unknown keys are errors
};

// Reads a sectioned key = value file, applies overrides and defaults, and
// validates every field. All problems are aggregated into one configuration
// error naming each offending field.
RunConfig parse_config(const std::string& path, const ParseOverrides& overrides = {});

struct RunManifest {
  std::string scenario;
  std::string out_dir;
  std::string config_hash;   // 64-bit FNV-1a of the config file bytes, hex
  std::string created_utc;   // manifest-only; result files carry no timestamps
  std::string versions;      // engine and third-party artifact versions
  std::vector<std::pair<std::string, std::string>> summary;  // ordered key/value
  std::vector<std::string> files;                            // absolute result paths
};

// Executes the configured scenario and writes the result files. The output
// directory is <root>/<scenario>-seed<seed> where root is the first of:
// override --out, config [run] out, environment QPRIVNET_OUT_DIR, the
// working directory.
RunManifest run_scenario(const RunConfig& cfg);

// Human-readable aligned key/value table of a manifest.
std::string render_table(const RunManifest& m);

}  // namespace qpn::scenario

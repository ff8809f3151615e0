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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qprivnet.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

extern "C" int qpn_capi_smoke(void);

namespace {

fs::path test_root() {
  static const fs::path base = [] {
    fs::path p = fs::temp_directory_path() / "qprivnet_capi_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return base;
}

fs::path write_text(const std::string& name, const std::string& content) {
  const fs::path p = test_root() / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("C consumer passes the smoke sequence") { CHECK(qpn_capi_smoke() == 0); }

TEST_CASE("state handles round-trip through files") {
  // |+><+| written in the matrix text format the loader expects
  const auto p = write_text("plus.txt",
                            "dim=2\n"
                            "0 0 0.5 0\n"
                            "0 1 0.5 0\n"
                            "1 0 0.5 0\n"
                            "1 1 0.5 0\n");
  qpn_state* loaded = nullptr;
  REQUIRE(qpn_state_load(p.string().c_str(), &loaded) == QPN_OK);
  CHECK(qpn_state_dim(loaded) == 2);

  qpn_state* plus = nullptr;
  REQUIRE(qpn_state_plus_product(1, &plus) == QPN_OK);
  double fid = 0.0, td = 0.0, bures = 0.0;
  REQUIRE(qpn_state_metrics(loaded, plus, &fid, &td, &bures) == QPN_OK);
  CHECK(fid == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(td <= 1e-7);
  CHECK(bures <= 1e-4);
  qpn_state_free(loaded);
  qpn_state_free(plus);

  qpn_state* missing = nullptr;
  CHECK(qpn_state_load("/nonexistent/state.txt", &missing) == QPN_IO);
  CHECK(std::strlen(qpn_last_error()) > 0);

  qpn_state* bad = nullptr;
  CHECK(qpn_state_depolarized_ghz(2, 1.5, &bad) == QPN_INVALID);
  CHECK(qpn_state_dim(nullptr) == 0);
  CHECK(qpn_state_metrics(nullptr, nullptr, &fid, nullptr, nullptr) == QPN_INVALID);
  qpn_state_free(nullptr);
}

TEST_CASE("arithmetic entry points validate their domains") {
  double out = 0.0;
  CHECK(qpn_multi_round_bound(1.5, 10, &out) == QPN_INVALID);
  CHECK(qpn_multi_round_bound(0.1, 10, nullptr) == QPN_INVALID);
  CHECK(qpn_verified_epsilon(0.1, -0.2, 0.0, &out, nullptr) == QPN_INVALID);
  CHECK(qpn_sequential_epsilon(-0.1, 0.2, &out, nullptr) == QPN_INVALID);

  // a success clears the error message again
  CHECK(qpn_multi_round_bound(0.0, 5, &out) == QPN_OK);
  CHECK(out == 0.0);
  CHECK(qpn_last_error()[0] == '\0');
}

TEST_CASE("scenario runner drives a full run through the C surface") {
  const fs::path out_root = test_root() / "runs";
  const auto cfg = write_text("capi_privacy.ini",
                              "[run]\n"
                              "scenario = privacy\n"
                              "[network]\n"
                              "n = 3\n");
  qpn_run_options opt;
  opt.verb = nullptr;
  opt.has_seed = 1;
  opt.seed = 7;
  opt.trials = -1;
  const std::string out_str = out_root.string();
  opt.out_dir = out_str.c_str();
  opt.strict = -1;
  REQUIRE(qpn_run_scenario(cfg.string().c_str(), &opt) == QPN_OK);

  const fs::path dir = out_root / "privacy-seed7";
  REQUIRE(fs::exists(dir / "summary.txt"));
  const std::string summary = read_text(dir / "summary.txt");
  CHECK(summary.find("P=") != std::string::npos);
  CHECK(summary.find("eps_bugalho=") != std::string::npos);

  // verb conflicts and config mistakes surface as config errors with text
  opt.verb = "qfim";
  CHECK(qpn_run_scenario(cfg.string().c_str(), &opt) == QPN_CONFIG);
  CHECK(std::string(qpn_last_error()).find("conflicts") != std::string::npos);

  const auto broken = write_text("capi_broken.ini",
                                 "[run]\n"
                                 "scenario = privacy\n"
                                 "surprise = 1\n"
                                 "[network]\n"
                                 "n = 3\n");
  opt.verb = nullptr;
  CHECK(qpn_run_scenario(broken.string().c_str(), &opt) == QPN_CONFIG);
  opt.strict = 0;
  CHECK(qpn_run_scenario(broken.string().c_str(), &opt) == QPN_OK);
}

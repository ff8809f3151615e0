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

#include "qprivnet/scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/version.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qprivnet/harness.hpp"
#include "qprivnet/veriflib.hpp"

namespace fs = std::filesystem;

namespace qpn::scenario {

namespace {

using metrology::EncodingFamily;
using qcore::DensityMatrix;
using qcore::Matrix;

// ---- small utilities ----------------------------------------------------

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, ',')) items.push_back(trim(cur));
  if (!s.empty() && s.back() == ',') items.push_back("");
  return items;
}

std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::general);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> to_ll(const std::string& s) {
  if (s.empty()) return std::nullopt;
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> to_u64(const std::string& s) {
  if (s.empty() || s[0] == '-') return std::nullopt;
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

// FNV-1a over the raw config bytes; an unreadable path hashes as empty.
std::string file_hash(const std::string& path) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  std::ifstream in(path, std::ios::binary);
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return hash_hex(h);
}

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

std::string version_string() {
  std::ostringstream os;
  os << "qprivnet " << kVersion << "; eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION
     << "." << EIGEN_MINOR_VERSION << "; boost " << BOOST_LIB_VERSION;
  return os.str();
}

const char* status_name(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::Invalid: return "invalid";
    case Status::Config: return "config";
    case Status::Invariant: return "invariant";
    case Status::Budget: return "budget";
    case Status::Io: return "io";
    case Status::Internal: return "internal";
  }
  return "?";
}

// ---- result accumulation -------------------------------------------------

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string csv_text(const Csv& c) {
  std::string out = join(c.header, ",") + "\n";
  for (const auto& r : c.rows) out += join(r, ",") + "\n";
  return out;
}

// Every persisted number passes through here; a non-finite cell is an
// invariant failure, not something to write out.
std::string num(double v, const std::string& field) {
  if (!std::isfinite(v)) fail(Status::Invariant, "non-finite value for '" + field + "'");
  return format_double(v);
}

void add(RunManifest& m, const std::string& key, const std::string& value) {
  m.summary.emplace_back(key, value);
}

void add_num(RunManifest& m, const std::string& key, double v) { add(m, key, num(v, key)); }

std::string state_label(const RunConfig& cfg) {
  if (cfg.state_kind == "depolarized-ghz")
    return cfg.state_kind + " p=" + format_double(cfg.depol_p);
  if (cfg.state_kind == "file") return cfg.state_path;
  return cfg.state_kind;
}

std::string encoding_label(const RunConfig& cfg) {
  if (cfg.enc_kind == "file") return cfg.enc_path;
  if (!cfg.a.empty()) {
    std::vector<std::string> parts;
    for (double v : cfg.a) parts.push_back(format_double(v));
    return "phase a=" + join(parts, " ");
  }
  return "mean";
}

// ---- configured objects --------------------------------------------------

DensityMatrix scenario_state(const RunConfig& cfg) {
  if (cfg.state_kind == "plus-product") return qcore::plus_product(cfg.n);
  if (cfg.state_kind == "depolarized-ghz") return qcore::depolarized_ghz(cfg.n, cfg.depol_p);
  if (cfg.state_kind == "file") {
    DensityMatrix rho = qcore::load_density(cfg.state_path);
    if (rho.num_parties() != cfg.n)
      fail(Status::Config, "state.path: file holds " + std::to_string(rho.num_parties()) +
                               " registers, network.n = " + std::to_string(cfg.n));
    for (int d : rho.dims)
      if (d != 2) fail(Status::Config, "state.path: protocol registers must be qubits");
    return rho;
  }
  return qcore::ghz(cfg.n);
}

EncodingFamily scenario_encoding(const RunConfig& cfg) {
  if (cfg.enc_kind == "file") {
    EncodingFamily enc = metrology::load_encoding(cfg.enc_path);
    if (enc.n != cfg.n)
      fail(Status::Config, "encoding.path: family covers n=" + std::to_string(enc.n) +
                               ", network.n = " + std::to_string(cfg.n));
    return enc;
  }
  if (!cfg.a.empty()) {
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = 1.0;
    std::vector<Matrix> gens(static_cast<size_t>(cfg.n), h);
    Eigen::VectorXd a(cfg.n);
    for (int i = 0; i < cfg.n; ++i) a(i) = cfg.a[static_cast<size_t>(i)];
    return EncodingFamily::make(std::move(gens), a);
  }
  return EncodingFamily::mean(cfg.n);
}

// ---- scenario bodies -----------------------------------------------------

void run_qfim(const RunConfig& cfg, RunManifest& m, Csv& results, Csv&) {
  const DensityMatrix rho = scenario_state(cfg);
  const EncodingFamily enc = scenario_encoding(cfg);
  const auto rep = metrology::privacy_report(rho, enc, metrology::ParamPoint::Zero(cfg.n));
  results.header = {"row", "col", "qfim"};
  for (int r = 0; r < cfg.n; ++r)
    for (int c = 0; c < cfg.n; ++c)
      results.rows.push_back({std::to_string(r), std::to_string(c), num(rep.q.q(r, c), "qfim")});
  add(m, "n", std::to_string(cfg.n));
  add(m, "state", state_label(cfg));
  add(m, "encoding", encoding_label(cfg));
  add_num(m, "trace_q", rep.privacy.trace_q);
  add_num(m, "P", rep.privacy.P);
  add_num(m, "eps_bugalho", rep.privacy.eps_bugalho);
}

void run_privacy(const RunConfig& cfg, RunManifest& m, Csv& results, Csv&) {
  const DensityMatrix rho = scenario_state(cfg);
  const EncodingFamily enc = scenario_encoding(cfg);
  const auto rep = metrology::privacy_report(rho, enc, metrology::ParamPoint::Zero(cfg.n));
  const auto& p = rep.privacy;
  const double hp = p.eps_hassani_pairwise.maxCoeff();
  const double hc = p.eps_hassani_commutator.maxCoeff();
  results.header = {"P",          "eps_bugalho",     "hassani_pairwise_max",
                    "hassani_commutator_max", "k_star", "eps_star",
                    "alignment_bound", "alignment_bound_chain", "trace_q"};
  results.rows.push_back({num(p.P, "P"), num(p.eps_bugalho, "eps_bugalho"),
                          num(hp, "hassani_pairwise_max"), num(hc, "hassani_commutator_max"),
                          num(p.k_star, "k_star"), num(p.eps_star, "eps_star"),
                          num(p.alignment_bound, "alignment_bound"),
                          num(p.alignment_bound_chain, "alignment_bound_chain"),
                          num(p.trace_q, "trace_q")});
  add(m, "n", std::to_string(cfg.n));
  add(m, "state", state_label(cfg));
  add(m, "encoding", encoding_label(cfg));
  add_num(m, "P", p.P);
  add_num(m, "eps_bugalho", p.eps_bugalho);
  add_num(m, "hassani_pairwise_max", hp);
  add_num(m, "hassani_commutator_max", hc);
  add_num(m, "k_star", p.k_star);
  add_num(m, "eps_star", p.eps_star);
  add_num(m, "alignment_bound", p.alignment_bound);
  add_num(m, "alignment_bound_chain", p.alignment_bound_chain);
  add_num(m, "trace_q", p.trace_q);
}

// Parity-frequency sweep of the concrete mean protocol, all parties honest:
// 8 mean values theta_bar with n*theta_bar = (k + 1/2) pi / 4, one N-round
// run per point, even-parity frequency against the cosine law.
void run_simulate(const RunConfig& cfg, RunManifest& m, Csv& results, Csv& plot) {
  const auto part = acproto::PartyPartition::make(cfg.n, {});
  const EncodingFamily enc = EncodingFamily::mean(cfg.n);
  const DensityMatrix rho = scenario_state(cfg);
  const auto sys =
      acproto::build_system(acproto::honest_concrete(part, true), enc, rho, cfg.rounds, cfg.seed);
  results.header = {"theta_bar", "empirical", "predicted"};
  std::vector<std::array<double, 3>> pts;
  double max_dev = 0.0;
  for (int k = 0; k < 8; ++k) {
    const double n_theta_bar = (k + 0.5) * M_PI / 4.0;
    const double theta_bar = n_theta_bar / cfg.n;
    acproto::FixedInputs in;
    for (int j = 1; j <= cfg.n; ++j) in.angles[j] = theta_bar;
    acproto::ExecuteOptions opt;
    opt.record_messages = false;
    opt.seed = Rng(cfg.seed).child("sweep", static_cast<std::uint64_t>(k)).next_u64();
    const auto t = acproto::execute(sys, in, opt);
    const std::string& bits = t.final_outputs.at(part.honest.front());
    const long zeros = std::count(bits.begin(), bits.end(), '0');
    const double empirical = double(zeros) / double(cfg.rounds);
    const double predicted = 0.5 * (1.0 + std::cos(n_theta_bar));
    max_dev = std::max(max_dev, std::abs(empirical - predicted));
    pts.push_back({theta_bar, empirical, predicted});
    results.rows.push_back({num(theta_bar, "theta_bar"), num(empirical, "empirical"),
                            num(predicted, "predicted")});
  }
  for (const auto& p : pts) plot.rows.push_back({num(p[0], "x"), num(p[1], "y"), "empirical"});
  for (const auto& p : pts) plot.rows.push_back({num(p[0], "x"), num(p[2], "y"), "predicted"});
  add(m, "n", std::to_string(cfg.n));
  add(m, "rounds", std::to_string(cfg.rounds));
  add(m, "seed", std::to_string(cfg.seed));
  add(m, "state", state_label(cfg));
  add(m, "points", "8");
  add_num(m, "max_abs_deviation", max_dev);
}

// Protocol-vs-simulation advantage at environment-drawn angles: Monte-Carlo
// estimate with a transcript-consistency distinguisher, plus the exact
// optimum for single-round systems.
void run_advantage(const RunConfig& cfg, RunManifest& m, Csv& results, Csv&) {
  const auto part = acproto::PartyPartition::make(cfg.n, cfg.dishonest);
  const EncodingFamily enc = scenario_encoding(cfg);
  const DensityMatrix rho = scenario_state(cfg);
  const bool mean = enc.mean_mode;
  const auto sys_a =
      acproto::build_system(acproto::honest_concrete(part, mean), enc, rho, cfg.rounds, cfg.seed);
  const auto sys_b =
      acproto::build_system(acproto::simulated_ideal(part, mean), enc, rho, cfg.rounds, cfg.seed);

  Rng angle_rng = Rng(cfg.seed).child("angles");
  std::map<int, double> angles;
  for (int j = 1; j <= cfg.n; ++j) angles[j] = angle_rng.uniform() * 2.0 * M_PI;

  harness::CallbackDistinguisher d;
  d.on_angle = [&angles](int party, int) { return angles.at(party); };
  d.on_bit = [](int, int, const acproto::Transcript&) { return 0; };
  // Guess the simulation on any inconsistency between the reported final
  // bitstrings and the combined per-round broadcasts.
  d.on_decide = [n = cfg.n, rounds = cfg.rounds, g = enc.g](const acproto::Transcript& view,
                                                            Rng&) {
    std::map<int, std::string> broadcast;
    std::vector<std::string> finals;
    for (const auto& msg : view.messages) {
      if (msg.direction != acproto::Direction::Out) continue;
      if (msg.type != acproto::PayloadType::Bitstring) continue;
      if (msg.round >= 1 && msg.round <= rounds && static_cast<int>(msg.payload.size()) == n)
        broadcast[msg.round] = msg.payload;
      if (msg.round == rounds + 1) finals.push_back(msg.payload);
    }
    for (const auto& f : finals) {
      if (static_cast<int>(f.size()) != rounds) return 'B';
      for (const auto& [r, s] : broadcast) {
        std::vector<int> bits;
        for (char c : s) bits.push_back(c - '0');
        if (f[static_cast<size_t>(r - 1)] != static_cast<char>('0' + g(bits))) return 'B';
      }
    }
    return 'A';
  };

  harness::EstimateOptions eo;
  eo.trials = cfg.trials;
  eo.seed = cfg.seed;
  const auto est = harness::estimate_advantage(sys_a, sys_b, d, eo);

  std::optional<double> exact;
  if (cfg.rounds == 1) {
    acproto::FixedInputs fi;
    fi.angles = angles;
    exact = harness::exact_advantage(sys_a, sys_b, fi).d_hat;
  }

  results.header = {"d_hat", "ci_low", "ci_high", "trials", "correct"};
  std::vector<std::string> row = {num(est.d_hat, "d_hat"), num(est.ci_low, "ci_low"),
                                  num(est.ci_high, "ci_high"), std::to_string(est.trials),
                                  std::to_string(est.correct)};
  if (exact) {
    results.header.push_back("exact_advantage");
    row.push_back(num(*exact, "exact_advantage"));
  }
  results.rows.push_back(std::move(row));

  add(m, "n", std::to_string(cfg.n));
  add(m, "rounds", std::to_string(cfg.rounds));
  add(m, "trials", std::to_string(cfg.trials));
  add(m, "seed", std::to_string(cfg.seed));
  add(m, "state", state_label(cfg));
  add(m, "encoding", encoding_label(cfg));
  for (int j = 1; j <= cfg.n; ++j) add_num(m, "theta_" + std::to_string(j), angles.at(j));
  add_num(m, "d_hat", est.d_hat);
  add_num(m, "ci_low", est.ci_low);
  add_num(m, "ci_high", est.ci_high);
  add(m, "correct", std::to_string(est.correct));
  if (exact) add_num(m, "exact_advantage", *exact);
}

std::string sanitize_relation(const std::string& name) {
  std::string out;
  for (size_t i = 0; i < name.size(); ++i) {
    if (name.compare(i, 2, "<=") == 0) {
      out += "_le_";
      ++i;
    } else {
      out += name[i];
    }
  }
  return out;
}

void run_audit(const RunConfig& cfg, RunManifest& m, Csv& results, Csv& plot) {
  const auto part = acproto::PartyPartition::make(cfg.n, cfg.dishonest);
  const EncodingFamily enc = scenario_encoding(cfg);
  const DensityMatrix rho = scenario_state(cfg);
  metrology::SearchBudget budget;
  budget.seed = cfg.seed;
  const auto a = harness::audit(rho, enc, part, budget);

  results.header = {"measured",        "advantage",       "simulation_bound",
                    "privacy_bound",   "alignment_bound", "alignment_bound_chain",
                    "P",               "trace_q",         "k_star",
                    "eps_star",        "search_evals",    "budget_exhausted"};
  std::vector<std::string> row = {num(a.measured, "measured"),
                                  num(a.advantage, "advantage"),
                                  num(a.simulation_bound, "simulation_bound"),
                                  num(a.privacy_bound, "privacy_bound"),
                                  num(a.alignment_bound, "alignment_bound"),
                                  num(a.alignment_bound_chain, "alignment_bound_chain"),
                                  num(a.privacy.P, "P"),
                                  num(a.privacy.trace_q, "trace_q"),
                                  num(a.privacy.k_star, "k_star"),
                                  num(a.privacy.eps_star, "eps_star"),
                                  std::to_string(a.search.evals),
                                  a.budget_exhausted ? "1" : "0"};
  for (const auto& rel : a.relations) {
    results.header.push_back(sanitize_relation(rel.name));
    row.push_back(rel.holds ? "1" : "0");
  }
  results.rows.push_back(std::move(row));

  const std::array<std::pair<const char*, double>, 6> values = {
      {{"measured", a.measured},
       {"advantage", a.advantage},
       {"simulation_bound", a.simulation_bound},
       {"privacy_bound", a.privacy_bound},
       {"alignment_bound", a.alignment_bound},
       {"alignment_bound_chain", a.alignment_bound_chain}}};
  for (size_t i = 0; i < values.size(); ++i)
    plot.rows.push_back(
        {std::to_string(i), num(values[i].second, values[i].first), values[i].first});

  add(m, "n", std::to_string(cfg.n));
  add(m, "seed", std::to_string(cfg.seed));
  add(m, "state", state_label(cfg));
  add(m, "encoding", encoding_label(cfg));
  for (const auto& [name, v] : values) add_num(m, name, v);
  add_num(m, "P", a.privacy.P);
  add_num(m, "trace_q", a.privacy.trace_q);
  add_num(m, "k_star", a.privacy.k_star);
  add_num(m, "eps_star", a.privacy.eps_star);
  add(m, "search_evals", std::to_string(a.search.evals));
  add(m, "budget_exhausted", a.budget_exhausted ? "1" : "0");
  for (const auto& rel : a.relations) add(m, sanitize_relation(rel.name), rel.holds ? "1" : "0");
}

void run_compose(const RunConfig& cfg, RunManifest& m, Csv& results, Csv&) {
  std::vector<std::string> row;
  const bool have_verified = cfg.epsilon && cfg.lambda && cfg.delta;
  const bool have_sequential = cfg.eps1 && cfg.eps2;
  if (!have_verified && !have_sequential)
    fail(Status::Config, "compose needs epsilon+lambda+delta or eps1+eps2");
  if (have_verified) {
    const auto lvl = veriflib::verified_epsilon(veriflib::SecurityLevel::make(*cfg.epsilon),
                                                veriflib::VerificationGuarantee::make(
                                                    *cfg.lambda, *cfg.delta));
    add_num(m, "epsilon", *cfg.epsilon);
    add_num(m, "lambda", *cfg.lambda);
    add_num(m, "delta", *cfg.delta);
    add_num(m, "total", lvl.total.epsilon);
    add_num(m, "conditional", lvl.conditional.epsilon);
    add(m, "total_clamped", lvl.total.clamped ? "1" : "0");
    add(m, "conditional_clamped", lvl.conditional.clamped ? "1" : "0");
    results.header.insert(results.header.end(), {"total", "conditional", "total_clamped",
                                                 "conditional_clamped"});
    row.insert(row.end(), {num(lvl.total.epsilon, "total"),
                           num(lvl.conditional.epsilon, "conditional"),
                           lvl.total.clamped ? "1" : "0", lvl.conditional.clamped ? "1" : "0"});
  }
  if (have_sequential) {
    const auto s = veriflib::sequential_epsilon(veriflib::SecurityLevel::make(*cfg.eps1),
                                                veriflib::SecurityLevel::make(*cfg.eps2));
    add_num(m, "eps1", *cfg.eps1);
    add_num(m, "eps2", *cfg.eps2);
    add_num(m, "sequential", s.epsilon);
    add(m, "sequential_clamped", s.clamped ? "1" : "0");
    results.header.insert(results.header.end(), {"sequential", "sequential_clamped"});
    row.insert(row.end(), {num(s.epsilon, "sequential"), s.clamped ? "1" : "0"});
  }
  results.rows.push_back(std::move(row));
}

// ---- persistence ---------------------------------------------------------

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Status::Io, "cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out) fail(Status::Io, "write failed for '" + path.string() + "'");
}

std::string summary_text(const RunManifest& m) {
  std::string out;
  for (const auto& [k, v] : m.summary) out += k + "=" + v + "\n";
  return out;
}

std::string manifest_text(const RunConfig& cfg, const RunManifest& m, const Error* err) {
  std::string out;
  out += "scenario=" + m.scenario + "\n";
  out += "versions=" + m.versions + "\n";
  out += "config=" + cfg.config_path + "\n";
  out += "config_hash=" + m.config_hash + "\n";
  out += "created_utc=" + m.created_utc + "\n";
  out += "seed=" + std::to_string(cfg.seed) + "\n";
  out += "out_dir=" + m.out_dir + "\n";
  if (err) out += std::string("error=") + status_name(err->status) + ": " + err->what() + "\n";
  for (const auto& f : m.files) out += "file=" + f + "\n";
  for (const auto& [k, v] : m.summary) out += "summary." + k + "=" + v + "\n";
  return out;
}

}  // namespace

// ---- names ---------------------------------------------------------------

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Qfim: return "qfim";
    case Kind::Privacy: return "privacy";
    case Kind::Simulate: return "simulate";
    case Kind::Advantage: return "advantage";
    case Kind::Audit: return "audit";
    case Kind::Compose: return "compose";
  }
  return "?";
}

std::optional<Kind> kind_from_name(const std::string& name) {
  if (name == "qfim") return Kind::Qfim;
  if (name == "privacy") return Kind::Privacy;
  if (name == "simulate") return Kind::Simulate;
  if (name == "advantage") return Kind::Advantage;
  if (name == "audit") return Kind::Audit;
  if (name == "compose") return Kind::Compose;
  return std::nullopt;
}

// ---- configuration -------------------------------------------------------

RunConfig parse_config(const std::string& path, const ParseOverrides& overrides) {
  if (!fs::exists(path)) fail(Status::Io, "config file not found: '" + path + "'");
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ptree_error& e) {
    fail(Status::Config, std::string("config parse failure: ") + e.what());
  }

  static const std::map<std::string, std::set<std::string>> known = {
      {"run", {"scenario", "seed", "trials", "rounds", "out"}},
      {"network", {"n", "dishonest"}},
      {"state", {"kind", "p", "path"}},
      {"encoding", {"kind", "path", "a"}},
      {"compose", {"epsilon", "lambda", "delta", "eps1", "eps2"}},
  };

  std::vector<std::string> errs;
  for (const auto& section : tree) {
    const bool looks_like_key = section.second.empty() && !section.second.data().empty();
    if (looks_like_key) {
      if (overrides.strict)
        errs.push_back("key '" + section.first + "' appears outside a section");
      continue;
    }
    const auto it = known.find(section.first);
    if (it == known.end()) {
      if (overrides.strict) errs.push_back("unknown section '[" + section.first + "]'");
      continue;
    }
    for (const auto& kv : section.second)
      if (!it->second.count(kv.first) && overrides.strict)
        errs.push_back("unknown key '" + section.first + "." + kv.first + "'");
  }

  const auto get = [&tree](const char* sec, const char* key) -> std::optional<std::string> {
    const auto s = tree.get_child_optional(sec);
    if (!s) return std::nullopt;
    for (const auto& kv : *s)
      if (kv.first == key) return trim(kv.second.data());
    return std::nullopt;
  };

  RunConfig cfg;
  cfg.config_path = fs::absolute(path).lexically_normal().string();

  // scenario kind: config key and/or command verb, which must agree
  const auto scen = get("run", "scenario");
  std::optional<Kind> from_file, from_verb;
  if (scen) {
    from_file = kind_from_name(*scen);
    if (!from_file)
      errs.push_back("run.scenario '" + *scen +
                     "' is not one of qfim|privacy|simulate|advantage|audit|compose");
  }
  if (overrides.verb) {
    from_verb = kind_from_name(*overrides.verb);
    if (!from_verb) errs.push_back("verb '" + *overrides.verb + "' is not a scenario name");
  }
  if (from_file && from_verb && *from_file != *from_verb)
    errs.push_back("run.scenario '" + *scen + "' conflicts with the requested verb '" +
                   *overrides.verb + "'");
  if (!scen && !overrides.verb) errs.push_back("run.scenario is required (or pass a verb)");
  const bool kind_known = from_verb.has_value() || from_file.has_value();
  if (from_verb)
    cfg.kind = *from_verb;
  else if (from_file)
    cfg.kind = *from_file;

  // run section scalars
  if (overrides.seed) {
    cfg.seed = *overrides.seed;
    cfg.seed_set = true;
  } else if (const auto s = get("run", "seed")) {
    if (const auto v = to_u64(*s)) {
      cfg.seed = *v;
      cfg.seed_set = true;
    } else {
      errs.push_back("run.seed must be an unsigned 64-bit integer, got '" + *s + "'");
    }
  }
  if (overrides.trials) {
    cfg.trials = *overrides.trials;
  } else if (const auto s = get("run", "trials")) {
    if (const auto v = to_ll(*s))
      cfg.trials = static_cast<long>(*v);
    else
      errs.push_back("run.trials must be an integer, got '" + *s + "'");
  }
  if (cfg.trials < 1) errs.push_back("run.trials must be at least 1");
  if (const auto s = get("run", "rounds")) {
    if (const auto v = to_ll(*s))
      cfg.rounds = static_cast<int>(*v);
    else
      errs.push_back("run.rounds must be an integer, got '" + *s + "'");
  }
  if (cfg.rounds < 1) errs.push_back("run.rounds must be at least 1");

  // network section
  bool n_valid = false;
  if (const auto s = get("network", "n")) {
    const auto v = to_ll(*s);
    if (!v) {
      errs.push_back("network.n must be an integer, got '" + *s + "'");
    } else if (*v < 1 || *v > Limits::global().max_parties) {
      errs.push_back("network.n must lie in 1.." + std::to_string(Limits::global().max_parties) +
                     ", got " + *s);
    } else {
      cfg.n = static_cast<int>(*v);
      n_valid = true;
    }
  } else if (kind_known && cfg.kind != Kind::Compose) {
    errs.push_back("network.n is required");
  }
  if (const auto s = get("network", "dishonest")) {
    if (!s->empty()) {
      std::set<int> seen;
      for (const auto& item : split_list(*s)) {
        const auto v = to_ll(item);
        if (!v) {
          errs.push_back("network.dishonest holds a non-integer entry '" + item + "'");
        } else if (n_valid && (*v < 1 || *v > cfg.n)) {
          errs.push_back("network.dishonest entry " + item + " is outside 1.." +
                         std::to_string(cfg.n));
        } else if (!seen.insert(static_cast<int>(*v)).second) {
          errs.push_back("network.dishonest lists party " + item + " twice");
        } else {
          cfg.dishonest.push_back(static_cast<int>(*v));
        }
      }
      std::sort(cfg.dishonest.begin(), cfg.dishonest.end());
    }
  }

  // state section
  if (const auto s = get("state", "kind")) {
    if (*s == "ghz" || *s == "plus-product" || *s == "depolarized-ghz" || *s == "file")
      cfg.state_kind = *s;
    else
      errs.push_back("state.kind '" + *s +
                     "' is not one of ghz|plus-product|depolarized-ghz|file");
  }
  if (const auto s = get("state", "p")) {
    if (cfg.state_kind != "depolarized-ghz") {
      errs.push_back("state.p applies only to state.kind = depolarized-ghz");
    } else if (const auto v = to_double(*s); v && *v >= 0.0 && *v <= 1.0) {
      cfg.depol_p = *v;
    } else {
      errs.push_back("state.p must be a number in [0, 1], got '" + *s + "'");
    }
  } else if (cfg.state_kind == "depolarized-ghz") {
    errs.push_back("state.p is required for state.kind = depolarized-ghz");
  }
  if (const auto s = get("state", "path")) {
    if (cfg.state_kind != "file")
      errs.push_back("state.path applies only to state.kind = file");
    else
      cfg.state_path = *s;
  } else if (cfg.state_kind == "file") {
    errs.push_back("state.path is required for state.kind = file");
  }

  // encoding section
  if (const auto s = get("encoding", "kind")) {
    if (*s == "mean" || *s == "file")
      cfg.enc_kind = *s;
    else
      errs.push_back("encoding.kind '" + *s + "' is not one of mean|file");
  }
  if (const auto s = get("encoding", "path")) {
    if (cfg.enc_kind != "file")
      errs.push_back("encoding.path applies only to encoding.kind = file");
    else
      cfg.enc_path = *s;
  } else if (cfg.enc_kind == "file") {
    errs.push_back("encoding.path is required for encoding.kind = file");
  }
  if (const auto s = get("encoding", "a")) {
    if (cfg.enc_kind == "file") {
      errs.push_back("encoding.a cannot be combined with encoding.kind = file");
    } else {
      std::vector<double> a;
      bool ok = true;
      for (const auto& item : split_list(*s)) {
        const auto v = to_double(item);
        if (!v) {
          errs.push_back("encoding.a holds a non-numeric entry '" + item + "'");
          ok = false;
          break;
        }
        a.push_back(*v);
      }
      if (ok && n_valid && static_cast<int>(a.size()) != cfg.n) {
        errs.push_back("encoding.a must list network.n = " + std::to_string(cfg.n) +
                       " entries, got " + std::to_string(a.size()));
        ok = false;
      }
      if (ok) {
        double norm2 = 0.0;
        for (double v : a) norm2 += v * v;
        const double norm = std::sqrt(norm2);
        if (std::abs(norm - 1.0) > 1e-6) {
          errs.push_back("encoding.a must be a unit vector within 1e-6 (|a| = " +
                         format_double(norm) + ")");
        } else {
          for (double& v : a) v /= norm;
          cfg.a = std::move(a);
        }
      }
    }
  }

  // compose section
  const auto get_compose = [&](const char* key, double lo, double hi,
                               std::optional<double>& out) {
    if (const auto s = get("compose", key)) {
      const auto v = to_double(*s);
      if (v && *v >= lo && *v <= hi)
        out = *v;
      else
        errs.push_back(std::string("compose.") + key + " must be a number in [" +
                       format_double(lo) + ", " + format_double(hi) + "], got '" + *s + "'");
    }
  };
  get_compose("epsilon", 0.0, 1.0, cfg.epsilon);
  get_compose("lambda", 0.0, 1.0, cfg.lambda);
  get_compose("delta", 0.0, 1.0, cfg.delta);
  get_compose("eps1", 0.0, 1.0, cfg.eps1);
  get_compose("eps2", 0.0, 1.0, cfg.eps2);
  const bool any_verified = cfg.epsilon || cfg.lambda || cfg.delta;
  const bool all_verified = cfg.epsilon && cfg.lambda && cfg.delta;
  const bool any_sequential = cfg.eps1 || cfg.eps2;
  const bool all_sequential = cfg.eps1 && cfg.eps2;
  if (any_verified && !all_verified)
    errs.push_back("compose.epsilon, compose.lambda and compose.delta must be given together");
  if (any_sequential && !all_sequential)
    errs.push_back("compose.eps1 and compose.eps2 must be given together");

  // scenario-specific requirements
  if (kind_known) {
    if (cfg.kind == Kind::Simulate || cfg.kind == Kind::Advantage) {
      if (!cfg.seed_set)
        errs.push_back("run.seed is required for stochastic scenarios (simulate, advantage)");
    }
    if (cfg.kind == Kind::Simulate) {
      if (!cfg.dishonest.empty())
        errs.push_back("simulate runs all parties honest; network.dishonest must be empty");
      if (cfg.enc_kind != "mean" || !cfg.a.empty())
        errs.push_back("simulate requires the builtin mean encoding");
    }
    if (cfg.kind == Kind::Advantage || cfg.kind == Kind::Audit) {
      if (cfg.dishonest.empty())
        errs.push_back(kind_name(cfg.kind) +
                       std::string(" requires at least one dishonest party (network.dishonest)"));
    }
    if (cfg.kind == Kind::Advantage && cfg.trials < 100)
      errs.push_back("run.trials must be at least 100 for advantage");
    if (cfg.kind == Kind::Compose && !all_verified && !all_sequential)
      errs.push_back(
          "compose needs epsilon+lambda+delta, eps1+eps2, or both in the [compose] section");
  }

  // referenced files must exist; their content is validated by loading
  const bool uses_state = kind_known && cfg.kind != Kind::Compose;
  if (uses_state && cfg.state_kind == "file" && !cfg.state_path.empty() &&
      !fs::exists(cfg.state_path))
    errs.push_back("state.path '" + cfg.state_path + "' does not exist");
  if (uses_state && cfg.enc_kind == "file" && !cfg.enc_path.empty() && !fs::exists(cfg.enc_path))
    errs.push_back("encoding.path '" + cfg.enc_path + "' does not exist");

  // output directory: override, then config, then environment, then cwd
  if (overrides.out_dir) {
    cfg.out_dir = *overrides.out_dir;
  } else if (const auto s = get("run", "out"); s && !s->empty()) {
    cfg.out_dir = *s;
  } else if (const char* env = std::getenv("QPRIVNET_OUT_DIR"); env && *env) {
    cfg.out_dir = env;
  } else {
    cfg.out_dir = ".";
  }

  if (!errs.empty()) fail(Status::Config, join(errs, "; "));

  // surface loader errors (bad matrices, malformed families) at parse time
  if (uses_state && cfg.state_kind == "file") (void)scenario_state(cfg);
  if (uses_state && cfg.enc_kind == "file") (void)scenario_encoding(cfg);
  return cfg;
}

// ---- execution -----------------------------------------------------------

RunManifest run_scenario(const RunConfig& cfg) {
  RunManifest m;
  m.scenario = kind_name(cfg.kind);
  m.config_hash = file_hash(cfg.config_path);
  m.created_utc = iso_utc_now();
  m.versions = version_string();

  const fs::path root = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
  const fs::path dir = root / (m.scenario + std::string("-seed") + std::to_string(cfg.seed));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    fail(Status::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
  m.out_dir = fs::absolute(dir).lexically_normal().string();

  Csv results;
  Csv plot;
  plot.header = {"x", "y", "series"};
  try {
    switch (cfg.kind) {
      case Kind::Qfim: run_qfim(cfg, m, results, plot); break;
      case Kind::Privacy: run_privacy(cfg, m, results, plot); break;
      case Kind::Simulate: run_simulate(cfg, m, results, plot); break;
      case Kind::Advantage: run_advantage(cfg, m, results, plot); break;
      case Kind::Audit: run_audit(cfg, m, results, plot); break;
      case Kind::Compose: run_compose(cfg, m, results, plot); break;
    }
  } catch (const Error& e) {
    // a failed run still leaves a manifest recording what went wrong
    write_file(dir / "manifest.txt", manifest_text(cfg, m, &e));
    throw;
  }

  const fs::path f_summary = dir / "summary.txt";
  const fs::path f_results = dir / "results.csv";
  const fs::path f_plot = dir / "plot.csv";
  const fs::path f_manifest = dir / "manifest.txt";
  write_file(f_summary, summary_text(m));
  write_file(f_results, csv_text(results));
  write_file(f_plot, csv_text(plot));
  for (const fs::path& f : {f_summary, f_results, f_plot, f_manifest})
    m.files.push_back(fs::absolute(f).lexically_normal().string());
  write_file(f_manifest, manifest_text(cfg, m, nullptr));
  return m;
}

std::string render_table(const RunManifest& m) {
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("scenario", m.scenario);
  rows.emplace_back("out_dir", m.out_dir);
  rows.emplace_back("config_hash", m.config_hash);
  for (const auto& kv : m.summary) rows.push_back(kv);
  for (const auto& f : m.files) rows.emplace_back("file", f);
  size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  std::string out;
  for (const auto& [k, v] : rows) {
    out += k;
    out.append(width - k.size() + 2, ' ');
    out += v + "\n";
  }
  return out;
}

}  // namespace qpn::scenario

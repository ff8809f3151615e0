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

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "qprivnet/qcore.hpp"

using namespace qpn;
using namespace qpn::qcore;

namespace {

Status status_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.status;
  }
  return Status::Ok;
}

// Independent digit arithmetic for the embedding / partial-trace oracles.
// Deliberately written index-first (instead of position-first) so a shared
// mistake with the implementation is unlikely.
int oracle_index(const std::vector<int>& digits, const std::vector<int>& dims) {
  int idx = 0;
  int stride = 1;
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    idx += digits[k] * stride;
    stride *= dims[k];
  }
  return idx;
}

std::vector<int> oracle_digits(int index, const std::vector<int>& dims) {
  std::vector<int> out(dims.size());
  int stride = 1;
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) stride *= dims[k];
  for (std::size_t k = 0; k < dims.size(); ++k) {
    stride /= dims[k];
    out[k] = index / stride;
    index %= stride;
  }
  return out;
}

Matrix kron_oracle(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < out.rows(); ++i)
    for (long j = 0; j < out.cols(); ++j)
      out(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
  return out;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("format_double is 17-significant-digit scientific and roundtrips") {
  CHECK(format_double(0.5) == "5.0000000000000000e-01");
  CHECK(format_double(1.0) == "1.0000000000000000e+00");
  CHECK(format_double(-0.125) == "-1.2500000000000000e-01");
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform_int(20) - 10.0);
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
    CHECK(s.find(',') == std::string::npos);
  }
}

TEST_CASE("rng is deterministic and splits independently") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
  bool differs = false;
  for (int i = 0; i < 16; ++i) differs = differs || (a.next_u64() != c.next_u64());
  CHECK(differs);

  Rng root(7);
  Rng u = root.child("unitary");
  Rng s = root.child("state");
  CHECK(u.next_u64() != s.next_u64());
  Rng u2 = Rng(7).child("unitary");
  u = Rng(7).child("unitary");
  CHECK(u.next_u64() == u2.next_u64());

  Rng stats(11);
  double sum = 0.0, sumsq = 0.0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    const double x = stats.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    sum += x;
    sumsq += x * x;
  }
  CHECK(sum / trials == doctest::Approx(0.5).epsilon(0.02));
  CHECK(sumsq / trials == doctest::Approx(1.0 / 3.0).epsilon(0.03));

  Rng norm(13);
  double nsum = 0.0, nsq = 0.0;
  for (int i = 0; i < trials; ++i) {
    const double x = norm.normal();
    nsum += x;
    nsq += x * x;
  }
  CHECK(std::abs(nsum / trials) < 0.03);
  CHECK(nsq / trials == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("density matrix validation rejects malformed input") {
  Matrix ok(2, 2);
  ok << 0.5, 0.0, 0.0, 0.5;
  CHECK(status_of([&] { DensityMatrix::make(ok); }) == Status::Ok);

  Matrix nonherm(2, 2);
  nonherm << 0.5, 0.3, 0.0, 0.5;
  CHECK(status_of([&] { DensityMatrix::make(nonherm); }) == Status::Invariant);

  Matrix badtrace(2, 2);
  badtrace << 0.7, 0.0, 0.0, 0.5;
  CHECK(status_of([&] { DensityMatrix::make(badtrace); }) == Status::Invariant);

  Matrix negeig(2, 2);
  negeig << 1.1, 0.0, 0.0, -0.1;
  CHECK(status_of([&] { DensityMatrix::make(negeig); }) == Status::Invariant);

  CHECK(status_of([&] { DensityMatrix::make(ok, {1, 2}, {2}); }) == Status::Invalid);
  CHECK(status_of([&] { DensityMatrix::make(ok, {1}, {3}); }) == Status::Invalid);
  Matrix four = Matrix::Identity(4, 4) * 0.25;
  CHECK(status_of([&] { DensityMatrix::make(four, {1, 1}, {2, 2}); }) == Status::Invalid);
}

TEST_CASE("default register labels: qubits for powers of two, one register otherwise") {
  DensityMatrix q2 = maximally_mixed(4);
  CHECK(q2.parties == std::vector<int>{1, 2});
  CHECK(q2.dims == std::vector<int>{2, 2});
  DensityMatrix q3 = maximally_mixed(3);
  CHECK(q3.parties == std::vector<int>{1});
  CHECK(q3.dims == std::vector<int>{3});
}

TEST_CASE("ghz, plus product and depolarized ghz have the expected entries") {
  DensityMatrix g = ghz(3);
  CHECK(g.dim() == 8);
  CHECK(g.m(0, 0).real() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.m(7, 7).real() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.m(0, 7).real() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.m(3, 3) == Complex(0.0, 0.0));

  DensityMatrix p = plus_product(2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(p.m(i, j).real() == doctest::Approx(0.25).epsilon(1e-15));

  const double w = 0.05;
  DensityMatrix d = depolarized_ghz(3, w);
  CHECK(d.m(0, 0).real() == doctest::Approx((1 - w) * 0.5 + w / 8).epsilon(1e-14));
  CHECK(d.m(0, 7).real() == doctest::Approx((1 - w) * 0.5).epsilon(1e-14));
  CHECK(d.m(2, 2).real() == doctest::Approx(w / 8).epsilon(1e-14));
}

TEST_CASE("tensor matches a direct Kronecker oracle") {
  Rng rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    Matrix a = random_unitary(2, rng);
    Matrix b = random_unitary(3, rng);
    CHECK(max_abs(tensor(a, b) - kron_oracle(a, b)) < 1e-14);
  }
  DensityMatrix x = random_density(2, 2, rng);
  DensityMatrix y = random_density(3, 2, rng);
  y.parties = {7};
  DensityMatrix xy = tensor(x, y);
  CHECK(xy.parties == std::vector<int>{1, 7});
  CHECK(xy.dims == std::vector<int>{2, 3});
  CHECK(max_abs(xy.m - kron_oracle(x.m, y.m)) < 1e-14);

  DensityMatrix clash = random_density(2, 1, rng);
  CHECK(status_of([&] { tensor(x, clash); }) == Status::Invalid);
}

TEST_CASE("partial trace recovers tensor factors and contracts correctly") {
  Rng rng(9);
  DensityMatrix a = random_density(2, 2, rng);
  DensityMatrix b = random_density(3, 3, rng);
  b.parties = {2};
  DensityMatrix ab = tensor(a, b);
  CHECK(max_abs(partial_trace(ab, {1}).m - a.m) < 1e-12);
  CHECK(max_abs(partial_trace(ab, {2}).m - b.m) < 1e-12);

  // Independent contraction oracle on a random three-register state.
  DensityMatrix full = random_density(8, 4, rng);
  const std::vector<int> dims = full.dims;
  Matrix reduced = Matrix::Zero(4, 4);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const auto di = oracle_digits(i, dims);
      const auto dj = oracle_digits(j, dims);
      if (di[1] != dj[1]) continue;  // trace over the middle register
      const int r = oracle_index({di[0], di[2]}, {2, 2});
      const int c = oracle_index({dj[0], dj[2]}, {2, 2});
      reduced(r, c) += full.m(i, j);
    }
  DensityMatrix kept = partial_trace(full, {1, 3});
  CHECK(kept.parties == std::vector<int>{1, 3});
  CHECK(max_abs(kept.m - reduced) < 1e-12);

  DensityMatrix g = ghz(3);
  DensityMatrix one = partial_trace(g, {2});
  CHECK(max_abs(one.m - Matrix::Identity(2, 2) * 0.5) < 1e-12);

  CHECK(status_of([&] { partial_trace(g, {}); }) == Status::Invalid);
  CHECK(status_of([&] { partial_trace(g, {9}); }) == Status::Invalid);
}

TEST_CASE("embed places operators on the requested registers") {
  Rng rng(21);
  DensityMatrix rho = random_density(8, 3, rng);
  Matrix h = random_unitary(2, rng);
  CHECK(max_abs(embed(h, {1}, rho) - kron_oracle(kron_oracle(h, Matrix::Identity(2, 2)),
                                                 Matrix::Identity(2, 2))) < 1e-14);
  CHECK(max_abs(embed(h, {3}, rho) - kron_oracle(kron_oracle(Matrix::Identity(2, 2),
                                                             Matrix::Identity(2, 2)),
                                                 h)) < 1e-14);

  // Non-adjacent pair, checked entry by entry with independent digit maps.
  Matrix two = random_unitary(4, rng);
  Matrix emb = embed(two, {1, 3}, rho);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const auto di = oracle_digits(i, {2, 2, 2});
      const auto dj = oracle_digits(j, {2, 2, 2});
      const Complex expect = (di[1] == dj[1])
                                 ? two(oracle_index({di[0], di[2]}, {2, 2}),
                                       oracle_index({dj[0], dj[2]}, {2, 2}))
                                 : Complex(0.0, 0.0);
      CHECK(std::abs(emb(i, j) - expect) < 1e-14);
    }

  CHECK(status_of([&] { embed(two, {1}, rho); }) == Status::Invalid);
  CHECK(status_of([&] { embed(h, {5}, rho); }) == Status::Invalid);
}

TEST_CASE("channels: depolarizing, unitary conjugation, completeness enforcement") {
  Rng rng(31);
  DensityMatrix psi = random_density(2, 1, rng);
  DensityMatrix mixed = apply_channel(psi, Channel::depolarizing(1.0), 1);
  CHECK(max_abs(mixed.m - Matrix::Identity(2, 2) * 0.5) < 1e-12);

  DensityMatrix same = apply_channel(psi, Channel::depolarizing(0.0), 1);
  CHECK(max_abs(same.m - psi.m) < 1e-13);

  Matrix u = random_unitary(2, rng);
  DensityMatrix rho = random_density(4, 2, rng);
  DensityMatrix conj = apply_channel(rho, Channel::unitary(u), 2);
  Matrix ufull = kron_oracle(Matrix::Identity(2, 2), u);
  CHECK(max_abs(conj.m - ufull * rho.m * ufull.adjoint()) < 1e-13);

  for (int rep = 0; rep < 4; ++rep) {
    Channel ch = random_channel(2, 3, rng);
    DensityMatrix out = apply_channel(rho, ch, 1);
    CHECK(std::abs(out.m.trace().real() - 1.0) < 1e-12);
  }

  Channel broken;
  broken.kraus = {Matrix::Identity(2, 2) * 0.5};
  CHECK(status_of([&] { apply_channel(rho, broken, 1); }) == Status::Invariant);
  CHECK(status_of([&] { Channel::depolarizing(1.5); }) == Status::Invalid);
  CHECK(status_of([&] { Channel::make({Matrix::Identity(2, 2) * 2.0}); }) == Status::Invariant);
}

TEST_CASE("state metrics match closed-form values") {
  Vector zero(2), plus(2);
  zero << 1, 0;
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  Metrics m = state_metrics(pure_state(zero), pure_state(plus));
  CHECK(m.fidelity == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.trace_distance == doctest::Approx(0.7071067811865475).epsilon(1e-12));
  CHECK(m.bures_distance == doctest::Approx(0.7653668647301795).epsilon(1e-12));

  Metrics same = state_metrics(pure_state(plus), pure_state(plus));
  CHECK(same.fidelity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(same.trace_distance < 1e-12);
  CHECK(same.bures_distance < 1e-6);

  Vector one(2);
  one << 0, 1;
  Metrics orth = state_metrics(pure_state(zero), pure_state(one));
  CHECK(orth.fidelity < 1e-12);
  CHECK(orth.trace_distance == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(orth.bures_distance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  // Pure-versus-pure fidelity is the squared overlap.
  Rng rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    Vector a = random_pure_vector(4, rng);
    Vector b = random_pure_vector(4, rng);
    const double ov = std::norm((a.adjoint() * b)(0, 0));
    Metrics pm = state_metrics(pure_state(a), pure_state(b));
    CHECK(std::abs(pm.fidelity - ov) < 1e-11);
  }
}

TEST_CASE("metric identities hold on random pairs") {
  Rng rng(23);
  for (int rep = 0; rep < 100; ++rep) {
    const int d = 2 + rng.uniform_int(7);
    DensityMatrix rho = random_density(d, 1 + rng.uniform_int(d), rng);
    DensityMatrix sig = random_density(d, 1 + rng.uniform_int(d), rng);
    Metrics m = state_metrics(rho, sig);
    CHECK(m.fidelity >= -1e-12);
    CHECK(m.fidelity <= 1.0 + 1e-12);
    CHECK(m.trace_distance >= -1e-12);
    CHECK(m.trace_distance <= 1.0 + 1e-12);
    // Fuchs-van de Graaf inequalities; the upper one is tight for pure pairs.
    CHECK(1.0 - std::sqrt(m.fidelity) <= m.trace_distance + 1e-9);
    CHECK(m.trace_distance <= std::sqrt(1.0 - m.fidelity) + 1e-12);
    // Bures distance is defined through the same fidelity.
    const double f_from_bures = std::pow(1.0 - 0.5 * m.bures_distance * m.bures_distance, 2);
    CHECK(std::abs(m.fidelity - f_from_bures) < 1e-9);
    Metrics rev = state_metrics(sig, rho);
    CHECK(std::abs(rev.fidelity - m.fidelity) < 1e-12);
    CHECK(std::abs(rev.trace_distance - m.trace_distance) < 1e-12);
  }
}

TEST_CASE("tensor then partial trace recovers each factor on random pairs") {
  Rng rng(25);
  for (int rep = 0; rep < 100; ++rep) {
    const int da = 2 + rng.uniform_int(3);
    const int db = 2 + rng.uniform_int(3);
    DensityMatrix a0 = random_density(da, 1 + rng.uniform_int(da), rng);
    DensityMatrix b0 = random_density(db, 1 + rng.uniform_int(db), rng);
    DensityMatrix a = DensityMatrix::make(a0.m, {1}, {da});
    DensityMatrix b = DensityMatrix::make(b0.m, {2}, {db});
    DensityMatrix ab = tensor(a, b);
    CHECK(max_abs(partial_trace(ab, {1}).m - a.m) < 1e-9);
    CHECK(max_abs(partial_trace(ab, {2}).m - b.m) < 1e-9);
  }
}

TEST_CASE("channels cannot increase distinguishability") {
  Rng rng(29);
  for (int rep = 0; rep < 20; ++rep) {
    DensityMatrix rho = random_density(2, 1 + rng.uniform_int(2), rng);
    DensityMatrix sig = random_density(2, 1 + rng.uniform_int(2), rng);
    Channel ch = random_channel(2, 1 + rng.uniform_int(3), rng);
    Metrics before = state_metrics(rho, sig);
    Metrics after = state_metrics(apply_channel(rho, ch, 1), apply_channel(sig, ch, 1));
    CHECK(after.trace_distance <= before.trace_distance + 1e-10);
    CHECK(after.fidelity >= before.fidelity - 1e-9);
  }
}

TEST_CASE("trace norm: eigenvalue, skew and generic routes agree with an SVD oracle") {
  Matrix z(2, 2);
  z << 1, 0, 0, -1;
  CHECK(trace_norm(z) == doctest::Approx(2.0).epsilon(1e-12));

  Matrix x(2, 2), zz(2, 2);
  x << 0, 1, 1, 0;
  zz << 1, 0, 0, -1;
  Matrix comm = x * zz - zz * x;  // skew-Hermitian
  CHECK(max_abs(comm + comm.adjoint()) < 1e-15);
  CHECK(trace_norm(comm) == doctest::Approx(4.0).epsilon(1e-12));

  Rng rng(41);
  for (int rep = 0; rep < 8; ++rep) {
    Matrix g(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
    // Oracle: singular values are the square roots of eig(M^dag M).
    EigenSystem es = hermitian_eigen(g.adjoint() * g);
    double oracle = 0.0;
    for (int i = 0; i < 3; ++i) oracle += std::sqrt(std::max(es.values(i), 0.0));
    CHECK(trace_norm(g) == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("symmetric logarithmic derivative solves its defining equation") {
  // Diagonal closed form: L_ii = (d rho)_ii / lambda_i, off-diagonals scale by
  // 2 / (lambda_i + lambda_j).
  Matrix rho_m(2, 2);
  rho_m << 0.75, 0.0, 0.0, 0.25;
  DensityMatrix rho = DensityMatrix::make(rho_m);
  Matrix drho(2, 2);
  drho << 0.1, Complex(0.0, -0.2), Complex(0.0, 0.2), -0.1;
  Matrix L = sld_solve(rho, drho);
  CHECK(std::abs(L(0, 0) - Complex(0.1 / 0.75, 0.0)) < 1e-12);
  CHECK(std::abs(L(1, 1) - Complex(-0.1 / 0.25, 0.0)) < 1e-12);
  CHECK(std::abs(L(0, 1) - Complex(0.0, -0.4)) < 1e-12);

  // Full-rank random cases satisfy (L rho + rho L) / 2 = d rho.
  Rng rng(47);
  for (int rep = 0; rep < 8; ++rep) {
    DensityMatrix r = random_density(3, 3, rng);
    Matrix h(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) h(i, j) = Complex(rng.normal(), rng.normal());
    h = (h + Matrix(h.adjoint())).eval();
    Matrix d = Complex(0.0, 1.0) * (r.m * h - h * r.m);  // unitary-generated derivative
    d = 0.5 * (d + d.adjoint()).eval();
    Matrix sld = sld_solve(r, d);
    CHECK(max_abs(0.5 * (sld * r.m + r.m * sld) - d) < 1e-8);
    CHECK(max_abs(sld - sld.adjoint()) < 1e-10);
  }

  // Pure-state derivative with support overlap works; a rank-changing
  // derivative is rejected.
  Vector zero(2);
  zero << 1, 0;
  DensityMatrix pure = pure_state(zero);
  Matrix cross(2, 2);
  cross << 0, 1, 1, 0;
  Matrix Lp = sld_solve(pure, cross);
  CHECK(std::abs(Lp(0, 1) - Complex(2.0, 0.0)) < 1e-12);

  Matrix rank_change(2, 2);
  rank_change << -1, 0, 0, 1;
  CHECK(status_of([&] { sld_solve(pure, rank_change); }) == Status::Invariant);

  Matrix not_traceless(2, 2);
  not_traceless << 1, 0, 0, 0;
  CHECK(status_of([&] { sld_solve(pure, not_traceless); }) == Status::Invalid);
}

TEST_CASE("projective measurement: probabilities, conditional states, zero branches") {
  Vector plus(2);
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  DensityMatrix rho = pure_state(plus);

  auto comp = projective_measure(rho, ProjectiveMeasurement::computational(2), {1});
  REQUIRE(comp.size() == 2);
  CHECK(comp[0].probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(comp[1].probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(comp[0].outcome == "0");
  CHECK(comp[0].post_state.m(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(comp[0].zero_probability);

  auto xbasis = projective_measure(rho, ProjectiveMeasurement::pauli_x(), {1});
  CHECK(xbasis[0].probability == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(xbasis[1].probability == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(xbasis[1].zero_probability);
  CHECK(std::abs(xbasis[1].post_state.m.trace().real() - 1.0) < 1e-12);

  DensityMatrix g = ghz(2);
  auto first = projective_measure(g, ProjectiveMeasurement::computational(2), {1});
  CHECK(first[0].probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(first[0].post_state.m(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(first[1].post_state.m(3, 3).real() == doctest::Approx(1.0).epsilon(1e-12));

  // Joint measurement over both registers of a two-qubit state.
  auto joint = projective_measure(g, ProjectiveMeasurement::computational(4), {1, 2});
  CHECK(joint[0].probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(joint[1].probability == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(joint[3].probability == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("optimal two-state discrimination advantage equals the trace distance") {
  Rng rng(53);
  for (int rep = 0; rep < 6; ++rep) {
    DensityMatrix rho = random_density(3, 2, rng);
    DensityMatrix sig = random_density(3, 3, rng);
    CHECK(helstrom_advantage(rho, sig) ==
          doctest::Approx(state_metrics(rho, sig).trace_distance).epsilon(1e-12));
  }
}

TEST_CASE("matrix files roundtrip exactly and reject malformed content") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "qpn_qcore_io";
  fs::create_directories(dir);

  Rng rng(59);
  Matrix m = random_unitary(3, rng);
  m(1, 2) = Complex(0.0, 0.0);
  const std::string path = (dir / "mat.txt").string();
  save_matrix(path, m);
  Matrix back = load_matrix(path);
  CHECK(max_abs(back - m) == 0.0);

  DensityMatrix rho = random_density(4, 2, rng);
  const std::string rho_path = (dir / "rho.txt").string();
  save_matrix(rho_path, rho.m);
  DensityMatrix rho_back = load_density(rho_path);
  CHECK(max_abs(rho_back.m - rho.m) == 0.0);

  auto write_file = [&](const std::string& name, const std::string& body) {
    std::FILE* f = std::fopen((dir / name).c_str(), "wb");
    std::fwrite(body.data(), 1, body.size(), f);
    std::fclose(f);
    return (dir / name).string();
  };

  CHECK(status_of([&] { load_matrix((dir / "absent.txt").string()); }) == Status::Io);
  CHECK(status_of([&] { load_matrix(write_file("nohdr.txt", "0 0 1 0\n")); }) == Status::Io);
  CHECK(status_of([&] { load_matrix(write_file("oob.txt", "dim=2\n0 5 1 0\n")); }) == Status::Io);
  CHECK(status_of([&] { load_matrix(write_file("dup.txt", "dim=2\n0 0 1 0\n0 0 1 0\n")); }) ==
        Status::Io);
  CHECK(status_of([&] { load_matrix(write_file("trail.txt", "dim=2\n0 0 1 0 9\n")); }) ==
        Status::Io);
  CHECK(status_of([&] { load_matrix(write_file("garbage.txt", "dim=2\nx y z w\n")); }) ==
        Status::Io);
  CHECK(status_of([&] { load_density(write_file("neg.txt", "dim=2\n0 0 1.5 0\n1 1 -0.5 0\n")); }) ==
        Status::Invariant);

  // Omitted entries read back as zero.
  Matrix sparse = load_matrix(write_file("sparse.txt", "dim=3\n0 0 0.5 0\n2 2 0.5 0\n"));
  CHECK(sparse(1, 1) == Complex(0.0, 0.0));
  CHECK(sparse(0, 0).real() == 0.5);
}

TEST_CASE("random constructions have the right structure") {
  Rng rng(61);
  for (int d : {2, 3, 5}) {
    Matrix u = random_unitary(d, rng);
    CHECK(max_abs(u.adjoint() * u - Matrix::Identity(d, d)) < 1e-12);
  }
  Vector psi = random_pure_vector(6, rng);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));

  DensityMatrix rho = random_density(4, 2, rng);
  EigenSystem es = hermitian_eigen(rho.m);
  int support = 0;
  for (int i = 0; i < 4; ++i)
    if (es.values(i) > 1e-10) ++support;
  CHECK(support <= 2);

  Channel ch = random_channel(3, 2, rng);
  Matrix acc = Matrix::Zero(3, 3);
  for (const Matrix& k : ch.kraus) acc += k.adjoint() * k;
  CHECK(max_abs(acc - Matrix::Identity(3, 3)) < 1e-12);

  Eigen::MatrixXd o = random_orthogonal(4, rng);
  CHECK((o.transpose() * o - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
}

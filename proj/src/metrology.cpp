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

#include "qprivnet/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qprivnet/rng.hpp"

namespace qpn::metrology {

namespace {

using qcore::embed;
using qcore::hermitian_eigen;
using qcore::trace_norm;

int parity(const std::vector<int>& bits) {
  int acc = 0;
  for (int b : bits) acc ^= (b & 1);
  return acc;
}

Matrix unitary_for(const Matrix& h, double theta) {
  qcore::EigenSystem es = hermitian_eigen(h);
  const int d = static_cast<int>(h.rows());
  Vector phases(d);
  for (int i = 0; i < d; ++i) phases(i) = std::exp(Complex(0.0, -theta * es.values(i)));
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

void check_direction(const Eigen::VectorXd& a, bool mean_mode) {
  const int n = static_cast<int>(a.size());
  if (n < 1) fail(Status::Invalid, "encoding: direction vector is empty");
  for (int i = 0; i < n; ++i)
    if (a(i) == 0.0) fail(Status::Invariant, "encoding: direction component " +
                                                 std::to_string(i + 1) + " is zero");
  if (mean_mode) {
    for (int i = 0; i < n; ++i)
      if (std::abs(a(i) - 1.0 / n) > 1e-12)
        fail(Status::Invariant, "encoding: mean mode requires a = (1/n, ..., 1/n)");
  } else if (std::abs(a.norm() - 1.0) > Tolerances::global().unit_vector) {
    fail(Status::Invariant, "encoding: direction vector must have unit norm, got " +
                                format_double(a.norm()));
  }
}

void check_combiner(int n, const std::function<int(const std::vector<int>&)>& g) {
  // Every input bit must be able to change the output.
  std::vector<int> bits(n, 0);
  for (int target = 0; target < n; ++target) {
    bool sensitive = false;
    for (long mask = 0; mask < (1L << n) && !sensitive; ++mask) {
      for (int i = 0; i < n; ++i) bits[i] = static_cast<int>((mask >> i) & 1);
      const int base = g(bits) & 1;
      bits[target] ^= 1;
      sensitive = (g(bits) & 1) != base;
    }
    if (!sensitive)
      fail(Status::Invariant,
           "encoding: outcome combiner ignores input bit " + std::to_string(target + 1));
  }
}

void check_identity_at_zero(const Channel& ch, double tol) {
  const int d = static_cast<int>(ch.kraus.front().rows());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Matrix unit = Matrix::Zero(d, d);
      unit(i, j) = 1.0;
      Matrix out = Matrix::Zero(d, d);
      for (const Matrix& k : ch.kraus) out += k * unit * k.adjoint();
      if ((out - unit).cwiseAbs().maxCoeff() > tol)
        fail(Status::Invariant, "encoding: channel at parameter 0 is not the identity");
    }
}

}  // namespace

EncodingFamily EncodingFamily::make(std::vector<Matrix> generators, Eigen::VectorXd a,
                                    std::function<int(const std::vector<int>&)> g) {
  EncodingFamily enc;
  enc.n = static_cast<int>(generators.size());
  if (enc.n < 1) fail(Status::Invalid, "encoding: needs at least one party");
  if (enc.n > Limits::global().max_parties)
    fail(Status::Invalid, "encoding: party count beyond configured maximum");
  for (const Matrix& h : generators) {
    if (h.rows() != 2 || h.cols() != 2)
      fail(Status::Invalid, "encoding: generators must be 2x2");
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > Tolerances::global().hermiticity)
      fail(Status::Invariant, "encoding: generator is not Hermitian");
  }
  if (a.size() != enc.n) fail(Status::Invalid, "encoding: direction length differs from party count");
  check_direction(a, false);
  enc.has_generators = true;
  enc.generators = std::move(generators);
  enc.a = std::move(a);
  enc.g = g ? std::move(g) : parity;
  check_combiner(enc.n, enc.g);
  return enc;
}

EncodingFamily EncodingFamily::make_channels(
    std::vector<std::function<Channel(double)>> channels, Eigen::VectorXd a,
    std::function<int(const std::vector<int>&)> g) {
  EncodingFamily enc;
  enc.n = static_cast<int>(channels.size());
  if (enc.n < 1) fail(Status::Invalid, "encoding: needs at least one party");
  if (enc.n > Limits::global().max_parties)
    fail(Status::Invalid, "encoding: party count beyond configured maximum");
  if (a.size() != enc.n) fail(Status::Invalid, "encoding: direction length differs from party count");
  check_direction(a, false);
  for (const auto& c : channels) {
    if (!c) fail(Status::Invalid, "encoding: empty channel function");
    check_identity_at_zero(c(0.0), Tolerances::global().channel_identity);
  }
  enc.has_generators = false;
  enc.channels = std::move(channels);
  enc.a = std::move(a);
  enc.g = g ? std::move(g) : parity;
  check_combiner(enc.n, enc.g);
  return enc;
}

EncodingFamily EncodingFamily::mean(int n) {
  if (n < 1 || n > Limits::global().max_parties)
    fail(Status::Invalid, "encoding: party count out of range");
  Matrix h = Matrix::Zero(2, 2);
  h(1, 1) = 1.0;
  EncodingFamily enc;
  enc.n = n;
  enc.has_generators = true;
  enc.generators.assign(n, h);
  enc.a = Eigen::VectorXd::Constant(n, 1.0 / n);
  enc.mean_mode = true;
  enc.g = parity;
  return enc;
}

Eigen::VectorXd EncodingFamily::unit_a() const {
  const double norm = a.norm();
  if (norm <= 0.0) fail(Status::Invariant, "encoding: zero direction vector");
  return a / norm;
}

Channel EncodingFamily::channel_for(int mu, double theta) const {
  if (mu < 0 || mu >= n) fail(Status::Invalid, "encoding: party index out of range");
  if (has_generators) return Channel::unitary(unitary_for(generators[mu], theta));
  return channels[mu](theta);
}

EncodingFamily load_encoding(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Status::Io, "load_encoding: cannot open " + path);
  int n = -1;
  bool mean_mode = false;
  bool saw_mode = false;
  Eigen::VectorXd a;
  std::vector<Matrix> gens;
  std::vector<bool> seen;
  std::string line;
  long line_no = 0;
  auto where = [&] { return path + ":" + std::to_string(line_no); };
  while (std::getline(in, line)) {
    ++line_no;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    std::string body = line.substr(b, e - b + 1);
    if (body[0] == '#') continue;
    if (body.rfind("n=", 0) == 0) {
      n = static_cast<int>(std::strtol(body.c_str() + 2, nullptr, 10));
      if (n < 1 || n > Limits::global().max_parties)
        fail(Status::Io, "load_encoding: " + where() + ": party count out of range");
      gens.assign(n, Matrix());
      seen.assign(n, false);
    } else if (body.rfind("mode=", 0) == 0) {
      const std::string mode = body.substr(5);
      if (mode == "mean")
        mean_mode = true;
      else if (mode == "unit")
        mean_mode = false;
      else
        fail(Status::Io, "load_encoding: " + where() + ": mode must be unit or mean");
      saw_mode = true;
    } else if (body.rfind("a=", 0) == 0) {
      if (n < 0) fail(Status::Io, "load_encoding: " + where() + ": a= before n=");
      std::istringstream ss(body.substr(2));
      a.resize(n);
      for (int i = 0; i < n; ++i)
        if (!(ss >> a(i))) fail(Status::Io, "load_encoding: " + where() + ": expected " +
                                                std::to_string(n) + " direction components");
      double extra;
      if (ss >> extra) fail(Status::Io, "load_encoding: " + where() + ": trailing tokens");
    } else if (body.rfind("H ", 0) == 0) {
      if (n < 0) fail(Status::Io, "load_encoding: " + where() + ": H before n=");
      std::istringstream ss(body.substr(2));
      int mu;
      if (!(ss >> mu) || mu < 1 || mu > n)
        fail(Status::Io, "load_encoding: " + where() + ": party index outside 1.." +
                             std::to_string(n));
      if (seen[mu - 1]) fail(Status::Io, "load_encoding: " + where() + ": duplicate generator");
      double v[8];
      for (int i = 0; i < 8; ++i)
        if (!(ss >> v[i]))
          fail(Status::Io, "load_encoding: " + where() + ": expected 8 re/im values");
      double extra;
      if (ss >> extra) fail(Status::Io, "load_encoding: " + where() + ": trailing tokens");
      Matrix h(2, 2);
      h << Complex(v[0], v[1]), Complex(v[2], v[3]), Complex(v[4], v[5]), Complex(v[6], v[7]);
      gens[mu - 1] = h;
      seen[mu - 1] = true;
    } else {
      fail(Status::Io, "load_encoding: " + where() + ": unrecognized line: " + body);
    }
  }
  if (n < 0) fail(Status::Io, "load_encoding: " + path + ": missing n=");
  if (!saw_mode) fail(Status::Io, "load_encoding: " + path + ": missing mode=");
  for (int i = 0; i < n; ++i)
    if (!seen[i])
      fail(Status::Io, "load_encoding: " + path + ": missing generator for party " +
                           std::to_string(i + 1));
  if (mean_mode) {
    EncodingFamily enc = EncodingFamily::mean(n);
    enc.generators = gens;  // allow custom generators with the mean-mode direction
    for (const Matrix& h : gens)
      if ((h - h.adjoint()).cwiseAbs().maxCoeff() > Tolerances::global().hermiticity)
        fail(Status::Invariant, "load_encoding: generator is not Hermitian");
    return enc;
  }
  if (a.size() != n) fail(Status::Io, "load_encoding: " + path + ": missing a=");
  // Files carry limited precision; renormalize when close to unit length.
  const double norm = a.norm();
  if (std::abs(norm - 1.0) > 1e-6)
    fail(Status::Invariant, "load_encoding: " + path + ": direction norm " + format_double(norm) +
                                " is not 1");
  a /= norm;
  return EncodingFamily::make(std::move(gens), std::move(a));
}

DensityMatrix encode_state(const DensityMatrix& rho, const EncodingFamily& enc,
                           const ParamPoint& theta) {
  if (rho.num_parties() != enc.n)
    fail(Status::Invalid, "encode_state: state has " + std::to_string(rho.num_parties()) +
                              " registers for " + std::to_string(enc.n) + " parties");
  if (theta.size() != enc.n)
    fail(Status::Invalid, "encode_state: parameter vector length differs from party count");
  DensityMatrix out = rho;
  for (int mu = 0; mu < enc.n; ++mu)
    out = qcore::apply_channel(out, enc.channel_for(mu, theta(mu)), rho.parties[mu]);
  return out;
}

Matrix state_derivative(const DensityMatrix& rho, const EncodingFamily& enc,
                        const ParamPoint& theta, int mu, bool validate) {
  if (mu < 0 || mu >= enc.n) fail(Status::Invalid, "state_derivative: party index out of range");
  auto finite_difference = [&](double h) {
    ParamPoint up = theta, down = theta;
    up(mu) += h;
    down(mu) -= h;
    Matrix d = (encode_state(rho, enc, up).m - encode_state(rho, enc, down).m) / (2.0 * h);
    return Matrix(0.5 * (d + d.adjoint()));
  };
  if (!enc.has_generators) return finite_difference(1e-5);

  DensityMatrix encoded = encode_state(rho, enc, theta);
  const Matrix h_full = embed(enc.generators[mu], {rho.parties[mu]}, encoded);
  Matrix d = Complex(0.0, -1.0) * (h_full * encoded.m - encoded.m * h_full);
  d = 0.5 * (d + d.adjoint()).eval();
  if (validate) {
    const Matrix fd = finite_difference(1e-5);
    const double dev = trace_norm(d - fd);
    if (dev > 1e-3 * trace_norm(d) + 1e-7)
      fail(Status::Invariant,
           "state_derivative: analytic and finite-difference derivatives disagree by " +
               format_double(dev));
  }
  return d;
}

QfimMatrix qfim(const DensityMatrix& rho, const EncodingFamily& enc, const ParamPoint& theta) {
  DensityMatrix encoded = encode_state(rho, enc, theta);
  std::vector<Matrix> slds;
  for (int mu = 0; mu < enc.n; ++mu)
    slds.push_back(qcore::sld_solve(encoded, state_derivative(rho, enc, theta, mu, false)));
  Eigen::MatrixXd q(enc.n, enc.n);
  for (int mu = 0; mu < enc.n; ++mu)
    for (int nu = mu; nu < enc.n; ++nu) {
      const Complex tr =
          0.5 * (encoded.m * (slds[mu] * slds[nu] + slds[nu] * slds[mu])).trace();
      q(mu, nu) = tr.real();
      q(nu, mu) = tr.real();
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < Tolerances::global().qfim_psd)
    fail(Status::Invariant, "qfim: matrix has eigenvalue " +
                                format_double(es.eigenvalues().minCoeff()));
  return {q};
}

QfimMatrix qfim_pure_covariance(const DensityMatrix& psi, const EncodingFamily& enc,
                                const ParamPoint& theta) {
  if (!enc.has_generators)
    fail(Status::Invalid, "qfim_pure_covariance: requires a generator-form encoding");
  qcore::EigenSystem es = hermitian_eigen(psi.m);
  const int d = psi.dim();
  if (d > 1 && es.values(d - 2) > 1e-10)
    fail(Status::Invalid, "qfim_pure_covariance: state is not rank one");
  Vector vec = es.vectors.col(d - 1);

  // The encoded vector: every party's local unitary applied in turn.
  for (int mu = 0; mu < enc.n; ++mu)
    vec = embed(unitary_for(enc.generators[mu], theta(mu)), {psi.parties[mu]}, psi) * vec;

  std::vector<Matrix> h_full;
  std::vector<Vector> h_vec;
  Eigen::VectorXd means(enc.n);
  for (int mu = 0; mu < enc.n; ++mu) {
    h_full.push_back(embed(enc.generators[mu], {psi.parties[mu]}, psi));
    h_vec.push_back(h_full.back() * vec);
    means(mu) = (vec.adjoint() * h_vec.back())(0, 0).real();
  }
  Eigen::MatrixXd q(enc.n, enc.n);
  for (int mu = 0; mu < enc.n; ++mu)
    for (int nu = mu; nu < enc.n; ++nu) {
      const double second = (h_vec[mu].adjoint() * h_vec[nu])(0, 0).real();
      const double val = 4.0 * (second - means(mu) * means(nu));
      q(mu, nu) = val;
      q(nu, mu) = val;
    }
  return {q};
}

double classical_fisher(const std::function<std::vector<double>(double)>& dist, double theta) {
  if (!dist) fail(Status::Invalid, "classical_fisher: empty distribution function");
  const double h = 1e-6;
  const std::vector<double> p0 = dist(theta);
  const std::vector<double> pp = dist(theta + h);
  const std::vector<double> pm = dist(theta - h);
  if (p0.empty() || pp.size() != p0.size() || pm.size() != p0.size())
    fail(Status::Invalid, "classical_fisher: outcome counts differ across evaluations");
  double total = 0.0;
  for (double p : p0) total += p;
  if (std::abs(total - 1.0) > 1e-6)
    fail(Status::Invalid, "classical_fisher: probabilities sum to " + format_double(total));
  double fisher = 0.0;
  for (std::size_t x = 0; x < p0.size(); ++x) {
    if (p0[x] <= 1e-14 || pp[x] <= 1e-14 || pm[x] <= 1e-14)
      fail(Status::Invalid, "classical_fisher: outcome " + std::to_string(x) +
                                " has vanishing probability near the evaluation point");
    const double dp = (pp[x] - pm[x]) / (2.0 * h);
    fisher += dp * dp / p0[x];
  }
  return fisher;
}

double privacy_measure(const QfimMatrix& q, const Eigen::VectorXd& a) {
  if (a.size() != q.q.rows()) fail(Status::Invalid, "privacy_measure: dimension mismatch");
  if (std::abs(a.norm() - 1.0) > Tolerances::global().unit_vector)
    fail(Status::Invalid, "privacy_measure: direction must have unit norm");
  const double tr = q.q.trace();
  if (tr <= 0.0)
    fail(Status::Invalid, "privacy_measure: information matrix carries no information (trace " +
                              format_double(tr) + ")");
  const double val = a.dot(q.q * a) / tr;
  if (val < -1e-10 || val > 1.0 + 1e-10)
    fail(Status::Invariant, "privacy_measure: ratio " + format_double(val) + " outside [0, 1]");
  return std::clamp(val, 0.0, 1.0);
}

double bugalho_epsilon(double P) {
  if (P < -1e-12 || P > 1.0 + 1e-12)
    fail(Status::Invalid, "bugalho_epsilon: privacy measure outside [0, 1]");
  const double p = std::clamp(P, 0.0, 1.0);
  return std::sqrt(std::max(1.0 - p * p, 0.0));
}

Eigen::MatrixXd hassani_epsilon(const DensityMatrix& rho, const EncodingFamily& enc,
                                const ParamPoint& theta, HassaniMode mode) {
  const int n = enc.n;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  if (mode == HassaniMode::Pairwise) {
    std::vector<Matrix> d;
    for (int mu = 0; mu < n; ++mu) d.push_back(state_derivative(rho, enc, theta, mu, false));
    for (int mu = 0; mu < n; ++mu)
      for (int nu = mu + 1; nu < n; ++nu) {
        const double v = trace_norm(d[mu] - d[nu]);
        out(mu, nu) = v;
        out(nu, mu) = v;
      }
    return out;
  }
  if (!enc.has_generators)
    fail(Status::Invalid, "hassani_epsilon: commutator mode requires a generator-form encoding");
  DensityMatrix encoded = encode_state(rho, enc, theta);
  std::vector<Matrix> h_full;
  for (int mu = 0; mu < n; ++mu)
    h_full.push_back(embed(enc.generators[mu], {rho.parties[mu]}, encoded));
  for (int mu = 0; mu < n; ++mu)
    for (int nu = mu + 1; nu < n; ++nu) {
      const Matrix diff = h_full[mu] - h_full[nu];
      const double v = trace_norm(diff * encoded.m - encoded.m * diff);
      out(mu, nu) = v;
      out(nu, mu) = v;
    }
  return out;
}

AlignmentFit qfim_alignment_fit(const QfimMatrix& q, const Eigen::VectorXd& a) {
  const int n = static_cast<int>(q.q.rows());
  if (a.size() != n) fail(Status::Invalid, "alignment_fit: dimension mismatch");
  const double tr = q.q.trace();
  if (tr <= 0.0) fail(Status::Invalid, "alignment_fit: information matrix has nonpositive trace");
  double min_sq = a.cwiseAbs2().minCoeff();
  if (min_sq <= 0.0) fail(Status::Invalid, "alignment_fit: direction has a zero component");

  auto worst = [&](double k) {
    double m = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m = std::max(m, std::abs(q.q(i, j) - k * a(i) * a(j)));
    return m;
  };
  double lo = -2.0 * tr / min_sq;
  double hi = 2.0 * tr / min_sq;
  while (hi - lo > Tolerances::global().kfit) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (worst(m1) < worst(m2))
      hi = m2;
    else
      lo = m1;
  }
  AlignmentFit fit;
  fit.k_star = 0.5 * (lo + hi);
  fit.eps_star = worst(fit.k_star);
  return fit;
}

AlignmentBound alignment_bound(int n, double eps_star, double trace_q) {
  if (trace_q <= 0.0) fail(Status::Invalid, "alignment_bound: trace must be positive");
  if (n < 1 || eps_star < 0.0) fail(Status::Invalid, "alignment_bound: invalid arguments");
  AlignmentBound out;
  out.bound = n * eps_star / trace_q;
  out.chain = out.bound <= 1.0 ? std::sqrt(std::max(1.0 - (1.0 - out.bound) * (1.0 - out.bound), 0.0))
                               : 1.0;
  return out;
}

DirectionBasis complete_basis(const Eigen::VectorXd& a) {
  const int n = static_cast<int>(a.size());
  if (n < 1) fail(Status::Invalid, "complete_basis: empty direction");
  if (std::abs(a.norm() - 1.0) > Tolerances::global().unit_vector)
    fail(Status::Invalid, "complete_basis: direction must have unit norm");
  Eigen::MatrixXd A(n, n);
  A.col(0) = a;
  int filled = 1;
  for (int i = 0; i < n && filled < n; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v(i) = 1.0;
    for (int c = 0; c < filled; ++c) v -= A.col(c).dot(v) * A.col(c);
    if (v.norm() < 1e-8) continue;
    v /= v.norm();
    for (int j = 0; j < n; ++j) {
      if (std::abs(v(j)) <= 1e-12) continue;
      if (v(j) < 0.0) v = -v;
      break;
    }
    A.col(filled++) = v;
  }
  if (filled != n) fail(Status::Internal, "complete_basis: orthogonalization degenerated");
  const double dev = (A.transpose() * A - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (dev > Tolerances::global().basis_orthogonality)
    fail(Status::Internal, "complete_basis: basis not orthogonal (deviation " +
                               format_double(dev) + ")");
  return {A};
}

QfimMatrix reparametrize_qfim(const QfimMatrix& q, const Eigen::MatrixXd& B) {
  if (B.rows() != q.q.rows() || B.cols() != q.q.rows())
    fail(Status::Invalid, "reparametrize: matrix shape mismatch");
  Eigen::MatrixXd out = B.transpose() * q.q * B;
  out = 0.5 * (out + out.transpose()).eval();
  return {out};
}

ClassDistanceResult equivalent_class_distance(const DensityMatrix& rho, const EncodingFamily& enc,
                                              const Eigen::VectorXd& a,
                                              const SearchBudget& budget) {
  const int n = enc.n;
  if (n > Limits::global().desk_scale_n)
    fail(Status::Invalid, "class_distance: party count beyond the desk-scale search limit");
  if (a.size() != n || std::abs(a.norm() - 1.0) > Tolerances::global().unit_vector)
    fail(Status::Invalid, "class_distance: direction must be a unit vector of length n");

  ClassDistanceResult res;
  res.theta = ParamPoint::Zero(n);
  res.theta_prime = ParamPoint::Zero(n);
  if (n == 1) return res;  // the constraint pins theta' = theta

  const DensityMatrix base = encode_state(rho, enc, ParamPoint::Zero(n));
  long evals = 0;
  bool exhausted = false;
  auto distance_at = [&](const Eigen::VectorXd& dir, double t) {
    ++evals;
    return qcore::state_metrics(base, encode_state(rho, enc, t * dir)).trace_distance;
  };

  // Direction pool: random unit vectors in a's orthogonal complement plus all
  // pairwise coordinate differences projected onto it.
  std::vector<Eigen::VectorXd> dirs;
  DirectionBasis basis = complete_basis(a);
  Rng rng(budget.seed);
  for (int k = 0; k < budget.num_directions; ++k) {
    Eigen::VectorXd c(n - 1);
    for (int i = 0; i < n - 1; ++i) c(i) = rng.normal();
    if (c.norm() < 1e-12) continue;
    c /= c.norm();
    dirs.push_back(basis.A.rightCols(n - 1) * c);
  }
  for (int mu = 0; mu < n; ++mu)
    for (int nu = mu + 1; nu < n; ++nu) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
      d(mu) = 1.0;
      d(nu) = -1.0;
      d -= a.dot(d) * a;
      if (d.norm() < 1e-8) continue;
      dirs.push_back(d / d.norm());
    }

  const double span = 2.0 * M_PI * std::sqrt(static_cast<double>(n));
  const double step = span / budget.grid_points;
  double best_t = 0.0;
  Eigen::VectorXd best_dir = dirs.empty() ? Eigen::VectorXd::Zero(n) : dirs.front();
  for (const Eigen::VectorXd& dir : dirs) {
    for (int k = 0; k < budget.grid_points && !exhausted; ++k) {
      const double t = k * step;
      const double v = distance_at(dir, t);
      if (v > res.value) {
        res.value = v;
        best_t = t;
        best_dir = dir;
      }
      if (evals >= budget.max_evals) exhausted = true;
    }
    if (exhausted) break;
  }

  // Golden-section refinement around the best grid point.
  if (!exhausted && res.value > 0.0) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = best_t - step, hi = best_t + step;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = distance_at(best_dir, x1), f2 = distance_at(best_dir, x2);
    while (hi - lo > budget.refine_tol && !exhausted) {
      if (f1 > f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = distance_at(best_dir, x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = distance_at(best_dir, x2);
      }
      if (evals >= budget.max_evals) exhausted = true;
    }
    const double t_ref = 0.5 * (lo + hi);
    const double v_ref = distance_at(best_dir, t_ref);
    if (v_ref > res.value) {
      res.value = v_ref;
      best_t = t_ref;
    }
  }

  res.theta_prime = best_t * best_dir;
  res.evals = evals;
  res.budget_exhausted = exhausted;
  return res;
}

double multi_round_bound(double eps, long rounds) {
  if (eps < -1e-12 || eps > 1.0 + 1e-12)
    fail(Status::Invalid, "multi_round_bound: distance outside [0, 1]");
  if (rounds < 1) fail(Status::Invalid, "multi_round_bound: rounds must be at least 1");
  const double e = std::clamp(eps, 0.0, 1.0);
  if (e >= 1.0) return 1.0;
  // 1 - (1 - e^2)^N through expm1/log1p keeps N = 1 exact for tiny e.
  const double inside = -std::expm1(static_cast<double>(rounds) * std::log1p(-e * e));
  return std::sqrt(std::clamp(inside, 0.0, 1.0));
}

QfimReport privacy_report(const DensityMatrix& rho, const EncodingFamily& enc,
                          const ParamPoint& theta) {
  if (!enc.has_generators)
    fail(Status::Invalid, "privacy_report: requires a generator-form encoding");
  QfimReport rep;
  rep.q = qfim(rho, enc, theta);
  const Eigen::VectorXd ua = enc.unit_a();
  rep.privacy.trace_q = rep.q.q.trace();
  rep.privacy.P = privacy_measure(rep.q, ua);
  rep.privacy.eps_bugalho = bugalho_epsilon(rep.privacy.P);
  rep.privacy.eps_hassani_pairwise = hassani_epsilon(rho, enc, theta, HassaniMode::Pairwise);
  rep.privacy.eps_hassani_commutator = hassani_epsilon(rho, enc, theta, HassaniMode::Commutator);
  const AlignmentFit fit = qfim_alignment_fit(rep.q, ua);
  rep.privacy.k_star = fit.k_star;
  rep.privacy.eps_star = fit.eps_star;
  const AlignmentBound bound = alignment_bound(enc.n, fit.eps_star, rep.privacy.trace_q);
  rep.privacy.alignment_bound = bound.bound;
  rep.privacy.alignment_bound_chain = bound.chain;
  return rep;
}

}  // namespace qpn::metrology

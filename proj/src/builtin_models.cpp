#include "qgeo/builtin_models.hpp"

#include <array>
#include <cmath>
#include <memory>

namespace qgeo::models {

namespace three_state {

namespace {

void check_domain(const CanonicalState& c) {
  if (!(c.p1 >= 0.0 && c.p1 <= 1.0))
    throw DomainError("three_state: p1 outside [0, 1]");
  if (!(std::abs(c.p2) <= c.p1))
    throw DomainError("three_state: p2 outside [-p1, p1]");
}

// First derivatives of the state columns, valid in the open chart.
Mat state_grad(const CanonicalState& c) {
  Vec psi = state(c);
  Mat d(3, 4);
  d.col(0) << -kI * psi[0], -kI * psi[1], 0.0;
  d.col(1) << kI * psi[0], -kI * psi[1], 0.0;
  d.col(2) << psi[0] / (2.0 * (c.p1 - c.p2)), psi[1] / (2.0 * (c.p1 + c.p2)),
      -psi[2] / (2.0 * (1.0 - c.p1));
  d.col(3) << -psi[0] / (2.0 * (c.p1 - c.p2)), psi[1] / (2.0 * (c.p1 + c.p2)),
      0.0;
  return d;
}

void check_open_chart(const CanonicalState& c) {
  check_domain(c);
  if (c.p1 >= 1.0 || c.p1 <= std::abs(c.p2))
    throw DomainError("three_state: point on a singular chart boundary");
}

}  // namespace

Vec state(const CanonicalState& c) {
  check_domain(c);
  Vec psi(3);
  psi[0] = std::sqrt(0.5 * (c.p1 - c.p2)) * std::polar(1.0, -c.q1 + c.q2);
  psi[1] = std::sqrt(0.5 * (c.p1 + c.p2)) * std::polar(1.0, -c.q1 - c.q2);
  psi[2] = std::sqrt(1.0 - c.p1);
  return psi;
}

Vec angular_state(double theta, double beta, double gamma, double alpha) {
  Vec psi(3);
  psi[0] = std::sin(theta) * std::sin(beta) * std::polar(1.0, -gamma + alpha);
  psi[1] = std::sin(theta) * std::cos(beta) * std::polar(1.0, -gamma - alpha);
  psi[2] = std::cos(theta);
  return psi;
}

Mat reference_dkets(const CanonicalState& c) {
  check_open_chart(c);
  Vec psi = state(c);
  Mat d(3, 4);
  // D_m psi = d_m psi + i A_m psi with A = (p1, p2, 0, 0).
  d.col(0) << -kI * (1.0 - c.p1) * psi[0], -kI * (1.0 - c.p1) * psi[1],
      kI * c.p1 * psi[2];
  d.col(1) << kI * (1.0 + c.p2) * psi[0], -kI * (1.0 - c.p2) * psi[1],
      kI * c.p2 * psi[2];
  d.col(2) << psi[0] / (2.0 * (c.p1 - c.p2)), psi[1] / (2.0 * (c.p1 + c.p2)),
      -psi[2] / (2.0 * (1.0 - c.p1));
  d.col(3) << -psi[0] / (2.0 * (c.p1 - c.p2)), psi[1] / (2.0 * (c.p1 + c.p2)),
      0.0;
  return d;
}

RMat reference_metric(const CanonicalState& c) {
  check_open_chart(c);
  double p1 = c.p1, p2 = c.p2;
  double pp = p1 * p1 - p2 * p2;
  RMat g = RMat::Zero(4, 4);
  g(0, 0) = p1 * (1.0 - p1);
  g(0, 1) = g(1, 0) = p2 * (1.0 - p1);
  g(1, 1) = p1 - p2 * p2;
  g(2, 2) = (p1 - p2 * p2) / (4.0 * (1.0 - p1) * pp);
  g(2, 3) = g(3, 2) = -p2 / (4.0 * pp);
  g(3, 3) = p1 / (4.0 * pp);
  return g;
}

RMat reference_curvature() {
  RMat b = RMat::Zero(4, 4);
  b(0, 2) = -1.0;
  b(1, 3) = -1.0;
  b(2, 0) = 1.0;
  b(3, 1) = 1.0;
  return b;
}

RVec reference_connection(const CanonicalState& c) {
  RVec a(4);
  a << c.p1, c.p2, 0.0, 0.0;
  return a;
}

}  // namespace three_state

RMat two_level_metric(double p) {
  if (p <= 0.0 || p >= 1.0)
    throw DomainError("two_level_metric: p outside (0, 1)");
  RMat g = RMat::Zero(2, 2);
  g(0, 0) = p * (1.0 - p);
  g(1, 1) = 1.0 / (4.0 * p * (1.0 - p));
  return g;
}

// Ground energy of the three-state family: a scalar drift that moves the
// tracked level without touching eigenvectors or gaps.
static double three_state_drift(double p1, double p2) {
  return 0.3 * (p1 - p2 * p2);
}

HamiltonianFamily make_three_state(double delta) {
  HamiltonianFamily f;
  f.dim = 3;
  f.params = 4;
  f.delta = delta;
  f.name = "three_state";
  // Excited-sector weights: spectrum delta * (drift + {0, [1, 1.8]}),
  // gap exactly delta.
  const Mat k_weights = (Vec(3) << 1.0, 1.4, 1.8).finished().asDiagonal();

  f.eval = [delta, k_weights](const ParameterPoint& x) {
    auto c = three_state::CanonicalState::from(x);
    Vec psi = three_state::state(c);
    Mat q = Mat::Identity(3, 3) - psi * psi.adjoint();
    return Mat(delta * (q * k_weights * q +
                        three_state_drift(c.p1, c.p2) * Mat::Identity(3, 3)));
  };
  f.grad = [delta, k_weights](const ParameterPoint& x, int mu) {
    auto c = three_state::CanonicalState::from(x);
    Vec psi = three_state::state(c);
    Mat dpsi = three_state::state_grad(c);
    Mat q = Mat::Identity(3, 3) - psi * psi.adjoint();
    Mat dq = -(dpsi.col(mu) * psi.adjoint() + psi * dpsi.col(mu).adjoint());
    Mat g = delta * (dq * k_weights * q + q * k_weights * dq);
    if (mu == 2) g += delta * 0.3 * Mat::Identity(3, 3);
    if (mu == 3) g += delta * (-0.6 * c.p2) * Mat::Identity(3, 3);
    return g;
  };
  return f;
}

namespace {

std::array<Mat, 3> pauli() {
  Mat sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -kI, kI, 0;
  sz << 1, 0, 0, -1;
  return {sx, sy, sz};
}

Mat dot_sigma(double nx, double ny, double nz) {
  auto s = pauli();
  return nx * s[0] + ny * s[1] + nz * s[2];
}

}  // namespace

HamiltonianFamily make_two_level(double delta) {
  HamiltonianFamily f;
  f.dim = 2;
  f.params = 2;
  f.delta = delta;
  f.name = "two_level";
  // x = (q, p); Bloch vector n = (s cos q, s sin q, 1 - 2p), s = 2 sqrt(p(1-p));
  // H = -(delta/2) n . sigma, ground state (sqrt(1-p), sqrt(p) e^{iq}).
  f.eval = [delta](const ParameterPoint& x) {
    double q = x[0], p = x[1];
    if (p < 0.0 || p > 1.0) throw DomainError("two_level: p outside [0, 1]");
    double s = 2.0 * std::sqrt(p * (1.0 - p));
    return Mat(-0.5 * delta *
               dot_sigma(s * std::cos(q), s * std::sin(q), 1.0 - 2.0 * p));
  };
  f.grad = [delta](const ParameterPoint& x, int mu) {
    double q = x[0], p = x[1];
    if (p <= 0.0 || p >= 1.0)
      throw DomainError("two_level: gradient singular at p in {0, 1}");
    double s = 2.0 * std::sqrt(p * (1.0 - p));
    if (mu == 0)
      return Mat(-0.5 * delta *
                 dot_sigma(-s * std::sin(q), s * std::cos(q), 0.0));
    double ds = (1.0 - 2.0 * p) / std::sqrt(p * (1.0 - p));
    return Mat(-0.5 * delta *
               dot_sigma(ds * std::cos(q), ds * std::sin(q), -2.0));
  };
  return f;
}

HamiltonianFamily make_two_level_bloch(double delta) {
  HamiltonianFamily f;
  f.dim = 2;
  f.params = 2;
  f.delta = delta;
  f.name = "two_level_bloch";
  f.eval = [delta](const ParameterPoint& x) {
    double th = x[0], ph = x[1];
    return Mat(-0.5 * delta *
               dot_sigma(std::sin(th) * std::cos(ph),
                         std::sin(th) * std::sin(ph), std::cos(th)));
  };
  f.grad = [delta](const ParameterPoint& x, int mu) {
    double th = x[0], ph = x[1];
    if (mu == 0)
      return Mat(-0.5 * delta *
                 dot_sigma(std::cos(th) * std::cos(ph),
                           std::cos(th) * std::sin(ph), -std::sin(th)));
    return Mat(-0.5 * delta *
               dot_sigma(-std::sin(th) * std::sin(ph),
                         std::sin(th) * std::cos(ph), 0.0));
  };
  return f;
}

three_state::CanonicalState chart2_map(const ParameterPoint& x) {
  three_state::CanonicalState c;
  c.q1 = x[0] + 0.4 * std::sin(x[1]);
  c.q2 = x[1] - 0.3 * std::cos(x[0]);
  c.p1 = 0.60 + 0.15 * std::sin(x[0] + 0.7 * x[1]);
  c.p2 = 0.05 + 0.15 * std::cos(x[0] - x[1]);
  return c;
}

HamiltonianFamily make_three_state_chart2(double delta) {
  auto base = make_three_state(delta);
  auto map = [](const ParameterPoint& x) { return chart2_map(x).coords(); };
  auto jacobian = [](const ParameterPoint& x) {
    RMat j(4, 2);
    j(0, 0) = 1.0;
    j(0, 1) = 0.4 * std::cos(x[1]);
    j(1, 0) = 0.3 * std::sin(x[0]);
    j(1, 1) = 1.0;
    j(2, 0) = 0.15 * std::cos(x[0] + 0.7 * x[1]);
    j(2, 1) = 0.15 * 0.7 * std::cos(x[0] + 0.7 * x[1]);
    j(3, 0) = -0.15 * std::sin(x[0] - x[1]);
    j(3, 1) = 0.15 * std::sin(x[0] - x[1]);
    return j;
  };
  auto out = reparametrize(base, map, 2, jacobian);
  out.name = "three_state_chart2";
  return out;
}

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

}  // namespace

HamiltonianFamily make_matrix_polynomial(int dim, int params,
                                         std::vector<PolynomialTerm> terms,
                                         double delta) {
  for (const auto& t : terms) {
    if (t.matrix.rows() != dim || t.matrix.cols() != dim)
      throw ConfigError("matrix_polynomial: term matrix has wrong shape");
    if (static_cast<int>(t.powers.size()) != params)
      throw ConfigError("matrix_polynomial: powers length != parameter count");
    if (hermiticity_defect(t.matrix) > 1e-12)
      throw ConfigError("matrix_polynomial: term matrix is not Hermitian");
    for (int e : t.powers)
      if (e < 0) throw ConfigError("matrix_polynomial: negative exponent");
  }
  HamiltonianFamily f;
  f.dim = dim;
  f.params = params;
  f.delta = delta;
  f.name = "matrix_polynomial";
  auto shared = std::make_shared<std::vector<PolynomialTerm>>(std::move(terms));
  f.eval = [dim, shared](const ParameterPoint& x) {
    Mat h = Mat::Zero(dim, dim);
    for (const auto& t : *shared) {
      double mono = 1.0;
      for (size_t mu = 0; mu < t.powers.size(); ++mu)
        mono *= ipow(x[static_cast<int>(mu)], t.powers[mu]);
      h += mono * t.matrix;
    }
    return h;
  };
  f.grad = [dim, shared](const ParameterPoint& x, int mu) {
    Mat g = Mat::Zero(dim, dim);
    for (const auto& t : *shared) {
      int e = t.powers[mu];
      if (e == 0) continue;
      double mono = e * ipow(x[mu], e - 1);
      for (size_t nu = 0; nu < t.powers.size(); ++nu)
        if (static_cast<int>(nu) != mu)
          mono *= ipow(x[static_cast<int>(nu)], t.powers[nu]);
      g += mono * t.matrix;
    }
    return g;
  };
  return f;
}

}  // namespace qgeo::models

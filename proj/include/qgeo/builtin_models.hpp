#pragma once

#include <vector>

#include "qgeo/model.hpp"

namespace qgeo::models {

// ---------------------------------------------------------------------------
// Three-state model in canonical coordinates xi = (q1, q2, p1, p2).
// The tracked state is
//   psi = ( sqrt((p1-p2)/2) e^{-i q1} e^{+i q2},
//           sqrt((p1+p2)/2) e^{-i q1} e^{-i q2},
//           sqrt(1-p1) )
// and the Hamiltonian is delta * Q (I + M0) Q with Q = I - |psi><psi| and
// M0 = diag(0, 0.4, 0.8), so psi is the exact ground state with gap delta
// and a generically simple excited spectrum.
// ---------------------------------------------------------------------------

namespace three_state {

/// Canonical coordinates with 0 <= |p2| <= p1 <= 1.
struct CanonicalState {
  double q1 = 0.0;
  double q2 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;

  ParameterPoint coords() const {
    ParameterPoint x(4);
    x << q1, q2, p1, p2;
    return x;
  }
  static CanonicalState from(const ParameterPoint& x) {
    return {x[0], x[1], x[2], x[3]};
  }
};

/// The tracked state vector. Throws DomainError outside the chart.
Vec state(const CanonicalState& c);

/// Same state in the angular chart (theta, beta, gamma, alpha); related to
/// the canonical chart by p1 = sin^2 theta, p2 = sin^2 theta cos 2 beta,
/// q1 = gamma, q2 = alpha.
Vec angular_state(double theta, double beta, double gamma, double alpha);

/// Closed-form gauge-covariant frame columns |D_m psi|, m = 0..3 in the
/// (q1, q2, p1, p2) ordering. Valid in the open chart 0 < |p2| < p1 < 1.
Mat reference_dkets(const CanonicalState& c);

/// Closed-form quantum metric g in canonical coordinates (4 x 4).
RMat reference_metric(const CanonicalState& c);

/// Berry curvature in canonical coordinates: constant, B = -2 Im h.
RMat reference_curvature();

/// Berry connection A_m = i <psi | d_m psi> = (p1, p2, 0, 0).
RVec reference_connection(const CanonicalState& c);

}  // namespace three_state

/// Two-level metric in canonical (q, p) coordinates:
/// g = diag(p (1-p), 1 / (4 p (1-p))).
RMat two_level_metric(double p);

/// Builtin families.
HamiltonianFamily make_three_state(double delta = 1.0);
HamiltonianFamily make_two_level(double delta = 1.0);        // params (q, p)
HamiltonianFamily make_two_level_bloch(double delta = 1.0);  // params (theta, phi)

/// Three-state family restricted to a fixed smooth two-parameter chart
/// x = (x1, x2) -> (q1, q2, p1, p2). On two-parameter charts the tangent
/// kets are complex-linearly independent, so (h) is invertible and the
/// second-kind symbols, parallel transport, and curvature are defined.
/// The chart covers |x1|, |x2| <= 1.2 with a safe margin to the
/// singular boundaries.
HamiltonianFamily make_three_state_chart2(double delta = 1.0);

/// The chart map used by make_three_state_chart2.
three_state::CanonicalState chart2_map(const ParameterPoint& x);

/// H(x) = sum_k M_k * prod_mu (x^mu)^{e_k,mu} with analytic gradients.
struct PolynomialTerm {
  Mat matrix;
  std::vector<int> powers;  // one exponent per parameter
};
HamiltonianFamily make_matrix_polynomial(int dim, int params,
                                         std::vector<PolynomialTerm> terms,
                                         double delta = 1.0);

}  // namespace qgeo::models

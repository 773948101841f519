#pragma once

#include "qgeo/transport.hpp"

namespace qgeo::apt {

using models::EigenFrame;
using models::HamiltonianFamily;
using transport::ParamPath;

/// A Hamiltonian family driven along a path over total physical time T.
struct DrivenSystem {
  HamiltonianFamily family;
  ParamPath path;
  double total_time = 1.0;
  double hbar = 1.0;
  int level = 0;

  double epsilon() const { return hbar / (family.delta * total_time); }
};

struct AptOptions {
  geom::GeomOptions geom;
  double time_step = 1e-4;  // scaled-time FD step for 5-point stencils
  double quad_tol = 1e-12;  // absolute tolerance of phase quadratures
  int p_max = 6;            // recurrence depth limit
};

/// Restricted resolvent power: sum_{m != n} |m><m|w> / (E_n - E_m)^k.
/// Requires <n|w> = 0 to 1e-8 relative.
Vec resolvent_apply(const EigenFrame& frame, int power, const Vec& w);

/// One perturbative order at a path point.
struct OrderData {
  int order = 0;
  Vec ket;                // |n_k>, orthogonal to |n>
  double beta = 0.0;      // normalization coefficient beta_k
  double alpha = 0.0;     // integrated phase (filled by assemble_state path)
  double beta_dot = 0.0;  // Re <T|n_k>
  double alpha_dot = 0.0; // Im <T|n_k>
};

struct ResponseTensors {
  RMat mass2;            // induced inertia tensor, symmetric
  double energy0 = 0.0;  // E_n
  double en3_geometric = 0.0;   // -2 hbar^3 Im <T| R^2 covariant dT>
  double en3_coupling = 0.0;    // -2 hbar^3 Im <T| R dR T>
  double energy3 = 0.0;  // E_n + (1/2) M2 xdot xdot + both cubic terms
};

/// Evaluation engine for one driven system. Holds the parallel-gauge frame
/// chain along the path; all kets it returns share that gauge.
class AptEngine {
 public:
  explicit AptEngine(DrivenSystem system, AptOptions opts = {});

  const DrivenSystem& system() const { return sys_; }
  const AptOptions& options() const { return opts_; }

  /// Parallel-gauge frame at scaled time s.
  EigenFrame frame(double s);

  /// Accumulated geometric phase up to s in the pinned per-point gauge.
  double gamma(double s);

  /// Tangent ket |T> = |D_mu n> dx^mu/dt at s, in the gauge of `ref`
  /// (pass frame(s) for the chain gauge).
  Vec tangent_ket(double s, const EigenFrame& ref);
  Vec tangent_ket(double s);

  /// A ket field along the path: value at scaled time s, expressed in the
  /// gauge of the reference frame.
  using KetField = std::function<Vec(double, const EigenFrame&)>;

  /// (1 - |n><n|) (d/dt + i A_mu xdot^mu) applied to the field at s, by
  /// five-point differences of frames phase-aligned to the center.
  Vec covariant_time_derivative(const KetField& field, double s);

  /// Same derivative without the final projection.
  Vec material_time_derivative(const KetField& field, double s);

  /// Operator derivative (d^j/dt^j R^k) applied to a frozen vector.
  Vec resolvent_derivative(double s, int power, int time_order, const Vec& w);

  /// Closed-form corrections |n_1..p> with their phase data, p <= 3.
  std::vector<OrderData> corrections(double s, int p);

  /// Pointwise phase coefficients {alpha1_dot, beta2, alpha2_dot,
  /// beta2_dot, beta3}.
  struct PhaseCoefficients {
    double alpha1_dot, beta2, alpha2_dot, beta2_dot, beta3;
  };
  PhaseCoefficients phase_coefficients(double s);

  /// Order-p ket from the recurrence
  ///   |n_p> = -i R covD_t |n_{p-1}> - i sum_k (bdot_k + i adot_k) R |n_{p-1-k}>
  /// evaluated self-contained by recursive stencils. p <= p_max.
  OrderData recurrence_order(double s, int p);

  /// Assembled p-th order state at physical time t, with integrated phases.
  Vec assemble_state(double t, int p);

  /// Dynamical phase phi(t) = -int_0^t E_n dt' at scaled time s.
  double phase_phi(double s) { return cumulative_phase(0, s); }

  /// Integrated nonadiabatic phase alpha_k(t) at scaled time s, k >= 1.
  double phase_alpha(int k, double s) {
    if (k < 1 || k > opts_.p_max) throw Error("phase_alpha: bad order");
    return cumulative_phase(k, s);
  }

  /// Energy expansion through third order at s.
  ResponseTensors response(double s);

 private:
  EigenFrame aligned_frame(double s, const EigenFrame& ref);
  Vec order_ket(int k, double s, const EigenFrame& ref);
  double cumulative_phase(int which, double s);  // 0: phi, k: alpha_k

  DrivenSystem sys_;
  AptOptions opts_;
  transport::PathGauge gauge_;
  // cumulative quadrature checkpoints for phi (key 0) and alpha_k (key k)
  std::map<int, std::map<double, double>> phase_cache_;
};

}  // namespace qgeo::apt

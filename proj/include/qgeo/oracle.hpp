#pragma once

#include "qgeo/apt.hpp"

namespace qgeo::oracle {

using apt::DrivenSystem;

struct PropagateOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double fixed_step = 0.0;
};

struct PropagationResult {
  std::vector<double> times;  // physical times
  std::vector<Vec> states;
  double norm_drift = 0.0;  // max | ||psi|| - 1 |
  double tol = 0.0;
  bool integrator_warning = false;  // norm_drift exceeded 10 * tol
};

/// Integrates i hbar d/dt psi = H(x(t)) psi from psi0 at t = 0, sampling at
/// the requested physical times (ascending). Unitarity is monitored, never
/// enforced.
PropagationResult propagate(const DrivenSystem& system, const Vec& psi0,
                            const std::vector<double>& sample_times,
                            const PropagateOptions& opts = {});

struct OrderFit {
  int p = 0;
  std::vector<double> T_values;
  std::vector<double> errors;        // phase-sensitive max error per T
  std::vector<double> errors_phase_free;  // global-phase-minimized diagnostic
  double slope = 0.0;
  double r2 = 0.0;
  double slope_phase_free = 0.0;
  bool skipped = false;  // errors at integrator noise floor
};

struct OrderCheckOptions {
  apt::AptOptions apt;
  PropagateOptions propagate;
  std::vector<double> sample_s = {0.15, 0.3, 0.45, 0.6, 0.75, 0.9, 1.0};
  double noise_floor = 1e-10;
  double min_r2 = 0.98;
};

/// For each total time T: assembles the p-th order state, propagates the
/// exact one, and takes the max error over sample times. Fits
/// log(error) against log(epsilon) and reports the slope. Throws
/// FitRejected when r^2 falls below min_r2 (non-asymptotic regime).
OrderFit order_check(const DrivenSystem& system, int p,
                     const std::vector<double>& T_list,
                     const OrderCheckOptions& opts = {});

/// Least-squares slope and r^2 of log(y) against log(x).
void loglog_fit(const std::vector<double>& x, const std::vector<double>& y,
                double& slope, double& r2);

}  // namespace qgeo::oracle

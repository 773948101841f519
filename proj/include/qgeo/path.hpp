#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qgeo/linalg.hpp"

namespace qgeo::transport {

/// A C^1 parameter-space path x(s), s in [0, 1], with its velocity and,
/// when available, acceleration. Closed paths must satisfy
/// |x(0) - x(1)| <= 1e-12.
struct ParamPath {
  int dim = 0;
  bool closed = false;
  std::function<RVec(double)> pos;
  std::function<RVec(double)> vel;  // dx/ds
  std::function<RVec(double)> acc;  // d2x/ds2; may be empty
  std::vector<RVec> waypoints;      // retained for piecewise forms

  bool has_acc() const { return static_cast<bool>(acc); }
};

/// Analytic path from callables. Validates the closure invariant.
ParamPath make_path(int dim, std::function<RVec(double)> pos,
                    std::function<RVec(double)> vel,
                    std::function<RVec(double)> acc = {}, bool closed = false);

/// Analytic path with velocity (and acceleration) from high-order central
/// differences of `pos`.
ParamPath make_path_fd(int dim, std::function<RVec(double)> pos,
                       bool closed = false);

/// Cubic-spline interpolant through waypoints at uniform s knots: natural
/// boundary conditions when open, periodic when closed (first == last
/// waypoint).
ParamPath polyline_path(std::vector<RVec> waypoints, bool closed);

/// Path from per-coordinate expressions in the variable s, with optional
/// analytic velocity/acceleration expressions.
ParamPath expr_path(const std::vector<std::string>& exprs,
                    const std::vector<std::string>& dexprs,
                    const std::vector<std::string>& ddexprs, bool closed);

/// Reparametrizes by the 7th-order smoothstep, which has vanishing first,
/// second, and third derivatives at both endpoints. Used by the adiabatic
/// suites so correction kets vanish at the path ends.
ParamPath smooth_endpoints(const ParamPath& path);

}  // namespace qgeo::transport

#pragma once

#include <map>

#include "qgeo/geometry.hpp"
#include "qgeo/path.hpp"

namespace qgeo::transport {

using geom::GeomOptions;
using models::EigenFrame;
using models::HamiltonianFamily;

struct TransportOptions {
  GeomOptions geom;
  double ode_rel_tol = 1e-10;
  double ode_abs_tol = 1e-12;
  double fixed_step = 0.0;  // > 0: fixed-step integration (convergence tests)
};

/// Tracks the eigenframe along a path in the parallel gauge: the tracked
/// eigenvector is phase-continued so that <n|dn/ds> = 0, and the
/// accumulated geometric phase gamma(s) relative to the pinned per-point
/// gauge is recorded. The connection integrand is evaluated exactly from
/// sum-over-states derivative kets, so gamma carries quadrature accuracy
/// rather than chain-discretization error.
class PathGauge {
 public:
  PathGauge(const HamiltonianFamily& family, ParamPath path, int level,
            GeomOptions opts = {}, double quad_tol = 1e-13);

  /// Eigenframe at s with the tracked column in the parallel gauge.
  EigenFrame frame(double s);

  /// Accumulated geometric phase up to s (not reduced mod 2 pi).
  double gamma(double s);

  const ParamPath& path() const { return path_; }
  int level() const { return level_; }

 private:
  struct Node {
    EigenFrame seed;   // frame in the per-point pinned gauge
    double gamma;
  };

  Node& node_at(double s);
  void extend(double target);
  // Geometric-phase increment over [a, b] using one pinned component;
  // returns false if the pin becomes unreliable and the segment must split.
  bool segment_gamma(const Node& a, double sa, const EigenFrame& fb, double sb,
                     double& out);

  const HamiltonianFamily* family_;
  ParamPath path_;
  int level_;
  GeomOptions opts_;
  double quad_tol_;
  std::map<double, Node> chain_;
};

struct GeometricPhase {
  double raw = 0.0;      // full accumulated phase including winding
  double mod_2pi = 0.0;  // representative in [0, 2 pi)
  int winding = 0;       // raw = mod_2pi + 2 pi winding
};

/// Closed-loop geometric phase by adaptive quadrature of A_mu dx^mu/ds in
/// piecewise-pinned gauges.
GeometricPhase geometric_phase(const HamiltonianFamily& family,
                               const ParamPath& loop, int level,
                               const GeomOptions& opts = {});

struct TangentKetComponents {
  Vec v;         // components v^lambda in the frame {|D_lambda n>}
  double s = 0;  // path parameter
};

struct TransportResult {
  TangentKetComponents end;
  std::vector<double> s_samples;
  std::vector<Vec> v_samples;
};

/// Parallel transport dv^l/ds + U^l_{mu nu} (dx^mu/ds) v^nu = 0 with an
/// adaptive integrator; the trajectory is sampled at accepted steps.
TransportResult parallel_transport(const HamiltonianFamily& family,
                                   const ParamPath& path, int level,
                                   const TangentKetComponents& v0,
                                   const TransportOptions& opts = {});

struct Holonomy {
  Mat g;  // n x n linear map on tangent-ket components at the basepoint
};

/// Fundamental solution of dG/ds = -A_mu(s) (dx^mu/ds) G around a closed
/// loop, G(0) = I, with (A_mu)^l_nu = U^l_{mu nu}.
Holonomy holonomy(const HamiltonianFamily& family, const ParamPath& loop,
                  int level, const TransportOptions& opts = {});

}  // namespace qgeo::transport

#pragma once

#include "qgeo/builtin_models.hpp"
#include "qgeo/model.hpp"

namespace qgeo::geom {

using models::EigenFrame;
using models::HamiltonianFamily;
using models::ParameterPoint;

enum class DerivativeBackend { kSumOverStates, kFiniteDifference };

struct GeomOptions {
  models::ModelTolerances model;
  double stencil_step = 1e-5;   // relative FD step for frame stencils
  double stencil_floor = 1e-7;  // absolute step floor
  double curvature_step = 2e-4; // outer FD step for curvature partials
  double cond_max = 1e10;       // singularity threshold for (h_{mu nu})
  DerivativeBackend backend = DerivativeBackend::kSumOverStates;
  // Optional smooth phase applied to the tracked eigenvector, used by the
  // gauge-invariance suites.
  std::function<double(const ParameterPoint&)> gauge_phase;
};

/// Eigenframe with the gauge hook applied; all geometry operations source
/// their frames here.
EigenFrame frame_at(const HamiltonianFamily& family, const ParameterPoint& x,
                    int level, const GeomOptions& opts = {});

/// Gauge-covariant derivative kets and the Berry connection at a point.
struct TangentFrame {
  EigenFrame frame;
  Mat dkets;        // N x n, column mu = |D_mu n>
  RVec berry_conn;  // A_mu = i <n | d_mu n> in the frame's pinned gauge
};

/// |D_mu n> for every direction. The sum-over-states backend evaluates
/// sum_{m != n} |m><m| dH/dx^mu |n> / (E_n - E_m); the finite-difference
/// backend differentiates phase-aligned frames and projects off |n>.
TangentFrame covariant_frame(const HamiltonianFamily& family,
                             const ParameterPoint& x, int level,
                             const GeomOptions& opts = {});

/// Sum-over-states derivative kets in the gauge of the given frame.
Mat dkets_for(const HamiltonianFamily& family, const EigenFrame& frame,
              const GeomOptions& opts = {});

/// Quantum geometric tensor h = <D_mu n | D_nu n> with metric g = Re h and
/// Berry curvature B = -2 Im h.
struct QGT {
  Mat h;
  RMat g;
  RMat b;
};

QGT qgt(const TangentFrame& tangent);
QGT qgt_at(const HamiltonianFamily& family, const ParameterPoint& x, int level,
           const GeomOptions& opts = {});

/// |D_mu D_nu n>: the covariant derivative of the D_nu ket field, evaluated
/// by centered differences of frames phase-aligned to the center (in that
/// alignment the connection term vanishes at the center point).
Vec second_covariant(const HamiltonianFamily& family, const ParameterPoint& x,
                     int level, int mu, int nu, const GeomOptions& opts = {});

struct Christoffel {
  Tensor3 first;   // <D_lambda n | D_mu D_nu n>
  Tensor3 second;  // h^{lambda rho} * first_{rho mu nu}
  QGT metric;
  double h_cond = 0.0;

  double gamma(int l, int m, int n) const { return first(l, m, n).real(); }
  double c(int l, int m, int n) const { return first(l, m, n).imag(); }
};

/// First-kind symbols only; valid even when (h) is singular.
Tensor3 christoffel_first(const HamiltonianFamily& family,
                          const ParameterPoint& x, int level,
                          const GeomOptions& opts = {});

/// Both kinds. Throws SingularQGT when cond(h) exceeds cond_max.
Christoffel christoffel(const HamiltonianFamily& family,
                        const ParameterPoint& x, int level,
                        const GeomOptions& opts = {});

/// Residuals of the compatibility identities between dh, the symbols, and
/// the g/B derivatives; all derivatives taken by central differences.
struct CompatibilityReport {
  double dh_identity = 0.0;    // d_mu h_{l n} - U_{l mu n} - conj(U_{n mu l})
  double real_identity = 0.0;  // Re U vs classical Christoffel of g
  double imag_identity = 0.0;  // Im U antisymmetric part vs -dB/2
  double symmetry = 0.0;       // U_{l mu nu} - U_{l nu mu}
};

CompatibilityReport compatibility_check(const HamiltonianFamily& family,
                                        const ParameterPoint& x, int level,
                                        const GeomOptions& opts = {});

/// Curvature of the connection: mixed R^k_{nu lambda mu} and its covariant
/// form h_{k rho} R^rho_{nu lambda mu}.
struct CurvatureTensor {
  Tensor4 mixed;
  Tensor4 covariant;
};

CurvatureTensor curvature(const HamiltonianFamily& family,
                          const ParameterPoint& x, int level,
                          const GeomOptions& opts = {});

}  // namespace qgeo::geom

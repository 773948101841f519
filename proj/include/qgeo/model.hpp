#pragma once

#include <functional>
#include <optional>
#include <string>

#include "qgeo/errors.hpp"
#include "qgeo/linalg.hpp"

namespace qgeo::models {

using ParameterPoint = RVec;

/// A smooth map from parameter space to N x N Hermitian matrices, with
/// optional analytic parameter derivatives.
struct HamiltonianFamily {
  int dim = 0;         // Hilbert-space dimension N
  int params = 0;      // number of parameters n
  double delta = 1.0;  // characteristic energy scale
  std::string name;

  std::function<Mat(const ParameterPoint&)> eval;
  // grad(x, mu) -> dH/dx^mu; empty means finite differences.
  std::function<Mat(const ParameterPoint&, int)> grad;

  bool has_grad() const { return static_cast<bool>(grad); }
};

struct ModelTolerances {
  double hermiticity_tol = 1e-12;  // max |H - H^dag| entrywise
  double gap_tol_rel = 1e-8;       // gap threshold, relative to delta
  double fd_step = 1e-5;           // relative FD step for dH
  double fd_floor = 1e-7;          // absolute FD step floor
};

/// Eigendecomposition at a point with one tracked level.
struct EigenFrame {
  ParameterPoint point;
  RVec energies;  // ascending
  Mat states;     // orthonormal eigenvectors as columns
  int level = 0;  // tracked level n
  double gap = 0.0;

  int dim() const { return static_cast<int>(energies.size()); }
  double energy() const { return energies[level]; }
  Eigen::VectorXcd state() const { return states.col(level); }
};

/// Solves H(x) and tracks level n. Energies ascend; every eigenvector is
/// seeded to a canonical gauge (largest-magnitude component real positive)
/// so raw frames are reproducible.
/// Throws NonHermitian or DegenerateLevel.
EigenFrame eigensystem(const HamiltonianFamily& family,
                       const ParameterPoint& x, int level,
                       const ModelTolerances& tol = {});

/// Rotates the tracked eigenvector of `frame` so that its overlap with the
/// reference's tracked eigenvector is real and positive. Other eigenvectors
/// are untouched. Throws FrameMismatch if |overlap| <= 0.5.
EigenFrame gauge_fix(const EigenFrame& frame, const EigenFrame& reference);

/// dH/dx^mu: analytic if the family supplies it, else a central difference
/// with step max(fd_step * |x^mu|, fd_floor). Result is Hermitized.
Mat grad_H(const HamiltonianFamily& family, const ParameterPoint& x, int mu,
           const ModelTolerances& tol = {});

/// Composes a family with a coordinate map x -> xi(x), pulling tensors back
/// to the new coordinates via the chain rule. `jacobian(x)` has entries
/// J(a, mu) = d xi^a / d x^mu.
HamiltonianFamily reparametrize(
    const HamiltonianFamily& family,
    std::function<ParameterPoint(const ParameterPoint&)> map, int new_params,
    std::function<RMat(const ParameterPoint&)> jacobian);

}  // namespace qgeo::models

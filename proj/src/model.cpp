#include "qgeo/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <utility>

namespace qgeo::models {

namespace {

// Largest-magnitude component made real positive; deterministic tie-break
// by lowest index.
void seed_gauge(Eigen::Ref<Vec> v) {
  int imax = 0;
  double best = 0.0;
  for (int i = 0; i < v.size(); ++i) {
    double a = std::abs(v[i]);
    if (a > best) {
      best = a;
      imax = i;
    }
  }
  double phase = std::arg(v[imax]);
  if (phase != 0.0) v *= std::polar(1.0, -phase);
}

}  // namespace

EigenFrame eigensystem(const HamiltonianFamily& family,
                       const ParameterPoint& x, int level,
                       const ModelTolerances& tol) {
  if (level < 0 || level >= family.dim)
    throw Error("eigensystem: level " + std::to_string(level) +
                " out of range for dim " + std::to_string(family.dim));
  Mat h = family.eval(x);
  double defect = hermiticity_defect(h);
  if (defect > tol.hermiticity_tol)
    throw NonHermitian("eigensystem: |H - H^dag| = " + std::to_string(defect));

  Eigen::SelfAdjointEigenSolver<Mat> solver(hermitize(h));
  if (solver.info() != Eigen::Success)
    throw Error("eigensystem: eigensolver failed to converge");

  EigenFrame frame;
  frame.point = x;
  frame.energies = solver.eigenvalues();  // ascending
  frame.states = solver.eigenvectors();
  frame.level = level;
  for (int m = 0; m < frame.dim(); ++m) {
    Vec col = frame.states.col(m);
    seed_gauge(col);
    frame.states.col(m) = col;
  }

  double gap = std::numeric_limits<double>::infinity();
  for (int m = 0; m < frame.dim(); ++m)
    if (m != level)
      gap = std::min(gap, std::abs(frame.energies[m] - frame.energies[level]));
  frame.gap = gap;
  if (gap <= tol.gap_tol_rel * family.delta)
    throw DegenerateLevel("eigensystem: gap " + std::to_string(gap) +
                          " at tracked level " + std::to_string(level));
  return frame;
}

EigenFrame gauge_fix(const EigenFrame& frame, const EigenFrame& reference) {
  cxd overlap = reference.state().dot(frame.state());
  double mag = std::abs(overlap);
  if (mag <= 0.5)
    throw FrameMismatch("gauge_fix: |overlap| = " + std::to_string(mag));
  double phase = std::arg(overlap);
  // A frame already aligned to rounding level is returned untouched, which
  // makes the fix exactly idempotent.
  if (std::abs(phase) < 1e-12) return frame;
  EigenFrame fixed = frame;
  fixed.states.col(frame.level) *= std::polar(1.0, -phase);
  return fixed;
}

Mat grad_H(const HamiltonianFamily& family, const ParameterPoint& x, int mu,
           const ModelTolerances& tol) {
  if (mu < 0 || mu >= family.params)
    throw Error("grad_H: direction out of range");
  if (family.has_grad()) return hermitize(family.grad(x, mu));

  if (tol.fd_step < 1e-12)
    throw StepUnderflow("grad_H: fd_step below 1e-12");
  double step = std::max(tol.fd_step * std::abs(x[mu]), tol.fd_floor);
  ParameterPoint xp = x, xm = x;
  xp[mu] += step;
  xm[mu] -= step;
  return hermitize((family.eval(xp) - family.eval(xm)) / (2.0 * step));
}

HamiltonianFamily reparametrize(
    const HamiltonianFamily& family,
    std::function<ParameterPoint(const ParameterPoint&)> map, int new_params,
    std::function<RMat(const ParameterPoint&)> jacobian) {
  HamiltonianFamily out;
  out.dim = family.dim;
  out.params = new_params;
  out.delta = family.delta;
  out.name = family.name + ":pullback";
  out.eval = [family, map](const ParameterPoint& x) {
    return family.eval(map(x));
  };
  if (family.has_grad() && jacobian) {
    out.grad = [family, map, jacobian](const ParameterPoint& x, int mu) {
      ParameterPoint xi = map(x);
      RMat jac = jacobian(x);  // (a, mu) = d xi^a / d x^mu
      Mat g = Mat::Zero(family.dim, family.dim);
      for (int a = 0; a < family.params; ++a)
        if (jac(a, mu) != 0.0) g += jac(a, mu) * family.grad(xi, a);
      return g;
    };
  }
  return out;
}

}  // namespace qgeo::models

namespace qgeo {

double hermitian_condition(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(h);
  RVec ev = solver.eigenvalues().cwiseAbs();
  double lo = ev.minCoeff(), hi = ev.maxCoeff();
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace qgeo

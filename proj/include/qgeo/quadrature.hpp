#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "qgeo/errors.hpp"

namespace qgeo::quad {

// Gauss-Kronrod 15(7) panel: Kronrod value plus an error estimate from the
// embedded Gauss rule.
struct Panel {
  double value;
  double error;
};

namespace detail {

// K15 nodes on [0, 1] half-interval and weights; Gauss weights on the odd
// nodes.
inline constexpr std::array<double, 8> kron_nodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr std::array<double, 8> kron_weights = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

inline Panel panel(const std::function<double(double)>& f, double a,
                   double b) {
  double c = 0.5 * (a + b), half = 0.5 * (b - a);
  double kron = 0.0, gauss = 0.0;
  for (int i = 0; i < 8; ++i) {
    double x = half * kron_nodes[i];
    double fs = (i == 7) ? f(c) : f(c - x) + f(c + x);
    kron += kron_weights[i] * fs;
    if (i % 2 == 1) gauss += gauss_weights[i / 2] * fs;
  }
  kron *= half;
  gauss *= half;
  return {kron, std::abs(kron - gauss)};
}

inline void refine(const std::function<double(double)>& f, double a, double b,
                   double tol, int depth, double& acc) {
  Panel p = panel(f, a, b);
  if (p.error <= tol || depth >= 28) {
    acc += p.value;
    return;
  }
  double c = 0.5 * (a + b);
  refine(f, a, c, 0.5 * tol, depth + 1, acc);
  refine(f, c, b, 0.5 * tol, depth + 1, acc);
}

}  // namespace detail

/// Adaptive integral of f over [a, b] to the given absolute tolerance.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double abs_tol = 1e-12) {
  if (a == b) return 0.0;
  double acc = 0.0;
  detail::refine(f, a, b, abs_tol, 0, acc);
  return acc;
}

/// Cumulative integrals of f from `from` to each of the sorted `points`.
inline std::vector<double> cumulative(const std::function<double(double)>& f,
                                      double from,
                                      const std::vector<double>& points,
                                      double abs_tol = 1e-12) {
  std::vector<double> out;
  out.reserve(points.size());
  double acc = 0.0, left = from;
  for (double p : points) {
    acc += integrate(f, left, p, abs_tol);
    out.push_back(acc);
    left = p;
  }
  return out;
}

}  // namespace qgeo::quad

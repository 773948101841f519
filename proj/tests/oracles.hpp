// Independent cross-check routes used only by the test suites. These stay
// deliberately separate from the library implementation paths they verify.
#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <functional>
#include <random>

#include "qgeo/builtin_models.hpp"
#include "qgeo/linalg.hpp"

namespace oracles {

using qgeo::Mat;
using qgeo::RMat;
using qgeo::RVec;
using qgeo::Vec;

// Roots of lambda^3 + c2 lambda^2 + c1 lambda + c0 via the real companion
// matrix, sorted ascending by real part.
inline std::vector<double> cubic_roots(double c2, double c1, double c0) {
  Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
  companion(0, 2) = -c0;
  companion(1, 2) = -c1;
  companion(2, 2) = -c2;
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  Eigen::EigenSolver<Eigen::Matrix3d> solver(companion);
  std::vector<double> roots;
  for (int i = 0; i < 3; ++i) roots.push_back(solver.eigenvalues()[i].real());
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Characteristic-polynomial spectrum of a 3x3 Hermitian matrix:
// det(H - lambda I) = -lambda^3 + tr lambda^2 - m2 lambda + det.
inline std::vector<double> char_poly_spectrum(const Mat& h) {
  double tr = h.trace().real();
  double m2 = 0.0;  // sum of principal 2x2 minors (real for Hermitian H)
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      m2 += (h(i, i) * h(j, j) - h(i, j) * h(j, i)).real();
  double det = h.determinant().real();
  return cubic_roots(-tr, m2, -det);
}

// Richardson-extrapolated central difference of a matrix-valued map,
// error O(h^4).
inline Mat richardson_grad(const std::function<Mat(const RVec&)>& f,
                           const RVec& x, int mu, double h = 1e-3) {
  auto central = [&](double step) {
    RVec xp = x, xm = x;
    xp[mu] += step;
    xm[mu] -= step;
    return Mat((f(xp) - f(xm)) / (2.0 * step));
  };
  return (4.0 * central(h / 2) - central(h)) / 3.0;
}

// Same for vector-valued maps (used on analytic state charts).
inline Vec richardson_vec(const std::function<Vec(const RVec&)>& f,
                          const RVec& x, int mu, double h = 1e-3) {
  auto central = [&](double step) {
    RVec xp = x, xm = x;
    xp[mu] += step;
    xm[mu] -= step;
    return Vec((f(xp) - f(xm)) / (2.0 * step));
  };
  return (4.0 * central(h / 2) - central(h)) / 3.0;
}

// Second partial d_mu d_nu of a vector-valued map, Richardson-extrapolated
// to O(h^4).
inline Vec mixed_second_vec(const std::function<Vec(const RVec&)>& f,
                            const RVec& x, int mu, int nu, double h = 1e-3) {
  if (mu == nu) {
    auto first = [&](const RVec& y) { return richardson_vec(f, y, mu, h); };
    return richardson_vec(first, x, nu, h);
  }
  auto cross = [&](double step) {
    RVec xpp = x, xpm = x, xmp = x, xmm = x;
    xpp[mu] += step;
    xpp[nu] += step;
    xpm[mu] += step;
    xpm[nu] -= step;
    xmp[mu] -= step;
    xmp[nu] += step;
    xmm[mu] -= step;
    xmm[nu] -= step;
    return Vec((f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * step * step));
  };
  return (4.0 * cross(h / 2) - cross(h)) / 3.0;
}

// --- seeded random sampling helpers -----------------------------------

inline std::mt19937& rng(uint64_t seed = 42) {
  static std::mt19937 gen(seed);
  return gen;
}

inline double uniform(std::mt19937& gen, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

// Canonical point safely inside the open chart: margin away from the
// singular boundaries p1 in {|p2|, 1} and p1 = 0.
inline qgeo::models::three_state::CanonicalState random_canonical(
    std::mt19937& gen, double margin = 0.15) {
  qgeo::models::three_state::CanonicalState c;
  c.q1 = uniform(gen, 0.0, 2.0 * M_PI);
  c.q2 = uniform(gen, 0.0, 2.0 * M_PI);
  c.p1 = uniform(gen, 2.0 * margin, 1.0 - margin);
  double lim = c.p1 - margin;
  c.p2 = uniform(gen, -lim, lim);
  return c;
}

inline RVec random_qp(std::mt19937& gen, double margin = 0.1) {
  RVec x(2);
  x << uniform(gen, 0.0, 2.0 * M_PI), uniform(gen, margin, 1.0 - margin);
  return x;
}

// Smooth random closed loop from a two-harmonic Fourier series, with
// analytic velocity and acceleration.
struct FourierLoop {
  RMat a;  // dim x 2 cosine amplitudes
  RMat b;  // dim x 2 sine amplitudes
  RVec center;

  RVec pos(double s) const {
    RVec x = center;
    for (int k = 1; k <= 2; ++k)
      x += a.col(k - 1) * std::cos(2 * M_PI * k * s) +
           b.col(k - 1) * std::sin(2 * M_PI * k * s);
    return x;
  }
  RVec vel(double s) const {
    RVec x = RVec::Zero(center.size());
    for (int k = 1; k <= 2; ++k)
      x += 2 * M_PI * k *
           (-a.col(k - 1) * std::sin(2 * M_PI * k * s) +
            b.col(k - 1) * std::cos(2 * M_PI * k * s));
    return x;
  }
  RVec acc(double s) const {
    RVec x = RVec::Zero(center.size());
    for (int k = 1; k <= 2; ++k) {
      double w = 2 * M_PI * k;
      x += w * w *
           (-a.col(k - 1) * std::cos(2 * M_PI * k * s) -
            b.col(k - 1) * std::sin(2 * M_PI * k * s));
    }
    return x;
  }
};

inline FourierLoop random_loop(std::mt19937& gen, int dim, double amplitude,
                               const RVec& center) {
  FourierLoop loop;
  loop.center = center;
  loop.a = RMat(dim, 2);
  loop.b = RMat(dim, 2);
  for (int d = 0; d < dim; ++d)
    for (int k = 0; k < 2; ++k) {
      loop.a(d, k) = uniform(gen, -amplitude, amplitude) / (k + 1);
      loop.b(d, k) = uniform(gen, -amplitude, amplitude) / (k + 1);
    }
  return loop;
}

// Dense discrete Berry phase: minus the accumulated overlap phases of the
// tracked eigenstate over `steps` uniform nodes around a closed loop.
inline double discrete_berry_phase(const qgeo::models::HamiltonianFamily& fam,
                                   const std::function<RVec(double)>& pos,
                                   int level, int steps) {
  double gamma = 0.0;
  auto first = qgeo::models::eigensystem(fam, pos(0.0), level);
  Vec prev = first.state();
  for (int k = 1; k <= steps; ++k) {
    double s = static_cast<double>(k) / steps;
    Vec cur = (k == steps)
                  ? first.state()
                  : qgeo::models::eigensystem(fam, pos(s), level).state();
    gamma -= std::arg(prev.dot(cur));
    prev = cur;
  }
  return gamma;
}

}  // namespace oracles

#include "qgeo/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qgeo::geom {

namespace {

double stencil_step(const GeomOptions& opts, const ParameterPoint& x, int mu) {
  return std::max(opts.stencil_step * std::abs(x[mu]), opts.stencil_floor);
}

// Frames one stencil step to either side of the center, phase-aligned to it.
struct StencilPair {
  EigenFrame plus;
  EigenFrame minus;
  double step;
};

StencilPair aligned_stencil(const HamiltonianFamily& family,
                            const EigenFrame& center, int mu,
                            const GeomOptions& opts) {
  double step = stencil_step(opts, center.point, mu);
  ParameterPoint xp = center.point, xm = center.point;
  xp[mu] += step;
  xm[mu] -= step;
  try {
    return {models::gauge_fix(frame_at(family, xp, center.level, opts), center),
            models::gauge_fix(frame_at(family, xm, center.level, opts), center),
            step};
  } catch (const FrameMismatch& e) {
    throw StencilFailure(std::string("stencil alignment failed: ") + e.what());
  }
}

}  // namespace

Mat dkets_for(const HamiltonianFamily& family, const EigenFrame& frame,
              const GeomOptions& opts) {
  const int dim = frame.dim();
  Mat dkets = Mat::Zero(dim, family.params);
  Vec tracked = frame.state();
  for (int mu = 0; mu < family.params; ++mu) {
    Mat dh = models::grad_H(family, frame.point, mu, opts.model);
    Vec coupled = dh * tracked;
    for (int m = 0; m < dim; ++m) {
      if (m == frame.level) continue;
      cxd amp = frame.states.col(m).dot(coupled) /
                (frame.energy() - frame.energies[m]);
      dkets.col(mu) += amp * frame.states.col(m);
    }
  }
  return dkets;
}

EigenFrame frame_at(const HamiltonianFamily& family, const ParameterPoint& x,
                    int level, const GeomOptions& opts) {
  EigenFrame frame = models::eigensystem(family, x, level, opts.model);
  if (opts.gauge_phase) {
    double f = opts.gauge_phase(x);
    frame.states.col(level) *= std::polar(1.0, f);
  }
  return frame;
}

TangentFrame covariant_frame(const HamiltonianFamily& family,
                             const ParameterPoint& x, int level,
                             const GeomOptions& opts) {
  TangentFrame out;
  out.frame = frame_at(family, x, level, opts);

  if (opts.backend == DerivativeBackend::kSumOverStates) {
    out.dkets = dkets_for(family, out.frame, opts);
  } else {
    out.dkets = Mat::Zero(out.frame.dim(), family.params);
    Vec tracked = out.frame.state();
    for (int mu = 0; mu < family.params; ++mu) {
      auto stencil = aligned_stencil(family, out.frame, mu, opts);
      Vec diff =
          (stencil.plus.state() - stencil.minus.state()) / (2.0 * stencil.step);
      out.dkets.col(mu) = diff - tracked * tracked.dot(diff);
    }
  }

  // Connection in the frame's own pinned gauge, from overlap phases.
  out.berry_conn = RVec::Zero(family.params);
  Vec tracked = out.frame.state();
  for (int mu = 0; mu < family.params; ++mu) {
    double step = stencil_step(opts, x, mu);
    ParameterPoint xp = x, xm = x;
    xp[mu] += step;
    xm[mu] -= step;
    cxd op = tracked.dot(frame_at(family, xp, level, opts).state());
    cxd om = tracked.dot(frame_at(family, xm, level, opts).state());
    out.berry_conn[mu] = -(std::arg(op) - std::arg(om)) / (2.0 * step);
  }
  return out;
}

QGT qgt(const TangentFrame& tangent) {
  QGT out;
  out.h = hermitize(tangent.dkets.adjoint() * tangent.dkets);
  out.g = out.h.real();
  out.b = -2.0 * out.h.imag();
  return out;
}

QGT qgt_at(const HamiltonianFamily& family, const ParameterPoint& x, int level,
           const GeomOptions& opts) {
  return qgt(covariant_frame(family, x, level, opts));
}

namespace {

// D_mu applied to every D_nu ket at once: centered difference of stencil
// dkets in the center-aligned gauge. Returns an N x n matrix per direction.
std::vector<Mat> second_covariant_all(const HamiltonianFamily& family,
                                      const EigenFrame& center,
                                      const GeomOptions& opts) {
  std::vector<Mat> dd(family.params);
  for (int mu = 0; mu < family.params; ++mu) {
    auto stencil = aligned_stencil(family, center, mu, opts);
    Mat plus = dkets_for(family, stencil.plus, opts);
    Mat minus = dkets_for(family, stencil.minus, opts);
    dd[mu] = (plus - minus) / (2.0 * stencil.step);
  }
  return dd;
}

}  // namespace

Vec second_covariant(const HamiltonianFamily& family, const ParameterPoint& x,
                     int level, int mu, int nu, const GeomOptions& opts) {
  EigenFrame center = frame_at(family, x, level, opts);
  auto stencil = aligned_stencil(family, center, mu, opts);
  Mat plus = dkets_for(family, stencil.plus, opts);
  Mat minus = dkets_for(family, stencil.minus, opts);
  return (plus.col(nu) - minus.col(nu)) / (2.0 * stencil.step);
}

Tensor3 christoffel_first(const HamiltonianFamily& family,
                          const ParameterPoint& x, int level,
                          const GeomOptions& opts) {
  const int n = family.params;
  EigenFrame center = frame_at(family, x, level, opts);
  Mat dkets = dkets_for(family, center, opts);
  auto dd = second_covariant_all(family, center, opts);
  Tensor3 first(n);
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m)
      for (int k = 0; k < n; ++k)
        first(l, m, k) = dkets.col(l).dot(dd[m].col(k));
  return first;
}

Christoffel christoffel(const HamiltonianFamily& family,
                        const ParameterPoint& x, int level,
                        const GeomOptions& opts) {
  const int n = family.params;
  Christoffel out;
  TangentFrame tangent = covariant_frame(family, x, level, opts);
  out.metric = qgt(tangent);
  out.h_cond = hermitian_condition(out.metric.h);
  if (!(out.h_cond <= opts.cond_max))
    throw SingularQGT("christoffel: cond(h) = " + std::to_string(out.h_cond));

  auto dd = second_covariant_all(family, tangent.frame, opts);
  out.first = Tensor3(n);
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m)
      for (int k = 0; k < n; ++k)
        out.first(l, m, k) = tangent.dkets.col(l).dot(dd[m].col(k));

  Eigen::LDLT<Mat> solver(out.metric.h);
  out.second = Tensor3(n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) {
      Vec rhs(n);
      for (int l = 0; l < n; ++l) rhs[l] = out.first(l, m, k);
      Vec raised = solver.solve(rhs);
      for (int l = 0; l < n; ++l) out.second(l, m, k) = raised[l];
    }
  return out;
}

CompatibilityReport compatibility_check(const HamiltonianFamily& family,
                                        const ParameterPoint& x, int level,
                                        const GeomOptions& opts) {
  // Only first-kind symbols enter the identities, so this check is valid
  // even on charts where (h) is complex-rank deficient.
  const int n = family.params;
  Christoffel chr;
  chr.first = christoffel_first(family, x, level, opts);

  // Central differences of the gauge-invariant tensors h, g, B.
  std::vector<Mat> dh(n);
  std::vector<RMat> dg(n), db(n);
  for (int mu = 0; mu < n; ++mu) {
    double step = stencil_step(opts, x, mu);
    ParameterPoint xp = x, xm = x;
    xp[mu] += step;
    xm[mu] -= step;
    QGT qp = qgt_at(family, xp, level, opts);
    QGT qm = qgt_at(family, xm, level, opts);
    dh[mu] = (qp.h - qm.h) / (2.0 * step);
    dg[mu] = (qp.g - qm.g) / (2.0 * step);
    db[mu] = (qp.b - qm.b) / (2.0 * step);
  }

  CompatibilityReport rep;
  for (int l = 0; l < n; ++l)
    for (int mu = 0; mu < n; ++mu)
      for (int k = 0; k < n; ++k) {
        cxd lhs = dh[mu](l, k);
        cxd rhs = chr.first(l, mu, k) + std::conj(chr.first(k, mu, l));
        rep.dh_identity = std::max(rep.dh_identity, std::abs(lhs - rhs));

        double classical = 0.5 * (dg[k](l, mu) + dg[mu](k, l) - dg[l](mu, k));
        rep.real_identity = std::max(
            rep.real_identity, std::abs(chr.gamma(l, mu, k) - classical));

        double imag_resid =
            chr.c(l, mu, k) - chr.c(k, mu, l) + 0.5 * db[mu](l, k);
        rep.imag_identity = std::max(rep.imag_identity, std::abs(imag_resid));

        rep.symmetry = std::max(
            rep.symmetry, std::abs(chr.first(l, mu, k) - chr.first(l, k, mu)));
      }
  return rep;
}

CurvatureTensor curvature(const HamiltonianFamily& family,
                          const ParameterPoint& x, int level,
                          const GeomOptions& opts) {
  const int n = family.params;
  // The stacked difference amplifies frame-phase rounding by
  // 1/(inner step * outer step); a wider inner stencil keeps the noise
  // floor well under the symbol truncation budget.
  GeomOptions inner = opts;
  inner.stencil_step = std::max(opts.stencil_step, 3e-5);
  Christoffel center = christoffel(family, x, level, inner);

  // d_lambda of the second-kind symbols.
  std::vector<Tensor3> dsecond(n);
  for (int l = 0; l < n; ++l) {
    double step = opts.curvature_step * std::max(std::abs(x[l]), 1.0);
    ParameterPoint xp = x, xm = x;
    xp[l] += step;
    xm[l] -= step;
    Tensor3 sp = christoffel(family, xp, level, inner).second;
    Tensor3 sm = christoffel(family, xm, level, inner).second;
    Tensor3 d(n);
    d.raw() = (sp.raw() - sm.raw()) / (2.0 * step);
    dsecond[l] = std::move(d);
  }

  CurvatureTensor out;
  out.mixed = Tensor4(n);
  out.covariant = Tensor4(n);
  const Tensor3& u = center.second;
  for (int k = 0; k < n; ++k)
    for (int nu = 0; nu < n; ++nu)
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m) {
          cxd val = dsecond[l](k, m, nu) - dsecond[m](k, l, nu);
          for (int a = 0; a < n; ++a)
            val += u(k, l, a) * u(a, m, nu) - u(k, m, a) * u(a, l, nu);
          out.mixed(k, nu, l, m) = val;
        }
  for (int k = 0; k < n; ++k)
    for (int nu = 0; nu < n; ++nu)
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m) {
          cxd val = 0.0;
          for (int r = 0; r < n; ++r)
            val += center.metric.h(k, r) * out.mixed(r, nu, l, m);
          out.covariant(k, nu, l, m) = val;
        }
  return out;
}

}  // namespace qgeo::geom

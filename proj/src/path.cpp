#include "qgeo/path.hpp"

#include <Eigen/LU>
#include <cmath>

#include "qgeo/errors.hpp"
#include "qgeo/expr.hpp"

namespace qgeo::transport {

namespace {

void check_closure(const ParamPath& p) {
  if (!p.closed) return;
  if ((p.pos(0.0) - p.pos(1.0)).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("path: closed flag set but x(0) != x(1)");
}

RVec fd_vel(const std::function<RVec(double)>& pos, double s, double h) {
  return (8.0 * (pos(s + h) - pos(s - h)) - (pos(s + 2 * h) - pos(s - 2 * h))) /
         (12.0 * h);
}

RVec fd_acc(const std::function<RVec(double)>& pos, double s, double h) {
  return (-pos(s + 2 * h) + 16.0 * pos(s + h) - 30.0 * pos(s) +
          16.0 * pos(s - h) - pos(s - 2 * h)) /
         (12.0 * h * h);
}

}  // namespace

ParamPath make_path(int dim, std::function<RVec(double)> pos,
                    std::function<RVec(double)> vel,
                    std::function<RVec(double)> acc, bool closed) {
  ParamPath p;
  p.dim = dim;
  p.closed = closed;
  p.pos = std::move(pos);
  p.vel = std::move(vel);
  p.acc = std::move(acc);
  check_closure(p);
  return p;
}

ParamPath make_path_fd(int dim, std::function<RVec(double)> pos, bool closed) {
  const double h = 1e-3;
  auto vel = [pos, h](double s) { return fd_vel(pos, s, h); };
  auto acc = [pos, h](double s) { return fd_acc(pos, s, h); };
  return make_path(dim, pos, vel, acc, closed);
}

namespace {

// Uniform-knot cubic spline through m waypoints; natural ends when open,
// cyclic when closed. Columns of `w` are waypoints.
struct Spline {
  RMat w;   // dim x m
  RMat m2;  // second derivatives at knots, dim x m
  int segments;

  double knot_step() const { return 1.0 / segments; }

  void locate(double s, bool closed, int& seg, double& t) const {
    if (closed) s -= std::floor(s);
    double u = s * segments;
    seg = static_cast<int>(std::floor(u));
    seg = std::max(0, std::min(segments - 1, seg));
    t = u - seg;
  }

  RVec pos(double s, bool closed) const {
    int i;
    double t;
    locate(s, closed, i, t);
    double h = knot_step();
    double a = 1.0 - t;
    return a * w.col(i) + t * w.col(i + 1) +
           (h * h / 6.0) *
               ((a * a * a - a) * m2.col(i) + (t * t * t - t) * m2.col(i + 1));
  }

  RVec vel(double s, bool closed) const {
    int i;
    double t;
    locate(s, closed, i, t);
    double h = knot_step();
    double a = 1.0 - t;
    return (w.col(i + 1) - w.col(i)) / h +
           (h / 6.0) * ((1.0 - 3.0 * a * a) * m2.col(i) +
                        (3.0 * t * t - 1.0) * m2.col(i + 1));
  }

  RVec acc(double s, bool closed) const {
    int i;
    double t;
    locate(s, closed, i, t);
    return (1.0 - t) * m2.col(i) + t * m2.col(i + 1);
  }
};

Spline build_spline(const std::vector<RVec>& pts, bool closed) {
  const int m = static_cast<int>(pts.size());
  const int dim = static_cast<int>(pts.front().size());
  Spline sp;
  sp.segments = m - 1;
  sp.w = RMat(dim, m);
  for (int i = 0; i < m; ++i) sp.w.col(i) = pts[i];
  sp.m2 = RMat::Zero(dim, m);
  if (m <= 2) return sp;  // straight segment

  const double h = 1.0 / (m - 1);
  if (!closed) {
    const int inner = m - 2;
    RMat a = RMat::Zero(inner, inner);
    RMat rhs(inner, dim);
    for (int i = 0; i < inner; ++i) {
      a(i, i) = 4.0;
      if (i > 0) a(i, i - 1) = 1.0;
      if (i + 1 < inner) a(i, i + 1) = 1.0;
      rhs.row(i) = 6.0 / (h * h) *
                   (sp.w.col(i) - 2.0 * sp.w.col(i + 1) + sp.w.col(i + 2))
                       .transpose();
    }
    RMat sol = a.partialPivLu().solve(rhs);
    for (int i = 0; i < inner; ++i) sp.m2.col(i + 1) = sol.row(i).transpose();
  } else {
    // unknowns M_0 .. M_{m-2}, with M_{m-1} = M_0
    const int n = m - 1;
    RMat a = RMat::Zero(n, n);
    RMat rhs(n, dim);
    auto wrap = [n](int i) { return (i % n + n) % n; };
    for (int i = 0; i < n; ++i) {
      a(i, i) = 4.0;
      a(i, wrap(i - 1)) += 1.0;
      a(i, wrap(i + 1)) += 1.0;
      rhs.row(i) = 6.0 / (h * h) *
                   (sp.w.col(wrap(i - 1)) - 2.0 * sp.w.col(i) +
                    sp.w.col(wrap(i + 1)))
                       .transpose();
    }
    RMat sol = a.partialPivLu().solve(rhs);
    for (int i = 0; i < n; ++i) sp.m2.col(i) = sol.row(i).transpose();
    sp.m2.col(m - 1) = sp.m2.col(0);
  }
  return sp;
}

}  // namespace

ParamPath polyline_path(std::vector<RVec> waypoints, bool closed) {
  if (waypoints.size() < 2)
    throw ConfigError("path: polyline needs at least two waypoints");
  if (closed &&
      (waypoints.front() - waypoints.back()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("path: closed polyline must repeat its first waypoint");
  auto spline = std::make_shared<Spline>(build_spline(waypoints, closed));
  ParamPath p;
  p.dim = static_cast<int>(waypoints.front().size());
  p.closed = closed;
  p.waypoints = std::move(waypoints);
  p.pos = [spline, closed](double s) { return spline->pos(s, closed); };
  p.vel = [spline, closed](double s) { return spline->vel(s, closed); };
  p.acc = [spline, closed](double s) { return spline->acc(s, closed); };
  return p;
}

ParamPath expr_path(const std::vector<std::string>& exprs,
                    const std::vector<std::string>& dexprs,
                    const std::vector<std::string>& ddexprs, bool closed) {
  const int dim = static_cast<int>(exprs.size());
  if (dim == 0) throw ConfigError("path: no coordinate expressions");
  if (!dexprs.empty() && static_cast<int>(dexprs.size()) != dim)
    throw ConfigError("path: dexprs length mismatch");
  if (!ddexprs.empty() && static_cast<int>(ddexprs.size()) != dim)
    throw ConfigError("path: ddexprs length mismatch");

  const std::vector<std::string> vars = {"s"};
  auto compile = [&vars](const std::vector<std::string>& texts) {
    auto out = std::make_shared<std::vector<expr::Expr>>();
    for (const auto& t : texts) out->push_back(expr::Expr::parse(t, vars));
    return out;
  };
  auto evaluate = [dim](const std::shared_ptr<std::vector<expr::Expr>>& fns,
                        double s) {
    RVec x(dim);
    for (int i = 0; i < dim; ++i) x[i] = (*fns)[i].eval({s});
    return x;
  };

  auto fp = compile(exprs);
  auto pos = [fp, evaluate](double s) { return evaluate(fp, s); };

  std::function<RVec(double)> vel, acc;
  if (!dexprs.empty()) {
    auto fv = compile(dexprs);
    vel = [fv, evaluate](double s) { return evaluate(fv, s); };
  } else {
    vel = [pos](double s) { return fd_vel(pos, s, 1e-3); };
  }
  if (!ddexprs.empty()) {
    auto fa = compile(ddexprs);
    acc = [fa, evaluate](double s) { return evaluate(fa, s); };
  } else if (!dexprs.empty()) {
    auto v = vel;
    acc = [v](double s) { return fd_vel(v, s, 1e-3); };
  } else {
    acc = [pos](double s) { return fd_acc(pos, s, 1e-3); };
  }
  return make_path(dim, pos, vel, acc, closed);
}

ParamPath smooth_endpoints(const ParamPath& path) {
  // sigma(u) = 35u^4 - 84u^5 + 70u^6 - 20u^7: first three derivatives
  // vanish at u = 0 and u = 1.
  auto sigma = [](double u) {
    return u * u * u * u * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u)));
  };
  auto dsigma = [](double u) {
    double a = u * (1.0 - u);
    return 140.0 * a * a * a;
  };
  auto ddsigma = [](double u) {
    double a = u * (1.0 - u);
    return 420.0 * a * a * (1.0 - 2.0 * u);
  };

  ParamPath p;
  p.dim = path.dim;
  p.closed = path.closed;
  p.waypoints = path.waypoints;
  auto base_pos = path.pos;
  auto base_vel = path.vel;
  auto base_acc = path.acc;
  p.pos = [base_pos, sigma](double s) { return base_pos(sigma(s)); };
  p.vel = [base_vel, sigma, dsigma](double s) {
    return RVec(dsigma(s) * base_vel(sigma(s)));
  };
  if (path.has_acc()) {
    p.acc = [base_vel, base_acc, sigma, dsigma, ddsigma](double s) {
      double u = sigma(s), du = dsigma(s);
      return RVec(ddsigma(s) * base_vel(u) + du * du * base_acc(u));
    };
  }
  return p;
}

}  // namespace qgeo::transport

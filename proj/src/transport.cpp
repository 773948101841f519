#include "qgeo/transport.hpp"

#include <cmath>

#include "qgeo/ode.hpp"
#include "qgeo/quadrature.hpp"

namespace qgeo::transport {

namespace {

constexpr double kMaxSegment = 0.05;
constexpr double kMinPinWeight = 0.2;  // |u_i|^2 floor for a usable pin

// Signals a pin component losing weight inside a quadrature panel.
struct PinBreak {};

// Connection A_s(s) in the gauge where component `pin` of the tracked
// state is held real positive: Im(conj(u_i) (D_s n)_i) / |u_i|^2, with
// D_s n built from sum-over-states kets. Exact pointwise, no FD step.
double pinned_connection(const HamiltonianFamily& family,
                         const ParamPath& path, int level, int pin,
                         double s, const GeomOptions& opts) {
  EigenFrame frame = geom::frame_at(family, path.pos(s), level, opts);
  // D_s n = sum_mu |D_mu n> dx^mu/ds from the sum-over-states kets
  Vec tracked = frame.state();
  RVec v = path.vel(s);
  Vec dsn = Vec::Zero(frame.dim());
  for (int mu = 0; mu < family.params; ++mu) {
    if (v[mu] == 0.0) continue;
    Mat dh = models::grad_H(family, frame.point, mu, opts.model);
    Vec coupled = dh * tracked;
    for (int m = 0; m < frame.dim(); ++m) {
      if (m == level) continue;
      cxd amp = frame.states.col(m).dot(coupled) /
                (frame.energy() - frame.energies[m]);
      dsn += (v[mu] * amp) * frame.states.col(m);
    }
  }
  cxd ui = tracked[pin];
  double w = std::norm(ui);
  if (w < kMinPinWeight) throw PinBreak{};
  return std::imag(std::conj(ui) * dsn[pin]) / w;
}

}  // namespace

PathGauge::PathGauge(const HamiltonianFamily& family, ParamPath path,
                     int level, GeomOptions opts, double quad_tol)
    : family_(&family),
      path_(std::move(path)),
      level_(level),
      opts_(std::move(opts)),
      quad_tol_(quad_tol) {
  Node origin;
  origin.seed = geom::frame_at(*family_, path_.pos(0.0), level_, opts_);
  origin.gamma = 0.0;
  chain_.emplace(0.0, std::move(origin));
}

bool PathGauge::segment_gamma(const Node& a, double sa, const EigenFrame& fb,
                              double sb, double& out) {
  // Pin on the heaviest component of the left endpoint.
  int pin = 0;
  double best = 0.0;
  Vec ua = a.seed.state();
  for (int i = 0; i < ua.size(); ++i) {
    double w = std::norm(ua[i]);
    if (w > best) {
      best = w;
      pin = i;
    }
  }
  if (std::norm(fb.state()[pin]) < kMinPinWeight) return false;
  try {
    double integral = quad::integrate(
        [&](double s) {
          return pinned_connection(*family_, path_, level_, pin, s, opts_);
        },
        sa, sb, quad_tol_);
    out = integral + std::arg(ua[pin]) - std::arg(fb.state()[pin]);
    return true;
  } catch (const PinBreak&) {
    return false;
  }
}

PathGauge::Node& PathGauge::node_at(double s) {
  auto it = chain_.find(s);
  if (it == chain_.end()) {
    extend(s);
    it = chain_.find(s);
  }
  return it->second;
}

void PathGauge::extend(double target) {
  while (chain_.find(target) == chain_.end()) {
    // anchor at the nearest existing node on either side
    auto after = chain_.lower_bound(target);
    double anchor;
    if (after == chain_.begin()) {
      anchor = after->first;
    } else if (after == chain_.end()) {
      anchor = std::prev(after)->first;
    } else {
      double lo = std::prev(after)->first, hi = after->first;
      anchor = (target - lo <= hi - target) ? lo : hi;
    }
    double span = target - anchor;  // signed
    if (std::abs(span) > kMaxSegment) {
      extend(anchor + 0.5 * span);
      continue;
    }
    if (std::abs(span) < 1e-9)
      throw StencilFailure("path gauge: segment refinement stalled");
    Node& a = chain_.at(anchor);
    EigenFrame ft = geom::frame_at(*family_, path_.pos(target), level_, opts_);
    double dgamma;
    if (segment_gamma(a, anchor, ft, target, dgamma)) {
      Node node;
      node.gamma = a.gamma + dgamma;
      node.seed = std::move(ft);
      chain_.emplace(target, std::move(node));
    } else {
      extend(anchor + 0.5 * span);
    }
  }
}

EigenFrame PathGauge::frame(double s) {
  Node& n = node_at(s);
  EigenFrame out = n.seed;
  out.states.col(level_) *= std::polar(1.0, n.gamma);
  return out;
}

double PathGauge::gamma(double s) { return node_at(s).gamma; }

GeometricPhase geometric_phase(const HamiltonianFamily& family,
                               const ParamPath& loop, int level,
                               const GeomOptions& opts) {
  if (!loop.closed) throw ConfigError("geometric_phase: path is not closed");
  PathGauge gauge(family, loop, level, opts);
  GeometricPhase out;
  out.raw = gauge.gamma(1.0);
  double turns = std::floor(out.raw / (2.0 * M_PI));
  out.mod_2pi = out.raw - 2.0 * M_PI * turns;
  out.winding = static_cast<int>(turns);
  return out;
}

namespace {

// Contraction A(s) = U^l_{mu nu} dx^mu/ds as an n x n matrix, memoized by
// path parameter.
class ConnectionAlongPath {
 public:
  ConnectionAlongPath(const HamiltonianFamily& family, const ParamPath& path,
                      int level, const GeomOptions& opts)
      : family_(&family), path_(&path), level_(level), opts_(&opts) {}

  const Mat& at(double s) {
    auto it = cache_.find(s);
    if (it == cache_.end()) {
      auto chr = geom::christoffel(*family_, path_->pos(s), level_, *opts_);
      RVec v = path_->vel(s);
      const int n = family_->params;
      Mat a = Mat::Zero(n, n);
      for (int l = 0; l < n; ++l)
        for (int nu = 0; nu < n; ++nu) {
          cxd sum = 0.0;
          for (int mu = 0; mu < n; ++mu) sum += chr.second(l, mu, nu) * v[mu];
          a(l, nu) = sum;
        }
      it = cache_.emplace(s, std::move(a)).first;
    }
    return it->second;
  }

 private:
  const HamiltonianFamily* family_;
  const ParamPath* path_;
  int level_;
  const GeomOptions* opts_;
  std::map<double, Mat> cache_;
};

ode::OdeOptions ode_options(const TransportOptions& opts) {
  ode::OdeOptions o;
  o.rel_tol = opts.ode_rel_tol;
  o.abs_tol = opts.ode_abs_tol;
  o.fixed_step = opts.fixed_step;
  return o;
}

}  // namespace

TransportResult parallel_transport(const HamiltonianFamily& family,
                                   const ParamPath& path, int level,
                                   const TangentKetComponents& v0,
                                   const TransportOptions& opts) {
  ConnectionAlongPath conn(family, path, level, opts.geom);
  ode::DormandPrince<Vec> solver(
      [&conn](double s, const Vec& v) { return Vec(-(conn.at(s) * v)); },
      ode_options(opts));
  TransportResult result;
  result.s_samples.push_back(v0.s);
  result.v_samples.push_back(v0.v);
  Vec vend = solver.integrate(v0.s, v0.v, 1.0, nullptr,
                              [&result](double s, const Vec& v) {
                                result.s_samples.push_back(s);
                                result.v_samples.push_back(v);
                              });
  result.end = {vend, 1.0};
  return result;
}

Holonomy holonomy(const HamiltonianFamily& family, const ParamPath& loop,
                  int level, const TransportOptions& opts) {
  if (!loop.closed) throw ConfigError("holonomy: path is not closed");
  ConnectionAlongPath conn(family, loop, level, opts.geom);
  const int n = family.params;
  ode::DormandPrince<Mat> solver(
      [&conn](double s, const Mat& g) { return Mat(-(conn.at(s) * g)); },
      ode_options(opts));
  Holonomy h;
  h.g = solver.integrate(0.0, Mat::Identity(n, n), 1.0);
  return h;
}

}  // namespace qgeo::transport

#include "qgeo/apt.hpp"

#include <cmath>

#include "qgeo/quadrature.hpp"

namespace qgeo::apt {

namespace {

// No orthogonality check: as an operator the restricted resolvent simply
// annihilates the |n> component, which is what the time-derivative
// stencils require when the frame moves under a frozen vector.
Vec resolvent_unchecked(const EigenFrame& frame, int power, const Vec& w) {
  Vec out = Vec::Zero(frame.dim());
  for (int m = 0; m < frame.dim(); ++m) {
    if (m == frame.level) continue;
    cxd amp = frame.states.col(m).dot(w) /
              std::pow(frame.energy() - frame.energies[m], power);
    out += amp * frame.states.col(m);
  }
  return out;
}

// Five-point first and second derivative weights over uniform stencils.
template <class F>
Vec fd5_first(const F& value, double h) {
  return (8.0 * (value(1) - value(-1)) - (value(2) - value(-2))) / (12.0 * h);
}

template <class F>
Vec fd5_second(const F& value, double h) {
  return (-value(2) + 16.0 * value(1) - 30.0 * value(0) + 16.0 * value(-1) -
          value(-2)) /
         (12.0 * h * h);
}

}  // namespace

Vec resolvent_apply(const EigenFrame& frame, int power, const Vec& w) {
  double wn = w.norm();
  if (wn > 0.0) {
    double overlap = std::abs(frame.state().dot(w));
    if (overlap > 1e-8 * wn)
      throw NotOrthogonal(
          "resolvent_apply: input has a tracked-level component of relative "
          "size " +
          std::to_string(overlap / wn));
  }
  return resolvent_unchecked(frame, power, w);
}

AptEngine::AptEngine(DrivenSystem system, AptOptions opts)
    : sys_(std::move(system)),
      opts_(std::move(opts)),
      gauge_(sys_.family, sys_.path, sys_.level, opts_.geom, opts_.quad_tol) {}

EigenFrame AptEngine::frame(double s) { return gauge_.frame(s); }

double AptEngine::gamma(double s) { return gauge_.gamma(s); }

EigenFrame AptEngine::aligned_frame(double s, const EigenFrame& ref) {
  EigenFrame raw =
      geom::frame_at(sys_.family, sys_.path.pos(s), sys_.level, opts_.geom);
  try {
    return models::gauge_fix(raw, ref);
  } catch (const FrameMismatch& e) {
    throw StencilFailure(std::string("apt stencil alignment: ") + e.what());
  }
}

Vec AptEngine::tangent_ket(double s, const EigenFrame& ref) {
  EigenFrame f = aligned_frame(s, ref);
  Mat dkets = geom::dkets_for(sys_.family, f, opts_.geom);
  RVec xdot = sys_.path.vel(s) / sys_.total_time;
  Vec t = Vec::Zero(f.dim());
  for (int mu = 0; mu < sys_.family.params; ++mu)
    if (xdot[mu] != 0.0) t += xdot[mu] * dkets.col(mu);
  return t;
}

Vec AptEngine::tangent_ket(double s) { return tangent_ket(s, frame(s)); }

namespace {

Vec time_derivative_impl(const AptEngine::KetField& field, double s,
                         const models::EigenFrame& center, double h,
                         double total_time, bool project) {
  auto value = [&](int j) {
    return field(s + j * h, center);
  };
  Vec d = fd5_first(value, h) / total_time;
  if (project) {
    Vec n = center.state();
    d -= n * n.dot(d);
  }
  return d;
}

}  // namespace

Vec AptEngine::covariant_time_derivative(const KetField& field, double s) {
  return time_derivative_impl(field, s, frame(s), opts_.time_step,
                              sys_.total_time, true);
}

Vec AptEngine::material_time_derivative(const KetField& field, double s) {
  return time_derivative_impl(field, s, frame(s), opts_.time_step,
                              sys_.total_time, false);
}

Vec AptEngine::resolvent_derivative(double s, int power, int time_order,
                                    const Vec& w) {
  auto apply_at = [&](int j) {
    EigenFrame f = geom::frame_at(sys_.family, sys_.path.pos(s + j * opts_.time_step),
                                  sys_.level, opts_.geom);
    return resolvent_unchecked(f, power, w);
  };
  switch (time_order) {
    case 0:
      return apply_at(0);
    case 1:
      return fd5_first(apply_at, opts_.time_step) / sys_.total_time;
    case 2:
      return fd5_second(apply_at, opts_.time_step) /
             (sys_.total_time * sys_.total_time);
    default:
      throw Error("resolvent_derivative: time_order must be 0, 1, or 2");
  }
}

std::vector<OrderData> AptEngine::corrections(double s, int p) {
  if (p < 1 || p > 3)
    throw Error("corrections: closed forms cover orders 1 to 3");
  EigenFrame center = frame(s);
  auto rk = [&](int k, const Vec& w) {
    return resolvent_unchecked(center, k, w);
  };
  Vec t0 = tangent_ket(s, center);
  KetField t_field = [this](double s2, const EigenFrame& ref) {
    return tangent_ket(s2, ref);
  };

  std::vector<OrderData> out;
  auto push = [&](int order, Vec ket, double beta) {
    OrderData o;
    o.order = order;
    o.ket = std::move(ket);
    o.beta = beta;
    cxd tk = t0.dot(o.ket);
    o.beta_dot = tk.real();
    o.alpha_dot = tk.imag();
    out.push_back(std::move(o));
  };

  Vec rt = rk(1, t0);
  push(1, Vec(-kI * rt), 0.0);
  if (p == 1) return out;

  Vec cov_t = covariant_time_derivative(t_field, s);
  Vec drt = resolvent_derivative(s, 1, 1, t0);  // (d_t R) T, frozen T
  push(2, Vec(-rk(2, cov_t) - rk(1, drt)), -0.5 * rt.squaredNorm());
  if (p == 2) return out;

  // Third order, grouped so that it telescopes from the recurrence:
  //   i R^3 covD_t covD_t T + i R (d_t R^2) covD_t T + i R^2 (d_t R) D_t T
  //   + i R d_t[R d_t R] T + alpha1_dot R n_1
  KetField cov_t_field = [this, &t_field](double s2, const EigenFrame& ref) {
    return time_derivative_impl(t_field, s2, aligned_frame(s2, ref),
                                opts_.time_step, sys_.total_time, true);
  };
  Vec cov_cov_t = covariant_time_derivative(cov_t_field, s);
  Vec mat_t = material_time_derivative(t_field, s);

  auto r_drt_at = [&](int j) {
    double s2 = s + j * opts_.time_step;
    EigenFrame f =
        geom::frame_at(sys_.family, sys_.path.pos(s2), sys_.level, opts_.geom);
    return resolvent_unchecked(f, 1, resolvent_derivative(s2, 1, 1, t0));
  };
  Vec d_rdr_t = fd5_first(r_drt_at, opts_.time_step) / sys_.total_time;

  double alpha1_dot = -t0.dot(rt).real();
  Vec n3 = kI * rk(3, cov_cov_t) +
           kI * rk(1, resolvent_derivative(s, 2, 1, cov_t)) +
           kI * rk(2, resolvent_derivative(s, 1, 1, mat_t)) +
           kI * rk(1, d_rdr_t) + alpha1_dot * rk(1, out[0].ket);
  double beta3 =
      -t0.dot(rk(3, cov_t)).imag() - t0.dot(rk(2, drt)).imag();
  push(3, std::move(n3), beta3);
  return out;
}

AptEngine::PhaseCoefficients AptEngine::phase_coefficients(double s) {
  auto orders = corrections(s, 3);
  PhaseCoefficients c;
  c.alpha1_dot = orders[0].alpha_dot;
  c.beta2 = orders[1].beta;
  c.alpha2_dot = orders[1].alpha_dot;
  c.beta2_dot = orders[1].beta_dot;
  c.beta3 = orders[2].beta;
  return c;
}

Vec AptEngine::order_ket(int k, double s, const EigenFrame& ref) {
  EigenFrame f = aligned_frame(s, ref);
  Vec t = tangent_ket(s, f);
  if (k == 1) return Vec(-kI * resolvent_unchecked(f, 1, t));

  KetField prev = [this, k](double s2, const EigenFrame& ref2) {
    return order_ket(k - 1, s2, ref2);
  };
  Vec cov_prev =
      time_derivative_impl(prev, s, f, opts_.time_step, sys_.total_time, true);
  Vec acc = -kI * resolvent_unchecked(f, 1, cov_prev);
  for (int j = 1; j <= k - 2; ++j) {
    cxd coeff = t.dot(order_ket(j, s, f));  // beta_dot_j + i alpha_dot_j
    acc += -kI * coeff * resolvent_unchecked(f, 1, order_ket(k - 1 - j, s, f));
  }
  return acc;
}

OrderData AptEngine::recurrence_order(double s, int p) {
  if (p < 1 || p > opts_.p_max)
    throw Error("recurrence_order: order outside [1, p_max]");
  EigenFrame center = frame(s);
  OrderData o;
  o.order = p;
  o.ket = order_ket(p, s, center);
  cxd tk = tangent_ket(s, center).dot(o.ket);
  o.beta_dot = tk.real();
  o.alpha_dot = tk.imag();
  // normalization: 2 beta_p + sum_{j=1}^{p-1} Re <n_j | n_{p-j}> = 0
  double overlap = 0.0;
  std::vector<Vec> lower(p);
  for (int j = 1; j < p; ++j) lower[j] = order_ket(j, s, center);
  for (int j = 1; j < p; ++j)
    overlap += lower[j].dot(lower[p - j]).real();
  o.beta = -0.5 * overlap;
  return o;
}

double AptEngine::cumulative_phase(int which, double s) {
  std::function<double(double)> integrand;
  if (which == 0) {
    integrand = [this](double s2) {
      EigenFrame f = geom::frame_at(sys_.family, sys_.path.pos(s2), sys_.level,
                                    opts_.geom);
      return -sys_.total_time * f.energy();
    };
  } else if (which == 1) {
    integrand = [this](double s2) {
      EigenFrame f = frame(s2);
      Vec t = tangent_ket(s2, f);
      return -sys_.total_time * t.dot(resolvent_unchecked(f, 1, t)).real();
    };
  } else if (which <= 3) {
    integrand = [this, which](double s2) {
      return sys_.total_time * corrections(s2, which).back().alpha_dot;
    };
  } else {
    integrand = [this, which](double s2) {
      return sys_.total_time * recurrence_order(s2, which).alpha_dot;
    };
  }
  auto& cache = phase_cache_[which];
  double base_s = 0.0, base_v = 0.0;
  auto it = cache.upper_bound(s);
  if (it != cache.begin()) {
    --it;
    base_s = it->first;
    base_v = it->second;
  }
  double value = base_v + quad::integrate(integrand, base_s, s, opts_.quad_tol);
  cache[s] = value;
  return value;
}

Vec AptEngine::assemble_state(double t, int p) {
  if (p < 0 || p > opts_.p_max)
    throw Error("assemble_state: order outside [0, p_max]");
  double s = t / sys_.total_time;
  EigenFrame center = frame(s);

  double phi = cumulative_phase(0, s);
  cxd prefactor = std::polar(1.0, phi / sys_.hbar);
  Vec state = center.state();

  std::vector<OrderData> closed;
  if (p >= 1 && p <= 3) closed = corrections(s, p);
  double hk = 1.0;
  for (int k = 1; k <= p; ++k) {
    hk *= sys_.hbar;
    OrderData ord = p <= 3 ? closed[k - 1] : recurrence_order(s, k);
    double alpha_k = cumulative_phase(k, s);
    prefactor *= std::exp(cxd(hk * ord.beta, hk * alpha_k));
    state += hk * ord.ket;
  }
  return prefactor * state;
}

ResponseTensors AptEngine::response(double s) {
  EigenFrame center = frame(s);
  const int n = sys_.family.params;
  Mat dkets = geom::dkets_for(sys_.family, center, opts_.geom);
  auto rk = [&](int k, const Vec& w) {
    return resolvent_unchecked(center, k, w);
  };

  ResponseTensors out;
  out.energy0 = center.energy();
  double h2 = sys_.hbar * sys_.hbar;
  out.mass2 = RMat(n, n);
  for (int mu = 0; mu < n; ++mu)
    for (int nu = 0; nu < n; ++nu)
      out.mass2(mu, nu) = -2.0 * h2 * dkets.col(mu).dot(rk(1, dkets.col(nu))).real();
  out.mass2 = 0.5 * (out.mass2 + out.mass2.transpose()).eval();

  Vec t0 = tangent_ket(s, center);
  KetField t_field = [this](double s2, const EigenFrame& ref) {
    return tangent_ket(s2, ref);
  };
  Vec cov_t = covariant_time_derivative(t_field, s);
  Vec drt = resolvent_derivative(s, 1, 1, t0);
  double h3 = h2 * sys_.hbar;
  out.en3_geometric = -2.0 * h3 * t0.dot(rk(2, cov_t)).imag();
  out.en3_coupling = -2.0 * h3 * t0.dot(rk(1, drt)).imag();

  RVec xdot = sys_.path.vel(s) / sys_.total_time;
  out.energy3 = out.energy0 + 0.5 * xdot.dot(out.mass2 * xdot) +
                out.en3_geometric + out.en3_coupling;
  return out;
}

}  // namespace qgeo::apt

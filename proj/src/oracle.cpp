#include "qgeo/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "qgeo/ode.hpp"

namespace qgeo::oracle {

PropagationResult propagate(const DrivenSystem& system, const Vec& psi0,
                            const std::vector<double>& sample_times,
                            const PropagateOptions& opts) {
  if (std::abs(psi0.norm() - 1.0) > 1e-10)
    throw Error("propagate: initial state is not normalized");
  ode::OdeOptions oopts;
  oopts.rel_tol = opts.rel_tol;
  oopts.abs_tol = opts.abs_tol;
  oopts.fixed_step = opts.fixed_step;

  // In scaled time s = t / T: i hbar / T d/ds psi = H psi.
  const double scale = system.total_time / system.hbar;
  ode::DormandPrince<Vec> solver(
      [&system, scale](double s, const Vec& psi) {
        return Vec(-kI * scale * (system.family.eval(system.path.pos(s)) * psi));
      },
      oopts);

  PropagationResult out;
  out.tol = opts.rel_tol;
  Vec psi = psi0;
  double s = 0.0;
  for (double t : sample_times) {
    double s_target = t / system.total_time;
    psi = solver.integrate(s, psi, s_target);
    s = s_target;
    out.times.push_back(t);
    out.states.push_back(psi);
    out.norm_drift = std::max(out.norm_drift, std::abs(psi.norm() - 1.0));
  }
  out.integrator_warning = out.norm_drift > 10.0 * opts.rel_tol;
  return out;
}

void loglog_fit(const std::vector<double>& x, const std::vector<double>& y,
                double& slope, double& r2) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  double vxy = n * sxy - sx * sy;
  double vxx = n * sxx - sx * sx;
  double vyy = n * syy - sy * sy;
  slope = vxy / vxx;
  r2 = vyy > 0.0 ? vxy * vxy / (vxx * vyy) : 1.0;
}

OrderFit order_check(const DrivenSystem& system, int p,
                     const std::vector<double>& T_list,
                     const OrderCheckOptions& opts) {
  if (T_list.size() < 4)
    throw Error("order_check: need at least 4 total times");
  {
    double lo = *std::min_element(T_list.begin(), T_list.end());
    double hi = *std::max_element(T_list.begin(), T_list.end());
    if (hi / lo < 8.0 - 1e-9)
      throw Error("order_check: T values must span at least a factor of 8");
  }

  OrderFit fit;
  fit.p = p;
  fit.T_values = T_list;
  for (double T : T_list) {
    DrivenSystem sys = system;
    sys.total_time = T;
    apt::AptEngine engine(sys, opts.apt);

    Vec psi0 = engine.frame(0.0).state();
    std::vector<double> times;
    for (double s : opts.sample_s) times.push_back(s * T);
    auto exact = propagate(sys, psi0, times, opts.propagate);

    double err = 0.0, err_free = 0.0;
    for (size_t i = 0; i < times.size(); ++i) {
      Vec approx = engine.assemble_state(times[i], p);
      err = std::max(err, (approx - exact.states[i]).norm());
      double overlap = std::abs(exact.states[i].dot(approx));
      double apn = approx.squaredNorm();
      err_free = std::max(
          err_free, std::sqrt(std::max(0.0, 1.0 + apn - 2.0 * overlap)));
    }
    fit.errors.push_back(err);
    fit.errors_phase_free.push_back(err_free);
  }

  if (*std::max_element(fit.errors.begin(), fit.errors.end()) <
      opts.noise_floor) {
    fit.skipped = true;
    return fit;
  }

  std::vector<double> eps;
  for (double T : T_list) {
    DrivenSystem sys = system;
    sys.total_time = T;
    eps.push_back(sys.epsilon());
  }
  loglog_fit(eps, fit.errors, fit.slope, fit.r2);
  double r2_free;
  loglog_fit(eps, fit.errors_phase_free, fit.slope_phase_free, r2_free);
  if (fit.r2 < opts.min_r2)
    throw FitRejected("order_check: r^2 = " + std::to_string(fit.r2) +
                      "; increase T to reach the asymptotic regime");
  return fit;
}

}  // namespace qgeo::oracle

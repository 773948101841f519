#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "qgeo/errors.hpp"
#include "qgeo/linalg.hpp"

namespace qgeo::ode {

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double fixed_step = 0.0;  // > 0 disables adaptivity (convergence studies)
  long max_steps = 4'000'000;
};

struct OdeStats {
  long steps = 0;
  long rejected = 0;
};

// Dormand-Prince 5(4) with an embedded fourth-order error estimate and FSAL.
// State is any Eigen dense type (complex vectors or matrices).
template <class State>
class DormandPrince {
 public:
  using Rhs = std::function<State(double, const State&)>;

  DormandPrince(Rhs rhs, OdeOptions opts = {})
      : rhs_(std::move(rhs)), opts_(opts) {}

  // Integrates from (s, y) to s_end. `watch`, when set, is called at every
  // accepted step with the new (s, y).
  State integrate(double s, State y, double s_end, OdeStats* stats = nullptr,
                  const std::function<void(double, const State&)>& watch = {}) {
    if (s_end == s) return y;
    const double dir = s_end > s ? 1.0 : -1.0;
    double h = opts_.fixed_step > 0.0 ? dir * opts_.fixed_step
                                      : dir * std::abs(s_end - s) * 1e-2;
    State k1 = rhs_(s, y);
    long steps = 0, rejected = 0;
    while (dir * (s_end - s) > 0.0) {
      if (++steps > opts_.max_steps)
        throw StepFailure("ode: step budget exhausted");
      if (dir * (s + h - s_end) > 0.0) h = s_end - s;

      State k2 = rhs_(s + h * (1. / 5), y + (h * (1. / 5)) * k1);
      State k3 = rhs_(s + h * (3. / 10),
                      y + (h * (3. / 40)) * k1 + (h * (9. / 40)) * k2);
      State k4 = rhs_(s + h * (4. / 5), y + (h * (44. / 45)) * k1 -
                                            (h * (56. / 15)) * k2 +
                                            (h * (32. / 9)) * k3);
      State k5 =
          rhs_(s + h * (8. / 9),
               y + (h * (19372. / 6561)) * k1 - (h * (25360. / 2187)) * k2 +
                   (h * (64448. / 6561)) * k3 - (h * (212. / 729)) * k4);
      State k6 = rhs_(s + h, y + (h * (9017. / 3168)) * k1 -
                                 (h * (355. / 33)) * k2 +
                                 (h * (46732. / 5247)) * k3 +
                                 (h * (49. / 176)) * k4 -
                                 (h * (5103. / 18656)) * k5);
      State ynew = y + (h * (35. / 384)) * k1 + (h * (500. / 1113)) * k3 +
                   (h * (125. / 192)) * k4 - (h * (2187. / 6784)) * k5 +
                   (h * (11. / 84)) * k6;
      State k7 = rhs_(s + h, ynew);

      if (opts_.fixed_step > 0.0) {
        s += h;
        y = std::move(ynew);
        k1 = std::move(k7);
        if (watch) watch(s, y);
        continue;
      }

      State err = (h * (71. / 57600)) * k1 - (h * (71. / 16695)) * k3 +
                  (h * (71. / 1920)) * k4 - (h * (17253. / 339200)) * k5 +
                  (h * (22. / 525)) * k6 - (h * (1. / 40)) * k7;
      double scale_err = error_norm(err, y, ynew);

      if (scale_err <= 1.0) {
        s += h;
        y = std::move(ynew);
        k1 = std::move(k7);
        if (watch) watch(s, y);
      } else {
        ++rejected;
      }
      double factor =
          scale_err > 0.0 ? 0.9 * std::pow(scale_err, -0.2) : 5.0;
      h *= std::clamp(factor, 0.2, 5.0);
      if (std::abs(h) < 1e-15 * std::abs(s_end))
        throw StepFailure("ode: step size underflow");
    }
    if (stats) {
      stats->steps = steps;
      stats->rejected = rejected;
    }
    return y;
  }

 private:
  double error_norm(const State& err, const State& y0, const State& y1) const {
    auto scale = opts_.abs_tol +
                 opts_.rel_tol * y0.array().abs().max(y1.array().abs());
    double sq = (err.array().abs() / scale).matrix().squaredNorm();
    return std::sqrt(sq / static_cast<double>(err.size()));
  }

  Rhs rhs_;
  OdeOptions opts_;
};

}  // namespace qgeo::ode

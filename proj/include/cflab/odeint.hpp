#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "cflab/types.hpp"

namespace cflab {

/// Error-controlled stepping parameters for the embedded 5(4) pair.
struct StepControl {
  double rtol = 1e-8;
  double atol = 1e-8;
  double max_step = 1.0;
  double init_step = 0.0;   // 0: choose automatically
  double safety = 0.9;
  double min_scale = 0.2;   // largest allowed shrink per step
  double max_scale = 6.0;   // largest allowed growth per step
};

namespace odeint {

// Dormand-Prince RK5(4) tableau.
inline constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double kA21 = 1.0 / 5;
inline constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
inline constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
inline constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                        kA54 = -212.0 / 729;
inline constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                        kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
inline constexpr double kA71 = 35.0 / 384, kA73 = 500.0 / 1113, kA74 = 125.0 / 192,
                        kA75 = -2187.0 / 6784, kA76 = 11.0 / 84;
// 5th-order minus embedded 4th-order weights.
inline constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                        kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

/// One trial step from (t, y) with signed step h. k1 must hold f(t, y) on
/// entry (FSAL); on exit k7 = f(t + h, y_new). Returns the scaled error norm.
template <class Rhs>
double try_step(const Rhs& f, double t, const Vec& y, double h, const StepControl& ctl, Vec& k1,
                Vec& k2, Vec& k3, Vec& k4, Vec& k5, Vec& k6, Vec& k7, Vec& ytmp, Vec& ynew) {
  ytmp = y + h * (kA21 * k1);
  f(t + kC[1] * h, ytmp, k2);
  ytmp = y + h * (kA31 * k1 + kA32 * k2);
  f(t + kC[2] * h, ytmp, k3);
  ytmp = y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3);
  f(t + kC[3] * h, ytmp, k4);
  ytmp = y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4);
  f(t + kC[4] * h, ytmp, k5);
  ytmp = y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5);
  f(t + kC[5] * h, ytmp, k6);
  ynew = y + h * (kA71 * k1 + kA73 * k3 + kA74 * k4 + kA75 * k5 + kA76 * k6);
  f(t + h, ynew, k7);

  double acc = 0.0;
  const auto n = y.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] + kE5 * k5[i] + kE6 * k6[i] +
                          kE7 * k7[i]);
    const double sc = ctl.atol + ctl.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
    const double q = e / sc;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

/// Hairer-style starting step heuristic.
template <class Rhs>
double initial_step(const Rhs& f, double t0, const Vec& y0, const Vec& f0, double dir,
                    const StepControl& ctl) {
  auto wnorm = [&](const Vec& v, const Vec& ref) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double sc = ctl.atol + ctl.rtol * std::abs(ref[i]);
      const double q = v[i] / sc;
      acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(v.size()));
  };
  const double d0 = wnorm(y0, y0);
  const double d1 = wnorm(f0, y0);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, ctl.max_step);
  Vec y1 = y0 + dir * h0 * f0;
  Vec f1(y0.size());
  f(t0 + dir * h0, y1, f1);
  const double d2 = wnorm(Vec(f1 - f0), y0) / h0;
  double h1;
  if (std::max(d1, d2) <= 1e-15)
    h1 = std::max(1e-6, h0 * 1e-3);
  else
    h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
  return std::min({100.0 * h0, h1, ctl.max_step});
}

}  // namespace odeint

/// Integrates dy/dt = f(t, y) from t0 to t1 (either direction) with the
/// Dormand-Prince 5(4) pair and a PI step controller.
///
/// `on_step(t, y)` runs after every accepted step and may return false to
/// stop early (events are detected by the caller between accepted steps).
/// `next_stop(t)` may return the next time the integrator must land on
/// exactly (sampling grids); return t1 when unconstrained.
template <class Rhs, class OnStep, class NextStop>
void dopri5(const Rhs& f, double t0, Vec y, double t1, const StepControl& ctl, OnStep&& on_step,
            NextStop&& next_stop) {
  if (t1 == t0) {
    on_step(t0, y);
    return;
  }
  const double dir = (t1 > t0) ? 1.0 : -1.0;
  const auto n = y.size();
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);

  f(t0, y, k1);
  double t = t0;
  double h = (ctl.init_step > 0) ? std::min(ctl.init_step, ctl.max_step)
                                 : odeint::initial_step(f, t0, y, k1, dir, ctl);
  double err_old = 1e-4;
  const double expo1 = 0.17, expo_beta = 0.04;

  const double span = std::abs(t1 - t0);
  while (dir * (t1 - t) > 0) {
    const double stop = std::clamp(next_stop(t), std::min(t0, t1), std::max(t0, t1));
    const double limit = dir * (stop - t) > 0 ? stop : t1;
    const double proposal = h;
    bool hit_limit = false;
    if (h >= dir * (limit - t)) {
      h = dir * (limit - t);
      hit_limit = true;
    }
    if (h <= (std::abs(t) + span) * 1e-15 + 1e-300)
      throw StiffnessError("integration step size underflow", t, y);

    const double err =
        odeint::try_step(f, t, y, dir * h, ctl, k1, k2, k3, k4, k5, k6, k7, ytmp, ynew);

    if (err <= 1.0) {
      t = hit_limit ? limit : t + dir * h;
      y.swap(ynew);
      k1.swap(k7);  // FSAL; k1 stays valid on rejected steps since try_step only reads it
      const bool keep_going = on_step(t, y);
      double fac = std::pow(std::max(err, 1e-16), expo1) / std::pow(err_old, expo_beta);
      fac = std::clamp(fac / ctl.safety, 1.0 / ctl.max_scale, 1.0 / ctl.min_scale);
      const double h_new = std::min(h / fac, ctl.max_step);
      // a step shortened only to land on a stop must not shrink the proposal
      h = hit_limit ? std::min(std::max(proposal, h_new), ctl.max_step) : h_new;
      err_old = std::max(err, 1e-4);
      if (!keep_going) return;
    } else {
      const double fac = std::clamp(std::pow(err, 0.2) / ctl.safety, 1.0 / ctl.max_scale,
                                    1.0 / ctl.min_scale);
      h = h / fac;
    }
  }
}

}  // namespace cflab

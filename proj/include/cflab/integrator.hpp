#pragma once

#include <optional>

#include "cflab/hamiltonian.hpp"
#include "cflab/odeint.hpp"

namespace cflab {

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-8;
  double max_step = 1.0;
  double init_step = 0.0;
  bool tangent = false;
  enum class JacobianMode { CentralFd, Analytic } jacobian_mode = JacobianMode::CentralFd;
  double fd_step = 1e-5;
  /// When positive, the integrator lands exactly on this output grid and
  /// records samples there; otherwise every accepted step is recorded.
  double sample_dt = 0.0;

  void validate() const {
    if (!(rtol > 0) || !(atol > 0)) throw ConfigError("IntegratorOptions: rtol, atol must be > 0");
    if (!(max_step > 0)) throw ConfigError("IntegratorOptions: max_step must be > 0");
  }
  StepControl control() const {
    StepControl c;
    c.rtol = rtol;
    c.atol = atol;
    c.max_step = max_step;
    c.init_step = init_step;
    return c;
  }
};

struct TrajectorySample {
  double t = 0.0;
  Vec x;       // unwrapped chart coordinates
  double r = 0.0;
  Mat V;       // tangent matrix when enabled, else empty

  bool has_tangent() const { return V.size() > 0; }
};

/// Time-stamped samples of (x(t), r(t)) and optionally the tangent map V(t).
/// Angular coordinates are kept lifted; reduction happens at serialization.
struct Trajectory {
  std::string system_name;
  AngularMask angular;
  std::vector<TrajectorySample> samples;
  double t_requested = 0.0;
  bool domain_exited = false;

  const TrajectorySample& front() const { return samples.front(); }
  const TrajectorySample& back() const { return samples.back(); }
  /// Signed achieved horizon.
  double duration() const { return samples.back().t - samples.front().t; }
  Vec wrapped_x(size_t i) const { return wrap_angles(samples[i].x, angular); }
};

namespace detail {

struct AugmentedRhs {
  const HamiltonianSystem* sys;
  bool tangent;
  bool analytic_jac;
  double fd_h;
  int d;

  void operator()(double, const Vec& y, Vec& dy) const {
    const Vec x = y.head(d);
    const Vec X = hamiltonian_vector_field(*sys, x);
    dy.head(d) = X;
    dy[d] = sys->model.eta(x).dot(X);
    if (tangent) {
      const Mat J = analytic_jac ? sys->field_jacobian(x) : fd_field_jacobian(*sys, x, fd_h);
      Eigen::Map<const Mat> V(y.data() + d + 1, d, d);
      Eigen::Map<Mat> dV(dy.data() + d + 1, d, d);
      dV.noalias() = J * V;
    }
  }
};

inline Vec pack_state(const Vec& x, double r, const Mat* V) {
  const int d = static_cast<int>(x.size());
  const int n = d + 1 + (V ? d * d : 0);
  Vec y(n);
  y.head(d) = x;
  y[d] = r;
  if (V) Eigen::Map<Mat>(y.data() + d + 1, d, d) = *V;
  return y;
}

/// Integrates the augmented state from (t_a, y_a) to t_b with no recording.
template <class Rhs>
Vec advance(const Rhs& rhs, double t_a, const Vec& y_a, double t_b, StepControl ctl) {
  Vec out = y_a;
  if (t_b == t_a) return out;
  ctl.init_step = 0.0;
  dopri5(
      rhs, t_a, y_a, t_b, ctl, [&](double, const Vec& y) { out = y; return true; },
      [&](double) { return t_b; });
  return out;
}

}  // namespace detail

/// Solves x' = X(x), r' = eta(X)(x) and optionally V' = DX(x) V. Leaving a
/// bounded chart is reported on the trajectory, not thrown. The observer
/// (t, x, r, V*) fires at every recorded sample.
template <class Observer>
Trajectory integrate(const HamiltonianSystem& sys, const Vec& x0, double t_final,
                     const IntegratorOptions& opts, Observer&& observe, bool store = true) {
  opts.validate();
  const int d = sys.dim();
  if (x0.size() != d) throw ConfigError("integrate: initial point has wrong dimension");
  if (!sys.model.in_domain(x0)) throw DomainError("integrate: initial point outside the chart");

  const bool analytic = opts.jacobian_mode == IntegratorOptions::JacobianMode::Analytic;
  if (analytic && opts.tangent && !sys.field_jacobian)
    throw ConfigError("integrate: analytic Jacobian requested but none installed");
  detail::AugmentedRhs rhs{&sys, opts.tangent, analytic && opts.tangent, opts.fd_step, d};

  Trajectory traj;
  traj.system_name = sys.name;
  traj.angular = sys.model.angular;
  traj.t_requested = t_final;

  Mat V0;
  if (opts.tangent) V0 = Mat::Identity(d, d);
  Vec y0 = detail::pack_state(x0, 0.0, opts.tangent ? &V0 : nullptr);

  auto record = [&](double t, const Vec& y) {
    TrajectorySample s;
    s.t = t;
    s.x = y.head(d);
    s.r = y[d];
    if (opts.tangent) s.V = Eigen::Map<const Mat>(y.data() + d + 1, d, d);
    observe(s.t, s.x, s.r, opts.tangent ? &s.V : nullptr);
    if (store) traj.samples.push_back(std::move(s));
  };

  record(0.0, y0);
  if (t_final == 0.0) return traj;

  const double dir = t_final > 0 ? 1.0 : -1.0;
  const bool bounded = sys.model.bounded();
  const StepControl ctl = opts.control();

  long sample_index = 1;
  double next_sample = opts.sample_dt > 0 ? dir * opts.sample_dt : t_final;
  double t_prev = 0.0;
  Vec y_prev = y0;

  auto next_stop = [&](double) { return opts.sample_dt > 0 ? next_sample : t_final; };

  auto on_step = [&](double t, const Vec& y) {
    if (bounded && !sys.model.in_domain(y.head(d))) {
      // bisect the exit time; keep the last in-domain state
      double ta = t_prev, tb = t;
      Vec ya = y_prev;
      for (int it = 0; it < 80 && std::abs(tb - ta) > 1e-12 * (1.0 + std::abs(tb)); ++it) {
        const double tm = 0.5 * (ta + tb);
        Vec ym = detail::advance(rhs, ta, ya, tm, ctl);
        if (sys.model.in_domain(ym.head(d))) {
          ta = tm;
          ya = std::move(ym);
        } else {
          tb = tm;
        }
      }
      record(ta, ya);
      traj.domain_exited = true;
      return false;
    }
    bool is_sample = true;
    if (opts.sample_dt > 0) {
      is_sample = std::abs(t - next_sample) <= 1e-9 * (1.0 + std::abs(t));
      if (is_sample)
        next_sample = dir * opts.sample_dt * static_cast<double>(++sample_index);
      else
        is_sample = (t == t_final);
    }
    if (is_sample || t == t_final) record(t, y);
    t_prev = t;
    y_prev = y;
    return true;
  };

  dopri5(rhs, 0.0, y0, t_final, ctl, on_step, next_stop);
  return traj;
}

inline Trajectory integrate(const HamiltonianSystem& sys, const Vec& x0, double t_final,
                            const IntegratorOptions& opts) {
  return integrate(sys, x0, t_final, opts, [](double, const Vec&, double, const Mat*) {});
}

/// Uniformly sampled trajectory of a closed-form model (exact up to the
/// family's arithmetic; no integration error).
inline Trajectory sample_flow(const AnalyticFlowModel& m, const Vec& x0, double t_final,
                              double dt) {
  if (!(dt > 0)) throw ConfigError("sample_flow: dt must be positive");
  Vec z0 = x0;
  if (m.sanitize) m.sanitize(z0);
  Trajectory traj;
  traj.system_name = m.name;
  traj.angular = m.angular;
  traj.t_requested = t_final;
  const double dir = t_final >= 0 ? 1.0 : -1.0;
  const int nsteps = static_cast<int>(std::floor(std::abs(t_final) / dt));
  traj.samples.reserve(static_cast<size_t>(nsteps) + 2);
  for (int k = 0; k <= nsteps; ++k) {
    const double t = dir * dt * k;
    traj.samples.push_back({t, m.flow(z0, t), m.winding(z0, t), Mat()});
  }
  if (std::abs(traj.samples.back().t) < std::abs(t_final))
    traj.samples.push_back({t_final, m.flow(z0, t_final), m.winding(z0, t_final), Mat()});
  return traj;
}

// ---------------------------------------------------------------------------
// Poincare sections and monodromy.
// ---------------------------------------------------------------------------

struct SectionSpec {
  Vec normal;          // covector c
  double offset = 0.0; // d
  int direction = 1;   // +1 / -1 crossing orientation, 0 = either
};

struct PoincareResult {
  ChartPoint point;
  double return_time = 0.0;
  double r_at_return = 0.0;
  Mat V;  // tangent at the crossing when requested
};

/// First crossing of {c . x = d} after leaving the start, refined to
/// |c . x - d| <= 1e-10. On charts where c touches angular coordinates the
/// section is understood modulo 1 (the lifted function crosses integers).
inline PoincareResult poincare_return(const HamiltonianSystem& sys, const Vec& x0,
                                      const SectionSpec& section, const IntegratorOptions& opts,
                                      double t_max = 100.0) {
  opts.validate();
  const int d = sys.dim();
  if (section.normal.size() != d) throw ConfigError("poincare_return: section dimension mismatch");
  const bool analytic = opts.jacobian_mode == IntegratorOptions::JacobianMode::Analytic;
  if (analytic && opts.tangent && !sys.field_jacobian)
    throw ConfigError("poincare_return: analytic Jacobian requested but none installed");
  detail::AugmentedRhs rhs{&sys, opts.tangent, analytic && opts.tangent, opts.fd_step, d};

  bool wraps = false;
  for (int i = 0; i < d; ++i)
    if (section.normal[i] != 0.0 && sys.model.angular[static_cast<size_t>(i)]) wraps = true;

  auto u_of = [&](const Vec& y) { return section.normal.dot(y.head(d)) - section.offset; };

  Mat V0 = Mat::Identity(d, d);
  Vec y0 = detail::pack_state(x0, 0.0, opts.tangent ? &V0 : nullptr);
  const StepControl ctl = opts.control();

  double t_prev = 0.0;
  Vec y_prev = y0;
  double u_prev = u_of(y0);
  std::optional<PoincareResult> hit;
  const double t_eps = 1e-8;

  auto try_bracket = [&](double ta, const Vec& ya, double ua, double tb, double ub) {
    // candidate levels crossed inside (ua, ub]
    std::vector<double> levels;
    if (wraps) {
      const double lo = std::min(ua, ub), hi = std::max(ua, ub);
      for (double k = std::ceil(lo - 1e-14); k <= std::floor(hi + 1e-14); k += 1.0) {
        if (k > lo + 1e-14 && k <= hi + 1e-14) levels.push_back(k);
      }
    } else if ((ua < 0.0 && ub >= 0.0) || (ua > 0.0 && ub <= 0.0)) {
      levels.push_back(0.0);
    }
    if (levels.empty()) return false;
    const double orient = ub > ua ? 1.0 : -1.0;
    if (section.direction != 0 && orient * section.direction < 0) return false;
    // first level in travel order
    const double L = orient > 0 ? *std::min_element(levels.begin(), levels.end())
                                : *std::max_element(levels.begin(), levels.end());
    // bisection on u(t) - L
    double lo_t = ta, hi_t = tb;
    Vec ylo = ya;
    double ulo = ua;
    for (int it = 0; it < 200; ++it) {
      const double tm = 0.5 * (lo_t + hi_t);
      Vec ym = detail::advance(rhs, lo_t, ylo, tm, ctl);
      const double um = u_of(ym);
      if (std::abs(um - L) <= 1e-12) {
        if (tm <= t_eps) return false;
        PoincareResult res;
        res.point = sys.model.point(ym.head(d));
        res.point.normalize();
        res.return_time = tm;
        res.r_at_return = ym[d];
        if (opts.tangent) res.V = Eigen::Map<const Mat>(ym.data() + d + 1, d, d);
        hit = std::move(res);
        return true;
      }
      if ((um - L) * (ulo - L) > 0.0) {
        lo_t = tm;
        ylo = std::move(ym);
        ulo = um;
      } else {
        hi_t = tm;
      }
    }
    throw TimeoutError("poincare_return: bisection failed to converge");
  };

  auto on_step = [&](double t, const Vec& y) {
    const double u = u_of(y);
    if (t > t_eps || !wraps) {
      if (try_bracket(t_prev, y_prev, u_prev, t, u)) return false;
    }
    t_prev = t;
    y_prev = y;
    u_prev = u;
    return true;
  };

  dopri5(rhs, 0.0, y0, t_max, ctl, on_step, [&](double) { return t_max; });
  if (!hit)
    throw TimeoutError("poincare_return: no transverse section crossing before t_max");
  return *hit;
}

/// Tangent map over one period of an (approximately) periodic point.
inline Mat monodromy(const HamiltonianSystem& sys, const Vec& periodic_point, double period,
                     IntegratorOptions opts, double residual_tol = 1e-6) {
  opts.tangent = true;
  opts.sample_dt = 0.0;
  Trajectory traj = integrate(sys, periodic_point, period, opts);
  const Vec xe = traj.back().x;
  const double residual = chart_distance(wrap_angles(xe, sys.model.angular),
                                         wrap_angles(periodic_point, sys.model.angular),
                                         sys.model.angular);
  if (residual > residual_tol)
    throw NotPeriodicError("monodromy: point is not periodic with the given period (residual " +
                           std::to_string(residual) + ")");
  return traj.back().V;
}

}  // namespace cflab

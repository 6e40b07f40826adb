#pragma once

#include <algorithm>
#include <map>
#include <numeric>

#include "cflab/integrator.hpp"
#include "cflab/parallel.hpp"

namespace cflab {

// ---------------------------------------------------------------------------
// Flow adapters. Orbit statistics below are templates over anything providing
//   run(x0, T_signed, dt)   -> Trajectory
//   probe(x0, T_signed, dt, fn(t, x_unwrapped, r))   (streaming, no storage)
//   dim(), angular(), char_time(), H(x) (H may be absent: has_H() = false).
// ---------------------------------------------------------------------------

struct ChartFlow {
  const HamiltonianSystem* sys = nullptr;
  IntegratorOptions opts;

  int dim() const { return sys->dim(); }
  const AngularMask& angular() const { return sys->model.angular; }
  double char_time() const { return sys->char_time; }
  bool has_H() const { return true; }
  double H(const Vec& x) const { return sys->H(x); }

  Trajectory run(const Vec& x0, double T, double dt) const {
    IntegratorOptions o = opts;
    o.tangent = false;
    o.sample_dt = dt;
    return integrate(*sys, x0, T, o);
  }
  template <class Fn>
  Trajectory probe(const Vec& x0, double T, double dt, Fn&& fn) const {
    IntegratorOptions o = opts;
    o.tangent = false;
    o.sample_dt = dt;
    return integrate(
        *sys, x0, T, o, [&](double t, const Vec& x, double r, const Mat*) { fn(t, x, r); },
        /*store=*/false);
  }
};

struct AnalyticFlow {
  const AnalyticFlowModel* model = nullptr;
  double characteristic_time = 1.0;

  int dim() const { return model->dim; }
  const AngularMask& angular() const { return model->angular; }
  double char_time() const { return characteristic_time; }
  bool has_H() const { return bool(model->H); }
  double H(const Vec& x) const { return model->H(x); }

  Trajectory run(const Vec& x0, double T, double dt) const { return sample_flow(*model, x0, T, dt); }
  template <class Fn>
  Trajectory probe(const Vec& x0, double T, double dt, Fn&& fn) const {
    Vec z0 = x0;
    if (model->sanitize) model->sanitize(z0);
    const double dir = T >= 0 ? 1.0 : -1.0;
    const long n = static_cast<long>(std::floor(std::abs(T) / dt));
    for (long k = 0; k <= n; ++k) {
      const double t = dir * dt * static_cast<double>(k);
      fn(t, model->flow(z0, t), model->winding(z0, t));
    }
    if (dir * dt * static_cast<double>(n) != T) fn(T, model->flow(z0, T), model->winding(z0, T));
    Trajectory empty;
    empty.system_name = model->name;
    empty.angular = model->angular;
    return empty;
  }
};

// ---------------------------------------------------------------------------
// Conservative / dissipative classification from the finite-horizon winding.
// ---------------------------------------------------------------------------

enum class WindingLabel { ConservativePlus, DissipativePlus, Undetermined };

inline const char* to_string(WindingLabel l) {
  switch (l) {
    case WindingLabel::ConservativePlus: return "ConservativePlus";
    case WindingLabel::DissipativePlus: return "DissipativePlus";
    case WindingLabel::Undetermined: return "Undetermined";
  }
  return "?";
}

struct WindingThresholds {
  double R_big = 20.0;
  double flat_tol = 0.5;
  /// Mean |r|-rate above which a domain-exiting orbit counts as dissipative.
  double exit_rate_tol = 0.1;
  double char_time = 1.0;
};

struct WindingClass {
  WindingLabel label = WindingLabel::Undetermined;
  double r_final = 0.0;
  double sup_r = 0.0;
  double inf_r = 0.0;
  double horizon = 0.0;           // achieved, unsigned
  bool short_horizon_warning = false;
  bool domain_exited = false;
};

namespace detail {

inline bool abs_r_nondecreasing(const std::vector<std::pair<double, double>>& tr, double from,
                                double to) {
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& [tau, r] : tr) {
    if (tau < from || tau > to) continue;
    const double a = std::abs(r);
    if (a < prev - 1e-9 * (1.0 + prev)) return false;
    prev = std::max(prev, a);
  }
  return true;
}

inline std::pair<double, double> abs_r_range(const std::vector<std::pair<double, double>>& tr,
                                             double from, double to) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& [tau, r] : tr) {
    if (tau < from || tau > to) continue;
    lo = std::min(lo, std::abs(r));
    hi = std::max(hi, std::abs(r));
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  return {lo, hi};
}

}  // namespace detail

/// Classifies a (possibly backward) trajectory by the fixed finite-horizon
/// surrogate rules. On trajectories truncated by a chart exit, a nonzero mean
/// winding rate with monotone |r| counts as dissipative; see the thresholds.
inline WindingClass classify_winding(const Trajectory& traj, const WindingThresholds& th = {}) {
  if (traj.samples.empty()) throw ConfigError("classify_winding: empty trajectory");
  std::vector<std::pair<double, double>> tr;  // (|t|, r)
  tr.reserve(traj.samples.size());
  for (const auto& s : traj.samples) tr.emplace_back(std::abs(s.t), s.r);

  WindingClass out;
  out.domain_exited = traj.domain_exited;
  out.horizon = tr.back().first;
  out.r_final = tr.back().second;
  double max_abs = 0.0;
  out.sup_r = -std::numeric_limits<double>::infinity();
  out.inf_r = std::numeric_limits<double>::infinity();
  for (const auto& [tau, r] : tr) {
    out.sup_r = std::max(out.sup_r, r);
    out.inf_r = std::min(out.inf_r, r);
    max_abs = std::max(max_abs, std::abs(r));
  }

  const double T = out.horizon;
  if (!traj.domain_exited && T < 10.0 * th.char_time) {
    out.short_horizon_warning = true;
    out.label = WindingLabel::Undetermined;
    return out;
  }

  if (traj.domain_exited) {
    const double rate = std::abs(out.r_final) / std::max(T, 1e-12);
    if (rate > th.exit_rate_tol && detail::abs_r_nondecreasing(tr, 0.75 * T, T)) {
      out.label = WindingLabel::DissipativePlus;
      return out;
    }
  } else if (max_abs > th.R_big && detail::abs_r_nondecreasing(tr, 0.75 * T, T)) {
    out.label = WindingLabel::DissipativePlus;
    return out;
  }

  const auto [lo, hi] = detail::abs_r_range(tr, 0.5 * T, T);
  if (hi - lo <= th.flat_tol && std::abs(out.r_final) <= 0.5 * th.R_big)
    out.label = WindingLabel::ConservativePlus;
  else
    out.label = WindingLabel::Undetermined;
  return out;
}

/// Fraction of samples whose forward and backward classifications agree in
/// kind (conservative with conservative, dissipative with dissipative).
template <class Flow>
double forward_backward_agreement(const Flow& flow, const std::vector<Vec>& samples, double T,
                                  const WindingThresholds& th = {}, int threads = 1,
                                  double sample_dt = 0.0) {
  const double dt = sample_dt > 0 ? sample_dt : T / 400.0;
  std::vector<char> agree(samples.size(), 0);
  parallel_for(samples.size(), threads, [&](size_t i) {
    WindingThresholds local = th;
    local.char_time = flow.char_time();
    const WindingClass fwd = classify_winding(flow.run(samples[i], T, dt), local);
    const WindingClass bwd = classify_winding(flow.run(samples[i], -T, dt), local);
    agree[i] = (fwd.label == bwd.label) ? 1 : 0;
  });
  double acc = 0.0;
  for (char a : agree) acc += a;
  return samples.empty() ? 1.0 : acc / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Omega-limit tail estimate.
// ---------------------------------------------------------------------------

struct OmegaLimitEstimate {
  std::vector<Vec> points;   // wrapped tail samples
  double max_abs_H = 0.0;
};

template <class HFn>
OmegaLimitEstimate omega_limit_estimate(const Trajectory& traj, double tail_fraction, HFn&& H) {
  if (!(tail_fraction > 0.0) || !(tail_fraction < 1.0))
    throw ConfigError("omega_limit_estimate: tail_fraction must be in (0,1)");
  OmegaLimitEstimate out;
  const double t0 = traj.front().t, t1 = traj.back().t;
  const double cut = t1 - (t1 - t0) * tail_fraction;
  for (size_t i = 0; i < traj.samples.size(); ++i) {
    const auto& s = traj.samples[i];
    const bool in_tail = (t1 >= t0) ? (s.t >= cut) : (s.t <= cut);
    if (!in_tail) continue;
    out.points.push_back(wrap_angles(s.x, traj.angular));
    out.max_abs_H = std::max(out.max_abs_H, std::abs(H(out.points.back())));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Basin maps over 2-D coordinate grids.
// ---------------------------------------------------------------------------

struct AttractorDescriptor {
  std::string id;
  std::function<double(const Vec&)> distance;  // to wrapped chart points
  double capture_radius = 1e-3;
};

struct BasinGridSpec {
  int ni = 64, nj = 64;
  int axis_i = 0, axis_j = 1;
  double lo_i = 0.0, hi_i = 1.0, lo_j = 0.0, hi_j = 1.0;
  Vec base_point;  // remaining coordinates
  bool cell_centers = false;  // sample at (k+1/2)/n instead of k/n
};

struct BasinCell {
  int i = 0, j = 0;
  Vec x0;
  int label = -1;  // index into the attractor list, -1 = undetermined
  double r_final = 0.0;
  double dist_to_attractor = std::numeric_limits<double>::infinity();
};

template <class Flow>
std::vector<BasinCell> basin_map(const Flow& flow, const BasinGridSpec& grid,
                                 const std::vector<AttractorDescriptor>& attractors, double T,
                                 int threads = 1) {
  const size_t total = static_cast<size_t>(grid.ni) * static_cast<size_t>(grid.nj);
  std::vector<BasinCell> cells(total);
  parallel_for(total, threads, [&](size_t idx) {
    const int i = static_cast<int>(idx) % grid.ni;
    const int j = static_cast<int>(idx) / grid.ni;
    const double off = grid.cell_centers ? 0.5 : 0.0;
    Vec x0 = grid.base_point;
    x0[grid.axis_i] = grid.lo_i + (grid.hi_i - grid.lo_i) * (i + off) / grid.ni;
    x0[grid.axis_j] = grid.lo_j + (grid.hi_j - grid.lo_j) * (j + off) / grid.nj;

    BasinCell cell;
    cell.i = i;
    cell.j = j;
    cell.x0 = x0;
    const Trajectory traj = flow.run(x0, T, T / 256.0);
    cell.r_final = traj.back().r;
    const Vec xf = wrap_angles(traj.back().x, flow.angular());
    for (size_t a = 0; a < attractors.size(); ++a) {
      const double dist = attractors[a].distance(xf);
      if (dist <= attractors[a].capture_radius && dist < cell.dist_to_attractor) {
        cell.label = static_cast<int>(a);
        cell.dist_to_attractor = dist;
      }
    }
    cells[idx] = std::move(cell);
  });
  return cells;
}

// ---------------------------------------------------------------------------
// Recurrence statistics.
// ---------------------------------------------------------------------------

/// Fraction of samples x with min_{t in [T/4, T]} dist(phi_t x, x) <= eps,
/// the distance taking the min image over angular coordinates.
template <class Flow>
double recurrence_stats(const Flow& flow, const std::vector<Vec>& samples, double T, double eps,
                        int threads = 1, double sample_dt = 0.0) {
  if (!(eps > 0)) throw ConfigError("recurrence_stats: eps must be positive");
  // resolve close passes: sampling finer than eps at unit speed
  const double dt = sample_dt > 0 ? sample_dt : std::min(T / 512.0, 0.4 * eps);
  const AngularMask& ang = flow.angular();
  std::vector<char> recurrent(samples.size(), 0);
  parallel_for(samples.size(), threads, [&](size_t i) {
    const Vec& x0 = samples[i];
    double best = std::numeric_limits<double>::infinity();
    flow.probe(x0, T, dt, [&](double t, const Vec& x, double) {
      if (t < 0.25 * T) return;
      best = std::min(best, chart_distance(x, x0, ang));
    });
    recurrent[i] = best <= eps ? 1 : 0;
  });
  double acc = 0.0;
  for (char c : recurrent) acc += c;
  return samples.empty() ? 0.0 : acc / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Leaves of the invariant distribution ker(dH - H eta) on 2-D charts.
// ---------------------------------------------------------------------------

struct LeafTrace {
  std::vector<Vec> points;        // wrapped curve samples
  std::vector<double> eta_integral;
  double residual = 0.0;          // max |H(gamma_s) - e^{I_s} H(gamma_0)|
};

/// Traces the kernel curve of d_eta H through x0 by arclength (Heun steps,
/// trapezoid quadrature for the eta line integral; both second order).
inline LeafTrace leaf_trace(const HamiltonianSystem& sys, const Vec& x0, double arclen,
                            double step = 1e-5) {
  if (sys.dim() != 2) throw ConfigError("leaf_trace: only 2-D charts are supported");
  if (!(step > 0) || !(arclen > 0)) throw ConfigError("leaf_trace: step and arclen must be > 0");

  auto kernel_dir = [&](const Vec& x) {
    const Vec a = d_eta_H(sys, x);
    const double n = a.norm();
    if (n < 1e-12)
      throw SingularPointError("leaf_trace: d_eta H vanishes along the requested leaf");
    Vec u(2);
    u << -a[1] / n, a[0] / n;
    return u;
  };

  LeafTrace out;
  const long nsteps = static_cast<long>(std::ceil(arclen / step));
  const double h = arclen / static_cast<double>(nsteps);
  const long record_every = std::max<long>(1, nsteps / 512);

  Vec x = x0;
  double I = 0.0;
  const double H0 = sys.H(x0);
  out.points.push_back(wrap_angles(x, sys.model.angular));
  out.eta_integral.push_back(0.0);
  out.residual = 0.0;

  for (long k = 0; k < nsteps; ++k) {
    const Vec u0 = kernel_dir(x);
    const Vec xp = x + h * u0;
    const Vec u1 = kernel_dir(xp);
    const Vec x1 = x + 0.5 * h * (u0 + u1);
    I += 0.5 * h * (sys.model.eta(x).dot(u0) + sys.model.eta(xp).dot(u1));
    x = x1;
    const double dev = std::abs(sys.H(x) - std::exp(I) * H0);
    out.residual = std::max(out.residual, dev);
    if ((k + 1) % record_every == 0 || k + 1 == nsteps) {
      out.points.push_back(wrap_angles(x, sys.model.angular));
      out.eta_integral.push_back(I);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Periodic orbits of twisted Lee flows (rational direction search).
// ---------------------------------------------------------------------------

struct LeePeriodicOrbit {
  Eigen::VectorXi m;  // integer vector tau * v
  Vec v;              // unit direction
  double tau = 0.0;
};

/// Enumerates directions v = w/|w| (integer w, entries up to denom_max) and
/// periods tau <= tau_max with tau v integral and sum_i a_i tau v_i integral
/// within tol. Empty when (1, a_1, ..., a_n) has no small rational relation
/// inside the search box.
inline std::vector<LeePeriodicOrbit> lee_periodic_orbit_search(int n, const Vec& a, double tau_max,
                                                               int denom_max, double tol = 1e-9) {
  if (n < 1 || a.size() != n) throw ConfigError("lee_periodic_orbit_search: bad direction data");
  if (tau_max < 1 || denom_max < 1)
    throw ConfigError("lee_periodic_orbit_search: bounds must be >= 1");

  std::vector<LeePeriodicOrbit> found;
  Eigen::VectorXi w(n);
  std::function<void(int)> rec = [&](int pos) {
    if (pos == n) {
      if (w.isZero()) return;
      // canonical sign and primitivity
      int first = 0;
      while (w[first] == 0) ++first;
      if (w[first] < 0) return;
      int g = 0;
      for (int i = 0; i < n; ++i) g = std::gcd(g, std::abs(w[i]));
      if (g != 1) return;
      const double wn = std::sqrt(static_cast<double>(w.squaredNorm()));
      double aw = 0.0;
      for (int i = 0; i < n; ++i) aw += a[i] * w[i];
      for (int k = 1; k * wn <= tau_max + 1e-12; ++k) {
        const double s = k * aw;
        if (std::abs(s - std::round(s)) <= tol) {
          LeePeriodicOrbit orbit;
          orbit.m = k * w;
          orbit.v = w.cast<double>() / wn;
          orbit.tau = k * wn;
          found.push_back(std::move(orbit));
        }
      }
      return;
    }
    for (int c = -denom_max; c <= denom_max; ++c) {
      w[pos] = c;
      rec(pos + 1);
    }
  };
  rec(0);
  std::sort(found.begin(), found.end(), [](const LeePeriodicOrbit& lhs, const LeePeriodicOrbit& rhs) {
    if (lhs.tau != rhs.tau) return lhs.tau < rhs.tau;
    return std::lexicographical_compare(lhs.m.data(), lhs.m.data() + lhs.m.size(), rhs.m.data(),
                                        rhs.m.data() + rhs.m.size());
  });
  return found;
}

// ---------------------------------------------------------------------------
// Asymptotic cycles (Birkhoff averages of closed forms along an orbit).
// ---------------------------------------------------------------------------

/// Midpoint line integral of each closed form over the unwrapped trajectory,
/// divided by the horizon. Exact for constant forms regardless of sampling.
inline Vec asymptotic_cycle(const Trajectory& traj,
                            const std::vector<std::function<Vec(const Vec&)>>& forms) {
  if (traj.samples.size() < 2) throw ConfigError("asymptotic_cycle: need at least two samples");
  Vec acc = Vec::Zero(static_cast<Eigen::Index>(forms.size()));
  for (size_t k = 0; k + 1 < traj.samples.size(); ++k) {
    const Vec& x0 = traj.samples[k].x;
    const Vec& x1 = traj.samples[k + 1].x;
    const Vec mid = 0.5 * (x0 + x1);
    const Vec dx = x1 - x0;
    for (size_t f = 0; f < forms.size(); ++f)
      acc[static_cast<Eigen::Index>(f)] += forms[f](mid).dot(dx);
  }
  return acc / traj.duration();
}

}  // namespace cflab

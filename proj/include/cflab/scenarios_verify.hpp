#pragma once

// Implementation of verify(): the per-scenario expected-diagnostics tables.
// Included at the end of scenarios.hpp.

namespace cflab {
namespace checks {

inline std::uint64_t subseed(std::uint64_t seed, const char* tag) {
  return seed ^ fnv1a64(tag);
}

inline Vec sorted_copy(Vec v) {
  std::sort(v.data(), v.data() + v.size());
  return v;
}

/// Max absolute difference between two equally sized sorted vectors.
inline double sorted_abs_diff(const Vec& a, const Vec& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

/// Eigenvalue moduli with the one nearest 1 removed (the flow direction of a
/// return map), sorted ascending.
inline Vec return_map_multipliers(const Mat& monodromy_matrix) {
  Eigen::EigenSolver<Mat> es(monodromy_matrix);
  Vec mods = es.eigenvalues().cwiseAbs();
  Eigen::Index drop = 0;
  (mods.array() - 1.0).abs().minCoeff(&drop);
  Vec out(mods.size() - 1);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < mods.size(); ++i)
    if (i != drop) out[k++] = mods[i];
  return sorted_copy(out);
}

/// Worst closure residual over random chart points, scaled by the pointwise
/// tolerance (<= 1 passes).
inline double closure_ratio(const ConformalModel& model, std::function<Vec(Rng&)> sampler,
                            int npoints, std::uint64_t seed, double h = 1e-4) {
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < npoints; ++i) {
    Vec x = sampler(rng);
    // keep the FD stencil inside bounded charts
    for (int k = 0; k < model.dim; ++k) {
      if (model.angular[static_cast<size_t>(k)]) continue;
      x[k] = std::clamp(x[k], model.lower[k] + 2 * h, model.upper[k] - 2 * h);
    }
    worst = std::max(worst, d_eta_closure_check(model, x, h) / closure_tolerance(model, x));
  }
  return worst;
}

struct GridStats {
  double dissipative_fraction = 0.0;
  double max_r_final = -std::numeric_limits<double>::infinity();
  double max_tail_H = 0.0;
  std::vector<Vec> cells;
};

/// sin2d dichotomy sweep over the 64x64 corner grid, restricted to rows at
/// min-image distance >= margin from both invariant circles.
inline GridStats sin2d_grid_stats(const Scenario& sc, int nside, double margin, double T,
                                  int threads) {
  const ChartFlow flow = sc.chart_flow();
  GridStats gs;
  for (int j = 0; j < nside; ++j) {
    const double y = static_cast<double>(j) / nside;
    if (circle_dist(y, 0.0) < margin - 1e-12 || circle_dist(y, 0.5) < margin - 1e-12) continue;
    for (int i = 0; i < nside; ++i) {
      Vec x(2);
      x << static_cast<double>(i) / nside, y;
      gs.cells.push_back(std::move(x));
    }
  }
  const size_t n = gs.cells.size();
  std::vector<double> r_final(n), tail_H(n);
  std::vector<char> dissipative(n, 0);
  WindingThresholds th;
  th.char_time = sc.char_time;
  parallel_for(n, threads, [&](size_t idx) {
    const Trajectory traj = flow.run(gs.cells[idx], T, T / 512.0);
    const WindingClass wc = classify_winding(traj, th);
    dissipative[idx] = wc.label == WindingLabel::DissipativePlus ? 1 : 0;
    r_final[idx] = wc.r_final;
    tail_H[idx] =
        omega_limit_estimate(traj, 0.1, [&](const Vec& p) { return flow.H(p); }).max_abs_H;
  });
  double count = 0.0;
  for (size_t i = 0; i < n; ++i) {
    count += dissipative[i];
    gs.max_r_final = std::max(gs.max_r_final, r_final[i]);
    gs.max_tail_H = std::max(gs.max_tail_H, tail_H[i]);
  }
  gs.dissipative_fraction = n ? count / static_cast<double>(n) : 0.0;
  return gs;
}

inline std::vector<Vec> margin_samples(const Scenario& sc, int count, double h_margin,
                                       std::uint64_t seed) {
  const ChartFlow flow = sc.chart_flow();
  Rng rng(seed);
  std::vector<Vec> out;
  out.reserve(static_cast<size_t>(count));
  int guard = 0;
  while (static_cast<int>(out.size()) < count) {
    Vec x = sc.sample_point(rng);
    if (std::abs(flow.H(x)) >= h_margin) out.push_back(std::move(x));
    if (++guard > 100000) throw ConfigError("margin_samples: sampler failed to clear the margin");
  }
  return out;
}

struct LeafStats {
  double residual = 0.0;       // at the default step
  double halving_gain = 0.0;   // residual(step) / residual(step/2)
};

inline LeafStats leaf_stats(const HamiltonianSystem& sys, int nseeds, double arclen, double step,
                            std::uint64_t seed, int threads) {
  std::vector<Vec> seeds;
  Rng rng(seed);
  for (int i = 0; i < nseeds; ++i) {
    Vec x(2);
    x << rng.uniform01(), rng.uniform01();
    seeds.push_back(std::move(x));
  }
  std::vector<double> res(seeds.size()), res_half(seeds.size());
  parallel_for(seeds.size(), threads, [&](size_t i) {
    res[i] = leaf_trace(sys, seeds[i], arclen, step).residual;
    res_half[i] = leaf_trace(sys, seeds[i], arclen, 0.5 * step).residual;
  });
  LeafStats out;
  double worst_half = 0.0;
  for (size_t i = 0; i < seeds.size(); ++i) {
    out.residual = std::max(out.residual, res[i]);
    worst_half = std::max(worst_half, res_half[i]);
  }
  out.halving_gain = out.residual / std::max(worst_half, 1e-300);
  return out;
}

// ---------------------------------------------------------------------------

inline void verify_sin2d(const Scenario& sc, std::uint64_t seed, int threads,
                         std::vector<CheckResult>& out) {
  const HamiltonianSystem& sys = *sc.chart;

  const IdentityStats ident =
      conformal_identity_stats(sc, 100, 20.0, subseed(seed, "identity"), threads);
  out.push_back(make_check("identity.scalar_max", 'L', ident.scalar, 1e-6));
  out.push_back(make_check("identity.tangent_rel_max", 'L', ident.tangent, 1e-5));
  out.push_back(make_check("identity.detv_rel_max", 'L', ident.detv, 1e-6));

  const GridStats gs = sin2d_grid_stats(sc, 64, 4.0 / 64.0, 40.0, threads);
  out.push_back(make_check("grid.dissipative_fraction", 'G', gs.dissipative_fraction, 0.99));
  out.push_back(make_check("grid.max_r_final", 'L', gs.max_r_final, -20.0));
  out.push_back(make_check("grid.max_tail_H", 'L', gs.max_tail_H, 1e-4));
  const double rec = recurrence_stats(sc.chart_flow(), gs.cells, 40.0, 0.05, threads, 0.02);
  out.push_back(make_check("grid.recurrence_fraction", 'E', rec, 0.0, 0.0));

  const std::vector<Vec> agree_samples =
      margin_samples(sc, 200, 0.1, subseed(seed, "agreement"));
  WindingThresholds th;
  th.char_time = sc.char_time;
  const double agree =
      forward_backward_agreement(sc.chart_flow(), agree_samples, 40.0, th, threads);
  out.push_back(make_check("agreement.fraction", 'G', agree, 0.99));

  IntegratorOptions lopts = sc.integrator;
  lopts.rtol = lopts.atol = 1e-10;
  const LyapunovReport rep = lyapunov_spectrum(sys, *sc.periodic_point, 200.0, 0.5, lopts);
  Vec targets(2);
  targets << -kTwoPi, 0.0;
  out.push_back(make_check("lyapunov.exponent_error", 'L',
                           sorted_abs_diff(rep.exponents, sorted_copy(targets)), 1e-2));
  out.push_back(make_check("lyapunov.symmetry_residual", 'L',
                           check_spectrum_symmetry(rep, 1e-2).max_abs_residual, 1e-2));
  out.push_back(make_check("lyapunov.mean_winding_error", 'L', std::abs(rep.r_bar + kTwoPi), 1e-3));

  const LeafStats leafs = leaf_stats(sys, 20, 2.0, 1e-5, subseed(seed, "leaf"), threads);
  out.push_back(make_check("leaf.residual_max", 'L', leafs.residual, 1e-8));
  out.push_back(make_check("leaf.halving_gain", 'G', leafs.halving_gain, 3.0));

  // attractor return map: period 1/(2 pi), multipliers {1, e^{-1}}
  IntegratorOptions popts = sc.integrator;
  popts.rtol = popts.atol = 1e-11;
  popts.max_step = 0.05;
  Vec on_orbit(2);
  on_orbit << 0.25, 0.5;
  const PoincareResult pr = poincare_return(sys, on_orbit, *sc.section, popts, 5.0);
  out.push_back(
      make_check("poincare.period_error", 'L', std::abs(pr.return_time - 1.0 / kTwoPi), 1e-6));
  popts.tangent = true;
  const Mat mono = monodromy(sys, on_orbit, pr.return_time, popts);
  Eigen::EigenSolver<Mat> es(mono);
  Vec mods = sorted_copy(es.eigenvalues().cwiseAbs());
  Vec mono_targets(2);
  mono_targets << std::exp(-1.0), 1.0;
  out.push_back(make_check("monodromy.multiplier_error", 'L',
                           sorted_abs_diff(mods, mono_targets), 1e-6));
}

inline void verify_lee2d(const Scenario& sc, std::uint64_t seed, int threads,
                         std::vector<CheckResult>& out) {
  const double a = sc.params.at("a");
  const double b = sc.params.at("b");

  const IdentityStats ident =
      conformal_identity_stats(sc, 100, 20.0, subseed(seed, "identity"), threads);
  out.push_back(make_check("identity.scalar_max", 'L', ident.scalar, 1e-6));
  out.push_back(make_check("identity.tangent_rel_max", 'L', ident.tangent, 1e-5));
  out.push_back(make_check("identity.detv_rel_max", 'L', ident.detv, 1e-6));

  // classification: every sample conservative with r = 0
  Rng rng(subseed(seed, "samples"));
  std::vector<Vec> samples;
  for (int i = 0; i < 400; ++i) samples.push_back(sc.sample_point(rng));
  const ChartFlow flow = sc.chart_flow();
  WindingThresholds th;
  th.char_time = sc.char_time;
  std::vector<char> conservative(samples.size(), 0);
  parallel_for(samples.size(), threads, [&](size_t i) {
    const WindingClass wc = classify_winding(flow.run(samples[i], 40.0, 0.1), th);
    conservative[i] = wc.label == WindingLabel::ConservativePlus ? 1 : 0;
  });
  double frac = 0.0;
  for (char c : conservative) frac += c;
  frac /= static_cast<double>(samples.size());
  out.push_back(make_check("classify.conservative_fraction", 'G', frac, 1.0));

  const double rec = recurrence_stats(flow, samples, 1000.0, 0.05, threads, 0.02);
  out.push_back(make_check("recurrence.fraction", 'G', rec, 1.0));

  // asymptotic cycle against the coordinate forms
  Vec x0(2);
  x0 << 0.37, 0.61;
  const Trajectory traj = flow.run(x0, 1000.0, 1.0);
  Vec dx = Vec::Zero(2), dy = Vec::Zero(2);
  dx[0] = 1.0;
  dy[1] = 1.0;
  const Vec A = asymptotic_cycle(traj, {[dx](const Vec&) { return dx; },
                                        [dy](const Vec&) { return dy; }});
  Vec expect(2);
  expect << b, -a;
  out.push_back(make_check("cycle.component_error", 'L', (A - expect).cwiseAbs().maxCoeff(), 1e-3));
  const double pairing = std::abs(sc.chart->model.eta(x0).dot(A));
  out.push_back(make_check("cycle.eta_pairing", 'L', pairing, 1e-6));

  // closure on the 4-dimensional member of the same chart family
  Vec lee4(4);
  lee4 << a, 0.0, b, 0.0;
  const ConformalModel big = flat_torus(2, lee4);
  auto sampler = [](Rng& r) {
    Vec x(4);
    for (int i = 0; i < 4; ++i) x[i] = r.uniform01();
    return x;
  };
  out.push_back(make_check("closure.flat_torus4", 'L',
                           closure_ratio(big, sampler, 100, subseed(seed, "closure")), 1.0));
}

inline void verify_lee_twisted(const Scenario& sc, std::uint64_t seed, int threads,
                               std::vector<CheckResult>& out) {
  const int n = static_cast<int>(sc.params.at("n"));
  Vec a(n);
  for (int i = 0; i < n; ++i) a[i] = sc.params.at("a" + std::to_string(i + 1));

  // periodic-orbit search at the scenario parameters (irrational defaults: empty)
  const auto found = lee_periodic_orbit_search(n, a, 50.0, 20, 1e-9);
  const auto oracle = lee_periodic_oracle(a, 50.0, 20, 1e-9);
  std::set<std::vector<int>> got;
  for (const auto& orbit : found) {
    std::vector<int> m(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) m[static_cast<size_t>(i)] = orbit.m[i];
    got.insert(std::move(m));
  }
  double sym_diff = 0.0;
  for (const auto& m : got)
    if (!oracle.count(m)) sym_diff += 1.0;
  for (const auto& m : oracle)
    if (!got.count(m)) sym_diff += 1.0;
  out.push_back(make_check("aperiodic.irrational_count", 'E',
                           static_cast<double>(found.size()), 0.0, 0.0));
  out.push_back(make_check("aperiodic.oracle_sym_diff", 'E', sym_diff, 0.0, 0.0));

  // the rational instance from the same family
  Vec ar(2);
  ar << 0.5, 1.0 / 3.0;
  const auto found_r = lee_periodic_orbit_search(2, ar, 50.0, 20, 1e-9);
  const auto oracle_r = lee_periodic_oracle(ar, 50.0, 20, 1e-9);
  std::set<std::vector<int>> got_r;
  for (const auto& orbit : found_r)
    got_r.insert({orbit.m[0], orbit.m[1]});
  double sym_diff_r = 0.0;
  for (const auto& m : got_r)
    if (!oracle_r.count(m)) sym_diff_r += 1.0;
  for (const auto& m : oracle_r)
    if (!got_r.count(m)) sym_diff_r += 1.0;
  out.push_back(make_check("aperiodic.rational_oracle_sym_diff", 'E', sym_diff_r, 0.0, 0.0));
  out.push_back(make_check("aperiodic.rational_nonempty", 'G',
                           static_cast<double>(found_r.size()), 1.0));

  // group law of the closed-form flow
  Rng rng(subseed(seed, "group"));
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec z = sc.sample_point(rng);
    const double s = rng.uniform(-3.0, 3.0), t = rng.uniform(-3.0, 3.0);
    const Vec one = sc.analytic->flow(sc.analytic->flow(z, s), t);
    const Vec two = sc.analytic->flow(z, s + t);
    worst = std::max(worst, chart_distance(one, two, sc.analytic->angular));
  }
  out.push_back(make_check("flow.group_law", 'L', worst, 1e-10));

  // Lemma-level lift: the Lee field upstairs is R + beta(R) d_theta
  Rng rng2(subseed(seed, "lift"));
  double lift_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    Vec z = sc.sample_point(rng2);
    const Vec y = z.head(2 * n);  // contact chart point (q, v)
    const Vec Xc = contact_hamiltonian_vector_field(*sc.contact, y);
    const Vec lifted = symplectization_lift_field(Xc, sc.contact->reeb_pairing(y),
                                                  sc.base_beta(y));
    Vec expect(2 * n + 1);
    expect.head(n) = y.tail(n);
    expect.segment(n, n).setZero();
    expect[2 * n] = a.dot(y.tail(n));
    lift_err = std::max(lift_err, (lifted - expect).cwiseAbs().maxCoeff());
  }
  out.push_back(make_check("lift.lee_field_error", 'L', lift_err, 1e-9));
}

inline void verify_nonexact(const Scenario& sc, std::uint64_t seed, int threads,
                            std::vector<CheckResult>& out) {
  (void)threads;
  const int n = static_cast<int>(sc.params.at("n"));
  const AnalyticFlow flow = sc.analytic_flow();
  Rng rng(subseed(seed, "orbits"));

  double max_r = 0.0, max_H_drift = 0.0;
  int conservative = 0;
  const int norbits = 25;
  for (int i = 0; i < norbits; ++i) {
    const Vec z0 = sc.sample_point(rng);
    const Trajectory traj = flow.run(z0, 40.0, 0.25);
    const double H0 = flow.H(traj.front().x);
    for (const auto& s : traj.samples) {
      max_r = std::max(max_r, std::abs(s.r));
      max_H_drift = std::max(max_H_drift, std::abs(flow.H(s.x) - H0));
    }
    WindingThresholds th;
    th.char_time = sc.char_time;
    if (classify_winding(traj, th).label == WindingLabel::ConservativePlus) ++conservative;
  }
  out.push_back(make_check("classify.conservative_fraction", 'G',
                           static_cast<double>(conservative) / norbits, 1.0));
  out.push_back(make_check("winding.max_abs", 'L', max_r, 1e-12));
  out.push_back(make_check("H.max_drift", 'L', max_H_drift, 1e-12));

  // conformal Hamiltonian field of the lift is (1, 0, ..., 0)
  Rng rng2(subseed(seed, "field"));
  double field_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Vec z = sc.sample_point(rng2);
    const Vec y = z.head(2 * n);
    const Vec Xc = contact_hamiltonian_vector_field(*sc.contact, y);
    const Vec lifted =
        symplectization_lift_field(Xc, sc.contact->reeb_pairing(y), sc.base_beta(y));
    Vec expect = Vec::Zero(2 * n + 1);
    expect[0] = 1.0;
    field_err = std::max(field_err, (lifted - expect).cwiseAbs().maxCoeff());
  }
  out.push_back(make_check("lift.field_error", 'L', field_err, 1e-9));
}

inline void verify_sphere(const Scenario& sc, std::uint64_t seed, int threads,
                          std::vector<CheckResult>& out) {
  const int n = static_cast<int>(sc.params.at("n"));
  const AnalyticFlowModel& model = *sc.analytic;
  const ContactSystem& contact = *sc.contact;

  // capture: random points off L- by margin 0.1 reach L+ within 1e-4 at T=10,
  // flowing with the integrated contact field (the analytic flow is the oracle
  // elsewhere; here the generic solver is exercised end to end)
  Rng rng(subseed(seed, "capture"));
  std::vector<Vec> starts;
  while (static_cast<int>(starts.size()) < 100) {
    Vec z = rng.unit_vector(2 * n);
    if (sphere_dist_to_L_minus(z) >= 0.1) starts.push_back(std::move(z));
  }
  std::vector<double> dist(starts.size());
  parallel_for(starts.size(), threads, [&](size_t i) {
    Vec z = starts[i];
    StepControl ctl;
    ctl.rtol = ctl.atol = 1e-9;
    ctl.max_step = 0.25;
    auto rhs = [&](double, const Vec& y, Vec& dy) {
      dy = contact_hamiltonian_vector_field(contact, Vec(y / y.norm()));
    };
    Vec zf = z;
    dopri5(
        rhs, 0.0, z, 10.0, ctl, [&](double, const Vec& y) { zf = y; return true; },
        [](double) { return 10.0; });
    dist[i] = sphere_dist_to_L_plus(Vec(zf / zf.norm()));
  });
  double worst = 0.0;
  for (double d : dist) worst = std::max(worst, d);
  out.push_back(make_check("legendrian.capture_dist", 'L', worst, 1e-4));

  // invariance of L+ under the closed-form flow
  Rng rng2(subseed(seed, "invariance"));
  double inv = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vec x = rng2.unit_vector(n);
    Vec z(2 * n);
    z << x, x;
    z /= z.norm();
    for (double t : {1.0, 5.0, 10.0})
      inv = std::max(inv, sphere_dist_to_L_plus(model.flow(z, t)));
  }
  out.push_back(make_check("legendrian.invariance", 'L', inv, 1e-10));

  // integrated contact field against the closed-form flow
  Rng rng3(subseed(seed, "match"));
  double match = 0.0;
  for (int i = 0; i < 20; ++i) {
    Vec z = rng3.unit_vector(2 * n);
    StepControl ctl;
    ctl.rtol = ctl.atol = 1e-10;
    ctl.max_step = 0.1;
    auto rhs = [&](double, const Vec& y, Vec& dy) {
      dy = contact_hamiltonian_vector_field(contact, Vec(y / y.norm()));
    };
    Vec zf = z;
    dopri5(
        rhs, 0.0, z, 3.0, ctl, [&](double, const Vec& y) { zf = y; return true; },
        [](double) { return 3.0; });
    zf /= zf.norm();
    match = std::max(match, (zf - model.flow(z, 3.0)).norm());
  }
  out.push_back(make_check("contact.field_vs_analytic", 'L', match, 1e-6));

  // group law of the closed-form flow
  Rng rng4(subseed(seed, "group"));
  double glaw = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec z = rng4.unit_vector(2 * n);
    const double s = rng4.uniform(-3.0, 3.0), t = rng4.uniform(-3.0, 3.0);
    glaw = std::max(glaw,
                    (model.flow(model.flow(z, s), t) - model.flow(z, s + t)).norm());
  }
  out.push_back(make_check("flow.group_law", 'L', glaw, 1e-10));
}

inline void verify_cotangent(const Scenario& sc, std::uint64_t seed, int threads,
                             std::vector<CheckResult>& out) {
  const HamiltonianSystem& sys = *sc.chart;
  const double kappa = sc.params.at("kappa");
  const double r = sc.params.at("r");

  const IdentityStats ident =
      conformal_identity_stats(sc, 100, 20.0, subseed(seed, "identity"), threads);
  out.push_back(make_check("identity.scalar_max", 'L', ident.scalar, 1e-6));
  out.push_back(make_check("identity.tangent_rel_max", 'L', ident.tangent, 1e-5));
  out.push_back(make_check("identity.detv_rel_max", 'L', ident.detv, 1e-6));

  // expected return-map multipliers {e^{-2 pi kappa}, e^r, e^{r + 2 pi kappa}}
  Vec targets(3);
  targets << std::exp(-kTwoPi * kappa), std::exp(r), std::exp(r + kTwoPi * kappa);
  targets = sorted_copy(targets);

  IntegratorOptions mopts = sc.integrator;
  mopts.rtol = mopts.atol = 1e-11;
  mopts.max_step = 0.05;
  const Mat mono = monodromy(sys, *sc.periodic_point, sc.period, mopts);
  out.push_back(make_check("monodromy.multiplier_error", 'L',
                           sorted_abs_diff(return_map_multipliers(mono), targets), 1e-3));

  // same multipliers through the closed-form cotangent lift
  const double fd_h = 1e-6;
  Mat lift_jac(4, 4);
  for (int k = 0; k < 4; ++k) {
    Vec zp = Vec(*sc.periodic_point), zm = Vec(*sc.periodic_point);
    zp[k] += fd_h;
    zm[k] -= fd_h;
    const LiftedPoint fp = cotangent_lift_flow(sc.base_flow, sc.base_jacobian, sc.base_beta,
                                               zp.head(2), zp.tail(2), 1.0);
    const LiftedPoint fm = cotangent_lift_flow(sc.base_flow, sc.base_jacobian, sc.base_beta,
                                               zm.head(2), zm.tail(2), 1.0);
    Vec fpv(4), fmv(4);
    fpv << fp.q, fp.p;
    fmv << fm.q, fm.p;
    lift_jac.col(k) = (fpv - fmv) / (2.0 * fd_h);
  }
  out.push_back(make_check("lift.multiplier_error", 'L',
                           sorted_abs_diff(return_map_multipliers(lift_jac), targets), 1e-3));

  // Lyapunov spectrum on the attracting orbit
  IntegratorOptions lopts = sc.integrator;
  lopts.rtol = lopts.atol = 1e-10;
  const LyapunovReport rep = lyapunov_spectrum(sys, *sc.periodic_point, 200.0, 0.5, lopts);
  Vec lyap_targets(4);
  lyap_targets << r, -kTwoPi * kappa, r + kTwoPi * kappa, 0.0;
  out.push_back(make_check("lyapunov.exponent_error", 'L',
                           sorted_abs_diff(rep.exponents, sorted_copy(lyap_targets)), 1e-2));
  out.push_back(make_check("lyapunov.symmetry_residual", 'L',
                           check_spectrum_symmetry(rep, 1e-2).max_abs_residual, 1e-2));
  out.push_back(make_check("lyapunov.mean_winding_error", 'L', std::abs(rep.r_bar - r), 1e-3));

  // past/future agreement on the sampled box (backward runs exit the chart)
  const std::vector<Vec> samples = margin_samples(sc, 200, 0.05, subseed(seed, "agreement"));
  WindingThresholds th;
  th.char_time = sc.char_time;
  const double agree = forward_backward_agreement(sc.chart_flow(), samples, 40.0, th, threads);
  out.push_back(make_check("agreement.fraction", 'G', agree, 0.99));

  // structure validity and the perturbed negative control
  out.push_back(make_check("closure.cotangent", 'L',
                           closure_ratio(sys.model, sc.sample_point, 100,
                                         subseed(seed, "closure")),
                           1.0));
  ConformalModel bad = sys.model;
  auto base_omega = sys.model.omega;
  bad.omega = [base_omega](const Vec& x) {
    Mat Om = base_omega(x);
    const double wobble = 0.03 * std::sin(kTwoPi * x[1]);
    Om(0, 2) += wobble;
    Om(2, 0) -= wobble;
    return Om;
  };
  out.push_back(make_check("closure.negative_control", 'G',
                           closure_ratio(bad, sc.sample_point, 100,
                                         subseed(seed, "closure_neg")),
                           1.0));
}

}  // namespace checks

inline VerifyReport verify(const Scenario& sc, std::uint64_t seed, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  VerifyReport rep;
  rep.scenario = sc.name;
  rep.seed = seed;
  threads = resolve_threads(threads);

  if (sc.name == "sin2d")
    checks::verify_sin2d(sc, seed, threads, rep.checks);
  else if (sc.name == "lee2d")
    checks::verify_lee2d(sc, seed, threads, rep.checks);
  else if (sc.name == "lee_twisted")
    checks::verify_lee_twisted(sc, seed, threads, rep.checks);
  else if (sc.name == "nonexact_conservative")
    checks::verify_nonexact(sc, seed, threads, rep.checks);
  else if (sc.name == "sphere_legendrian")
    checks::verify_sphere(sc, seed, threads, rep.checks);
  else if (sc.name == "cotangent_attractor")
    checks::verify_cotangent(sc, seed, threads, rep.checks);
  else
    throw ConfigError("verify: unknown scenario '" + sc.name + "'");

  rep.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace cflab

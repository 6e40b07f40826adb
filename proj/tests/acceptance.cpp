// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each criterion.

#include <chrono>
#include <cstdio>
#include <vector>

#include "cflab/cflab.hpp"
#include "oracles.hpp"

using namespace cflab;

namespace {

int failures = 0;

void report(int criterion, const std::string& what, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
              detail.c_str());
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr std::uint64_t kSeed = 42;

// criterion 1: Lemma-level conformal identities on three scenarios
void criterion_identities(int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  double scalar = 0, tangent = 0, detv = 0;
  for (const char* name : {"sin2d", "lee2d", "cotangent_attractor"}) {
    auto sc = build(name);
    const auto st = checks::conformal_identity_stats(
        sc, 100, 20.0, kSeed ^ fnv1a64(name), threads);
    scalar = std::max(scalar, st.scalar);
    tangent = std::max(tangent, st.tangent);
    detv = std::max(detv, st.detv);
  }
  const double elapsed = seconds_since(t0);
  const bool pass = scalar <= 1e-6 && tangent <= 1e-5 && detv <= 1e-6 && elapsed < 30.0;
  report(1, "conformal identities (scalar/tangent/volume) on 3x100 random orbits", pass,
         "scalar " + fmt(scalar) + ", frobenius " + fmt(tangent) + ", detV " + fmt(detv) +
             ", " + fmt(elapsed) + " s");
}

// criterion 2: dissipation dichotomy on sin2d and lee2d
void criterion_dichotomy(int threads) {
  auto sin2d = build("sin2d");
  const auto gs = checks::sin2d_grid_stats(sin2d, 64, 4.0 / 64.0, 40.0, threads);
  const double rec_sin = recurrence_stats(sin2d.chart_flow(), gs.cells, 40.0, 0.05, threads, 0.02);

  auto lee = build("lee2d");
  Rng rng(kSeed ^ fnv1a64("lee_samples"));
  std::vector<Vec> samples;
  for (int i = 0; i < 400; ++i) samples.push_back(lee.sample_point(rng));
  WindingThresholds th;
  std::vector<char> cons(samples.size(), 0);
  parallel_for(samples.size(), threads, [&](size_t i) {
    cons[i] = classify_winding(lee.chart_flow().run(samples[i], 40.0, 0.1), th).label ==
                      WindingLabel::ConservativePlus
                  ? 1
                  : 0;
  });
  double cons_frac = 0;
  for (char c : cons) cons_frac += c;
  cons_frac /= static_cast<double>(samples.size());
  const double rec_lee =
      recurrence_stats(lee.chart_flow(), samples, 1000.0, 0.05, threads, 0.02);

  const bool pass = gs.dissipative_fraction >= 0.99 && gs.max_r_final < -20.0 &&
                    gs.max_tail_H < 1e-4 && rec_sin == 0.0 && cons_frac == 1.0 && rec_lee == 1.0;
  report(2, "dissipation dichotomy: sin2d grid vs lee2d samples", pass,
         "D+ " + fmt(gs.dissipative_fraction) + ", max r_T " + fmt(gs.max_r_final) +
             ", tail H " + fmt(gs.max_tail_H) + ", rec " + fmt(rec_sin) + " | C+ " +
             fmt(cons_frac) + ", rec " + fmt(rec_lee));
}

// criterion 3: past/future coincidence
void criterion_agreement(int threads) {
  WindingThresholds th;
  auto sin2d = build("sin2d");
  const auto s1 = checks::margin_samples(sin2d, 200, 0.1, kSeed ^ fnv1a64("agree_sin"));
  const double a1 = forward_backward_agreement(sin2d.chart_flow(), s1, 40.0, th, threads);
  auto cot = build("cotangent_attractor");
  const auto s2 = checks::margin_samples(cot, 200, 0.05, kSeed ^ fnv1a64("agree_cot"));
  const double a2 = forward_backward_agreement(cot.chart_flow(), s2, 40.0, th, threads);
  report(3, "forward/backward classification agreement >= 0.99", a1 >= 0.99 && a2 >= 0.99,
         "sin2d " + fmt(a1) + ", cotangent " + fmt(a2));
}

// criterion 4: Lyapunov symmetry on both attracting orbits
void criterion_lyapunov(int) {
  auto sin2d = build("sin2d");
  IntegratorOptions o1 = sin2d.integrator;
  o1.rtol = o1.atol = 1e-10;
  const auto rep1 = lyapunov_spectrum(*sin2d.chart, *sin2d.periodic_point, 200.0, 0.5, o1);
  Vec t1(2);
  t1 << -kTwoPi, 0.0;
  const double e1 = checks::sorted_abs_diff(rep1.exponents, checks::sorted_copy(t1));
  const double res1 = check_spectrum_symmetry(rep1, 1e-2).max_abs_residual;
  const double rb1 = std::abs(rep1.r_bar + kTwoPi);

  auto cot = build("cotangent_attractor");
  IntegratorOptions o2 = cot.integrator;
  o2.rtol = o2.atol = 1e-10;
  const auto rep2 = lyapunov_spectrum(*cot.chart, *cot.periodic_point, 200.0, 0.5, o2);
  const auto lam = oracles::lifted_exponents(cot.params.at("kappa"), cot.params.at("r"));
  Vec t2(4);
  for (int i = 0; i < 4; ++i) t2[i] = lam[static_cast<size_t>(i)];
  const double e2 = checks::sorted_abs_diff(rep2.exponents, t2);
  const double res2 = check_spectrum_symmetry(rep2, 1e-2).max_abs_residual;

  const bool pass = e1 <= 1e-2 && res1 <= 1e-2 && rb1 <= 1e-3 && e2 <= 1e-2 && res2 <= 1e-2;
  report(4, "Lyapunov spectra and pairing symmetry on the attracting orbits", pass,
         "sin2d err " + fmt(e1) + "/res " + fmt(res1) + "/rbar " + fmt(rb1) +
             " | cotangent err " + fmt(e2) + "/res " + fmt(res2));
}

// criterion 5: hyperbolic attracting orbit multipliers
void criterion_monodromy(int) {
  auto cot = build("cotangent_attractor");
  IntegratorOptions o = cot.integrator;
  o.rtol = o.atol = 1e-11;
  o.max_step = 0.05;
  const Mat V = monodromy(*cot.chart, *cot.periodic_point, cot.period, o);
  const Vec mods = checks::return_map_multipliers(V);
  const auto mexp = oracles::lifted_multipliers(cot.params.at("kappa"), cot.params.at("r"));
  // mexp holds {mu e^r ...} plus the trivial 1; drop it for the return map
  Vec expect(3);
  int k = 0;
  for (double m : mexp)
    if (std::abs(m - 1.0) > 1e-12) expect[k++] = m;
  const double err = checks::sorted_abs_diff(mods, expect);
  report(5, "return-map multipliers {0.5335, 0.3679, 0.6896} within 1e-3", err <= 1e-3,
         "max multiplier error " + fmt(err));
}

// criterion 6: Legendrian attractor on S^3
void criterion_legendrian(int threads) {
  auto sc = build("sphere_legendrian");
  std::vector<CheckResult> checks_out;
  checks::verify_sphere(sc, kSeed, threads, checks_out);
  double capture = -1, invariance = -1;
  for (const auto& c : checks_out) {
    if (c.id == "legendrian.capture_dist") capture = c.measured;
    if (c.id == "legendrian.invariance") invariance = c.measured;
  }
  report(6, "Legendrian attractor: capture <= 1e-4, invariance <= 1e-10",
         capture >= 0 && capture <= 1e-4 && invariance >= 0 && invariance <= 1e-10,
         "capture " + fmt(capture) + ", invariance " + fmt(invariance));
}

// criterion 7: aperiodicity of twisted Lee flows
void criterion_aperiodic(int) {
  Vec irr(2);
  irr << std::sqrt(2.0), std::sqrt(3.0);
  const auto empty = lee_periodic_orbit_search(2, irr, 50.0, 20, 1e-9);

  Vec rat(2);
  rat << 0.5, 1.0 / 3.0;
  const auto found = lee_periodic_orbit_search(2, rat, 50.0, 20, 1e-9);
  const auto expect = oracles::lee_periodic_bruteforce(rat, 50.0, 20, 1e-9);
  std::set<std::vector<int>> got;
  for (const auto& orbit : found) got.insert({orbit.m[0], orbit.m[1]});
  const bool same = got == expect;
  report(7, "twisted Lee periodicity search vs brute-force enumeration",
         empty.empty() && same && !found.empty(),
         "irrational count " + fmt(double(empty.size())) + ", rational count " +
             fmt(double(found.size())) + (same ? ", sets identical" : ", sets differ"));
}

// criterion 8: leaf holonomy identity
void criterion_leaf(int threads) {
  auto sc = build("sin2d");
  const auto ls = checks::leaf_stats(*sc.chart, 20, 2.0, 1e-5, kSeed ^ fnv1a64("leaf"), threads);
  report(8, "leaf identity residual <= 1e-8 with >= 3x halving gain",
         ls.residual <= 1e-8 && ls.halving_gain >= 3.0,
         "residual " + fmt(ls.residual) + ", gain " + fmt(ls.halving_gain));
}

// criterion 9: asymptotic cycle of the minimal Lee flow
void criterion_cycle(int) {
  auto sc = build("lee2d");
  Vec x0(2);
  x0 << 0.37, 0.61;
  const auto traj = sc.chart_flow().run(x0, 1000.0, 1.0);
  Vec dx = Vec::Zero(2), dy = Vec::Zero(2);
  dx[0] = 1.0;
  dy[1] = 1.0;
  const Vec A = asymptotic_cycle(traj, {[dx](const Vec&) { return dx; },
                                        [dy](const Vec&) { return dy; }});
  Vec expect(2);
  expect << std::sqrt(2.0), -1.0;
  const double err = (A - expect).cwiseAbs().maxCoeff();
  const double pairing = std::abs(sc.chart->model.eta(x0).dot(A));
  report(9, "asymptotic cycle (sqrt(2), -1) with vanishing eta pairing",
         err <= 1e-3 && pairing <= 1e-6, "err " + fmt(err) + ", pairing " + fmt(pairing));
}

// criterion 10: structure validity plus the perturbed negative control
void criterion_structure(int) {
  Vec lee4(4);
  lee4 << 1.0, 0.0, std::sqrt(2.0), 0.0;
  const auto flat = flat_torus(2, lee4);
  auto flat_sampler = [](Rng& r) {
    Vec x(4);
    for (int i = 0; i < 4; ++i) x[i] = r.uniform01();
    return x;
  };
  const double flat_ratio =
      checks::closure_ratio(flat, flat_sampler, 100, kSeed ^ fnv1a64("flat"));

  auto cot = build("cotangent_attractor");
  const double cot_ratio =
      checks::closure_ratio(cot.chart->model, cot.sample_point, 100, kSeed ^ fnv1a64("cot"));

  ConformalModel bad = cot.chart->model;
  auto base = cot.chart->model.omega;
  bad.omega = [base](const Vec& x) {
    Mat Om = base(x);
    const double w = 0.03 * std::sin(kTwoPi * x[1]);
    Om(0, 2) += w;
    Om(2, 0) -= w;
    return Om;
  };
  const double bad_ratio =
      checks::closure_ratio(bad, cot.sample_point, 100, kSeed ^ fnv1a64("bad"));

  report(10, "eta-closure residual within tolerance; perturbed control fails",
         flat_ratio <= 1.0 && cot_ratio <= 1.0 && bad_ratio > 1.0,
         "flat " + fmt(flat_ratio) + ", cotangent " + fmt(cot_ratio) + ", perturbed " +
             fmt(bad_ratio));
}

// criterion 11: determinism and runtime of the full verification suite
void criterion_determinism(double suite_budget_s) {
  auto run_all = [&](int threads) {
    json all = json::array();
    for (const auto& info : scenario_list()) {
      auto sc = build(info.name);
      all.push_back(to_json(verify(sc, kSeed, threads)));
    }
    return all.dump();
  };
  const auto t0 = std::chrono::steady_clock::now();
  const std::string first = run_all(2);
  const double suite_elapsed = seconds_since(t0);
  const std::string second = run_all(2);
  const bool byte_identical = first == second;

  // thread-count invariance spot check on two scenarios
  auto one = to_json(verify(build("lee_twisted"), kSeed, 1)).dump() +
             to_json(verify(build("nonexact_conservative"), kSeed, 1)).dump();
  auto two = to_json(verify(build("lee_twisted"), kSeed, 2)).dump() +
             to_json(verify(build("nonexact_conservative"), kSeed, 2)).dump();
  const bool thread_invariant = one == two;

  report(11, "verify-all byte-identical across reruns, suite under the time budget",
         byte_identical && thread_invariant && suite_elapsed < suite_budget_s,
         std::string(byte_identical ? "byte-identical" : "REPORTS DIFFER") + ", " +
             (thread_invariant ? "thread-invariant" : "THREAD-DEPENDENT") + ", suite " +
             fmt(suite_elapsed) + " s");
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const int threads = resolve_threads(0);
  std::printf("acceptance suite, seed %llu, %d threads\n",
              static_cast<unsigned long long>(kSeed), threads);

  criterion_identities(threads);
  criterion_dichotomy(threads);
  criterion_agreement(threads);
  criterion_lyapunov(threads);
  criterion_monodromy(threads);
  criterion_legendrian(threads);
  criterion_aperiodic(threads);
  criterion_leaf(threads);
  criterion_cycle(threads);
  criterion_structure(threads);
  criterion_determinism(300.0);

  std::printf("%s (%d failure%s, %.1f s)\n", failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
              failures, failures == 1 ? "" : "s", seconds_since(t0));
  return failures == 0 ? 0 : 1;
}

#pragma once

#include <eigen3/Eigen/Eigenvalues>

#include <chrono>
#include <optional>
#include <set>

#include "cflab/diagnostics.hpp"
#include "cflab/lyapunov.hpp"

namespace cflab {

// ---------------------------------------------------------------------------
// Named constructions bundling a system with its distinguished sets and the
// expected-diagnostics table that verify() runs.
// ---------------------------------------------------------------------------

struct Scenario {
  std::string name;
  std::map<std::string, double> params;
  std::string doc;
  IntegratorOptions integrator;
  double char_time = 1.0;

  std::optional<HamiltonianSystem> chart;
  std::optional<AnalyticFlowModel> analytic;
  std::optional<ContactSystem> contact;

  std::vector<AttractorDescriptor> attractors;
  std::optional<SectionSpec> section;

  std::optional<Vec> periodic_point;
  double period = 0.0;

  // closed-form base data for the cotangent lift route
  std::function<Vec(const Vec&, double)> base_flow;
  std::function<Mat(const Vec&, double)> base_jacobian;
  std::function<Vec(const Vec&)> base_beta;

  /// Uniform draw from the scenario's chart domain.
  std::function<Vec(Rng&)> sample_point;

  bool is_chart() const { return chart.has_value(); }

  ChartFlow chart_flow() const {
    if (!chart) throw ConfigError("scenario " + name + " has no chart system");
    ChartFlow f;
    f.sys = &*chart;
    f.opts = integrator;
    return f;
  }
  AnalyticFlow analytic_flow() const {
    if (!analytic) throw ConfigError("scenario " + name + " has no analytic model");
    return AnalyticFlow{&*analytic, char_time};
  }
};

struct ScenarioInfo {
  std::string name;
  std::string params_doc;
  std::string summary;
};

inline std::vector<ScenarioInfo> scenario_list() {
  return {
      {"sin2d", "(none)",
       "flat torus T^2 with eta = dx, H = sin(2 pi y); attracting circle {y=1/2}, repelling "
       "circle {y=0}"},
      {"lee2d", "a=1, b=sqrt(2)",
       "Lee flow (H=1) realizing phi_t(x,y) = (x+bt, y-at); minimal for irrational a/b. The "
       "underlying gauge carries the Lee covector -(a dx + b dy) so the realized flow matches "
       "this parameterization"},
      {"lee_twisted", "n=2, a1=sqrt(2), a2=sqrt(3)",
       "standard Lee flow of the twisted symplectization of T^1 T^n; aperiodic iff "
       "(1, a_1...a_n) rationally independent"},
      {"nonexact_conservative", "n=2",
       "H = p_1 on the symplectization of T^1 T^n; conservative with non-exact Lee form on {H=0}"},
      {"sphere_legendrian", "n=2",
       "contact flow of H = (|x|^2-|y|^2)/2 on S^{2n-1}; Legendrian attractor L+ = {x=y}, "
       "repeller L- = {x=-y}"},
      {"cotangent_attractor", "kappa=0.1, r=-1, p_bound=0.5",
       "lifted base flow (x1'=1, x2'=-kappa sin(2 pi x2)) on the conformal cotangent bundle of "
       "T^2 with beta = r dx1; hyperbolic attracting periodic orbit on the zero section "
       "(requires r < -2 pi kappa)"},
  };
}

namespace detail {

inline void reject_unknown_params(const std::map<std::string, double>& given,
                                  const std::set<std::string>& known, const std::string& name) {
  for (const auto& [k, v] : given)
    if (!known.count(k))
      throw ConfigError("scenario " + name + ": unknown parameter key '" + k + "'");
}

inline double param_or(const std::map<std::string, double>& p, const std::string& k, double dflt) {
  auto it = p.find(k);
  return it == p.end() ? dflt : it->second;
}

}  // namespace detail

inline Scenario build(const std::string& name, std::map<std::string, double> params = {}) {
  Scenario sc;
  sc.name = name;
  sc.integrator.rtol = 1e-8;
  sc.integrator.atol = 1e-8;
  sc.integrator.max_step = 1.0;

  if (name == "sin2d") {
    detail::reject_unknown_params(params, {}, name);
    HamiltonianSystem sys;
    Vec lee(2);
    lee << 1.0, 0.0;
    sys.model = flat_torus(1, lee);
    sys.name = "sin2d";
    sys.H = [](const Vec& x) { return std::sin(kTwoPi * x[1]); };
    sys.gradH = [](const Vec& x) {
      Vec g(2);
      g << 0.0, kTwoPi * std::cos(kTwoPi * x[1]);
      return g;
    };
    sys.field_jacobian = [](const Vec& x) {
      Mat J = Mat::Zero(2, 2);
      J(0, 1) = -kTwoPi * kTwoPi * std::sin(kTwoPi * x[1]);
      J(1, 1) = kTwoPi * std::cos(kTwoPi * x[1]);
      return J;
    };
    sys.analytic_field = [](const Vec& x) {
      Vec X(2);
      X << kTwoPi * std::cos(kTwoPi * x[1]), std::sin(kTwoPi * x[1]);
      return X;
    };
    sc.chart = std::move(sys);
    sc.integrator.jacobian_mode = IntegratorOptions::JacobianMode::Analytic;
    sc.attractors.push_back(
        {"circle_y_half", [](const Vec& x) { return circle_dist(x[1], 0.5); }, 1e-3});
    sc.attractors.push_back(
        {"circle_y_zero", [](const Vec& x) { return circle_dist(x[1], 0.0); }, 1e-3});
    SectionSpec sect;
    sect.normal = Vec::Zero(2);
    sect.normal[0] = 1.0;
    sect.offset = 0.0;
    sect.direction = 0;
    sc.section = sect;
    Vec orbit_pt(2);
    orbit_pt << 0.0, 0.5;
    sc.periodic_point = orbit_pt;
    sc.period = 1.0 / kTwoPi;
    sc.sample_point = [](Rng& rng) {
      Vec x(2);
      x << rng.uniform01(), rng.uniform01();
      return x;
    };
  } else if (name == "lee2d") {
    detail::reject_unknown_params(params, {"a", "b"}, name);
    const double a = detail::param_or(params, "a", 1.0);
    const double b = detail::param_or(params, "b", std::sqrt(2.0));
    // The flow of this scenario is phi_t(x,y) = (x + b t, y - a t). Under the
    // library's interior-product convention that flow is the Lee flow of the
    // gauge with covector -(a dx + b dy); see the scenario catalog doc.
    HamiltonianSystem sys;
    Vec lee(2);
    lee << -a, -b;
    sys.model = flat_torus(1, lee);
    sys.name = "lee2d";
    sys.H = [](const Vec&) { return 1.0; };
    sys.gradH = [](const Vec&) { return Vec(Vec::Zero(2)); };
    sys.field_jacobian = [](const Vec&) { return Mat(Mat::Zero(2, 2)); };
    sys.analytic_field = [a, b](const Vec&) {
      Vec X(2);
      X << b, -a;
      return X;
    };
    sc.chart = std::move(sys);
    sc.integrator.jacobian_mode = IntegratorOptions::JacobianMode::Analytic;
    sc.params = {{"a", a}, {"b", b}};
    SectionSpec sect;
    sect.normal = Vec::Zero(2);
    sect.normal[0] = 1.0;
    sc.section = sect;
    sc.sample_point = [](Rng& rng) {
      Vec x(2);
      x << rng.uniform01(), rng.uniform01();
      return x;
    };
    return sc;
  } else if (name == "lee_twisted") {
    const int n = static_cast<int>(detail::param_or(params, "n", 2.0));
    if (n < 1) throw ConfigError("lee_twisted: need n >= 1");
    std::set<std::string> known = {"n"};
    for (int i = 1; i <= n; ++i) known.insert("a" + std::to_string(i));
    detail::reject_unknown_params(params, known, name);
    Vec a(n);
    for (int i = 0; i < n; ++i) {
      const double dflt = (i == 0) ? std::sqrt(2.0) : (i == 1 ? std::sqrt(3.0) : 0.0);
      a[i] = detail::param_or(params, "a" + std::to_string(i + 1), dflt);
    }
    sc.analytic = twisted_symplectization_unit_torus(n, a);
    sc.contact = unit_torus_bundle_system(
        n, [](const Vec&) { return 1.0; },
        [n](const Vec&) { return Vec(Vec::Zero(2 * n)); });
    Vec beta = a;
    sc.base_beta = [beta](const Vec&) { return beta; };
    sc.params["n"] = n;
    for (int i = 0; i < n; ++i) sc.params["a" + std::to_string(i + 1)] = a[i];
    sc.sample_point = [n](Rng& rng) {
      Vec z(2 * n + 1);
      for (int i = 0; i < n; ++i) z[i] = rng.uniform01();
      z.segment(n, n) = rng.unit_vector(n);
      z[2 * n] = rng.uniform01();
      return z;
    };
    return sc;
  } else if (name == "nonexact_conservative") {
    detail::reject_unknown_params(params, {"n"}, name);
    const int n = static_cast<int>(detail::param_or(params, "n", 2.0));
    sc.analytic = nonexact_conservative_model(n);
    sc.contact = unit_torus_bundle_system(
        n, [n](const Vec& z) { return z[n]; },
        [n](const Vec&) {
          Vec g = Vec::Zero(2 * n);
          g[n] = 1.0;
          return g;
        });
    Vec beta = Vec::Zero(n);
    sc.base_beta = [beta](const Vec&) { return beta; };
    sc.params["n"] = n;
    sc.sample_point = [n](Rng& rng) {
      Vec z(2 * n + 1);
      for (int i = 0; i < n; ++i) z[i] = rng.uniform01();
      z.segment(n, n) = rng.unit_vector(n);
      z[2 * n] = rng.uniform01();
      return z;
    };
    return sc;
  } else if (name == "sphere_legendrian") {
    detail::reject_unknown_params(params, {"n"}, name);
    const int n = static_cast<int>(detail::param_or(params, "n", 2.0));
    sc.analytic = contact_sphere_model(n);
    sc.contact = contact_sphere_system(
        n,
        [n](const Vec& z) {
          return 0.5 * (z.head(n).squaredNorm() - z.tail(n).squaredNorm());
        },
        [n](const Vec& z) {
          Vec g(2 * n);
          g.head(n) = z.head(n);
          g.tail(n) = -z.tail(n);
          return g;
        });
    sc.attractors.push_back({"L_plus", sphere_dist_to_L_plus, 1e-3});
    sc.attractors.push_back({"L_minus", sphere_dist_to_L_minus, 1e-3});
    sc.params["n"] = n;
    sc.sample_point = [n](Rng& rng) { return rng.unit_vector(2 * n); };
    return sc;
  } else if (name == "cotangent_attractor") {
    detail::reject_unknown_params(params, {"kappa", "r", "p_bound"}, name);
    const double kappa = detail::param_or(params, "kappa", 0.1);
    const double r = detail::param_or(params, "r", -1.0);
    const double p_bound = detail::param_or(params, "p_bound", 0.5);
    if (!(kappa > 0)) throw ConfigError("cotangent_attractor: parameter kappa must be > 0");
    if (!(r < -kTwoPi * kappa))
      throw ConfigError(
          "cotangent_attractor: parameter r out of validity window, need r < -2 pi kappa");
    if (!(p_bound > 0)) throw ConfigError("cotangent_attractor: parameter p_bound must be > 0");

    HamiltonianSystem sys;
    Vec beta(2);
    beta << r, 0.0;
    sys.model = conformal_cotangent_torus(2, beta, p_bound);
    sys.name = "cotangent_attractor";
    sys.H = [kappa](const Vec& x) {
      return x[2] - kappa * std::sin(kTwoPi * x[1]) * x[3];
    };
    sys.gradH = [kappa](const Vec& x) {
      Vec g(4);
      g << 0.0, -kTwoPi * kappa * std::cos(kTwoPi * x[1]) * x[3], 1.0,
          -kappa * std::sin(kTwoPi * x[1]);
      return g;
    };
    sys.field_jacobian = [kappa, r](const Vec& x) {
      const double s = std::sin(kTwoPi * x[1]);
      const double c = std::cos(kTwoPi * x[1]);
      Mat J = Mat::Zero(4, 4);
      J(1, 1) = -kTwoPi * kappa * c;
      J(2, 2) = r;
      J(3, 1) = -kTwoPi * kTwoPi * kappa * s * x[3];
      J(3, 3) = r + kTwoPi * kappa * c;
      return J;
    };
    sc.chart = std::move(sys);
    sc.integrator.jacobian_mode = IntegratorOptions::JacobianMode::Analytic;
    sc.params = {{"kappa", kappa}, {"r", r}, {"p_bound", p_bound}};
    sc.attractors.push_back({"zero_section_orbit",
                             [](const Vec& x) {
                               const double dq2 = circle_dist(x[1], 0.0);
                               return std::sqrt(dq2 * dq2 + x[2] * x[2] + x[3] * x[3]);
                             },
                             1e-3});
    Vec orbit_pt = Vec::Zero(4);
    sc.periodic_point = orbit_pt;
    sc.period = 1.0;

    // closed-form base flow of (x1' = 1, x2' = -kappa sin(2 pi x2)) and its
    // Jacobian, for the lift route; valid with x2 centered in (-1/2, 1/2].
    sc.base_flow = [kappa](const Vec& q, double t) {
      Vec out(2);
      out[0] = q[0] + t;
      const double base = std::round(q[1]);
      const double th = q[1] - base;
      if (std::abs(std::abs(th) - 0.5) < 1e-15) {
        out[1] = q[1];  // on the repelling circle
        return out;
      }
      const double u = std::tan(M_PI * th);
      out[1] = base + std::atan(u * std::exp(-kTwoPi * kappa * t)) / M_PI;
      return out;
    };
    sc.base_jacobian = [kappa](const Vec& q, double t) {
      Mat J = Mat::Identity(2, 2);
      const double th = q[1] - std::round(q[1]);
      const double s = kTwoPi * kappa * t;
      if (std::abs(std::abs(th) - 0.5) < 1e-15) {
        J(1, 1) = std::exp(s);  // repelling multiplier
        return J;
      }
      const double u = std::tan(M_PI * th);
      const double ut = u * std::exp(-s);
      J(1, 1) = std::exp(-s) * (1.0 + u * u) / (1.0 + ut * ut);
      return J;
    };
    Vec bb = beta;
    sc.base_beta = [bb](const Vec&) { return bb; };
    sc.sample_point = [p_bound](Rng& rng) {
      Vec x(4);
      x << rng.uniform01(), rng.uniform01(), rng.uniform(-p_bound, p_bound),
          rng.uniform(-p_bound, p_bound);
      return x;
    };
    return sc;
  } else {
    throw ConfigError("unknown scenario name '" + name + "'");
  }
  return sc;
}

// ---------------------------------------------------------------------------
// Expected-diagnostics verification. This is the acceptance-suite driver.
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string id;
  char cmp = 'L';     // 'L': measured <= target, 'G': measured >= target,
                      // 'E': |measured - target| <= tol
  double measured = 0.0;
  double target = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::string note;
};

inline CheckResult make_check(std::string id, char cmp, double measured, double target,
                              double tol = 0.0, std::string note = "") {
  CheckResult c;
  c.id = std::move(id);
  c.cmp = cmp;
  c.measured = measured;
  c.target = target;
  c.tol = tol;
  c.note = std::move(note);
  switch (cmp) {
    case 'L': c.pass = measured <= target; break;
    case 'G': c.pass = measured >= target; break;
    default: c.pass = std::abs(measured - target) <= tol; break;
  }
  return c;
}

struct VerifyReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  double elapsed_seconds = 0.0;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace checks {

struct IdentityStats {
  double scalar = 0.0;    // max_t |H(x_t) - e^{r_t} H(x_0)|
  double tangent = 0.0;   // max relative Frobenius deviation of V^T Om V = e^r Om
  double detv = 0.0;      // max relative deviation of det V = e^{n r}
};

/// Lemma-level conformal identities on random initial points.
inline IdentityStats conformal_identity_stats(const Scenario& sc, int npoints, double T,
                                              std::uint64_t seed, int threads) {
  const HamiltonianSystem& sys = *sc.chart;
  const int d = sys.dim();
  const int n_half = d / 2;
  IntegratorOptions opts = sc.integrator;
  opts.rtol = opts.atol = 1e-9;
  opts.tangent = true;
  opts.sample_dt = T / 16.0;

  std::vector<IdentityStats> per(static_cast<size_t>(npoints));
  parallel_for(static_cast<size_t>(npoints), threads, [&](size_t i) {
    Rng rng(seed + 1000 * i);
    const Vec x0 = sc.sample_point(rng);
    const double H0 = sys.H(x0);
    const Mat Om0 = sys.model.omega(x0);
    const double Om0_norm = Om0.norm();
    IdentityStats st;
    auto obs = [&](double, const Vec& x, double r, const Mat* V) {
      st.scalar = std::max(st.scalar, std::abs(sys.H(x) - std::exp(r) * H0));
      if (V) {
        const Mat Omt = sys.model.omega(x);
        const double frob = (V->transpose() * Omt * (*V) - std::exp(r) * Om0).norm();
        st.tangent = std::max(st.tangent, frob / Om0_norm);
        const double target = std::exp(n_half * r);
        st.detv = std::max(st.detv, std::abs(V->determinant() - target) / target);
      }
    };
    integrate(sys, x0, T, opts, obs, /*store=*/false);
    per[i] = st;
  });
  IdentityStats out;
  for (const auto& st : per) {
    out.scalar = std::max(out.scalar, st.scalar);
    out.tangent = std::max(out.tangent, st.tangent);
    out.detv = std::max(out.detv, st.detv);
  }
  return out;
}

/// Independent enumeration of periodic Lee directions over integer vectors
/// m = tau v (a different parametrization than the search op uses).
inline std::set<std::vector<int>> lee_periodic_oracle(const Vec& a, double tau_max, int denom_max,
                                                      double tol) {
  const int n = static_cast<int>(a.size());
  std::set<std::vector<int>> out;
  const int box = static_cast<int>(std::floor(tau_max));
  std::vector<int> m(static_cast<size_t>(n), -box);
  for (;;) {
    bool zero = true;
    for (int v : m) zero = zero && v == 0;
    if (!zero) {
      double norm2 = 0.0, am = 0.0;
      int g = 0, first = 0;
      for (int i = 0; i < n; ++i) {
        norm2 += double(m[static_cast<size_t>(i)]) * m[static_cast<size_t>(i)];
        am += a[i] * m[static_cast<size_t>(i)];
        g = std::gcd(g, std::abs(m[static_cast<size_t>(i)]));
      }
      while (m[static_cast<size_t>(first)] == 0) ++first;
      bool prim_ok = true;
      for (int i = 0; i < n; ++i)
        if (std::abs(m[static_cast<size_t>(i)]) / g > denom_max) prim_ok = false;
      if (prim_ok && std::sqrt(norm2) <= tau_max + 1e-12 &&
          std::abs(am - std::round(am)) <= tol) {
        // directions come in +- pairs; store the sign-canonical representative
        std::vector<int> c = m;
        if (c[static_cast<size_t>(first)] < 0)
          for (auto& v : c) v = -v;
        out.insert(c);
      }
    }
    int pos = 0;
    while (pos < n && m[static_cast<size_t>(pos)] == box) {
      m[static_cast<size_t>(pos)] = -box;
      ++pos;
    }
    if (pos == n) break;
    ++m[static_cast<size_t>(pos)];
  }
  return out;
}

}  // namespace checks

/// Runs the scenario's expected-diagnostics table.
VerifyReport verify(const Scenario& sc, std::uint64_t seed = 42, int threads = 0);

}  // namespace cflab

#include "cflab/scenarios_verify.hpp"

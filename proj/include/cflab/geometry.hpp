#pragma once

#include <algorithm>
#include <limits>
#include <utility>

#include "cflab/types.hpp"

namespace cflab {

enum class ModelKind { FlatTorus, ConformalCotangentTorus, TwistedSymplectization, ContactSphere };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::FlatTorus: return "flat_torus";
    case ModelKind::ConformalCotangentTorus: return "conformal_cotangent_torus";
    case ModelKind::TwistedSymplectization: return "twisted_symplectization";
    case ModelKind::ContactSphere: return "contact_sphere";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Chart-based conformal symplectic models.
//
// Conventions used throughout the library:
//   Omega[i][j] = omega(e_i, e_j),
//   (iota_X omega)_j = sum_i X_i * Omega[i][j]   (contraction in the first slot),
// and the reference orientation is the chart volume dx_0 ^ ... ^ dx_{dim-1}.
// ---------------------------------------------------------------------------

struct ConformalModel {
  int dim = 0;
  ModelKind kind = ModelKind::FlatTorus;
  std::string name;
  AngularMask angular;

  /// Lee covector eta(x).
  std::function<Vec(const Vec&)> eta;
  /// Structure matrix Omega(x), antisymmetric and non-degenerate.
  std::function<Mat(const Vec&)> omega;

  /// Box bounds for the non-angular coordinates (+-inf when unbounded).
  Vec lower, upper;
  /// True when eta and Omega do not depend on the point.
  bool constant_structure = false;

  ChartPoint point(Vec coords) const { return ChartPoint(std::move(coords), angular); }

  bool in_domain(const Vec& x) const {
    for (int i = 0; i < dim; ++i) {
      if (angular[static_cast<size_t>(i)]) continue;
      if (x[i] < lower[i] || x[i] > upper[i]) return false;
    }
    return true;
  }

  bool bounded() const {
    for (int i = 0; i < dim; ++i)
      if (!angular[static_cast<size_t>(i)] && std::isfinite(lower[i])) return true;
    return false;
  }
};

/// T^{2n} with coordinates (x_1, y_1, ..., x_n, y_n), omega = sum dx_i ^ dy_i
/// and constant Lee form eta = sum lee_k dz_k.
inline ConformalModel flat_torus(int n, const Vec& lee) {
  if (n < 1) throw ConfigError("flat_torus: invalid dimension, need n >= 1");
  if (lee.size() != 2 * n) throw ConfigError("flat_torus: lee covector must have length 2n");
  ConformalModel m;
  m.dim = 2 * n;
  m.kind = ModelKind::FlatTorus;
  m.name = "flat_torus";
  m.angular.assign(static_cast<size_t>(m.dim), 1);
  m.constant_structure = true;
  const double inf = std::numeric_limits<double>::infinity();
  m.lower = Vec::Constant(m.dim, -inf);
  m.upper = Vec::Constant(m.dim, inf);

  Mat Om = Mat::Zero(m.dim, m.dim);
  for (int i = 0; i < n; ++i) {
    Om(2 * i, 2 * i + 1) = 1.0;
    Om(2 * i + 1, 2 * i) = -1.0;
  }
  Vec lee_copy = lee;
  m.eta = [lee_copy](const Vec&) { return lee_copy; };
  m.omega = [Om](const Vec&) { return Om; };
  return m;
}

/// Conformal cotangent bundle of T^n with constant closed base form beta,
/// chart (q_1..q_n, p_1..p_n), p restricted to [-p_bound, p_bound]^n.
///
/// Expanding -d_eta(lambda) with lambda = sum p_i dq_i and eta = pi* beta:
///   omega = sum dq_i ^ dp_i + sum_{i<j} (beta_i p_j - beta_j p_i) dq_i ^ dq_j.
/// The dq^dq correction is what makes omega eta-closed; it vanishes for n = 1.
inline ConformalModel conformal_cotangent_torus(int n, const Vec& beta, double p_bound) {
  if (n < 1) throw ConfigError("conformal_cotangent_torus: invalid dimension, need n >= 1");
  if (beta.size() != n) throw ConfigError("conformal_cotangent_torus: beta must have length n");
  if (!(p_bound > 0)) throw ConfigError("conformal_cotangent_torus: p_bound must be positive");
  ConformalModel m;
  m.dim = 2 * n;
  m.kind = ModelKind::ConformalCotangentTorus;
  m.name = "conformal_cotangent_torus";
  m.angular.assign(static_cast<size_t>(m.dim), 0);
  for (int i = 0; i < n; ++i) m.angular[static_cast<size_t>(i)] = 1;
  const double inf = std::numeric_limits<double>::infinity();
  m.lower = Vec::Constant(m.dim, -inf);
  m.upper = Vec::Constant(m.dim, inf);
  for (int i = n; i < 2 * n; ++i) {
    m.lower[i] = -p_bound;
    m.upper[i] = p_bound;
  }

  Vec beta_copy = beta;
  Vec eta_full = Vec::Zero(2 * n);
  eta_full.head(n) = beta;
  m.eta = [eta_full](const Vec&) { return eta_full; };
  m.omega = [n, beta_copy](const Vec& x) {
    Mat Om = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
      Om(i, n + i) = 1.0;
      Om(n + i, i) = -1.0;
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double c = beta_copy[i] * x[n + j] - beta_copy[j] * x[n + i];
        Om(i, j) = c;
        Om(j, i) = -c;
      }
    return Om;
  };
  return m;
}

// ---------------------------------------------------------------------------
// Numerical check of the defining identity d(omega) = eta ^ omega.
// ---------------------------------------------------------------------------

/// Max over index triples i<j<k of the central-difference estimate of
/// (d omega - eta ^ omega)_{ijk}. Zero for dim 2 charts (no triples).
inline double d_eta_closure_check(const ConformalModel& model, const Vec& x, double h) {
  if (!(h > 0)) throw ConfigError("d_eta_closure_check: step h must be positive");
  const int d = model.dim;
  for (int i = 0; i < d; ++i) {
    if (model.angular[static_cast<size_t>(i)]) continue;
    if (x[i] - h < model.lower[i] || x[i] + h > model.upper[i])
      throw DomainError("d_eta_closure_check: point too close to the chart boundary for step h");
  }
  if (d < 3) return 0.0;

  // dOm[k] = d Omega / d x_k by central differences
  std::vector<Mat> dOm(static_cast<size_t>(d));
  for (int k = 0; k < d; ++k) {
    Vec xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    dOm[static_cast<size_t>(k)] = (model.omega(xp) - model.omega(xm)) / (2.0 * h);
  }
  const Mat Om = model.omega(x);
  const Vec et = model.eta(x);

  double worst = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      for (int k = j + 1; k < d; ++k) {
        const double dw = dOm[static_cast<size_t>(i)](j, k) - dOm[static_cast<size_t>(j)](i, k) +
                          dOm[static_cast<size_t>(k)](i, j);
        const double ew = et[i] * Om(j, k) - et[j] * Om(i, k) + et[k] * Om(i, j);
        worst = std::max(worst, std::abs(dw - ew));
      }
  return worst;
}

/// Default acceptance tolerance for the closure residual at step h.
inline double closure_tolerance(const ConformalModel& model, const Vec& x) {
  return 1e-6 * (1.0 + model.omega(x).norm());
}

// ---------------------------------------------------------------------------
// Families given by closed-form flows.
// ---------------------------------------------------------------------------

struct AnalyticFlowModel {
  int dim = 0;
  ModelKind kind = ModelKind::TwistedSymplectization;
  std::string name;
  AngularMask angular;

  /// Time-t image of a chart point.
  std::function<Vec(const Vec&, double)> flow;
  /// Winding r_t accumulated along the orbit arc.
  std::function<double(const Vec&, double)> winding;
  /// Hamiltonian in the gauge the family is stated in.
  std::function<double(const Vec&)> H;

  /// Normalizes constrained blocks (unit vectors) in place; returns true when
  /// the input needed fixing, so callers can emit a warning.
  std::function<bool(Vec&)> sanitize;

  ChartPoint point(Vec coords) const {
    Vec c = std::move(coords);
    if (sanitize) sanitize(c);
    return ChartPoint(std::move(c), angular);
  }
};

/// Standard Lee flow of the beta-twisted symplectization of the unit tangent
/// bundle of T^n, chart (x in T^n, v in S^{n-1} as a unit vector, theta in S^1):
///   Phi_t(x, v, theta) = (x + t v, v, theta + t sum_i a_i v_i),  r_t = 0, H = 1.
inline AnalyticFlowModel twisted_symplectization_unit_torus(int n, const Vec& a) {
  if (n < 1) throw ConfigError("twisted_symplectization_unit_torus: need n >= 1");
  if (a.size() != n) throw ConfigError("twisted_symplectization_unit_torus: a must have length n");
  AnalyticFlowModel m;
  m.dim = 2 * n + 1;
  m.kind = ModelKind::TwistedSymplectization;
  m.name = "twisted_symplectization_unit_torus";
  m.angular.assign(static_cast<size_t>(m.dim), 0);
  for (int i = 0; i < n; ++i) m.angular[static_cast<size_t>(i)] = 1;
  m.angular[static_cast<size_t>(2 * n)] = 1;

  Vec a_copy = a;
  m.sanitize = [n](Vec& z) {
    const double nv = z.segment(n, n).norm();
    if (nv < 1e-12) throw DomainError("unit bundle point has vanishing direction vector");
    if (std::abs(nv - 1.0) < 1e-14) return false;
    z.segment(n, n) /= nv;
    return true;
  };
  m.flow = [n, a_copy](const Vec& z0, double t) {
    Vec z = z0;
    Vec v = z.segment(n, n);
    const double nv = v.norm();
    if (nv > 0) v /= nv;
    z.head(n) += t * v;
    z.segment(n, n) = v;
    z[2 * n] += t * a_copy.dot(v);
    return z;
  };
  m.winding = [](const Vec&, double) { return 0.0; };
  m.H = [](const Vec&) { return 1.0; };
  return m;
}

/// The conservative example with non-exact Lee form on {H = 0}:
/// Sconf(T^1 T^n) with H(q, p, theta) = p_1; the flow shifts q_1 by t and the
/// winding vanishes identically.
inline AnalyticFlowModel nonexact_conservative_model(int n) {
  if (n < 1) throw ConfigError("nonexact_conservative_model: need n >= 1");
  AnalyticFlowModel m;
  m.dim = 2 * n + 1;
  m.kind = ModelKind::TwistedSymplectization;
  m.name = "nonexact_conservative";
  m.angular.assign(static_cast<size_t>(m.dim), 0);
  for (int i = 0; i < n; ++i) m.angular[static_cast<size_t>(i)] = 1;
  m.angular[static_cast<size_t>(2 * n)] = 1;

  m.sanitize = [n](Vec& z) {
    const double nv = z.segment(n, n).norm();
    if (nv < 1e-12) throw DomainError("unit bundle point has vanishing direction vector");
    if (std::abs(nv - 1.0) < 1e-14) return false;
    z.segment(n, n) /= nv;
    return true;
  };
  m.flow = [](const Vec& z0, double t) {
    Vec z = z0;
    z[0] += t;
    return z;
  };
  m.winding = [](const Vec&, double) { return 0.0; };
  m.H = [n](const Vec& z) { return z[n]; };
  return m;
}

namespace detail {

/// Stable evaluation of Phi_t(z)/|Phi_t(z)| for the hyperbolic rotation
/// Phi_t(x, y) = (cosh(t) x + sinh(t) y, sinh(t) x + cosh(t) y), plus
/// log |Phi_t(z)| for the winding. Factoring out e^{|t|} keeps the
/// evaluation finite for large |t|.
inline std::pair<Vec, double> sphere_flow_scaled(const Vec& z0, double t, int n) {
  Vec z = z0;
  const double nz = z.norm();
  if (nz < 1e-300) throw DomainError("contact_sphere_model: zero vector is not on the sphere");
  z /= nz;
  Vec s = z.head(n) + z.tail(n);
  Vec d = z.head(n) - z.tail(n);
  // Phi_t: s -> e^t s, d -> e^{-t} d. Work with the dominant factor pulled out.
  const double u = std::exp(-2.0 * std::abs(t));
  Vec grow = (t >= 0) ? s : d;
  Vec shrink = (t >= 0) ? d : s;
  double scale_norm;
  Vec xs(n), ys(n);
  if (grow.norm() == 0.0) {
    // exactly on the invariant Legendrian of the contracting factor
    xs = 0.5 * shrink;
    ys = (t >= 0) ? Vec(-0.5 * shrink) : Vec(0.5 * shrink);
    scale_norm = xs.squaredNorm() + ys.squaredNorm();
    // |Phi_t z| = e^{-|t|} * sqrt(scale_norm)
    Vec out(2 * n);
    out << xs, ys;
    out /= std::sqrt(scale_norm);
    return {out, -std::abs(t) + 0.5 * std::log(scale_norm)};
  }
  Vec gs = grow, sh = u * shrink;
  Vec sv = (t >= 0) ? gs : sh;
  Vec dv = (t >= 0) ? sh : gs;
  xs = 0.5 * (sv + dv);
  ys = 0.5 * (sv - dv);
  scale_norm = xs.squaredNorm() + ys.squaredNorm();
  Vec out(2 * n);
  out << xs, ys;
  out /= std::sqrt(scale_norm);
  return {out, std::abs(t) + 0.5 * std::log(scale_norm)};
}

}  // namespace detail

/// Distance proxies to the invariant Legendrians L± = {x = ±y} of the sphere
/// family (ambient distance to the linear subspace; exact on the sphere up to
/// second order near the sets, monotone everywhere).
inline double sphere_dist_to_L_plus(const Vec& z) {
  const int n = static_cast<int>(z.size()) / 2;
  return (z.head(n) - z.tail(n)).norm() / std::sqrt(2.0);
}
inline double sphere_dist_to_L_minus(const Vec& z) {
  const int n = static_cast<int>(z.size()) / 2;
  return (z.head(n) + z.tail(n)).norm() / std::sqrt(2.0);
}

/// Contact flow on S^{2n-1} induced by H(x,y) = (|x|^2 - |y|^2)/2 through the
/// normalized hyperbolic rotation; the winding of the conformal lift is
/// r_t(z) = -2 log |Phi_t(z)|.
inline AnalyticFlowModel contact_sphere_model(int n) {
  if (n < 2) throw ConfigError("contact_sphere_model: need n >= 2");
  AnalyticFlowModel m;
  m.dim = 2 * n;
  m.kind = ModelKind::ContactSphere;
  m.name = "contact_sphere";
  m.angular.assign(static_cast<size_t>(m.dim), 0);
  m.sanitize = [](Vec& z) {
    const double nz = z.norm();
    if (nz < 1e-12) throw DomainError("contact_sphere_model: zero vector is not on the sphere");
    if (std::abs(nz - 1.0) < 1e-14) return false;
    z /= nz;
    return true;
  };
  m.flow = [n](const Vec& z, double t) { return detail::sphere_flow_scaled(z, t, n).first; };
  m.winding = [n](const Vec& z, double t) {
    return -2.0 * detail::sphere_flow_scaled(z, t, n).second;
  };
  m.H = [n](const Vec& z) {
    const double nz2 = z.squaredNorm();
    return 0.5 * (z.head(n).squaredNorm() - z.tail(n).squaredNorm()) / nz2;
  };
  return m;
}

}  // namespace cflab

#pragma once

#include <eigen3/Eigen/LU>
#include <eigen3/Eigen/QR>

#include "cflab/geometry.hpp"

namespace cflab {

// ---------------------------------------------------------------------------
// Conformal Hamiltonian systems on chart models.
// ---------------------------------------------------------------------------

struct HamiltonianSystem {
  ConformalModel model;
  std::string name;

  std::function<double(const Vec&)> H;
  /// Analytic gradient when available, otherwise install fd_gradient(H).
  std::function<Vec(const Vec&)> gradH;
  /// Optional analytic Jacobian of the derived vector field X.
  std::function<Mat(const Vec&)> field_jacobian;
  /// Optional closed form for X itself. Must agree with the structure solve;
  /// the identity test suite enforces this. Used to keep hot loops cheap.
  std::function<Vec(const Vec&)> analytic_field;

  /// Characteristic time scale, used only by diagnostics defaults.
  double char_time = 1.0;

  int dim() const { return model.dim; }
};

/// Central finite-difference gradient closure (default h = 1e-6).
inline std::function<Vec(const Vec&)> fd_gradient(std::function<double(const Vec&)> f,
                                                  double h = 1e-6) {
  return [f = std::move(f), h](const Vec& x) {
    Vec g(x.size());
    Vec xp = x, xm = x;
    for (int i = 0; i < x.size(); ++i) {
      xp[i] = x[i] + h;
      xm[i] = x[i] - h;
      g[i] = (f(xp) - f(xm)) / (2.0 * h);
      xp[i] = x[i];
      xm[i] = x[i];
    }
    return g;
  };
}

/// The covector d_eta H = grad H - H * eta at x.
inline Vec d_eta_H(const HamiltonianSystem& sys, const Vec& x) {
  return sys.gradH(x) - sys.H(x) * sys.model.eta(x);
}

/// The unique X with sum_i X_i Omega[i][j] = (grad H - H eta)_j, i.e. the
/// solution of Omega^T X = d_eta H.
inline Vec structure_solve_field(const HamiltonianSystem& sys, const Vec& x) {
  const Mat Om = sys.model.omega(x);
  Eigen::PartialPivLU<Mat> lu(Om.transpose());
  const double rcond_proxy = std::abs(lu.determinant());
  if (!(rcond_proxy > 1e-14 * std::max(1.0, std::pow(Om.norm(), Om.rows()))))
    throw StructureError("hamiltonian_vector_field: structure matrix is numerically singular");
  return lu.solve(d_eta_H(sys, x));
}

inline Vec hamiltonian_vector_field(const HamiltonianSystem& sys, const Vec& x) {
  if (sys.analytic_field) return sys.analytic_field(x);
  return structure_solve_field(sys, x);
}

/// eta(X) at x, the integrand of the winding r_t.
inline double eta_of_X(const HamiltonianSystem& sys, const Vec& x) {
  return sys.model.eta(x).dot(hamiltonian_vector_field(sys, x));
}

/// Jacobian of the derived field by central differences (column k from
/// X(x +- h e_k)); used when no analytic Jacobian is installed.
inline Mat fd_field_jacobian(const HamiltonianSystem& sys, const Vec& x, double h = 1e-5) {
  const int d = sys.dim();
  Mat J(d, d);
  Vec xp = x, xm = x;
  for (int k = 0; k < d; ++k) {
    xp[k] = x[k] + h;
    xm[k] = x[k] - h;
    J.col(k) = (hamiltonian_vector_field(sys, xp) - hamiltonian_vector_field(sys, xm)) / (2.0 * h);
    xp[k] = x[k];
    xm[k] = x[k];
  }
  return J;
}

// ---------------------------------------------------------------------------
// Cotangent lift of a base flow.
// ---------------------------------------------------------------------------

struct LiftedPoint {
  Vec q;
  Vec p;
  double winding = 0.0;          // r(q, t) accumulated along the base arc
  bool conditioning_warning = false;
};

namespace detail {

/// beta(d/ds f_s(q)) with the arc velocity taken by central differences.
inline double lift_integrand(const std::function<Vec(const Vec&, double)>& base_flow,
                             const std::function<Vec(const Vec&)>& beta, const Vec& q0, double s) {
  const double h = 1e-6;
  const Vec qdot = (base_flow(q0, s + h) - base_flow(q0, s - h)) / (2.0 * h);
  return beta(base_flow(q0, s)).dot(qdot);
}

}  // namespace detail

/// Lift of a base diffeotopy to the conformal cotangent bundle:
///   f_hat_t(q, p) = (f_t(q), e^{r(q,t)} p o (d f_t(q))^{-1}),
/// with r(q,t) = int_0^t beta(d/ds f_s(q)) ds accumulated by quadrature.
inline LiftedPoint cotangent_lift_flow(const std::function<Vec(const Vec&, double)>& base_flow,
                                       const std::function<Mat(const Vec&, double)>& base_jacobian,
                                       const std::function<Vec(const Vec&)>& beta, const Vec& q0,
                                       const Vec& p0, double t) {
  // composite Simpson, panels doubled until stable
  auto simpson = [&](int panels) {
    const double h = t / panels;
    double acc = detail::lift_integrand(base_flow, beta, q0, 0.0) +
                 detail::lift_integrand(base_flow, beta, q0, t);
    for (int i = 1; i < panels; ++i)
      acc += (i % 2 ? 4.0 : 2.0) * detail::lift_integrand(base_flow, beta, q0, i * h);
    return acc * h / 3.0;
  };
  double r = 0.0;
  if (t != 0.0) {
    double prev = simpson(8);
    for (int panels = 16; panels <= 512; panels *= 2) {
      r = simpson(panels);
      if (std::abs(r - prev) <= 1e-12 * (1.0 + std::abs(r))) break;
      prev = r;
    }
  }

  LiftedPoint out;
  out.q = base_flow(q0, t);
  out.winding = r;
  const Mat J = base_jacobian(q0, t);
  Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 1e-12 * smax)
    throw StructureError("cotangent_lift_flow: base Jacobian is numerically singular");
  out.conditioning_warning = smin < 1e-8 * smax;
  // p o (d f)^{-1} as a covector is J^{-T} p
  out.p = std::exp(r) * J.transpose().partialPivLu().solve(p0);
  return out;
}

// ---------------------------------------------------------------------------
// Contact systems for the two closed-form families.
// ---------------------------------------------------------------------------

struct ContactSystem {
  /// "sphere" or "unit_torus_bundle"; anything else is rejected by the solver.
  std::string family;
  int ambient_dim = 0;

  std::function<Vec(const Vec&)> alpha;    // contact covector
  std::function<Mat(const Vec&)> dalpha;   // Dalpha[i][j] = dalpha(e_i, e_j)
  std::function<Vec(const Vec&)> reeb;
  /// Rows c with c . X = 0 for fields tangent to the constraint manifold.
  std::function<Mat(const Vec&)> constraints;
  /// Tangent-space projector at x (ambient matrix).
  std::function<Mat(const Vec&)> projector;

  std::function<double(const Vec&)> H;
  std::function<Vec(const Vec&)> gradH;

  double reeb_pairing(const Vec& x) const { return gradH(x).dot(reeb(x)); }
};

/// Standard contact sphere S^{2n-1} in R^n x R^n with
/// alpha = (x dy - y dx)/2; Reeb field R = 2(-y, x).
inline ContactSystem contact_sphere_system(int n, std::function<double(const Vec&)> H,
                                           std::function<Vec(const Vec&)> gradH) {
  if (n < 2) throw ConfigError("contact_sphere_system: need n >= 2");
  ContactSystem sys;
  sys.family = "sphere";
  sys.ambient_dim = 2 * n;
  sys.alpha = [n](const Vec& z) {
    Vec a(2 * n);
    a.head(n) = -0.5 * z.tail(n);
    a.tail(n) = 0.5 * z.head(n);
    return a;
  };
  sys.dalpha = [n](const Vec&) {
    Mat D = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
      D(i, n + i) = 1.0;
      D(n + i, i) = -1.0;
    }
    return D;
  };
  sys.reeb = [n](const Vec& z) {
    Vec r(2 * n);
    r.head(n) = -2.0 * z.tail(n);
    r.tail(n) = 2.0 * z.head(n);
    return r;
  };
  sys.constraints = [](const Vec& z) {
    Mat C(1, z.size());
    C.row(0) = z.transpose();
    return C;
  };
  sys.projector = [](const Vec& z) {
    const Vec u = z / z.norm();
    return Mat(Mat::Identity(z.size(), z.size()) - u * u.transpose());
  };
  sys.H = std::move(H);
  sys.gradH = std::move(gradH);
  return sys;
}

/// Unit tangent bundle of T^n, chart (q in T^n, v in S^{n-1}), with the
/// restricted Liouville form alpha = sum v_i dq_i and Reeb field (v, 0).
inline ContactSystem unit_torus_bundle_system(int n, std::function<double(const Vec&)> H,
                                              std::function<Vec(const Vec&)> gradH) {
  if (n < 1) throw ConfigError("unit_torus_bundle_system: need n >= 1");
  ContactSystem sys;
  sys.family = "unit_torus_bundle";
  sys.ambient_dim = 2 * n;
  sys.alpha = [n](const Vec& z) {
    Vec a = Vec::Zero(2 * n);
    a.head(n) = z.tail(n);
    return a;
  };
  sys.dalpha = [n](const Vec&) {
    // dalpha = sum dv_i ^ dq_i
    Mat D = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
      D(n + i, i) = 1.0;
      D(i, n + i) = -1.0;
    }
    return D;
  };
  sys.reeb = [n](const Vec& z) {
    Vec r = Vec::Zero(2 * n);
    r.head(n) = z.tail(n);
    return r;
  };
  sys.constraints = [n](const Vec& z) {
    Mat C = Mat::Zero(1, 2 * n);
    C.row(0).tail(n) = z.tail(n).transpose();
    return C;
  };
  sys.projector = [n](const Vec& z) {
    Mat P = Mat::Identity(2 * n, 2 * n);
    Vec v = z.tail(n);
    v /= v.norm();
    P.bottomRightCorner(n, n) -= v * v.transpose();
    return P;
  };
  sys.H = std::move(H);
  sys.gradH = std::move(gradH);
  return sys;
}

/// Solves the contact Hamilton equations
///   alpha(X) = H,   iota_X dalpha = (dH . R) alpha - dH   on T_x Y
/// by least squares over the ambient chart with the family's constraints.
inline Vec contact_hamiltonian_vector_field(const ContactSystem& sys, const Vec& x) {
  if (sys.family != "sphere" && sys.family != "unit_torus_bundle")
    throw NotImplementedError("contact_hamiltonian_vector_field: unsupported family " +
                              sys.family);
  const int d = sys.ambient_dim;
  const Mat P = sys.projector(x);
  const Mat D = sys.dalpha(x);
  const Vec al = sys.alpha(x);
  const Vec gH = sys.gradH(x);
  const double hr = gH.dot(sys.reeb(x));
  const Mat C = sys.constraints(x);

  const int rows = d + 1 + static_cast<int>(C.rows());
  Mat A(rows, d);
  Vec b(rows);
  // iota_X dalpha(w) = X^T D w tested against w = P e_k
  for (int k = 0; k < d; ++k) {
    const Vec w = P.col(k);
    A.row(k) = (D * w).transpose();
    b[k] = hr * al.dot(w) - gH.dot(w);
  }
  A.row(d) = al.transpose();
  b[d] = sys.H(x);
  A.bottomRows(C.rows()) = C;
  b.tail(C.rows()).setZero();
  return A.colPivHouseholderQr().solve(b);
}

/// Lift of a contact Hamiltonian field to the twisted symplectization:
/// X_tilde = X + (beta(X) - dH.R) d_theta.
inline Vec symplectization_lift_field(const Vec& contact_X, double dH_dot_R, const Vec& beta) {
  Vec out(contact_X.size() + 1);
  out.head(contact_X.size()) = contact_X;
  out[contact_X.size()] = beta.dot(contact_X) - dH_dot_R;
  return out;
}

}  // namespace cflab

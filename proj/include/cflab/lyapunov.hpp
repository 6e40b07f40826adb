#pragma once

#include <eigen3/Eigen/QR>

#include "cflab/integrator.hpp"

namespace cflab {

/// Full-spectrum report. Exponents are sorted ascending with multiplicity
/// (no collapsing); residuals pair the sorted list against the mean winding:
/// residual[k] = lambda_{k+1} + lambda_{2n-k} - r_bar. The values are
/// finite-horizon Benettin estimates of the orbit's limiting ergodic measure.
struct LyapunovReport {
  Vec exponents;
  double r_bar = 0.0;
  Vec symmetry_residuals;
  double horizon = 0.0;
  double renorm_dt = 0.0;
};

/// Benettin iteration: tangent blocks of length renorm_dt with Householder QR
/// re-orthonormalization (R diagonal sign-fixed to be positive).
inline LyapunovReport lyapunov_spectrum(const HamiltonianSystem& sys, const Vec& x0, double T,
                                        double renorm_dt, IntegratorOptions opts) {
  opts.validate();
  if (!(renorm_dt > 0)) throw ConfigError("lyapunov_spectrum: renorm_dt must be positive");
  if (!(T >= 100.0 * renorm_dt))
    throw ConfigError("lyapunov_spectrum: need T >= 100 * renorm_dt");
  opts.tangent = true;
  opts.sample_dt = 0.0;
  const int d = sys.dim();

  const bool analytic = opts.jacobian_mode == IntegratorOptions::JacobianMode::Analytic;
  if (analytic && !sys.field_jacobian)
    throw ConfigError("lyapunov_spectrum: analytic Jacobian requested but none installed");
  detail::AugmentedRhs rhs{&sys, true, analytic, opts.fd_step, d};
  const StepControl ctl = opts.control();

  const long blocks = static_cast<long>(std::llround(T / renorm_dt));
  Vec logs = Vec::Zero(d);
  Vec x = x0;
  double r = 0.0;
  Mat Q = Mat::Identity(d, d);

  for (long b = 0; b < blocks; ++b) {
    Vec y0 = detail::pack_state(x, r, &Q);
    const Vec y1 = detail::advance(rhs, b * renorm_dt, y0, (b + 1) * renorm_dt, ctl);
    x = y1.head(d);
    r = y1[d];
    Mat V = Eigen::Map<const Mat>(y1.data() + d + 1, d, d);
    if (!V.allFinite())
      throw StructureError("lyapunov_spectrum: tangent overflow, renorm_dt too large");
    Eigen::HouseholderQR<Mat> qr(V);
    Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
    Q = qr.householderQ();
    for (int i = 0; i < d; ++i) {
      const double diag = R(i, i);
      if (diag < 0.0) Q.col(i) = -Q.col(i);
      logs[i] += std::log(std::max(std::abs(diag), 1e-300));
    }
  }

  LyapunovReport rep;
  rep.horizon = blocks * renorm_dt;
  rep.renorm_dt = renorm_dt;
  rep.r_bar = r / rep.horizon;
  rep.exponents = logs / rep.horizon;
  std::sort(rep.exponents.data(), rep.exponents.data() + d);
  rep.symmetry_residuals = Vec(d / 2);
  for (int k = 0; k < d / 2; ++k)
    rep.symmetry_residuals[k] = rep.exponents[k] + rep.exponents[d - 1 - k] - rep.r_bar;
  return rep;
}

/// Mean winding r_T / T of a trajectory (the Birkhoff estimate of r_bar(nu)).
inline double mean_winding(const Trajectory& traj) {
  const double T = traj.duration();
  if (T == 0.0) throw ConfigError("mean_winding: trajectory has zero horizon");
  return (traj.back().r - traj.front().r) / T;
}

struct SpectrumSymmetry {
  bool pass = false;
  Vec residuals;
  double max_abs_residual = 0.0;
};

/// Checks lambda_k + lambda_{s-k+1} = r_bar on the paired sorted exponents.
inline SpectrumSymmetry check_spectrum_symmetry(const LyapunovReport& report, double tol) {
  SpectrumSymmetry out;
  out.residuals = report.symmetry_residuals;
  out.max_abs_residual =
      report.symmetry_residuals.size() ? report.symmetry_residuals.cwiseAbs().maxCoeff() : 0.0;
  out.pass = out.max_abs_residual <= tol;
  return out;
}

}  // namespace cflab

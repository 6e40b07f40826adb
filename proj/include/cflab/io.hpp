#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cflab/diagnostics.hpp"
#include "cflab/lyapunov.hpp"
#include "cflab/scenarios.hpp"

namespace cflab {

using nlohmann::json;

/// All floats are printed with 17 significant digits so that reruns with the
/// same config are byte-identical and values round-trip exactly.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Header: t,x_0..x_{d-1},r[,V_00..V_dd]; angles reduced mod 1 on output,
/// the winding kept unwrapped, V in row-major order.
inline std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  const int d = traj.samples.empty() ? 0 : static_cast<int>(traj.samples.front().x.size());
  os << "t";
  for (int i = 0; i < d; ++i) os << ",x_" << i;
  os << ",r";
  const bool tangent = !traj.samples.empty() && traj.samples.front().has_tangent();
  if (tangent)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) os << ",V_" << i << j;
  os << "\n";
  for (const auto& s : traj.samples) {
    os << fmt17(s.t);
    const Vec xw = wrap_angles(s.x, traj.angular);
    for (int i = 0; i < d; ++i) os << "," << fmt17(xw[i]);
    os << "," << fmt17(s.r);
    if (tangent)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) os << "," << fmt17(s.V(i, j));
    os << "\n";
  }
  return os.str();
}

/// Header: i,j,x,y,label,r_final.
inline std::string basin_csv(const std::vector<BasinCell>& cells,
                             const std::vector<AttractorDescriptor>& attractors,
                             int axis_i = 0, int axis_j = 1) {
  std::ostringstream os;
  os << "i,j,x,y,label,r_final\n";
  for (const auto& c : cells) {
    os << c.i << "," << c.j << "," << fmt17(c.x0[axis_i]) << "," << fmt17(c.x0[axis_j]) << ",";
    os << (c.label >= 0 ? attractors[static_cast<size_t>(c.label)].id : "Undetermined");
    os << "," << fmt17(c.r_final) << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// JSON reports
// ---------------------------------------------------------------------------

inline json to_json(const WindingClass& wc) {
  return json{{"label", to_string(wc.label)},
              {"r_final", wc.r_final},
              {"sup_r", wc.sup_r},
              {"inf_r", wc.inf_r},
              {"horizon", wc.horizon},
              {"short_horizon_warning", wc.short_horizon_warning},
              {"domain_exited", wc.domain_exited}};
}

inline json to_json(const LyapunovReport& rep) {
  json exps = json::array(), res = json::array();
  for (Eigen::Index i = 0; i < rep.exponents.size(); ++i) exps.push_back(rep.exponents[i]);
  for (Eigen::Index i = 0; i < rep.symmetry_residuals.size(); ++i)
    res.push_back(rep.symmetry_residuals[i]);
  return json{{"exponents", exps},
              {"r_bar", rep.r_bar},
              {"residuals", res},
              {"horizon", rep.horizon},
              {"renorm_dt", rep.renorm_dt}};
}

inline json to_json(const CheckResult& c) {
  return json{{"id", c.id},
              {"comparison", std::string(1, c.cmp)},
              {"measured", c.measured},
              {"target", c.target},
              {"tolerance", c.tol},
              {"pass", c.pass},
              {"note", c.note}};
}

// Timing is deliberately left out: repeated verify runs with one seed must
// produce byte-identical reports.
inline json to_json(const VerifyReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks) checks.push_back(to_json(c));
  return json{{"scenario", rep.scenario},
              {"seed", rep.seed},
              {"all_pass", rep.all_pass()},
              {"checks", checks}};
}

// ---------------------------------------------------------------------------
// Minimal SVG renderings (batch figures: phase portraits, basin rasters,
// winding curves).
// ---------------------------------------------------------------------------

namespace svg {

constexpr int kW = 640, kH = 640, kMargin = 40;

inline double sx(double x, double lo, double hi) {
  return kMargin + (x - lo) / (hi - lo) * (kW - 2 * kMargin);
}
inline double sy(double y, double lo, double hi) {
  return kH - kMargin - (y - lo) / (hi - lo) * (kH - 2 * kMargin);
}

inline void header(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kMargin << "\" y=\"24\" font-family=\"monospace\" font-size=\"14\">"
     << title << "</text>\n";
  os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kW - 2 * kMargin
     << "\" height=\"" << kH - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
}

}  // namespace svg

/// Phase portrait of trajectories on a 2-D chart, polylines split at torus
/// seams.
inline std::string phase_portrait_svg(const std::vector<Trajectory>& trajs,
                                      const std::string& title) {
  std::ostringstream os;
  svg::header(os, title);
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  int ci = 0;
  for (const auto& traj : trajs) {
    const std::string color = colors[ci++ % 6];
    std::ostringstream path;
    bool open = false;
    Vec prev;
    for (size_t k = 0; k < traj.samples.size(); ++k) {
      const Vec xw = traj.wrapped_x(k);
      if (open && (xw - prev).cwiseAbs().maxCoeff() > 0.5) open = false;  // seam
      path << (open ? " L " : " M ") << svg::sx(xw[0], 0, 1) << " " << svg::sy(xw[1], 0, 1);
      open = true;
      prev = xw;
    }
    os << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Raster of basin labels.
inline std::string basin_svg(const std::vector<BasinCell>& cells, const BasinGridSpec& grid,
                             const std::string& title) {
  std::ostringstream os;
  svg::header(os, title);
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  const double cw = static_cast<double>(svg::kW - 2 * svg::kMargin) / grid.ni;
  const double ch = static_cast<double>(svg::kH - 2 * svg::kMargin) / grid.nj;
  for (const auto& c : cells) {
    const char* fill = c.label >= 0 ? palette[c.label % 4] : "#cccccc";
    os << "<rect x=\"" << svg::kMargin + c.i * cw << "\" y=\""
       << svg::kH - svg::kMargin - (c.j + 1) * ch << "\" width=\"" << cw << "\" height=\"" << ch
       << "\" fill=\"" << fill << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Winding curve r(t).
inline std::string winding_svg(const Trajectory& traj, const std::string& title) {
  std::ostringstream os;
  double rlo = 0, rhi = 0, tlo = 0, thi = 0;
  for (const auto& s : traj.samples) {
    rlo = std::min(rlo, s.r);
    rhi = std::max(rhi, s.r);
    tlo = std::min(tlo, s.t);
    thi = std::max(thi, s.t);
  }
  if (rhi == rlo) rhi = rlo + 1;
  if (thi == tlo) thi = tlo + 1;
  svg::header(os, title);
  std::ostringstream path;
  for (size_t k = 0; k < traj.samples.size(); ++k) {
    path << (k ? " L " : " M ") << svg::sx(traj.samples[k].t, tlo, thi) << " "
         << svg::sy(traj.samples[k].r, rlo, rhi);
  }
  os << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"#1f77b4\"/>\n";
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Output directory helpers
// ---------------------------------------------------------------------------

class OutputDir {
 public:
  OutputDir(std::string dir, std::uint64_t config_hash, std::uint64_t seed)
      : dir_(std::move(dir)), config_hash_(config_hash), seed_(seed) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(std::filesystem::path(dir_) / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write output file " + name + " under " + dir_);
    f << content;
    artifacts_.push_back(name);
  }

  void finalize() {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(config_hash_));
    json manifest{{"config_hash", hash}, {"seed", seed_}, {"artifacts", artifacts_}};
    std::ofstream f(std::filesystem::path(dir_) / "manifest.json", std::ios::binary);
    f << manifest.dump(2) << "\n";
  }

  const std::string& path() const { return dir_; }

 private:
  std::string dir_;
  std::uint64_t config_hash_;
  std::uint64_t seed_;
  std::vector<std::string> artifacts_;
};

}  // namespace cflab

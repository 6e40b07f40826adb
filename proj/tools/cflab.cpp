// Command-line front end: runs scenarios, sweeps and verification, and emits
// CSV/JSON data plus SVG plots under an output directory with a manifest.
//
// Exit codes: 0 success, 1 verification check failure, 2 configuration error,
// 3 runtime failure (integration breakdown etc).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "cflab/cflab.hpp"

namespace {

using namespace cflab;

struct CommonArgs {
  std::string scenario;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = "out";
  std::uint64_t seed = 42;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_scenario = true) {
  auto* opt_s = cmd->add_option("--scenario", args.scenario, "registered scenario name");
  auto* opt_c = cmd->add_option("--config", args.config_path,
                                "JSON config file {\"name\":..., \"params\":{...}, "
                                "\"integrator\":{...}}");
  if (needs_scenario) {
    // exactly one of --scenario / --config
    opt_s->excludes(opt_c);
  }
  cmd->add_option("--set", args.overrides, "parameter override key=value (repeatable)");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "PRNG seed recorded in reports");
  cmd->add_option("--threads", args.threads,
                  "worker threads (0: CFLAB_THREADS or hardware)");
}

std::map<std::string, double> parse_overrides(const std::vector<std::string>& kvs) {
  std::map<std::string, double> out;
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + kv + "' is not of the form key=value");
    const std::string key = kv.substr(0, eq);
    try {
      out[key] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("override value for key '" + key + "' is not a number");
    }
  }
  return out;
}

void apply_integrator_json(const json& j, IntegratorOptions& opts) {
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number())
      throw ConfigError("integrator key '" + key + "' must be a number");
    const double v = value.get<double>();
    if (key == "rtol")
      opts.rtol = v;
    else if (key == "atol")
      opts.atol = v;
    else if (key == "max_step")
      opts.max_step = v;
    else if (key == "init_step")
      opts.init_step = v;
    else if (key == "sample_dt")
      opts.sample_dt = v;
    else if (key == "fd_step")
      opts.fd_step = v;
    else
      throw ConfigError("unknown integrator key '" + key + "'");
  }
  opts.validate();
}

struct LoadedScenario {
  Scenario scenario;
  std::string canonical;  // hashed into the manifest
};

LoadedScenario load_scenario(const CommonArgs& args) {
  std::string name = args.scenario;
  std::map<std::string, double> params;
  json integrator_json;

  if (!args.config_path.empty()) {
    std::ifstream f(args.config_path);
    if (!f) throw ConfigError("cannot open config file " + args.config_path);
    json cfg;
    try {
      cfg = json::parse(f);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    for (const auto& [key, value] : cfg.items()) {
      if (key == "name") {
        if (!value.is_string()) throw ConfigError("config key 'name' must be a string");
        name = value.get<std::string>();
      } else if (key == "params") {
        if (!value.is_object()) throw ConfigError("config key 'params' must be an object");
        for (const auto& [pk, pv] : value.items()) {
          if (!pv.is_number()) throw ConfigError("params key '" + pk + "' must be a number");
          params[pk] = pv.get<double>();
        }
      } else if (key == "integrator") {
        if (!value.is_object()) throw ConfigError("config key 'integrator' must be an object");
        integrator_json = value;
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  }
  if (name.empty()) throw ConfigError("missing scenario: pass --scenario or --config");
  for (const auto& [k, v] : parse_overrides(args.overrides)) params[k] = v;

  LoadedScenario out{build(name, params), ""};
  if (!integrator_json.empty()) apply_integrator_json(integrator_json, out.scenario.integrator);

  std::ostringstream canon;
  canon << name;
  for (const auto& [k, v] : out.scenario.params) canon << ";" << k << "=" << fmt17(v);
  canon << ";rtol=" << fmt17(out.scenario.integrator.rtol)
        << ";atol=" << fmt17(out.scenario.integrator.atol)
        << ";max_step=" << fmt17(out.scenario.integrator.max_step)
        << ";seed=" << args.seed;
  out.canonical = canon.str();
  return out;
}

Vec parse_point(const std::string& csv, int dim) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      vals.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("--x0 entry '" + tok + "' is not a number");
    }
  }
  if (static_cast<int>(vals.size()) != dim)
    throw ConfigError("--x0 needs " + std::to_string(dim) + " comma-separated values");
  Vec x(dim);
  for (int i = 0; i < dim; ++i) x[i] = vals[static_cast<size_t>(i)];
  return x;
}

int scenario_dim(const Scenario& sc) {
  return sc.is_chart() ? sc.chart->dim() : sc.analytic->dim;
}

Trajectory run_any(const Scenario& sc, const Vec& x0, double T, double sample_dt, bool tangent) {
  if (sc.is_chart()) {
    IntegratorOptions o = sc.integrator;
    o.sample_dt = sample_dt;
    o.tangent = tangent;
    return integrate(*sc.chart, x0, T, o);
  }
  return sample_flow(*sc.analytic, x0, T, sample_dt > 0 ? sample_dt : std::abs(T) / 512.0);
}

int cmd_simulate(const CommonArgs& args, const std::string& x0csv, double T, bool tangent,
                 double sample_dt) {
  LoadedScenario ls = load_scenario(args);
  const Vec x0 = parse_point(x0csv, scenario_dim(ls.scenario));
  const Trajectory traj = run_any(ls.scenario, x0, T, sample_dt, tangent);

  OutputDir out(args.out_dir, fnv1a64(ls.canonical + ";simulate"), args.seed);
  out.write("trajectory.csv", trajectory_csv(traj));
  if (scenario_dim(ls.scenario) == 2)
    out.write("phase.svg", phase_portrait_svg({traj}, ls.scenario.name + " phase portrait"));
  out.write("winding.svg", winding_svg(traj, ls.scenario.name + " winding r(t)"));
  out.finalize();
  std::cout << "wrote " << out.path() << " (" << traj.samples.size() << " samples, r_final "
            << fmt17(traj.back().r) << ")\n";
  return 0;
}

int cmd_classify(const CommonArgs& args, const std::string& x0csv, double T, double r_big,
                 double flat_tol) {
  LoadedScenario ls = load_scenario(args);
  const Vec x0 = parse_point(x0csv, scenario_dim(ls.scenario));
  const Trajectory traj = run_any(ls.scenario, x0, T, T / 512.0, false);
  WindingThresholds th;
  th.R_big = r_big;
  th.flat_tol = flat_tol;
  th.char_time = ls.scenario.char_time;
  const WindingClass wc = classify_winding(traj, th);

  json rec = to_json(wc);
  rec["scenario"] = ls.scenario.name;
  rec["seed"] = args.seed;
  OutputDir out(args.out_dir, fnv1a64(ls.canonical + ";classify"), args.seed);
  out.write("classification.json", rec.dump(2) + "\n");
  out.finalize();
  std::cout << rec.dump(2) << "\n";
  return 0;
}

int cmd_basin(const CommonArgs& args, double T, int grid_n) {
  LoadedScenario ls = load_scenario(args);
  if (!ls.scenario.is_chart() || ls.scenario.attractors.empty())
    throw ConfigError("basin: scenario must be chart-based with attractor descriptors");
  BasinGridSpec grid;
  grid.ni = grid.nj = grid_n;
  grid.base_point = Vec::Zero(ls.scenario.chart->dim());
  const auto cells =
      basin_map(ls.scenario.chart_flow(), grid, ls.scenario.attractors, T, args.threads);
  OutputDir out(args.out_dir, fnv1a64(ls.canonical + ";basin"), args.seed);
  out.write("basin.csv", basin_csv(cells, ls.scenario.attractors));
  out.write("basin.svg", basin_svg(cells, grid, ls.scenario.name + " basins"));
  out.finalize();
  std::cout << "wrote " << out.path() << " (" << cells.size() << " cells)\n";
  return 0;
}

int cmd_lyapunov(const CommonArgs& args, const std::string& x0csv, double T, double renorm_dt) {
  LoadedScenario ls = load_scenario(args);
  if (!ls.scenario.is_chart())
    throw ConfigError("lyapunov: scenario must be chart-based (tangent flow required)");
  const Vec x0 = parse_point(x0csv, scenario_dim(ls.scenario));
  const LyapunovReport rep =
      lyapunov_spectrum(*ls.scenario.chart, x0, T, renorm_dt, ls.scenario.integrator);
  json j = to_json(rep);
  j["scenario"] = ls.scenario.name;
  j["seed"] = args.seed;
  OutputDir out(args.out_dir, fnv1a64(ls.canonical + ";lyapunov"), args.seed);
  out.write("lyapunov.json", j.dump(2) + "\n");
  out.finalize();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_leaf(const CommonArgs& args, const std::string& x0csv, double arclen, double step) {
  LoadedScenario ls = load_scenario(args);
  if (!ls.scenario.is_chart())
    throw ConfigError("leaf: scenario must be chart-based");
  const Vec x0 = parse_point(x0csv, scenario_dim(ls.scenario));
  const LeafTrace lt = leaf_trace(*ls.scenario.chart, x0, arclen, step);

  std::ostringstream csv;
  csv << "s_index,x,y,eta_integral\n";
  for (size_t i = 0; i < lt.points.size(); ++i)
    csv << i << "," << fmt17(lt.points[i][0]) << "," << fmt17(lt.points[i][1]) << ","
        << fmt17(lt.eta_integral[i]) << "\n";
  OutputDir out(args.out_dir, fnv1a64(ls.canonical + ";leaf"), args.seed);
  out.write("leaf.csv", csv.str());
  json j{{"scenario", ls.scenario.name}, {"residual", lt.residual}, {"arclen", arclen},
         {"step", step}};
  out.write("leaf.json", j.dump(2) + "\n");
  out.finalize();
  std::cout << "leaf residual " << fmt17(lt.residual) << "\n";
  return 0;
}

int cmd_recurrence(const CommonArgs& args, int nsamples, double T, double eps) {
  LoadedScenario ls = load_scenario(args);
  Rng rng(args.seed);
  std::vector<Vec> samples;
  for (int i = 0; i < nsamples; ++i) samples.push_back(ls.scenario.sample_point(rng));
  double frac;
  if (ls.scenario.is_chart())
    frac = recurrence_stats(ls.scenario.chart_flow(), samples, T, eps, args.threads);
  else
    frac = recurrence_stats(ls.scenario.analytic_flow(), samples, T, eps, args.threads);
  json j{{"scenario", ls.scenario.name}, {"samples", nsamples}, {"T", T},
         {"eps", eps},           {"fraction", frac},    {"seed", args.seed}};
  OutputDir out(args.out_dir, fnv1a64(ls.canonical + ";recurrence"), args.seed);
  out.write("recurrence.json", j.dump(2) + "\n");
  out.finalize();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_cycle(const CommonArgs& args, const std::string& x0csv, double T) {
  LoadedScenario ls = load_scenario(args);
  const int d = scenario_dim(ls.scenario);
  const Vec x0 = parse_point(x0csv, d);
  const Trajectory traj = run_any(ls.scenario, x0, T, std::max(T / 4096.0, 0.25), false);
  std::vector<std::function<Vec(const Vec&)>> forms;
  for (int i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e[i] = 1.0;
    forms.push_back([e](const Vec&) { return e; });
  }
  const Vec A = asymptotic_cycle(traj, forms);
  json comps = json::array();
  for (int i = 0; i < d; ++i) comps.push_back(A[i]);
  json j{{"scenario", ls.scenario.name}, {"T", T}, {"components", comps}, {"seed", args.seed}};
  if (ls.scenario.is_chart())
    j["eta_pairing"] = ls.scenario.chart->model.eta(x0).dot(A);
  OutputDir out(args.out_dir, fnv1a64(ls.canonical + ";cycle"), args.seed);
  out.write("cycle.json", j.dump(2) + "\n");
  out.finalize();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_scenario_list() {
  for (const auto& info : scenario_list()) {
    std::cout << info.name << "\n  params: " << info.params_doc << "\n  " << info.summary
              << "\n";
  }
  return 0;
}

int cmd_verify(const CommonArgs& args) {
  std::vector<std::string> names;
  if (args.scenario == "all" || (args.scenario.empty() && args.config_path.empty())) {
    for (const auto& info : scenario_list()) names.push_back(info.name);
  } else {
    names.push_back(args.scenario);
  }

  json summary = json::array();
  bool all_pass = true;
  const auto overrides = parse_overrides(args.overrides);
  for (const auto& name : names) {
    CommonArgs one = args;
    one.scenario = name;
    LoadedScenario ls = args.config_path.empty() && overrides.empty()
                            ? LoadedScenario{build(name), ""}
                            : load_scenario(one);
    const VerifyReport rep = verify(ls.scenario, args.seed, args.threads);
    summary.push_back(to_json(rep));
    all_pass = all_pass && rep.all_pass();
    for (const auto& c : rep.checks)
      std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << name << "." << c.id << " measured "
                << fmt17(c.measured) << "\n";
    std::cout << "# " << name << " checks ran in " << fmt17(rep.elapsed_seconds) << " s\n";
  }
  OutputDir out(args.out_dir, fnv1a64("verify;" + args.scenario), args.seed);
  json top{{"all_pass", all_pass}, {"seed", args.seed}, {"scenarios", summary}};
  out.write("verify.json", top.dump(2) + "\n");
  out.finalize();
  std::cout << (all_pass ? "VERIFY PASS" : "VERIFY FAIL") << "\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conformal Hamiltonian flow laboratory"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string x0csv = "0";
  double T = 40.0, renorm_dt = 0.5, eps = 0.05, arclen = 2.0, leaf_step = 1e-5;
  double r_big = 20.0, flat_tol = 0.5, sample_dt = 0.0;
  int grid_n = 64, nsamples = 400;
  bool tangent = false;

  auto* sim = app.add_subcommand("simulate", "integrate one trajectory, emit CSV + SVG");
  add_common(sim, args);
  sim->add_option("--x0", x0csv, "initial point, comma separated")->required();
  sim->add_option("--t", T, "horizon (negative: backward)");
  sim->add_flag("--tangent", tangent, "carry the tangent matrix");
  sim->add_option("--sample-dt", sample_dt, "output sampling interval (0: every step)");

  auto* cls = app.add_subcommand("classify", "winding-based conservative/dissipative label");
  add_common(cls, args);
  cls->add_option("--x0", x0csv)->required();
  cls->add_option("--t", T);
  cls->add_option("--r-big", r_big, "dissipation threshold");
  cls->add_option("--flat-tol", flat_tol, "flatness tolerance");

  auto* bas = app.add_subcommand("basin", "basin-of-attraction grid sweep");
  add_common(bas, args);
  bas->add_option("--t", T);
  bas->add_option("--grid", grid_n, "grid side length");

  auto* lya = app.add_subcommand("lyapunov", "Lyapunov spectrum via tangent QR");
  add_common(lya, args);
  lya->add_option("--x0", x0csv)->required();
  lya->add_option("--t", T);
  lya->add_option("--renorm-dt", renorm_dt);

  auto* lf = app.add_subcommand("leaf", "trace a leaf of the invariant distribution");
  add_common(lf, args);
  lf->add_option("--x0", x0csv)->required();
  lf->add_option("--arclen", arclen);
  lf->add_option("--step", leaf_step);

  auto* rec = app.add_subcommand("recurrence", "eps-recurrence fraction over random samples");
  add_common(rec, args);
  rec->add_option("--samples", nsamples);
  rec->add_option("--t", T);
  rec->add_option("--eps", eps);

  auto* cyc = app.add_subcommand("cycle", "asymptotic cycle (Birkhoff averages)");
  add_common(cyc, args);
  cyc->add_option("--x0", x0csv)->required();
  cyc->add_option("--t", T);

  auto* lst = app.add_subcommand("scenario-list", "registered scenarios and parameters");

  auto* ver = app.add_subcommand("verify", "run expected-diagnostics tables");
  add_common(ver, args, /*needs_scenario=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(args, x0csv, T, tangent, sample_dt);
    if (cls->parsed()) return cmd_classify(args, x0csv, T, r_big, flat_tol);
    if (bas->parsed()) return cmd_basin(args, T, grid_n);
    if (lya->parsed()) return cmd_lyapunov(args, x0csv, T, renorm_dt);
    if (lf->parsed()) return cmd_leaf(args, x0csv, arclen, leaf_step);
    if (rec->parsed()) return cmd_recurrence(args, nsamples, T, eps);
    if (cyc->parsed()) return cmd_cycle(args, x0csv, T);
    if (lst->parsed()) return cmd_scenario_list();
    if (ver->parsed()) return cmd_verify(args);
  } catch (const cflab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

#include "cwave/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "cwave/parallel.hpp"

namespace cwave {

namespace fs = std::filesystem;

namespace {

std::string label(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

long step_at(double t, double dt) { return std::lround(t / dt); }

FieldState without_levels(FieldState s)
{
  s.u_prev.clear();
  s.u_next.clear();
  return s;
}

}  // namespace

SimulationResult simulate(const Config& config, const fs::path& out_dir)
{
  if (auto v = config_violations(config); !v.empty()) throw ConfigError(std::move(v));
  const GridSpec& grid = config.grid;
  const ProblemSpec& problem = config.problem;
  const DiagnosticsConfig& diag = config.diagnostics;
  const SphereGrid sphere = config_sphere(config);
  const bool write = !out_dir.empty();
  if (write) fs::create_directories(out_dir);

  SimulationResult res;
  for (double R : diag.cone_offsets) {
    FluxLedger l;
    l.R = R;
    res.ledgers.push_back(l);
  }
  std::vector<long> profile_steps, residual_steps;
  for (double t : diag.profile_times) profile_steps.push_back(step_at(t, grid.dt));
  for (double t : diag.residual_times) residual_steps.push_back(step_at(t, grid.dt));
  std::vector<FieldState> residual_states;
  const auto shell = RegionSpec::shell(diag.shell_R1, diag.shell_R2);

  Stepper stepper(grid, problem, init_from_data(problem, grid));
  const long N = steps_for(diag.t_end, grid.dt);
  double E0 = 0.0;
  for (long k = 0;; ++k) {
    const bool observe = k % diag.observe_every == 0 || k == N;
    const bool profile = std::find(profile_steps.begin(), profile_steps.end(), k) != profile_steps.end();
    const bool residual = std::find(residual_steps.begin(), residual_steps.end(), k) != residual_steps.end();
    const bool snapshot = write && diag.snapshot_every > 0 && k % diag.snapshot_every == 0;
    if (k == 0) E0 = stepper.energy();
    res.energy_drift = std::max(res.energy_drift, std::abs(stepper.energy() - E0) / std::max(E0, 1e-300));
    if (observe || profile || residual || snapshot) {
      const FieldState s = stepper.state();
      if (observe) {
        auto e = total_energy(s, grid, problem);
        if (k == 0) res.E = e.total;
        res.energy.push_back(e);
        for (auto& l : res.ledgers) cone_flux_accumulate(l, s, grid, problem, sphere);
        res.shell_lp.add(s.t, shell_lp_density(s, grid, problem, diag.shell_R1, diag.shell_R2));
        res.morawetz.add(s.t, morawetz_report(s, grid, problem));
        res.weighted.add(s.t, weighted_energy(s, grid, problem, diag.kappa));
        res.shell_angular.add(s.t, angular_energy(s, grid, shell));
      }
      if (profile) res.profiles.push_back(sample_profile(s, grid, diag.window_R1, diag.window_R2, sphere));
      if (residual) residual_states.push_back(grid.radial() ? s : without_levels(s));
      if (snapshot) {
        fs::create_directories(out_dir / "snapshots");
        char name[64];
        std::snprintf(name, sizeof name, "snapshots/step_%08ld.cwv", k);
        write_snapshot(out_dir / name, s, grid);
        res.files.push_back(name);
      }
    }
    if (k >= N) break;
    stepper.advance();
  }
  res.final_state = stepper.state();

  if (res.profiles.size() >= 3) {
    res.estimate = extract_G(res.profiles);
    const bool free_wave = grid.radial() && grid.d == 3;
    std::optional<FreeWave3d> uL;
    if (free_wave) uL = free_wave_from_G_radial3d(*res.estimate);
    for (const auto& s : residual_states) {
      res.residual_t.push_back(s.t);
      res.residual.push_back(free_wave ? exterior_scattering_residual(s, grid, *uL, diag.residual_R)
                                       : exterior_scattering_residual(s, grid, *res.estimate, diag.residual_R, sphere));
    }
  }

  if (!write) return res;
  {
    CsvWriter csv(out_dir / "energy.csv", {"t", "kinetic", "gradient", "potential", "total"});
    for (const auto& e : res.energy) csv.row({e.t, e.kinetic, e.gradient, e.potential, e.total});
    res.files.push_back("energy.csv");
  }
  for (const auto& l : res.ledgers) {
    const std::string name = "flux_R" + label(l.R) + ".csv";
    CsvWriter csv(out_dir / name, {"t", "E_ext", "Phi", "closure_residual"});
    for (std::size_t k = 0; k < l.t.size(); ++k) csv.row({l.t[k], l.E_ext[k], l.Phi[k], l.closure_residual(k)});
    res.files.push_back(name);
  }
  {
    CsvWriter csv(out_dir / "morawetz.csv", {"t", "morawetz"});
    for (std::size_t k = 0; k < res.morawetz.t.size(); ++k) csv.row({res.morawetz.t[k], res.morawetz.v[k]});
    res.files.push_back("morawetz.csv");
  }
  {
    CsvWriter csv(out_dir / "norms.csv", {"t", "shell_lp_density", "weighted_energy", "shell_angular_energy"});
    for (std::size_t k = 0; k < res.shell_lp.t.size(); ++k)
      csv.row({res.shell_lp.t[k], res.shell_lp.v[k], res.weighted.v[k], res.shell_angular.v[k]});
    res.files.push_back("norms.csv");
  }
  if (!res.profiles.empty()) {
    CsvWriter csv(out_dir / "radiation.csv", {"t", "R", "theta_index", "g", "ghat"});
    for (const auto& p : res.profiles)
      for (std::size_t k = 0; k < p.R.size(); ++k)
        for (std::size_t j = 0; j < p.n_theta(); ++j) {
          const std::size_t i = k * p.n_theta() + j;
          csv.row({p.t, p.R[k], static_cast<double>(j), p.g[i], p.ghat[i]});
        }
    res.files.push_back("radiation.csv");
  }
  if (res.estimate) {
    const auto& e = *res.estimate;
    CsvWriter csv(out_dir / "gfield.csv", {"R", "theta_index", "G"});
    for (std::size_t k = 0; k < e.R.size(); ++k)
      for (std::size_t j = 0; j < e.n_theta(); ++j)
        csv.row({e.R[k], static_cast<double>(j), e.G[k * e.n_theta() + j]});
    res.files.push_back("gfield.csv");
    CsvWriter rcsv(out_dir / "residuals.csv", {"t", "R", "residual"});
    for (std::size_t k = 0; k < res.residual.size(); ++k)
      rcsv.row({res.residual_t[k], diag.residual_R, res.residual[k]});
    res.files.push_back("residuals.csv");
  }
  return res;
}

std::vector<ConvergenceRow> linear_convergence(const Config& config, const std::vector<double>& hs, double t)
{
  const auto& base = config.grid;
  if (!base.radial() || base.d != 3 || config.problem.data.family != "gaussian-odd")
    throw std::invalid_argument("linear convergence needs d = 3 radial gaussian-odd data");
  ProblemSpec problem = config.problem;
  problem.linear = true;
  problem.scheme = Scheme::leapfrog;
  const GaussianOdd f(problem.data.amplitude, problem.data.width);
  const double ratio = base.dt / base.h;
  std::vector<ConvergenceRow> rows;
  for (double h : hs) {
    const auto g = make_grid(GridMode::radial, 3, h, base.extent, ratio * h);
    const auto res = run(problem, g, {t, 1000000000, 0.0});
    double err = 0.0;
    for (std::size_t i = 0; i < g.size() && g.radius(i) <= 0.5 * g.extent; ++i)
      err = std::max(err, std::abs(res.final_state.u[i] - exact_free_wave_3d(f, g.radius(i), res.final_state.t).u));
    ConvergenceRow row{h, err, 0.0};
    if (!rows.empty()) row.order = std::log(rows.back().error / err) / std::log(rows.back().h / h);
    rows.push_back(row);
  }
  return rows;
}

std::vector<DecompositionSeries> run_decomposition(const Config& config, const fs::path& out_dir,
                                                   std::vector<std::string>* files)
{
  Config c = config;
  c.decomposition.enabled = true;
  if (auto v = config_violations(c); !v.empty()) throw ConfigError(std::move(v));
  auto series = decomposition_study(c.problem, c.grid, c.decomposition.options, config_sphere(c));
  if (out_dir.empty()) return series;
  fs::create_directories(out_dir);
  for (const auto& s : series) {
    const std::string name = "decomposition_T" + label(s.T) + ".csv";
    CsvWriter csv(out_dir / name, {"t", "interior_w_energy", "idw_residual", "vpw_residual", "strichartz_w",
                                   "strichartz_v", "l1l2_source"});
    for (const auto& r : s.samples)
      csv.row({r.t, r.interior_w_energy, r.idw_residual, r.vpw_residual, r.strichartz_w, r.strichartz_v,
               r.l1l2_source});
    if (files) files->push_back(name);
  }
  CsvWriter csv(out_dir / "decomposition_summary.csv",
                {"T", "data_norm", "data_consistency", "trace_norm", "sup_interior", "w_energy_residual",
                 "idw_max", "vpw_max", "strichartz_w", "strichartz_v", "strichartz_u", "lp_norm_u", "l1l2_source"});
  for (const auto& s : series)
    csv.row({s.T, s.data_norm, s.data_consistency, s.trace_norm, s.sup_interior, s.w_energy_residual, s.idw_max,
             s.vpw_max, s.strichartz_w, s.strichartz_v, s.strichartz_u, s.lp_norm_u, s.l1l2_source});
  if (files) files->push_back("decomposition_summary.csv");
  return series;
}

std::vector<ExponentTable> exponent_sweep(const std::vector<int>& ds, int count)
{
  std::vector<ExponentTable> out;
  for (int d : ds)
    for (const auto& p : p_lattice(d, count)) out.push_back(lemma_pair(d, p));
  return out;
}

void write_exponent_csv(const fs::path& path, const std::vector<ExponentTable>& tables)
{
  CsvWriter csv(path, {"d", "p", "p_e", "s_p", "q", "r", "k1", "k2", "kappa1", "kappa2", "admissible"});
  for (const auto& t : tables)
    csv.row_text({std::to_string(t.d), to_string(t.p), to_string(t.p_e), to_string(t.s_p), to_string(t.q),
                  to_string(t.r), to_string(t.k1), to_string(t.k2), to_string(t.kappa1), to_string(t.kappa2),
                  table_violations(t).empty() ? "true" : "false"});
}

const std::vector<std::string>& preset_names()
{
  static const std::vector<std::string> names{"linear-validate", "exterior-scattering", "decomposition-study",
                                              "exponent-table"};
  return names;
}

Config preset_config(const std::string& name)
{
  Config c;
  c.grid = make_grid(GridMode::radial, 3, 0.02, 64.0, 0.01);
  c.problem.d = 3;
  c.problem.p = 4.0;
  c.problem.data.family = "gaussian-odd";
  auto& d = c.diagnostics;
  d.t_end = 24.0;
  d.observe_every = 1;
  d.profile_times = {3.0, 6.0, 12.0, 24.0};
  d.window_R1 = -4.0;
  d.window_R2 = 4.0;
  if (name == "linear-validate") {
    c.problem.linear = true;
    c.problem.scheme = Scheme::leapfrog;
    c.problem.data.width = 1.0;
    c.problem.R_support = 6.0;
    // a free wave's profile converges like f'(2t + R); past t ~ 4 the
    // distances sit at the lattice-dispersion floor, which grows with t
    d.t_end = 8.0;
    d.profile_times = {2.0, 4.0, 8.0};
    d.residual_times = {4.0, 6.0, 8.0};
  } else if (name == "exterior-scattering" || name == "decomposition-study" || name == "exponent-table") {
    c.problem.scheme = Scheme::conservative;
    c.problem.data.width = 2.0;
    c.problem.R_support = 8.0;
    d.residual_times = {6.0, 9.0, 12.0};
    if (name == "decomposition-study") {
      c.decomposition.enabled = true;
      c.decomposition.options.observe_every = 10;
    }
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return c;
}

RunManifest finish_manifest(const std::string& command, const Config* config, const fs::path& out_dir,
                            const std::vector<std::string>& files, nlohmann::json summary)
{
  RunManifest m;
  m.command = command;
  if (config) {
    m.config_echo = config_echo(*config);
    m.config_digest = hex64(fnv1a64(m.config_echo));
  }
  m.deterministic = deterministic();
  m.threads = thread_count();
  m.versions = module_versions();
  m.summary = std::move(summary);
  for (const auto& f : files) m.add_file(out_dir, f);
  m.write(out_dir);
  return m;
}

RunManifest run_preset(const std::string& name, const Config& config, const fs::path& out_dir)
{
  fs::create_directories(out_dir);
  std::vector<std::string> files;
  nlohmann::json summary;
  if (name == "exponent-table") {
    const auto tables = exponent_sweep({3, 4, 5}, 50);
    write_exponent_csv(out_dir / "exponents.csv", tables);
    files.push_back("exponents.csv");
    std::size_t bad = 0;
    for (const auto& t : tables) bad += !table_violations(t).empty();
    summary["tables"] = tables.size();
    summary["violations"] = bad;
    return finish_manifest("preset exponent-table", nullptr, out_dir, files, summary);
  }
  if (name == "linear-validate") {
    const double h = config.grid.h;
    const auto rows = linear_convergence(config, {2 * h, h, h / 2}, 5.0);
    {
      CsvWriter csv(out_dir / "convergence.csv", {"h", "max_error", "order"});
      for (const auto& r : rows) csv.row({r.h, r.error, r.order});
      files.push_back("convergence.csv");
    }
    const auto sim = simulate(config, out_dir);
    files.insert(files.end(), sim.files.begin(), sim.files.end());
    summary["orders"] = nlohmann::json::array();
    for (std::size_t k = 1; k < rows.size(); ++k) summary["orders"].push_back(rows[k].order);
    summary["energy"] = sim.E;
    if (sim.estimate) summary["G_norm2"] = sim.estimate->l2_norm2;
    return finish_manifest("preset linear-validate", &config, out_dir, files, summary);
  }
  if (name == "exterior-scattering") {
    const auto sim = simulate(config, out_dir);
    files = sim.files;
    summary["energy"] = sim.E;
    summary["energy_drift"] = sim.energy_drift;
    if (sim.estimate) summary["G_norm2"] = sim.estimate->l2_norm2;
    summary["residuals"] = sim.residual;
    return finish_manifest("preset exterior-scattering", &config, out_dir, files, summary);
  }
  if (name == "decomposition-study") {
    const auto series = run_decomposition(config, out_dir, &files);
    summary["T"] = nlohmann::json::array();
    for (const auto& s : series) summary["T"].push_back(s.T);
    return finish_manifest("preset decomposition-study", &config, out_dir, files, summary);
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace cwave

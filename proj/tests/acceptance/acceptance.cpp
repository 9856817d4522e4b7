// Acceptance suite: one PASS/FAIL line per criterion.  Criteria can be
// selected by number on the command line (default: all).  Exit status is 1
// when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cwave/pipeline.hpp"

using namespace cwave;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string sci(double x) { return fmt("%.3g", x); }

std::string list(const std::vector<double>& v)
{
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + sci(v[i]);
  return s + "]";
}

bool strictly_decreasing(const std::vector<double>& v)
{
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return v.size() >= 2;
}

// largest rise between consecutive entries
double max_rise(const std::vector<double>& v)
{
  double m = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) m = std::max(m, v[i] - v[i - 1]);
  return m;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch(const std::string& name)
{
  const auto p = fs::temp_directory_path() / ("cwave_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::size_t index_at(const std::vector<double>& t, double when)
{
  for (std::size_t k = 0; k < t.size(); ++k)
    if (std::abs(t[k] - when) < 1e-9) return k;
  throw std::runtime_error("no sample at t = " + sci(when));
}

// ---------------------------------------------------------------- 1

Outcome exponent_identities()
{
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t tables = 0, bad = 0;
  for (int d : {3, 4, 5}) {
    for (const auto& p : p_lattice(d, 50)) {
      const auto t = lemma_pair(d, p);
      ++tables;
      const Rational one(1), half(1, 2);
      bool ok = t.k1 + t.k2 == p;
      ok = ok && t.k1 / (p + one) + t.k2 / t.q == one;
      ok = ok && t.k1 / (p + one) + t.k2 / t.r == half;
      ok = ok && check_admissible(d, t.q, t.r, one).admissible;
      bad += !ok;
    }
  }
  const auto a = lemma_pair(3, Rational(4));
  const auto b = lemma_pair(5, Rational(9, 4));
  const bool spot = a.q == Rational(7, 2) && a.r == Rational(14) && a.k1 == Rational(5, 3) &&
                    a.k2 == Rational(7, 3) && b.q == Rational(17, 8) && b.r == Rational(34, 7) &&
                    b.k1 == Rational(13, 36) && b.k2 == Rational(17, 9);
  const double secs = seconds_since(t0);
  return {bad == 0 && spot && secs < 1.0 && tables == 150,
          std::to_string(tables) + " tables, " + std::to_string(bad) + " violations, spot values " +
              (spot ? "exact" : "WRONG") + ", " + fmt("%.3f", secs) + " s (limit 1 s)"};
}

// ---------------------------------------------------------------- 2

Outcome linear_order()
{
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = linear_convergence(preset_config("linear-validate"), {0.04, 0.02, 0.01}, 5.0);
  const double secs = seconds_since(t0);
  const double o1 = rows[1].order, o2 = rows[2].order;
  const bool ok = o1 >= 1.7 && o1 <= 2.3 && o2 >= 1.7 && o2 <= 2.3 && secs < 30.0;
  return {ok, "errors " + list({rows[0].error, rows[1].error, rows[2].error}) + ", orders " +
                  fmt("%.4f", o1) + ", " + fmt("%.4f", o2) + " (need [1.7, 2.3]), " + fmt("%.1f", secs) +
                  " s (limit 30 s)"};
}

// ---------------------------------------------------------------- 3-5

Config nonlinear_config(double h, double t_end)
{
  Config c = preset_config("exterior-scattering");
  c.grid = make_grid(GridMode::radial, 3, h, c.grid.extent, 0.5 * h);
  c.diagnostics.t_end = t_end;
  c.diagnostics.observe_every = 1;
  c.diagnostics.profile_times.clear();
  c.diagnostics.residual_times.clear();
  return c;
}

struct NonlinearRuns {
  SimulationResult coarse, fine;  // h = 0.02 and 0.01, t_end = 12
};

const NonlinearRuns& nonlinear_runs()
{
  static const NonlinearRuns runs{simulate(nonlinear_config(0.02, 12.0)), simulate(nonlinear_config(0.01, 12.0))};
  return runs;
}

Outcome energy_conservation()
{
  const auto& r = nonlinear_runs().coarse;
  return {r.energy_drift <= 1e-8, "E = " + fmt("%.6f", r.E) + ", scheme energy drift " + sci(r.energy_drift) +
                                      " over [0, 12] (limit 1e-8)"};
}

Outcome flux_closure()
{
  const auto& runs = nonlinear_runs();
  const double E = runs.coarse.E;
  bool ok = true;
  std::string detail;
  for (std::size_t j = 0; j < runs.coarse.ledgers.size(); ++j) {
    const auto& lc = runs.coarse.ledgers[j];
    const auto& lf = runs.fine.ledgers[j];
    const double rc = std::abs(lc.closure_residual(index_at(lc.t, 12.0)));
    const double rf = std::abs(lf.closure_residual(index_at(lf.t, 12.0)));
    const double factor = rc / rf;
    const double rise = std::max(lc.max_increase(), lf.max_increase());
    ok = ok && rc <= 0.02 * E && rf <= 0.02 * E && factor >= 1.8 && rise <= 1e-6 * E;
    detail += (j ? "; " : "") + std::string("R=") + fmt("%g", lc.R) + ": " + sci(rc / E) + "E -> " + sci(rf / E) +
              "E, x" + fmt("%.2f", factor) + ", rise " + sci(rise / E) + "E";
  }
  return {ok, detail + " (limits 2%E, x1.8, 1e-6E)"};
}

Outcome shell_mass()
{
  const auto& r = nonlinear_runs().coarse;
  const auto c = preset_config("exterior-scattering");
  const double mass = r.shell_lp.integrate(0.0, 12.0);
  const double bound = (c.problem.p + 1.0) * (c.diagnostics.shell_R2 - c.diagnostics.shell_R1) * r.E;
  return {mass <= bound, "space-time shell mass " + sci(mass) + " <= (p+1)(R2-R1)E = " + sci(bound)};
}

// ---------------------------------------------------------------- 6-7

const SimulationResult& scattering_run()
{
  static const SimulationResult r = simulate(preset_config("exterior-scattering"));
  return r;
}

Outcome radiation_extraction()
{
  const auto& r = scattering_run();
  const auto& est = *r.estimate;
  const bool cauchy = strictly_decreasing(est.cauchy_history);
  const bool bound = est.l2_norm2 <= 2.0 * r.E;
  const auto lin = simulate(preset_config("linear-validate"));
  const double iso = std::abs(lin.estimate->l2_norm2 - lin.E) / lin.E;
  return {cauchy && bound && iso <= 0.02,
          "distances t->2t for t = 3, 6, 12: " + list(est.cauchy_history) + ", |G|^2 = " + fmt("%.4f", est.l2_norm2) +
              " vs 2E = " + fmt("%.4f", 2.0 * r.E) + "; linear |G|^2 = " + fmt("%.5f", lin.estimate->l2_norm2) +
              " vs E = " + fmt("%.5f", lin.E) + ", isometry gap " + sci(iso) + " (limit 2%)"};
}

Outcome exterior_scattering()
{
  const auto& r = scattering_run();
  const bool ok = r.residual.size() == 3 && strictly_decreasing(r.residual) && r.residual.back() <= 0.02 * r.E;
  return {ok, "residual at R = -2, t = 6, 9, 12: " + list(r.residual) + ", final " + sci(r.residual.back() / r.E) +
                  "E (limit 2%E)"};
}

// ---------------------------------------------------------------- 8-9

struct DecompositionRuns {
  double E = 0.0;
  DecompositionSeries coarse, fine;   // T = 8 at h = 0.04 and 0.01
  std::vector<DecompositionSeries> ladder;  // T in {4, 8, 12, 16} at h = 0.02
};

std::vector<DecompositionSeries> decomposition_at(double h, std::vector<double> Ts)
{
  Config c = preset_config("decomposition-study");
  c.grid = make_grid(GridMode::radial, 3, h, c.grid.extent, 0.5 * h);
  c.decomposition.options.T_values = std::move(Ts);
  c.decomposition.options.observe_every = std::max(1, static_cast<int>(std::lround(0.1 / c.grid.dt)));
  return run_decomposition(c);
}

const DecompositionRuns& decomposition_runs()
{
  static const DecompositionRuns runs = [] {
    DecompositionRuns r;
    const auto c = preset_config("decomposition-study");
    r.E = total_energy(init_from_data(c.problem, c.grid), c.grid, c.problem).total;
    r.coarse = decomposition_at(0.04, {8.0}).front();
    r.ladder = decomposition_at(0.02, {4.0, 8.0, 12.0, 16.0});
    r.fine = decomposition_at(0.01, {8.0}).front();
    return r;
  }();
  return runs;
}

Outcome decomposition_identities()
{
  const auto& runs = decomposition_runs();
  const auto& mid = runs.ladder[1];
  const double oi1 = std::log2(runs.coarse.idw_max / mid.idw_max), oi2 = std::log2(mid.idw_max / runs.fine.idw_max);
  const double ov1 = std::log2(runs.coarse.vpw_max / mid.vpw_max), ov2 = std::log2(mid.vpw_max / runs.fine.vpw_max);
  const double closure = std::max({runs.coarse.w_energy_residual, mid.w_energy_residual, runs.fine.w_energy_residual});
  const bool ok = std::min({oi1, oi2, ov1, ov2}) >= 1.7 && closure <= 0.02 * runs.E;
  return {ok, "T = 8, h = 0.04/0.02/0.01: w-u outside cone " + list({runs.coarse.idw_max, mid.idw_max, runs.fine.idw_max}) +
                  " orders " + fmt("%.2f", oi1) + ", " + fmt("%.2f", oi2) + "; v+w-u " +
                  list({runs.coarse.vpw_max, mid.vpw_max, runs.fine.vpw_max}) + " orders " + fmt("%.2f", ov1) + ", " +
                  fmt("%.2f", ov2) + " (need >= 1.7); w-energy closure " + sci(closure / runs.E) + "E (limit 2%E)"};
}

Outcome t_ladder()
{
  const auto& runs = decomposition_runs();
  const double E = runs.E, slack = 1e-3 * E;
  std::vector<double> data, sup, str;
  for (const auto& s : runs.ladder) {
    data.push_back(s.data_norm);
    sup.push_back(s.sup_interior);
    str.push_back(s.strichartz_w);
  }
  const double C = data.front() / E;
  bool uniform = true;
  for (double x : data) uniform = uniform && x <= C * E;
  const bool ok = max_rise(data) <= slack && max_rise(sup) <= slack && max_rise(str) <= slack && uniform;
  return {ok, "T = 4, 8, 12, 16: data " + list(data) + ", sup interior " + list(sup) + ", chi2 w L^qL^r " + list(str) +
                  " (rise limit 1e-3E = " + sci(slack) + "), data <= " + fmt("%.4f", C) + "E"};
}

// ---------------------------------------------------------------- 10

Config cartesian_config()
{
  Config c;
  c.grid = make_grid(GridMode::cartesian3d, 3, 0.2, 15.9, 0.02);  // 160^3
  c.problem.d = 3;
  c.problem.p = 4.0;
  c.problem.scheme = Scheme::leapfrog;
  c.problem.data.family = "offset-bumps";
  c.problem.data.amplitude = 1.0;
  c.problem.data.width = 2.0;
  c.problem.R_support = 3.2;
  auto& d = c.diagnostics;
  d.t_end = 5.0;
  d.observe_every = 25;
  d.cone_offsets = {-2.0, 0.0, 2.0};
  d.shell_R1 = 0.0;
  d.shell_R2 = 2.0;
  d.window_R1 = -2.0;
  d.window_R2 = 2.0;
  d.profile_times = {1.5, 3.0, 5.0};
  d.residual_times = {3.0, 4.0, 5.0};
  d.residual_R = -2.0;
  return c;
}

Outcome cartesian_smoke()
{
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = simulate(cartesian_config());
  const double secs = seconds_since(t0);
  double rise = 0.0;
  for (const auto& l : r.ledgers) rise = std::max(rise, l.max_increase());
  const auto& ang = r.shell_angular.v;
  const std::vector<double> last(ang.end() - 3, ang.end());
  const bool ok = r.energy_drift <= 1e-3 && rise <= 1e-4 * r.E && strictly_decreasing(last) &&
                  strictly_decreasing(r.residual) && secs <= 1800.0;
  return {ok, "160^3, drift " + sci(r.energy_drift) + " (limit 1e-3), E_ext rise " + sci(rise / r.E) +
                  "E (limit 1e-4E), shell angular energy " + list(last) + ", profile residual " + list(r.residual) +
                  ", " + fmt("%.0f", secs) + " s"};
}

// ---------------------------------------------------------------- 11

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism()
{
  std::size_t compared = 0;
  std::vector<std::string> differing;
  for (const auto& name : preset_names()) {
    std::vector<fs::path> dirs;
    for (const char* run : {"a", "b"}) {
      const auto dir = scratch("det_" + name + "_" + run);
      const std::string cmd = std::string("\"") + CONEWAVE_PATH + "\" --deterministic preset " + name + " --out \"" +
                              dir.string() + "\" > /dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, "conewave preset " + name + " failed"};
      dirs.push_back(dir);
    }
    std::set<std::string> names;
    for (const auto& dir : dirs)
      for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.path().extension() == ".csv") names.insert(fs::relative(e.path(), dir).string());
    for (const auto& f : names) {
      ++compared;
      if (!fs::exists(dirs[0] / f) || !fs::exists(dirs[1] / f) || slurp(dirs[0] / f) != slurp(dirs[1] / f))
        differing.push_back(name + "/" + f);
    }
  }
  std::string detail = std::to_string(compared) + " CSVs across " + std::to_string(preset_names().size()) +
                       " presets, " + std::to_string(differing.size()) + " differ";
  for (const auto& f : differing) detail += " " + f;
  return {differing.empty() && compared > 0, detail};
}

}  // namespace

int main(int argc, char** argv)
{
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exponent identities", exponent_identities},
      {"linear solver order", linear_order},
      {"energy conservation", energy_conservation},
      {"light-cone flux closure", flux_closure},
      {"shell mass bound", shell_mass},
      {"radiation field extraction", radiation_extraction},
      {"exterior scattering residual", exterior_scattering},
      {"decomposition identities", decomposition_identities},
      {"release-time ladder", t_ladder},
      {"non-radial smoke test", cartesian_smoke},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}

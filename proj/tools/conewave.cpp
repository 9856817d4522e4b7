// conewave: command-line front end for the simulation and diagnostic pipelines.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cwave/parallel.hpp"
#include "cwave/pipeline.hpp"

using namespace cwave;
namespace fs = std::filesystem;

namespace {

Config load(const std::string& path, const std::string& fallback_preset)
{
  if (!path.empty()) return parse_config(path);
  return preset_config(fallback_preset);
}

void print_summary(const RunManifest& m, const fs::path& out)
{
  std::cout << m.command << ": " << m.files.size() << " files in " << out.string() << "\n"
            << m.summary.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"conewave: defocusing wave equation laboratory"};
  app.require_subcommand(1);
  app.fallthrough();
  bool det = false;
  int threads = 0;
  app.add_flag("--deterministic", det, "fixed reduction order; reruns are byte-identical");
  app.add_option("--threads", threads, "worker threads (0 keeps the OpenMP default)")->check(CLI::NonNegativeNumber);

  std::string config_path, out = "out";

  auto* exps = app.add_subcommand("exponents", "exponent table for (d, p) or a sweep");
  int d = 3;
  std::string p = "4";
  bool sweep = false;
  int count = 50;
  exps->add_option("--d", d, "dimension")->check(CLI::Range(3, 5));
  exps->add_option("--p", p, "exponent as num/den");
  exps->add_flag("--table-sweep", sweep, "sweep every d in {3,4,5}");
  exps->add_option("--count", count, "p values per dimension in the sweep")->check(CLI::PositiveNumber);
  exps->add_option("--out", out, "output directory (sweep only)");

  auto* sim = app.add_subcommand("simulate", "run a configured simulation with all diagnostics");
  std::string scheme;
  int snapshot_every = -1;
  sim->add_option("--config", config_path, "configuration file")->required();
  sim->add_option("--scheme", scheme, "leapfrog or conservative (overrides the config)");
  sim->add_option("--snapshot-every", snapshot_every, "steps between CWV1 snapshots");
  sim->add_option("--out", out, "output directory");

  auto* rad = app.add_subcommand("radiation", "extract G and the exterior scattering residual");
  rad->add_option("--config", config_path, "configuration file (default: exterior-scattering preset)");
  rad->add_option("--out", out, "output directory");

  auto* dec = app.add_subcommand("decompose", "u = v_T + w_T study over the release times");
  dec->add_option("--config", config_path, "configuration file (default: decomposition-study preset)");
  dec->add_option("--out", out, "output directory");

  auto* val = app.add_subcommand("validate", "check a configuration and print its normalized form");
  val->add_option("--config", config_path, "configuration file")->required();

  auto* pre = app.add_subcommand("preset", "run a named experiment");
  std::string preset;
  pre->add_option("name", preset, "preset name")->required()->check(CLI::IsMember(preset_names()));
  pre->add_option("--config", config_path, "override the preset's configuration");
  pre->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);
  set_deterministic(det);
  if (threads > 0) set_threads(threads);

  try {
    if (*exps) {
      if (sweep) {
        fs::create_directories(out);
        write_exponent_csv(fs::path(out) / "exponents.csv", exponent_sweep({3, 4, 5}, count));
        print_summary(finish_manifest("exponents --table-sweep", nullptr, out, {"exponents.csv"},
                                      {{"count", count}}),
                      out);
      } else {
        const auto t = lemma_pair(d, parse_rational(p));
        std::cout << "d,p,p_e,s_p,q,r,k1,k2,kappa1,kappa2,admissible\n"
                  << t.d << ',' << to_string(t.p) << ',' << to_string(t.p_e) << ',' << to_string(t.s_p) << ','
                  << to_string(t.q) << ',' << to_string(t.r) << ',' << to_string(t.k1) << ','
                  << to_string(t.k2) << ',' << to_string(t.kappa1) << ',' << to_string(t.kappa2) << ','
                  << (table_violations(t).empty() ? "true" : "false") << "\n";
      }
    } else if (*sim) {
      Config c = parse_config(config_path);
      if (!scheme.empty()) c.problem.scheme = parse_scheme(scheme);
      if (snapshot_every >= 0) c.diagnostics.snapshot_every = snapshot_every;
      const auto r = simulate(c, out);
      nlohmann::json s{{"energy", r.E}, {"energy_drift", r.energy_drift}};
      print_summary(finish_manifest("simulate", &c, out, r.files, s), out);
    } else if (*rad) {
      const Config c = load(config_path, "exterior-scattering");
      const auto r = simulate(c, out);
      nlohmann::json s{{"energy", r.E}, {"residuals", r.residual}};
      if (r.estimate) {
        s["G_norm2"] = r.estimate->l2_norm2;
        s["G_bound_2E"] = g_norm_bound_check(*r.estimate, r.E);
        s["cauchy_history"] = r.estimate->cauchy_history;
      }
      print_summary(finish_manifest("radiation", &c, out, r.files, s), out);
    } else if (*dec) {
      const Config c = load(config_path, "decomposition-study");
      std::vector<std::string> files;
      const auto series = run_decomposition(c, out, &files);
      nlohmann::json s = nlohmann::json::array();
      for (const auto& x : series)
        s.push_back({{"T", x.T}, {"data_norm", x.data_norm}, {"sup_interior", x.sup_interior},
                     {"strichartz_w", x.strichartz_w}, {"w_energy_residual", x.w_energy_residual}});
      print_summary(finish_manifest("decompose", &c, out, files, s), out);
    } else if (*val) {
      const Config c = parse_config(config_path);
      std::cout << "# valid; causality budget "
                << causality_budget(c.grid, c.problem, diagnostic_margin(c)) << "\n"
                << config_echo(c);
    } else if (*pre) {
      const Config c = load(config_path, preset);
      print_summary(run_preset(preset, c, out), out);
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

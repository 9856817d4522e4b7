// Experiment drivers behind the command-line tool: a simulation with every
// diagnostic, the linear convergence study, the decomposition study and the
// exponent sweep, plus the named presets that chain them.

#ifndef CWAVE_PIPELINE_HPP
#define CWAVE_PIPELINE_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cwave/config.hpp"
#include "cwave/decomposition.hpp"
#include "cwave/diagnostics.hpp"
#include "cwave/exponents.hpp"
#include "cwave/io.hpp"
#include "cwave/radiation.hpp"

namespace cwave {

struct SimulationResult {
  double E = 0.0;             // total energy of the data
  double energy_drift = 0.0;  // max |E_n - E_0| / E_0 of the scheme energy
  std::vector<EnergyReport> energy;
  std::vector<FluxLedger> ledgers;  // one per cone offset
  TimeSeries shell_lp;              // integral of |u|^{p+1} over the shell
  TimeSeries morawetz;
  TimeSeries weighted;
  TimeSeries shell_angular;  // integral of |angular grad u|^2 over the shell
  std::vector<CharacteristicProfile> profiles;
  std::optional<RadiationFieldEstimate> estimate;
  std::vector<double> residual_t, residual;
  FieldState final_state;
  std::vector<std::string> files;  // written into the output directory
};

/// Runs the configured problem to diagnostics.t_end.  With a non-empty
/// out_dir writes energy.csv, flux_R<R>.csv, morawetz.csv, norms.csv and,
/// when profiles are configured, radiation.csv, gfield.csv, residuals.csv,
/// plus CWV1 snapshots every snapshot_every steps.
SimulationResult simulate(const Config& config, const std::filesystem::path& out_dir = {});

struct ConvergenceRow {
  double h = 0.0;
  double error = 0.0;
  double order = 0.0;  // log2 of the error ratio to the previous row; 0 on the first
};

/// Max-norm error against the exact d = 3 free wave at time t over
/// r <= extent/2, for each h (dt/h and the data taken from `config`).
std::vector<ConvergenceRow> linear_convergence(const Config& config, const std::vector<double>& hs,
                                               double t);

std::vector<DecompositionSeries> run_decomposition(const Config& config,
                                                   const std::filesystem::path& out_dir = {},
                                                   std::vector<std::string>* files = nullptr);

/// lemma_pair over p_lattice(d, count) for every d.
std::vector<ExponentTable> exponent_sweep(const std::vector<int>& ds, int count);
void write_exponent_csv(const std::filesystem::path& path, const std::vector<ExponentTable>& tables);

const std::vector<std::string>& preset_names();
/// Default configuration of a preset; throws std::invalid_argument for
/// unknown names.
Config preset_config(const std::string& name);
/// Runs the preset pipeline into out_dir and writes manifest.json.
RunManifest run_preset(const std::string& name, const Config& config, const std::filesystem::path& out_dir);

/// Writes the manifest for a finished command.
RunManifest finish_manifest(const std::string& command, const Config* config,
                            const std::filesystem::path& out_dir, const std::vector<std::string>& files,
                            nlohmann::json summary);

}  // namespace cwave

#endif  // CWAVE_PIPELINE_HPP

// Experiment configuration: one INI-style file with [grid], [problem],
// [diagnostics] and [decomposition] sections.  Parsing validates every
// cross-field constraint and reports all violations at once.

#ifndef CWAVE_CONFIG_HPP
#define CWAVE_CONFIG_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "cwave/decomposition.hpp"
#include "cwave/grid.hpp"
#include "cwave/solver.hpp"

namespace cwave {

struct DiagnosticsConfig {
  double t_end = 12.0;
  int observe_every = 5;
  std::vector<double> cone_offsets{-2.0, 0.0, 2.0, 4.0};
  double shell_R1 = 0.0, shell_R2 = 2.0;
  double window_R1 = -4.0, window_R2 = 4.0;
  std::vector<double> profile_times;   // characteristic profiles; >= 3 to extract G
  std::vector<double> residual_times;  // exterior scattering residual
  double residual_R = -2.0;
  double kappa = 1.0;  // weighted-energy exponent
  int sphere_n_theta = 32, sphere_n_phi = 64;
  int snapshot_every = 0;  // steps; 0 disables
};

struct DecompositionConfig {
  bool enabled = false;
  DecompositionOptions options;
};

struct Config {
  GridSpec grid;
  ProblemSpec problem;
  DiagnosticsConfig diagnostics;
  DecompositionConfig decomposition;
};

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

Config parse_config_text(const std::string& text);
Config parse_config(const std::string& path);

/// Empty when the configuration is consistent.
std::vector<std::string> config_violations(const Config& config);

/// INI text that parses back to the same configuration (doubles at 17 digits).
std::string config_echo(const Config& config);

/// Sphere quadrature for the configured grid (collapsed for radial runs).
SphereGrid config_sphere(const Config& config);

/// Radius beyond t reached by any configured diagnostic.
double diagnostic_margin(const Config& config);

}  // namespace cwave

#endif  // CWAVE_CONFIG_HPP

// Energies, light-cone fluxes, space-time norms and the inward/outward
// quantity, evaluated on synchronized solver states.

#ifndef CWAVE_DIAGNOSTICS_HPP
#define CWAVE_DIAGNOSTICS_HPP

#include <span>
#include <vector>

#include "cwave/grid.hpp"
#include "cwave/solver.hpp"

namespace cwave {

struct EnergyReport {
  double t = 0.0;
  double kinetic = 0.0;
  double gradient = 0.0;
  double potential = 0.0;
  double total = 0.0;
};

DensityParams density_params(const ProblemSpec& problem);

EnergyReport total_energy(const FieldState& state, const GridSpec& grid, const ProblemSpec& problem);

/// Energy in {|x| > t + R}.
double exterior_energy(const FieldState& state, const GridSpec& grid, const ProblemSpec& problem,
                       double R);

/// Energy in an arbitrary region.
double region_energy(const FieldState& state, const GridSpec& grid, const ProblemSpec& problem,
                     const RegionSpec& region);

/// Integral of (1 + |x|)^kappa times the energy density.
double weighted_energy(const FieldState& state, const GridSpec& grid, const ProblemSpec& problem,
                       double kappa);

/// Integral of |u_r + (d-1)u/(2|x|) + u_t|^2 + (d-1)(d-3)|u|^2/(16|x|^2) + |angular grad u|^2.
double morawetz_report(const FieldState& state, const GridSpec& grid, const ProblemSpec& problem);

/// Integral of |angular grad u|^2 over a region (zero for radial grids).
double angular_energy(const FieldState& state, const GridSpec& grid, const RegionSpec& region);

// Weights of the cone flux integrand
//   a |angular grad u|^2 + a |(d_r + d_t) u|^2 + b |u|^{p+1}/(p+1).
// The nonlinear energy flux uses a = 1/2, b = 1; the linear identity for
// the decomposition uses a = 1, b = 0.
struct FluxWeights {
  double gradient = 0.5;
  double potential = 1.0;
};

/// Integral over the sphere |x| = t + R of the flux integrand (d sigma with
/// the r^{d-1} factor included).  Zero when t + R <= 0.  Throws
/// std::out_of_range when the sphere leaves the interpolation range.
double cone_flux_density(const FieldState& state, const GridSpec& grid, const ProblemSpec& problem,
                         double R, const SphereGrid& sphere, FluxWeights weights = {});

// Exterior energy and accumulated flux through |x| = t + R, sampled at
// observer times.  The flux time integral uses the trapezoid rule between
// consecutive samples.
struct FluxLedger {
  double R = 0.0;
  FluxWeights weights;
  std::vector<double> t;
  std::vector<double> E_ext;
  std::vector<double> Phi;      // accumulated from the first sample
  std::vector<double> density;  // instantaneous flux integrand

  /// E_ext(t_0) - E_ext(t_k) - Phi(t_0 -> t_k).
  double closure_residual(std::size_t k) const;
  /// Largest increase of E_ext between consecutive samples (0 if monotone).
  double max_increase() const;
};

void cone_flux_accumulate(FluxLedger& ledger, const FieldState& state, const GridSpec& grid,
                          const ProblemSpec& problem, const SphereGrid& sphere);

// (t_k, value_k) samples of a time-dependent integral.
struct TimeSeries {
  std::vector<double> t;
  std::vector<double> v;

  void add(double time, double value);
  /// Trapezoid integral over the samples inside [T, t1].
  double integrate(double T, double t1) const;
};

/// Space-time integral of |u|^{p+1} over the cone shell, one sample per call.
double shell_lp_density(const FieldState& state, const GridSpec& grid, const ProblemSpec& problem,
                        double R1, double R2);

/// Integral of |f|^r over the region at time t.
double lr_integral(const GridSpec& grid, const RegionSpec& region, double t,
                   std::span<const double> f, double r);

// L^q_t L^r_x norm from samples of the spatial integral I(t) = int |f|^r.
// The time integral of I^{q/r} uses the left-endpoint rule: each sample is
// held until the next sample (the last one until the window end).
class MixedNormAccumulator {
 public:
  MixedNormAccumulator(double q, double r);

  void add(double t, double spatial_integral);
  /// (sum of dt I^{q/r})^{1/q} over [T, t1].  Throws on an empty window.
  double finalize(double T, double t1) const;
  double finalize() const;

  double q() const { return q_; }
  double r() const { return r_; }
  const std::vector<double>& times() const { return t_; }

 private:
  double q_, r_;
  std::vector<double> t_;
  std::vector<double> value_;  // I^{q/r}
};

}  // namespace cwave

#endif  // CWAVE_DIAGNOSTICS_HPP

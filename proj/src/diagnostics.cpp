#include "cwave/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cwave/parallel.hpp"

namespace cwave {

DensityParams density_params(const ProblemSpec& problem)
{
  return DensityParams{problem.p, !problem.linear, nullptr};
}

EnergyReport total_energy(const FieldState& state, const GridSpec& grid, const ProblemSpec& problem)
{
  const auto par = density_params(problem);
  const auto whole = RegionSpec::whole();
  EnergyReport e;
  e.t = state.t;
  e.kinetic = region_integral(state, grid, whole, Density::kinetic, par);
  e.gradient = region_integral(state, grid, whole, Density::gradient, par);
  e.potential = region_integral(state, grid, whole, Density::potential, par);
  e.total = e.kinetic + e.gradient + e.potential;
  return e;
}

double region_energy(const FieldState& state, const GridSpec& grid, const ProblemSpec& problem,
                     const RegionSpec& region)
{
  return region_integral(state, grid, region, Density::energy, density_params(problem));
}

double exterior_energy(const FieldState& state, const GridSpec& grid, const ProblemSpec& problem,
                       double R)
{
  return region_energy(state, grid, problem, RegionSpec::exterior(R));
}

double weighted_energy(const FieldState& state, const GridSpec& grid, const ProblemSpec& problem,
                       double kappa)
{
  if (kappa < 0.0) throw std::invalid_argument("weighted energy needs kappa >= 0");
  auto e = nodal_density(state, grid, Density::energy, density_params(problem));
  for (std::size_t i = 0; i < e.size(); ++i) e[i] *= std::pow(1.0 + grid.radius(i), kappa);
  return integrate_nodal(grid, RegionSpec::whole(), state.t, e, CutCell::linear);
}

double morawetz_report(const FieldState& state, const GridSpec& grid, const ProblemSpec& problem)
{
  return region_integral(state, grid, RegionSpec::whole(), Density::morawetz,
                         density_params(problem));
}

double angular_energy(const FieldState& state, const GridSpec& grid, const RegionSpec& region)
{
  if (grid.radial()) return 0.0;
  std::vector<double> a(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t i) {
    const double r = grid.radius(i);
    if (r < grid.h) return;
    const Vec3 x = grid.position(i);
    const Vec3 g = centered_gradient(state.u, grid, i);
    const double ur = (x[0] * g[0] + x[1] * g[1] + x[2] * g[2]) / r;
    a[i] = std::max(0.0, g[0] * g[0] + g[1] * g[1] + g[2] * g[2] - ur * ur);
  });
  return integrate_nodal(grid, region, state.t, a);
}

double cone_flux_density(const FieldState& state, const GridSpec& grid, const ProblemSpec& problem,
                         double R, const SphereGrid& sphere, FluxWeights weights)
{
  const double rho = state.t + R;
  if (rho <= 0.0) return 0.0;
  if (rho > grid.max_sample_radius())
    throw std::out_of_range("flux sphere radius " + std::to_string(rho) + " leaves the grid");
  const bool nonlinear = !problem.linear && weights.potential != 0.0;
  const double jac = std::pow(rho, grid.d - 1);
  auto integrand = [&](const PointSample& s) {
    const double out = s.ur + s.ut;
    double v = weights.gradient * (s.angular2 + out * out);
    if (nonlinear) v += weights.potential * potential_density(s.u, problem.p);
    return v;
  };
  if (grid.radial()) return sphere_area(grid.d) * jac * integrand(interpolate_at(state, grid, rho));
  return jac * parallel_sum(sphere.size(), [&](std::size_t j) {
           const Vec3& n = sphere.directions[j];
           const Vec3 x{rho * n[0], rho * n[1], rho * n[2]};
           return sphere.weights[j] * integrand(interpolate_at(state, grid, x));
         });
}

double FluxLedger::closure_residual(std::size_t k) const
{
  return E_ext.front() - E_ext.at(k) - Phi.at(k);
}

double FluxLedger::max_increase() const
{
  double worst = 0.0;
  for (std::size_t k = 1; k < E_ext.size(); ++k) worst = std::max(worst, E_ext[k] - E_ext[k - 1]);
  return worst;
}

void cone_flux_accumulate(FluxLedger& ledger, const FieldState& state, const GridSpec& grid,
                          const ProblemSpec& problem, const SphereGrid& sphere)
{
  const double dens = cone_flux_density(state, grid, problem, ledger.R, sphere, ledger.weights);
  double phi = 0.0;
  if (!ledger.t.empty()) {
    const double dt = state.t - ledger.t.back();
    if (!(dt > 0.0)) throw std::invalid_argument("flux samples must advance in time");
    phi = ledger.Phi.back() + 0.5 * dt * (ledger.density.back() + dens);
  }
  ledger.t.push_back(state.t);
  ledger.E_ext.push_back(exterior_energy(state, grid, problem, ledger.R));
  ledger.Phi.push_back(phi);
  ledger.density.push_back(dens);
}

void TimeSeries::add(double time, double value)
{
  if (!t.empty() && !(time > t.back()))
    throw std::invalid_argument("time series samples must advance in time");
  t.push_back(time);
  v.push_back(value);
}

double TimeSeries::integrate(double T, double t1) const
{
  double s = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (t[k - 1] < T - 1e-12 || t[k] > t1 + 1e-12) continue;
    s += 0.5 * (t[k] - t[k - 1]) * (v[k] + v[k - 1]);
  }
  return s;
}

double shell_lp_density(const FieldState& state, const GridSpec& grid, const ProblemSpec& problem,
                        double R1, double R2)
{
  DensityParams par = density_params(problem);
  return region_integral(state, grid, RegionSpec::shell(R1, R2), Density::lp_mass, par);
}

double lr_integral(const GridSpec& grid, const RegionSpec& region, double t,
                   std::span<const double> f, double r)
{
  std::vector<double> a(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) a[i] = std::pow(std::abs(f[i]), r);
  return integrate_nodal(grid, region, t, a);
}

MixedNormAccumulator::MixedNormAccumulator(double q, double r) : q_(q), r_(r)
{
  if (!(q >= 1.0) || !(r >= 1.0)) throw std::invalid_argument("mixed norm needs q, r >= 1");
}

void MixedNormAccumulator::add(double t, double spatial_integral)
{
  if (!t_.empty() && !(t > t_.back()))
    throw std::invalid_argument("mixed-norm samples must advance in time");
  if (spatial_integral < 0.0) throw std::invalid_argument("negative L^r integral");
  t_.push_back(t);
  value_.push_back(std::pow(spatial_integral, q_ / r_));
}

double MixedNormAccumulator::finalize(double T, double t1) const
{
  double s = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < t_.size(); ++k) {
    if (t_[k] < T - 1e-12 || t_[k] >= t1 - 1e-12) continue;
    const double end = k + 1 < t_.size() ? std::min(t_[k + 1], t1) : t1;
    s += (end - t_[k]) * value_[k];
    any = true;
  }
  if (!any)
    throw std::invalid_argument("mixed norm window [" + std::to_string(T) + ", " +
                                std::to_string(t1) + "] contains no samples");
  return std::pow(s, 1.0 / q_);
}

double MixedNormAccumulator::finalize() const
{
  if (t_.empty()) throw std::invalid_argument("mixed norm has no samples");
  return finalize(t_.front(), t_.back());
}

}  // namespace cwave

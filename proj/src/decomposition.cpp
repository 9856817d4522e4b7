#include "cwave/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "cwave/exponents.hpp"
#include "cwave/parallel.hpp"

namespace cwave {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

// Lagrange weights on the nodes 0, 1, 2, 3.
void lagrange4(double x, double w[4])
{
  w[0] = -(x - 1) * (x - 2) * (x - 3) / 6;
  w[1] = x * (x - 2) * (x - 3) / 2;
  w[2] = -x * (x - 1) * (x - 3) / 2;
  w[3] = x * (x - 1) * (x - 2) / 6;
}

long step_of(double t, double dt, const char* what)
{
  const double k = t / dt;
  if (std::abs(k - std::round(k)) > 1e-6)
    throw std::invalid_argument(std::string(what) + " = " + std::to_string(t) +
                                " is not a multiple of dt = " + std::to_string(dt));
  return std::lround(k);
}

DensityParams linear_params(double p) { return DensityParams{p, false, nullptr}; }

// Fills u_prev for w: donor level outside the cone, a Taylor step of
// (w0, w1 = 0) inside, where the source vanishes.
void fill_previous_level(FieldState& w, const FieldState& donor, const GridSpec& grid, double R)
{
  if (donor.u_prev.size() != grid.size()) return;
  std::vector<double> lap(grid.size());
  laplacian(w.u, grid, lap);
  const double dt = grid.dt;
  w.u_prev.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.radius(i) >= R)
      w.u_prev[i] = donor.u_prev[i];
    else
      w.u_prev[i] = w.u[i] - dt * w.ut[i] + 0.5 * dt * dt * lap[i];
  }
}

}  // namespace

double cutoff_phi(double x)
{
  if (x <= 0.5) return 0.0;
  if (x >= 1.0) return 1.0;
  const double s = 2.0 * x - 1.0;
  const double v = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
  return std::clamp(v, 0.0, 1.0);
}

ConeTrace::ConeTrace(double R2, const GridSpec& grid, const SphereGrid& sphere)
    : R2_(R2), grid_(grid), sphere_(grid.radial() ? SphereGrid::collapsed(grid.d) : sphere)
{
}

void ConeTrace::record(const FieldState& state)
{
  const double rho = state.t + R2_;
  if (rho <= 0.0) return;
  if (!t_.empty() && std::abs(state.t - t_.back() - grid_.dt) > 1e-9 * std::max(1.0, state.t))
    throw std::invalid_argument("cone trace samples must be consecutive steps");
  if (rho > grid_.max_sample_radius())
    throw std::out_of_range("cone trace radius " + std::to_string(rho) + " leaves the grid");
  const std::size_t m = sphere_.size();
  std::vector<double> u(m);
  std::vector<double> dens(m);
  parallel_for(m, [&](std::size_t j) {
    if (grid_.radial()) {
      const auto s = interpolate_at(state, grid_, rho);
      u[j] = s.u;
      dens[j] = (s.ur + s.ut) * (s.ur + s.ut);
      return;
    }
    const Vec3& n = sphere_.directions[j];
    const auto s = interpolate_at(state, grid_, Vec3{rho * n[0], rho * n[1], rho * n[2]});
    const double ur = s.grad[0] * n[0] + s.grad[1] * n[1] + s.grad[2] * n[2];
    u[j] = s.u;
    dens[j] = (ur + s.ut) * (ur + s.ut) + s.angular2;
  });
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) total += sphere_.weights[j] * dens[j];
  t_.push_back(state.t);
  u_.push_back(std::move(u));
  density_.push_back(total * std::pow(rho, grid_.d - 1));
}

bool ConeTrace::covers(double t0, double t1) const
{
  if (t_.size() < 4) return false;
  const double eps = 1e-9 * grid_.dt;
  return t0 >= t_.front() - eps && t1 <= t_.back() + eps;
}

double ConeTrace::u_at(double t, std::size_t node) const
{
  if (!covers(t, t))
    throw std::out_of_range("cone trace does not cover t = " + std::to_string(t));
  const double k = (t - t_.front()) / grid_.dt;
  const long last = static_cast<long>(t_.size()) - 4;
  const long j0 = std::clamp(static_cast<long>(std::floor(k)) - 1, 0L, last);
  double w[4];
  lagrange4(k - static_cast<double>(j0), w);
  double v = 0.0;
  for (int m = 0; m < 4; ++m) v += w[m] * u_[static_cast<std::size_t>(j0 + m)][node];
  return v;
}

double ConeTrace::hdot1_norm2(double t0, double t1) const
{
  double s = 0.0;
  for (std::size_t k = 1; k < t_.size(); ++k) {
    if (t_[k - 1] < t0 - 1e-12 || t_[k] > t1 + 1e-12) continue;
    s += 0.5 * (t_[k] - t_[k - 1]) * (density_[k] + density_[k - 1]);
  }
  return s;
}

NodeTrace::NodeTrace(const GridSpec& grid, double T, double R2)
    : dt_(grid.dt), slot_(grid.size(), npos)
{
  const long NT = step_of(T, grid.dt, "release time T");
  const double outer = T + R2, inner = 0.5 * (T + R2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.radius(i);
    if (!(r > inner && r < outer)) continue;
    const double k = (r - R2) / dt_;
    if (k < 0.0) throw std::invalid_argument("node trace needs T >= R2");
    const long base = std::clamp(static_cast<long>(std::floor(k)) - 1, 0L, NT - 3);
    slot_[i] = nodes_.size();
    nodes_.push_back(i);
    base_.push_back(base);
    x_.push_back(k - static_cast<double>(base));
  }
  values_.assign(nodes_.size(), {0.0, 0.0, 0.0, 0.0});
  filled_.assign(nodes_.size(), 0);
}

void NodeTrace::record(long step, const std::vector<double>& u)
{
  parallel_for(nodes_.size(), [&](std::size_t a) {
    const long m = step - base_[a];
    if (m < 0 || m > 3) return;
    values_[a][static_cast<std::size_t>(m)] = u[nodes_[a]];
    filled_[a] |= static_cast<unsigned char>(1u << m);
  });
}

bool NodeTrace::complete() const
{
  return std::all_of(filled_.begin(), filled_.end(), [](unsigned char f) { return f == 15; });
}

double NodeTrace::value(std::size_t node) const
{
  const std::size_t a = slot_.at(node);
  if (a == npos) return 0.0;
  if (filled_[a] != 15) throw std::logic_error("node trace stencil incomplete");
  double w[4];
  lagrange4(x_[a], w);
  return w[0] * values_[a][0] + w[1] * values_[a][1] + w[2] * values_[a][2] + w[3] * values_[a][3];
}

FieldState build_w_data(double T, double R2, const FieldState& donor, const GridSpec& grid,
                        const ConeTrace& trace)
{
  if (!grid.radial()) throw std::invalid_argument("cone-trace data needs a radial grid; use NodeTrace");
  if (!(T >= std::max(1.0, R2))) throw std::invalid_argument("release time needs T >= max(1, R2)");
  validate_state(donor, grid);
  const double lo = 0.5 * (T - R2);
  if (!trace.covers(lo, T))
    throw std::out_of_range("cone trace does not cover [" + std::to_string(lo) + ", " +
                            std::to_string(T) + "]");
  const double R = T + R2;
  FieldState w = zero_state(grid, T);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.radius(i);
    if (r >= R) {
      w.u[i] = donor.u[i];
      w.ut[i] = donor.ut[i];
      continue;
    }
    const double phi = cutoff_phi(r / R);
    if (phi > 0.0) w.u[i] = phi * trace.u_at(r - R2);
  }
  fill_previous_level(w, donor, grid, R);
  return w;
}

FieldState build_w_data(double T, double R2, const FieldState& donor, const GridSpec& grid,
                        const NodeTrace& trace)
{
  if (!(T >= std::max(1.0, R2))) throw std::invalid_argument("release time needs T >= max(1, R2)");
  validate_state(donor, grid);
  if (!trace.complete()) throw std::out_of_range("node trace incomplete at the release time");
  const double R = T + R2;
  FieldState w = zero_state(grid, T);
  parallel_for(grid.size(), [&](std::size_t i) {
    const double r = grid.radius(i);
    if (r >= R) {
      w.u[i] = donor.u[i];
      w.ut[i] = donor.ut[i];
      return;
    }
    const double phi = cutoff_phi(r / R);
    if (phi > 0.0) w.u[i] = phi * trace.value(i);
  });
  fill_previous_level(w, donor, grid, R);
  return w;
}

FieldState build_v_data(const FieldState& donor, const FieldState& w)
{
  FieldState v;
  v.t = donor.t;
  v.u.resize(donor.u.size());
  v.ut.resize(donor.u.size());
  for (std::size_t i = 0; i < v.u.size(); ++i) {
    v.u[i] = donor.u[i] - w.u[i];
    v.ut[i] = donor.ut[i] - w.ut[i];
  }
  if (donor.u_prev.size() == v.u.size() && w.u_prev.size() == v.u.size()) {
    v.u_prev.resize(v.u.size());
    for (std::size_t i = 0; i < v.u.size(); ++i) v.u_prev[i] = donor.u_prev[i] - w.u_prev[i];
  }
  return v;
}

namespace {

ProblemSpec linear_copy(const ProblemSpec& p)
{
  ProblemSpec l = p;
  l.linear = true;
  l.scheme = Scheme::leapfrog;
  return l;
}

}  // namespace

DecompositionRun::DecompositionRun(double T, const DecompositionOptions& options,
                                   const Stepper& donor, const FieldState& w_data,
                                   const SphereGrid& sphere, double q, double r)
    : options_(options),
      donor_(donor),
      sphere_(sphere),
      linear_(linear_copy(donor.problem())),
      w_(donor.grid(), linear_, w_data, SourceSpec{RegionSpec::exterior(options.R2), &donor}),
      v_(donor.grid(), linear_, build_v_data(donor.state(), w_data),
         SourceSpec{RegionSpec::shell(options.R1, options.R2), &donor}),
      norm_w_(q, r),
      norm_v_(q, r),
      norm_u_(q, r),
      norm_lp_(donor.problem().p + 1, donor.problem().p + 1),
      norm_src_(1.0, 2.0)
{
  if (std::abs(donor.time() - T) > 1e-6 * donor.grid().dt)
    throw std::logic_error("decomposition must start when the donor reaches T");
  const GridSpec& grid = donor.grid();
  series_.T = T;
  FieldState data = w_data;
  data.u_prev.clear();
  data.u_next.clear();
  series_.data_norm = 2.0 * region_integral(data, grid, RegionSpec::ball(options.R2),
                                            Density::energy, linear_params(linear_.p));
  const FieldState u = donor.state();
  const FieldState v = build_v_data(u, w_data);
  double worst = 0.0;
  for (std::size_t i = 0; i < u.u.size(); ++i) {
    worst = std::max(worst, std::abs(w_data.u[i] + v.u[i] - u.u[i]));
    worst = std::max(worst, std::abs(w_data.ut[i] + v.ut[i] - u.ut[i]));
    if (!v.u_prev.empty()) worst = std::max(worst, std::abs(w_data.u_prev[i] + v.u_prev[i] - u.u_prev[i]));
  }
  series_.data_consistency = worst;
}

void DecompositionRun::advance()
{
  w_.advance();
  v_.advance();
}

double DecompositionRun::interior(const FieldState& w_state) const
{
  return 2.0 * region_integral(w_state, w_.grid(), RegionSpec::ball(options_.R2), Density::energy,
                               linear_params(linear_.p));
}

void DecompositionRun::observe(const FieldState& donor_state, bool sample)
{
  const GridSpec& grid = w_.grid();
  const double t = donor_state.t;
  if (std::abs(t - w_.time()) > 1e-6 * grid.dt)
    throw std::logic_error("decomposition observed out of lockstep");
  const double dens =
      cone_flux_density(donor_state, grid, donor_.problem(), options_.R2, sphere_, FluxWeights{1.0, 0.0});
  if (!started_) {
    interior_T_ = interior(w_.state());
    started_ = true;
    sample = true;
  } else {
    flux_ += 0.5 * (t - last_t_) * (dens + last_density_);
  }
  last_t_ = t;
  last_density_ = dens;
  if (!sample) return;

  const FieldState ws = w_.state();
  const auto& u = donor_state.u;
  const auto& w = ws.u;
  const auto& v = v_.current();
  DecompositionSample row;
  row.t = t;
  row.interior_w_energy = interior(ws);
  row.flux = flux_;
  const double layer = options_.layer * grid.h;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = grid.radius(i);
    if (r >= t + options_.R2 + layer) row.idw_residual = std::max(row.idw_residual, std::abs(w[i] - u[i]));
    if (r >= t + options_.R1 + layer)
      row.vpw_residual = std::max(row.vpw_residual, std::abs(v[i] + w[i] - u[i]));
  }
  const auto shell = RegionSpec::shell(options_.R1, options_.R2);
  std::vector<double> nl(u.size());
  const double p = donor_.problem().p;
  const bool nonlinear = !donor_.problem().linear;
  for (std::size_t i = 0; i < u.size(); ++i) nl[i] = nonlinear ? nonlinearity(u[i], p) : 0.0;
  norm_w_.add(t, lr_integral(grid, shell, t, w, norm_w_.r()));
  norm_v_.add(t, lr_integral(grid, shell, t, v, norm_v_.r()));
  norm_u_.add(t, lr_integral(grid, shell, t, u, norm_u_.r()));
  norm_lp_.add(t, lr_integral(grid, shell, t, u, norm_lp_.r()));
  norm_src_.add(t, lr_integral(grid, shell, t, nl, 2.0));
  if (t > series_.T) {
    row.strichartz_w = norm_w_.finalize(series_.T, t);
    row.strichartz_v = norm_v_.finalize(series_.T, t);
    row.l1l2_source = norm_src_.finalize(series_.T, t);
  }
  series_.sup_interior = std::max(series_.sup_interior, row.interior_w_energy);
  series_.w_energy_residual =
      std::max(series_.w_energy_residual, std::abs(row.interior_w_energy - interior_T_ - flux_));
  series_.idw_max = std::max(series_.idw_max, row.idw_residual);
  series_.vpw_max = std::max(series_.vpw_max, row.vpw_residual);
  series_.samples.push_back(row);
}

DecompositionSeries DecompositionRun::finish() const
{
  DecompositionSeries s = series_;
  if (s.samples.size() >= 2) {
    const double t1 = s.samples.back().t;
    s.strichartz_w = norm_w_.finalize(s.T, t1);
    s.strichartz_v = norm_v_.finalize(s.T, t1);
    s.strichartz_u = norm_u_.finalize(s.T, t1);
    s.lp_norm_u = norm_lp_.finalize(s.T, t1);
    s.l1l2_source = norm_src_.finalize(s.T, t1);
  }
  return s;
}

std::vector<DecompositionSeries> decomposition_study(const ProblemSpec& problem,
                                                     const GridSpec& grid,
                                                     const DecompositionOptions& options,
                                                     const SphereGrid& sphere)
{
  if (!(options.R1 < options.R2)) throw std::invalid_argument("decomposition needs R1 < R2");
  if (options.T_values.empty()) throw std::invalid_argument("decomposition needs at least one T");
  if (options.observe_every < 1) throw std::invalid_argument("observe_every must be >= 1");
  auto Ts = options.T_values;
  std::sort(Ts.begin(), Ts.end());
  for (double T : Ts) {
    if (!(T >= std::max(1.0, options.R2)))
      throw std::invalid_argument("release time T = " + std::to_string(T) + " must be >= max(1, R2)");
    if (!(T < options.t_end))
      throw std::invalid_argument("release time T = " + std::to_string(T) + " must precede t_end");
    step_of(T, grid.dt, "release time T");
  }
  const double margin = std::max(options.R2, 0.0) + 2.0 * grid.h;
  const double budget = causality_budget(grid, problem, margin);
  if (options.t_end > budget)
    throw std::invalid_argument("t_end = " + std::to_string(options.t_end) +
                                " exceeds the causality budget " + std::to_string(budget));

  const auto table = lemma_pair(problem.d, nearest_rational(problem.p));
  const double q = to_double(table.q), r = to_double(table.r);

  Stepper donor(grid, problem, init_from_data(problem, grid));
  const double T_max = Ts.back();
  std::optional<ConeTrace> cone;
  std::vector<NodeTrace> nodes;
  if (grid.radial())
    cone.emplace(options.R2, grid, sphere);
  else
    for (double T : Ts) nodes.emplace_back(grid, T, options.R2);

  std::vector<long> release;
  for (double T : Ts) release.push_back(std::lround(T / grid.dt));
  std::vector<std::unique_ptr<DecompositionRun>> runs;
  std::vector<long> start;
  std::vector<double> trace_norms;
  const long N = steps_for(options.t_end, grid.dt);
  for (long k = 0;; ++k) {
    const FieldState st = donor.state();
    if (cone && st.t <= T_max + 0.5 * grid.dt) cone->record(st);
    for (std::size_t a = runs.size(); a < nodes.size(); ++a) nodes[a].record(k, st.u);
    for (std::size_t a = 0; a < Ts.size(); ++a) {
      if (release[a] != k) continue;
      const double T = Ts[a];
      FieldState w = cone ? build_w_data(T, options.R2, st, grid, *cone)
                          : build_w_data(T, options.R2, st, grid, nodes[a]);
      runs.push_back(std::make_unique<DecompositionRun>(T, options, donor, w, sphere, q, r));
      start.push_back(k);
      trace_norms.push_back(cone ? cone->hdot1_norm2(0.5 * (T - options.R2), T) : 0.0);
    }
    for (std::size_t a = 0; a < runs.size(); ++a)
      runs[a]->observe(st, (k - start[a]) % options.observe_every == 0 || k == N);
    if (k >= N) break;
    donor.advance();
    for (auto& run : runs) run->advance();
  }
  std::vector<DecompositionSeries> out;
  for (std::size_t a = 0; a < runs.size(); ++a) {
    out.push_back(runs[a]->finish());
    out.back().trace_norm = trace_norms[a];
  }
  return out;
}

}  // namespace cwave

// Splitting u = v_T + w_T after a release time T.  w carries the part of u
// outside the cone |x| = t + R2 (source chi_1 = exterior(R2)) and starts from
// a cut-off copy of the trace u(x, |x| - R2) inside it; v carries the cone
// shell chi_2 = shell(R1, R2) and starts from u - w.

#ifndef CWAVE_DECOMPOSITION_HPP
#define CWAVE_DECOMPOSITION_HPP

#include <array>
#include <memory>
#include <vector>

#include "cwave/diagnostics.hpp"
#include "cwave/grid.hpp"
#include "cwave/solver.hpp"

namespace cwave {

/// 0 for x <= 1/2, 1 for x >= 1, quintic C^2 bridge in between.
double cutoff_phi(double x);

// Samples of the donor on the cone |x| = t + R2, one per donor step, per
// sphere node (one node for radial grids).
class ConeTrace {
 public:
  ConeTrace(double R2, const GridSpec& grid, const SphereGrid& sphere);

  /// Appends the donor state at state.t.  Steps with t + R2 <= 0 are
  /// skipped; recorded times must be consecutive steps.
  void record(const FieldState& state);

  double R2() const { return R2_; }
  const std::vector<double>& times() const { return t_; }
  bool covers(double t0, double t1) const;

  /// u on the cone at time t, cubic in time.  Throws std::out_of_range
  /// outside the recorded times.
  double u_at(double t, std::size_t node = 0) const;

  /// Integral over t in [t0, t1] of the trace's Hdot^1 density
  /// (t + R2)^{d-1} sum_j w_j [(u_r + u_t)^2 + |angular grad u|^2].
  double hdot1_norm2(double t0, double t1) const;

 private:
  double R2_;
  GridSpec grid_;
  SphereGrid sphere_;
  std::vector<double> t_;
  std::vector<std::vector<double>> u_;  // per time, per node
  std::vector<double> density_;         // Hdot^1 density per time
};

// Per-node trace for cartesian grids: for every node with
// (T + R2)/2 < |x| < T + R2 keeps the four donor levels around the time
// |x| - R2 and interpolates cubically.
class NodeTrace {
 public:
  NodeTrace(const GridSpec& grid, double T, double R2);

  /// Offers donor level `step`; keeps what the stencils need.
  void record(long step, const std::vector<double>& u);
  bool complete() const;
  /// u(x_i, |x_i| - R2); throws std::logic_error when the stencil is incomplete.
  double value(std::size_t node) const;
  const std::vector<std::size_t>& nodes() const { return nodes_; }

 private:
  double dt_;
  std::vector<std::size_t> nodes_;
  std::vector<std::size_t> slot_;  // node index -> position in nodes_ (or npos)
  std::vector<long> base_;         // first step of each stencil
  std::vector<double> x_;          // interpolation point within the stencil
  std::vector<std::array<double, 4>> values_;
  std::vector<unsigned char> filled_;
};

/// w data at t = T: the donor's (u, u_t) for |x| >= T + R2 and
/// (phi(|x|/(T+R2)) u(x, |x| - R2), 0) inside.  When the donor state has
/// levels, u_prev is filled too: the donor's previous level outside the
/// cone and a Taylor step inside.  Throws std::out_of_range when the trace
/// does not cover [(T - R2)/2, T].
FieldState build_w_data(double T, double R2, const FieldState& donor, const GridSpec& grid,
                        const ConeTrace& trace);
FieldState build_w_data(double T, double R2, const FieldState& donor, const GridSpec& grid,
                        const NodeTrace& trace);

/// v data = donor - w data, level by level.
FieldState build_v_data(const FieldState& donor, const FieldState& w_data);

struct DecompositionOptions {
  double R1 = 0.0;
  double R2 = 2.0;
  std::vector<double> T_values{4.0, 8.0, 12.0, 16.0};
  double t_end = 24.0;
  int observe_every = 10;
  double layer = 3.0;  // cone boundary layer excluded from identity residuals, in units of h
};

struct DecompositionSample {
  double t = 0.0;
  double interior_w_energy = 0.0;  // integral over |x| < t + R2 of |grad w|^2 + |w_t|^2
  double flux = 0.0;               // accumulated linear cone flux of u from T
  double idw_residual = 0.0;       // max |w - u| over |x| >= t + R2 + layer h
  double vpw_residual = 0.0;       // max |v + w - u| over |x| >= t + R1 + layer h
  double strichartz_w = 0.0;       // running ||chi_2 w||_{L^q L^r([T, t])}
  double strichartz_v = 0.0;
  double l1l2_source = 0.0;        // running ||chi_2 |u|^{p-1} u||_{L^1 L^2([T, t])}
};

struct DecompositionSeries {
  double T = 0.0;
  double data_norm = 0.0;         // integral over |x| < T + R2 of |grad w0|^2 + |w1|^2
  double data_consistency = 0.0;  // max |w + v - u| over both data levels
  double trace_norm = 0.0;        // trace Hdot^1 norm^2 over [(T-R2)/2, T] (radial)
  double sup_interior = 0.0;
  double w_energy_residual = 0.0;  // max over samples of |Int(t) - Int(T) - flux|
  double idw_max = 0.0;
  double vpw_max = 0.0;
  double strichartz_w = 0.0;
  double strichartz_v = 0.0;
  double strichartz_u = 0.0;  // ||chi_2 u||_{L^q L^r}
  double lp_norm_u = 0.0;     // ||chi_2 u||_{L^{p+1} L^{p+1}}
  double l1l2_source = 0.0;
  std::vector<DecompositionSample> samples;
};

// One release time: w and v co-evolving with a donor.  The donor must be
// advanced first, then advance() on every run.
class DecompositionRun {
 public:
  DecompositionRun(double T, const DecompositionOptions& options, const Stepper& donor,
                   const FieldState& w_data, const SphereGrid& sphere, double q, double r);

  void advance();
  /// Accumulates flux and, when `sample` is set, mixed norms, identity
  /// residuals and a sample row.  Call once per step with the donor state.
  void observe(const FieldState& donor_state, bool sample);
  DecompositionSeries finish() const;

  const Stepper& w() const { return w_; }
  const Stepper& v() const { return v_; }

 private:
  double interior(const FieldState& w_state) const;

  DecompositionOptions options_;
  const Stepper& donor_;
  const SphereGrid& sphere_;
  ProblemSpec linear_;
  Stepper w_, v_;
  DecompositionSeries series_;
  double interior_T_ = 0.0;
  double flux_ = 0.0, last_t_ = 0.0, last_density_ = 0.0;
  bool started_ = false;
  MixedNormAccumulator norm_w_, norm_v_, norm_u_, norm_lp_, norm_src_;
};

/// Runs the donor once to t_end and a DecompositionRun for every T.
std::vector<DecompositionSeries> decomposition_study(const ProblemSpec& problem,
                                                     const GridSpec& grid,
                                                     const DecompositionOptions& options,
                                                     const SphereGrid& sphere);

}  // namespace cwave

#endif  // CWAVE_DECOMPOSITION_HPP

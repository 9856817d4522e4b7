// Time integration of the defocusing equation u_tt - Lap u = -|u|^{p-1} u
// and of linear waves driven by masked sources taken from a donor run.
//
// The integrator is the three-level leapfrog.  A Stepper keeps the levels
// u^{n-1}, u^n and u^{n+1}: the next level is computed as soon as level n
// is reached, so the synchronized time derivative (u^{n+1}-u^{n-1})/(2dt)
// is available at t_n.  A child stepper whose source reads a donor must
// therefore be advanced right after its donor.

#ifndef CWAVE_SOLVER_HPP
#define CWAVE_SOLVER_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cwave/grid.hpp"

namespace cwave {

enum class Scheme { leapfrog, conservative };

std::string to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

// Named analytic data families.
//   zero          u0 = u1 = 0
//   gaussian-odd  u0 = -2a exp(-(r/w)^2), u1 = 0 (free wave of f(s) = a s exp(-(s/w)^2))
//   bump          u0 = a exp(1 - 1/(1 - (r/w)^2)) for r < w, u1 = 0
//   offset-bumps  u0 = a [b(|x-c|/w) + b(|x+c|/w)/2], b the unit bump; cartesian only
struct InitialData {
  std::string family = "zero";
  double amplitude = 1.0;
  double width = 1.0;
  Vec3 offset{1.0, 0.5, 0.0};
};

struct ProblemSpec {
  int d = 3;
  double p = 4.0;
  bool linear = false;
  InitialData data;
  double R_support = 4.0;
  Scheme scheme = Scheme::leapfrog;
};

/// Checks family names, support, and 1 + 6/d < p < p_e for nonlinear problems.
void validate_problem(const ProblemSpec& problem, const GridSpec& grid);

class Stepper;

// Source -mask(x, t) |u_donor|^{p-1} u_donor with the donor read at the
// child's current time level (the donor's force(), so that a child with
// mask 1 and the donor's data reproduces the donor exactly).
struct SourceSpec {
  RegionSpec mask;
  const Stepper* donor = nullptr;
};

struct StepReport {
  long step = 0;
  double t = 0.0;
  double energy = 0.0;  // conserved discrete energy, averaged to t_n
  double max_abs_u = 0.0;
  double cfl_margin = 0.0;  // cfl_limit - dt/h
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

FieldState init_from_data(const ProblemSpec& problem, const GridSpec& grid);

class Stepper {
 public:
  /// Starts from (u, u_t) at initial.t by a Taylor step, or from the two
  /// levels (u_prev, u) when initial.u_prev is filled (u_t is then unused).
  Stepper(const GridSpec& grid, const ProblemSpec& problem, const FieldState& initial,
          std::optional<SourceSpec> source = std::nullopt);

  /// Moves to level n+1 and computes level n+2.
  void advance();

  const GridSpec& grid() const { return grid_; }
  const ProblemSpec& problem() const { return problem_; }
  long step() const { return step_; }
  double time() const { return t0_ + static_cast<double>(step_) * grid_.dt; }

  /// u^n.
  const std::vector<double>& current() const { return cur_; }
  /// (u^n, (u^{n+1} - u^{n-1})/(2dt), t_n).
  FieldState state() const;

  /// Discrete energy between levels n and n+1; constant for the
  /// conservative scheme without source.
  double half_energy() const { return e_next_; }
  /// Average of the energies on either side of t_n.
  double energy() const { return 0.5 * (e_prev_ + e_next_); }
  StepReport report() const;

  /// Nonlinear term applied at level n at node i: |u^n|^{p-1}u^n for
  /// leapfrog, the difference quotient of F between u^{n+1} and u^{n-1} for
  /// the conservative scheme, 0 for linear problems.
  double force(std::size_t i) const;

 private:
  void compute_next();
  double pair_energy(const std::vector<double>& a, const std::vector<double>& b) const;
  void source_term(std::vector<double>& out) const;

  GridSpec grid_;
  ProblemSpec problem_;
  std::optional<SourceSpec> source_;
  double t0_ = 0.0;
  long step_ = 0;
  std::vector<double> vol_;
  std::vector<double> prev_, cur_, next_;
  std::vector<double> work_;
  double e_prev_ = 0.0, e_next_ = 0.0;
};

using Observer = std::function<void(const Stepper&)>;

struct RunOptions {
  double t_end = 0.0;
  int observe_every = 10;
  double diagnostic_margin = 0.0;  // radius beyond t reached by any diagnostic
};

struct RunResult {
  FieldState final_state;
  std::vector<StepReport> reports;  // one per observer call
};

/// Largest t_end for which reflections from the outer boundary cannot reach
/// radius t + diagnostic_margin: (extent - R_support - margin) / 2.
double causality_budget(const GridSpec& grid, const ProblemSpec& problem, double margin);

/// Number of steps needed to reach t_end.
long steps_for(double t_end, double dt);

/// Advances `stepper` to t_end, calling observers at step 0 and every
/// `observe_every` steps.  No budget check.
std::vector<StepReport> drive(Stepper& stepper, const RunOptions& options,
                              const std::vector<Observer>& observers);

/// Full run from the problem's data.  Refuses to start when t_end exceeds
/// the causality budget.
RunResult run(const ProblemSpec& problem, const GridSpec& grid, const RunOptions& options,
              const std::vector<Observer>& observers = {});

// f(s) = a s exp(-(s/w)^2) and its derivatives.
class GaussianOdd {
 public:
  GaussianOdd(double amplitude = 1.0, double width = 1.0);
  /// k-th derivative, k <= 6.
  double derivative(int k, double s) const;

 private:
  double a_, w_;
  std::vector<std::vector<double>> poly_;  // f^(k)(s) = a P_k(s) exp(-(s/w)^2)
};

struct WaveSample {
  double u = 0.0;
  double ut = 0.0;
  double ur = 0.0;
};

/// u = (f(t-r) - f(t+r))/r with its time and radial derivatives; the
/// r -> 0 limit is taken by Taylor expansion.
WaveSample exact_free_wave_3d(const GaussianOdd& f, double r, double t);

}  // namespace cwave

#endif  // CWAVE_SOLVER_HPP

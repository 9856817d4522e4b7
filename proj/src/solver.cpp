#include "cwave/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>

#include "cwave/parallel.hpp"

namespace cwave {

namespace {

std::string short_number(double x)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

// Secant slope (F(x) - F(b))/(x - b) of F(u) = |u|^{p+1}/(p+1) and its x-derivative.
struct Secant {
  double q;
  double dq;
};

double force_prime(double u, double p)
{
  const double a = std::abs(u);
  return a == 0.0 ? (p == 1.0 ? 1.0 : 0.0) : p * std::exp((p - 1.0) * std::log(a));
}

double force_second(double u, double p)
{
  const double a = std::abs(u);
  if (a == 0.0) return 0.0;
  return std::copysign(p * (p - 1.0) * std::exp((p - 2.0) * std::log(a)), u);
}

Secant secant(double x, double b, double p)
{
  const double delta = x - b;
  const double m = 0.5 * (x + b);
  if (delta == 0.0) return {nonlinearity(m, p), 0.5 * force_prime(m, p)};
  if (std::abs(delta) <= 1e-4 * std::abs(m)) {
    // midpoint expansion avoids cancellation in the quotient
    const double f2 = force_second(m, p);
    return {nonlinearity(m, p) + f2 * delta * delta / 24.0,
            0.5 * force_prime(m, p) + f2 * delta / 12.0};
  }
  const double q = (potential_density(x, p) - potential_density(b, p)) / delta;
  return {q, (nonlinearity(x, p) - q) / delta};
}

double unit_bump(double s)
{
  if (s >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

}  // namespace

std::string to_string(Scheme scheme)
{
  return scheme == Scheme::leapfrog ? "leapfrog" : "conservative";
}

Scheme parse_scheme(std::string_view name)
{
  if (name == "leapfrog") return Scheme::leapfrog;
  if (name == "conservative") return Scheme::conservative;
  throw std::invalid_argument("unknown scheme '" + std::string(name) +
                              "' (expected leapfrog or conservative)");
}

void validate_problem(const ProblemSpec& problem, const GridSpec& grid)
{
  const auto& f = problem.data.family;
  if (f != "zero" && f != "gaussian-odd" && f != "bump" && f != "offset-bumps")
    throw std::invalid_argument("unknown initial data family '" + f + "'");
  if (f == "offset-bumps" && grid.radial())
    throw std::invalid_argument("offset-bumps data is non-radial; use cartesian3d");
  if (problem.d != grid.d)
    throw std::invalid_argument("problem dimension " + std::to_string(problem.d) +
                                " does not match grid dimension " + std::to_string(grid.d));
  if (!(problem.data.width > 0.0)) throw std::invalid_argument("data width must be positive");
  if (!(problem.R_support > 0.0)) throw std::invalid_argument("R_support must be positive");
  if (problem.R_support >= grid.extent)
    throw std::invalid_argument("R_support = " + std::to_string(problem.R_support) +
                                " must lie inside the grid extent " + std::to_string(grid.extent));
  if (f == "bump" && problem.data.width > problem.R_support)
    throw std::invalid_argument("bump width exceeds R_support");
  if (f == "offset-bumps") {
    const auto& c = problem.data.offset;
    const double reach = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]) + problem.data.width;
    if (reach > problem.R_support)
      throw std::invalid_argument("offset-bumps reach |c| + w = " + std::to_string(reach) +
                                  " exceeds R_support");
  }
  if (!problem.linear) {
    const int d = problem.d;
    const double lo = 1.0 + 6.0 / d, hi = 1.0 + 4.0 / (d - 2.0);
    if (!(problem.p > lo))
      throw std::invalid_argument("p must exceed 1+6/d = " + short_number(lo));
    if (!(problem.p < hi))
      throw std::invalid_argument("p must be below p_e = 1+4/(d-2) = " + short_number(hi));
  }
}

FieldState init_from_data(const ProblemSpec& problem, const GridSpec& grid)
{
  validate_problem(problem, grid);
  FieldState s = zero_state(grid, 0.0);
  const auto& data = problem.data;
  const double a = data.amplitude, w = data.width;
  const Vec3 c = data.offset;
  parallel_for(grid.size(), [&](std::size_t i) {
    if (grid.is_boundary(i)) return;
    const double r = grid.radius(i);
    if (r > problem.R_support) return;
    double u = 0.0;
    if (data.family == "gaussian-odd") {
      u = -2.0 * a * std::exp(-(r / w) * (r / w));
    } else if (data.family == "bump") {
      u = a * unit_bump(r / w);
    } else if (data.family == "offset-bumps") {
      const Vec3 x = grid.position(i);
      const double dp = std::hypot(x[0] - c[0], x[1] - c[1], x[2] - c[2]);
      const double dm = std::hypot(x[0] + c[0], x[1] + c[1], x[2] + c[2]);
      u = a * (unit_bump(dp / w) + 0.5 * unit_bump(dm / w));
    }
    s.u[i] = u;
  });
  return s;
}

Stepper::Stepper(const GridSpec& grid, const ProblemSpec& problem, const FieldState& initial,
                 std::optional<SourceSpec> source)
    : grid_(grid), problem_(problem), source_(source), t0_(initial.t)
{
  validate_state(initial, grid_);
  if (source_) {
    if (source_->donor == nullptr) throw std::invalid_argument("source needs a donor stepper");
    const GridSpec& dg = source_->donor->grid();
    if (dg.mode != grid_.mode || dg.n != grid_.n || dg.h != grid_.h || dg.dt != grid_.dt ||
        dg.d != grid_.d)
      throw std::invalid_argument("donor/child grid mismatch");
  }
  vol_ = node_volumes(grid_);
  const std::size_t n = grid_.size();
  cur_ = initial.u;
  prev_.assign(n, 0.0);
  next_.assign(n, 0.0);
  work_.assign(n, 0.0);

  if (initial.u_prev.size() == n) {
    // two-level start: the caller supplies u^{n-1}
    prev_ = initial.u_prev;
    for (std::size_t i = 0; i < n; ++i)
      if (grid_.is_boundary(i)) prev_[i] = 0.0;
    compute_next();
    e_prev_ = pair_energy(cur_, prev_);
    e_next_ = pair_energy(next_, cur_);
    return;
  }
  // Taylor start: u^{-1} = u0 - dt u1 + dt^2/2 (Lap u0 - N(u0) + source)
  std::vector<double> src(n, 0.0);
  source_term(src);
  laplacian(cur_, grid_, work_);
  const double dt = grid_.dt;
  const bool nonlinear = !problem_.linear;
  const double p = problem_.p;
  parallel_for(n, [&](std::size_t i) {
    if (grid_.is_boundary(i)) return;
    double acc = work_[i] + src[i];
    if (nonlinear) acc -= nonlinearity(cur_[i], p);
    prev_[i] = cur_[i] - dt * initial.ut[i] + 0.5 * dt * dt * acc;
  });
  compute_next();
  e_prev_ = pair_energy(cur_, prev_);
  e_next_ = pair_energy(next_, cur_);
}

void Stepper::source_term(std::vector<double>& out) const
{
  if (!source_) return;
  const Stepper& donor = *source_->donor;
  if (std::abs(donor.time() - time()) > 1e-6 * grid_.dt)
    throw std::logic_error("donor at t = " + std::to_string(donor.time()) +
                           " but child at t = " + std::to_string(time()));
  const double t = time();
  const RegionSpec mask = source_->mask;
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = mask.contains(grid_.radius(i), t) ? -donor.force(i) : 0.0;
  });
}

double Stepper::force(std::size_t i) const
{
  if (problem_.linear) return 0.0;
  if (problem_.scheme == Scheme::leapfrog) return nonlinearity(cur_[i], problem_.p);
  return secant(next_[i], prev_[i], problem_.p).q;
}

void Stepper::compute_next()
{
  const std::size_t n = grid_.size();
  const double dt = grid_.dt, dt2 = dt * dt;
  const double p = problem_.p;
  const bool nonlinear = !problem_.linear;
  laplacian(cur_, grid_, work_);
  if (source_) {
    std::vector<double> src(n, 0.0);
    source_term(src);
    for (std::size_t i = 0; i < n; ++i) work_[i] += src[i];
  }

  if (!nonlinear || problem_.scheme == Scheme::leapfrog) {
    parallel_for(n, [&](std::size_t i) {
      if (grid_.is_boundary(i)) {
        next_[i] = 0.0;
        return;
      }
      double acc = work_[i];
      if (nonlinear) acc -= nonlinearity(cur_[i], p);
      next_[i] = 2.0 * cur_[i] - prev_[i] + dt2 * acc;
    });
    return;
  }

  // Conservative scheme: x - c + dt^2 Q(x, b) = 0 per node, b = u^{n-1}.
  std::atomic<long long> failed{-1};
  parallel_for(n, [&](std::size_t i) {
    if (grid_.is_boundary(i)) {
      next_[i] = 0.0;
      return;
    }
    const double b = prev_[i];
    const double c = 2.0 * cur_[i] - b + dt2 * work_[i];
    double x = c - dt2 * nonlinearity(cur_[i], p);
    auto residual = [&](double y, Secant& s) {
      s = secant(y, b, p);
      return y - c + dt2 * s.q;
    };
    Secant s{};
    double g = residual(x, s);
    const double scale = std::max(1.0, std::abs(c));
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
      if (std::abs(g) <= 1e-15 * scale) {
        ok = true;
        break;
      }
      const double step = g / (1.0 + dt2 * s.dq);
      double lambda = 1.0;
      Secant s_try{};
      double x_try = x - step;
      double g_try = residual(x_try, s_try);
      while (std::abs(g_try) > std::abs(g) && lambda > 1e-4) {
        lambda *= 0.5;
        x_try = x - lambda * step;
        g_try = residual(x_try, s_try);
      }
      const bool stalled = x_try == x;
      x = x_try;
      g = g_try;
      s = s_try;
      if (stalled) break;
    }
    if (!ok && std::abs(g) <= 1e-12 * scale) ok = true;
    if (!ok) {
      long long expected = -1;
      failed.compare_exchange_strong(expected, static_cast<long long>(i));
    }
    next_[i] = x;
  });
  if (failed.load() >= 0)
    throw ConvergenceError("nonlinear solve did not converge in 50 iterations at node " +
                           std::to_string(failed.load()) + ", t = " + std::to_string(time()));
}

double Stepper::pair_energy(const std::vector<double>& a, const std::vector<double>& b) const
{
  const double dt = grid_.dt;
  const bool nonlinear = !problem_.linear;
  const double p = problem_.p;
  const double local = parallel_sum(a.size(), [&](std::size_t i) {
    const double v = (a[i] - b[i]) / dt;
    double e = 0.5 * v * v;
    if (nonlinear) e += 0.5 * (potential_density(a[i], p) + potential_density(b[i], p));
    return vol_[i] * e;
  });
  return local + 0.5 * gradient_form(a, b, grid_);
}

void Stepper::advance()
{
  std::swap(prev_, cur_);
  std::swap(cur_, next_);
  ++step_;
  compute_next();
  e_prev_ = e_next_;
  e_next_ = pair_energy(next_, cur_);
}

FieldState Stepper::state() const
{
  FieldState s;
  s.u = cur_;
  s.ut.resize(cur_.size());
  const double inv = 1.0 / (2.0 * grid_.dt);
  for (std::size_t i = 0; i < cur_.size(); ++i) s.ut[i] = (next_[i] - prev_[i]) * inv;
  s.t = time();
  s.u_prev = prev_;
  s.u_next = next_;
  s.dt = grid_.dt;
  return s;
}

StepReport Stepper::report() const
{
  StepReport r;
  r.step = step_;
  r.t = time();
  r.energy = energy();
  double m = 0.0;
  for (double v : cur_) m = std::max(m, std::abs(v));
  r.max_abs_u = m;
  r.cfl_margin = cfl_limit(grid_.mode, grid_.d) - grid_.dt / grid_.h;
  return r;
}

double causality_budget(const GridSpec& grid, const ProblemSpec& problem, double margin)
{
  return (grid.extent - problem.R_support - margin) / 2.0;
}

long steps_for(double t_end, double dt)
{
  if (t_end < 0.0) throw std::invalid_argument("t_end must be nonnegative");
  return static_cast<long>(std::ceil(t_end / dt - 1e-9));
}

std::vector<StepReport> drive(Stepper& stepper, const RunOptions& options,
                              const std::vector<Observer>& observers)
{
  if (options.observe_every < 1) throw std::invalid_argument("observer cadence must be >= 1");
  const long steps = steps_for(options.t_end - stepper.time(), stepper.grid().dt);
  std::vector<StepReport> reports;
  auto observe = [&] {
    reports.push_back(stepper.report());
    for (const auto& obs : observers) obs(stepper);
  };
  observe();
  for (long k = 1; k <= steps; ++k) {
    stepper.advance();
    if (k % options.observe_every == 0) observe();
  }
  return reports;
}

RunResult run(const ProblemSpec& problem, const GridSpec& grid, const RunOptions& options,
              const std::vector<Observer>& observers)
{
  const double budget = causality_budget(grid, problem, options.diagnostic_margin);
  if (options.t_end > budget * (1.0 + 1e-12))
    throw std::invalid_argument("t_end = " + std::to_string(options.t_end) +
                                " exceeds the causality budget (extent - R_support - margin)/2 = " +
                                std::to_string(budget));
  FieldState initial = init_from_data(problem, grid);
  RunResult result;
  Stepper stepper(grid, problem, initial);
  result.reports = drive(stepper, options, observers);
  result.final_state = stepper.step() == 0 ? initial : stepper.state();
  return result;
}

GaussianOdd::GaussianOdd(double amplitude, double width) : a_(amplitude), w_(width)
{
  poly_.push_back({0.0, 1.0});
  for (int k = 0; k < 6; ++k) {
    const auto& pk = poly_.back();
    std::vector<double> next(pk.size() + 1, 0.0);
    for (std::size_t j = 1; j < pk.size(); ++j) next[j - 1] += j * pk[j];
    for (std::size_t j = 0; j < pk.size(); ++j) next[j + 1] -= 2.0 / (w_ * w_) * pk[j];
    poly_.push_back(std::move(next));
  }
}

double GaussianOdd::derivative(int k, double s) const
{
  if (k < 0 || k > 6) throw std::out_of_range("derivative order must lie in 0..6");
  const auto& pk = poly_[static_cast<std::size_t>(k)];
  double v = 0.0;
  for (std::size_t j = pk.size(); j-- > 0;) v = v * s + pk[j];
  return a_ * v * std::exp(-(s / w_) * (s / w_));
}

WaveSample exact_free_wave_3d(const GaussianOdd& f, double r, double t)
{
  WaveSample w;
  if (r < 1e-3) {
    const double f1 = f.derivative(1, t), f2 = f.derivative(2, t), f3 = f.derivative(3, t);
    const double f4 = f.derivative(4, t), f5 = f.derivative(5, t), f6 = f.derivative(6, t);
    const double r2 = r * r;
    w.u = -2.0 * f1 - r2 * f3 / 3.0 - r2 * r2 * f5 / 60.0;
    w.ut = -2.0 * f2 - r2 * f4 / 3.0 - r2 * r2 * f6 / 60.0;
    w.ur = -2.0 * r * f3 / 3.0 - r2 * r * f5 / 15.0;
    return w;
  }
  const double fm = f.derivative(0, t - r), fp = f.derivative(0, t + r);
  const double dm = f.derivative(1, t - r), dp = f.derivative(1, t + r);
  w.u = (fm - fp) / r;
  w.ut = (dm - dp) / r;
  w.ur = -(dm + dp) / r - (fm - fp) / (r * r);
  return w;
}

}  // namespace cwave

#include "cwave/radiation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cwave/diagnostics.hpp"
#include "cwave/parallel.hpp"

namespace cwave {

namespace {

bool same(double a, double b, double tol = 1e-9)
{
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Trapezoid weight of lattice point k out of n.
double trapezoid_weight(std::size_t k, std::size_t n, double dR)
{
  return (k == 0 || k + 1 == n) ? 0.5 * dR : dR;
}

void check_lattice(double R1a, double dRa, const std::vector<double>& wa, double R1b, double dRb,
                   const std::vector<double>& wb)
{
  if (!same(dRa, dRb)) throw std::invalid_argument("profiles use different R spacings");
  const double shift = (R1b - R1a) / dRa;
  if (std::abs(shift - std::round(shift)) > 1e-6)
    throw std::invalid_argument("profiles lie on different R lattices");
  if (wa.size() != wb.size()) throw std::invalid_argument("profiles use different sphere grids");
  for (std::size_t j = 0; j < wa.size(); ++j)
    if (!same(wa[j], wb[j], 1e-12)) throw std::invalid_argument("profiles use different sphere grids");
}

// Forward differences of four consecutive values.
struct Cubic {
  double y0, d1, d2, d3;

  Cubic(const double* y)
      : y0(y[0]),
        d1(y[1] - y[0]),
        d2(y[2] - 2 * y[1] + y[0]),
        d3(y[3] - 3 * y[2] + 3 * y[1] - y[0])
  {
  }
  // value and first two derivatives in stencil units
  double value(double x) const
  {
    return y0 + x * d1 + x * (x - 1) / 2 * d2 + x * (x - 1) * (x - 2) / 6 * d3;
  }
  double first(double x) const { return d1 + (2 * x - 1) / 2 * d2 + (3 * x * x - 6 * x + 2) / 6 * d3; }
  double second(double x) const { return d2 + (x - 1) * d3; }
  double antiderivative(double x) const
  {
    const double x2 = x * x, x3 = x2 * x, x4 = x3 * x;
    return y0 * x + x2 / 2 * d1 + (x3 / 3 - x2 / 2) / 2 * d2 + (x4 / 4 - x3 + x2) / 6 * d3;
  }
};

}  // namespace

CharacteristicProfile sample_profile(const FieldState& state, const GridSpec& grid, double R1,
                                     double R2, const SphereGrid& sphere)
{
  if (!(R2 > R1)) throw std::invalid_argument("profile window needs R1 < R2");
  const double h = grid.h;
  const auto nR = static_cast<std::size_t>(std::lround((R2 - R1) / h)) + 1;
  CharacteristicProfile p;
  p.t = state.t;
  p.R1 = R1;
  p.dR = h;
  p.R2 = R1 + static_cast<double>(nR - 1) * h;
  if (state.t + p.R2 > grid.max_sample_radius())
    throw std::out_of_range("profile radius " + std::to_string(state.t + p.R2) +
                            " leaves the grid (max " + std::to_string(grid.max_sample_radius()) + ")");
  p.theta_weights = grid.radial() ? std::vector<double>{sphere_area(grid.d)} : sphere.weights;
  const std::size_t m = p.theta_weights.size();
  p.R.resize(nR);
  p.g.assign(nR * m, 0.0);
  p.ghat.assign(nR * m, 0.0);
  const double half = 0.5 * (grid.d - 1);
  parallel_for(nR, [&](std::size_t k) {
    const double R = R1 + static_cast<double>(k) * h;
    p.R[k] = R;
    const double rho = state.t + R;
    if (rho <= 0.0) return;
    const double scale = std::pow(rho, half);
    for (std::size_t j = 0; j < m; ++j) {
      PointSample s;
      double ur = 0.0;
      if (grid.radial()) {
        s = interpolate_at(state, grid, rho);
        ur = s.ur;
      } else {
        const Vec3& n = sphere.directions[j];
        s = interpolate_at(state, grid, Vec3{rho * n[0], rho * n[1], rho * n[2]});
        ur = s.grad[0] * n[0] + s.grad[1] * n[1] + s.grad[2] * n[2];
      }
      p.g[k * m + j] = scale * s.ut;
      p.ghat[k * m + j] = scale * ur;
    }
  });
  return p;
}

double cauchy_distance(const CharacteristicProfile& a, const CharacteristicProfile& b)
{
  check_lattice(a.R1, a.dR, a.theta_weights, b.R1, b.dR, b.theta_weights);
  if (!same(a.R1, b.R1) || a.R.size() != b.R.size())
    throw std::invalid_argument("profiles cover different windows");
  const std::size_t m = a.n_theta(), n = a.R.size();
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = trapezoid_weight(k, n, a.dR);
    for (std::size_t j = 0; j < m; ++j) {
      const double diff = a.g[k * m + j] - b.g[k * m + j];
      s += w * a.theta_weights[j] * diff * diff;
    }
  }
  return std::sqrt(s);
}

double l2_norm2(const RadiationFieldEstimate& e)
{
  const std::size_t m = e.n_theta(), n = e.R.size();
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = trapezoid_weight(k, n, e.dR);
    for (std::size_t j = 0; j < m; ++j) s += w * e.theta_weights[j] * e.G[k * m + j] * e.G[k * m + j];
  }
  return s;
}

RadiationFieldEstimate extract_G(const std::vector<CharacteristicProfile>& profiles)
{
  if (profiles.size() < 3)
    throw ExtractionError("radiation-field extraction needs at least three profiles, got " +
                          std::to_string(profiles.size()));
  std::vector<double> history;
  for (std::size_t i = 1; i < profiles.size(); ++i) {
    if (!(profiles[i].t > profiles[i - 1].t))
      throw ExtractionError("profiles must be taken at increasing times");
    history.push_back(cauchy_distance(profiles[i - 1], profiles[i]));
  }
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i] > history[i - 1] * (1 + 1e-12))
      throw ExtractionError("radiation-field extraction unconverged: profile distance grew from " +
                            std::to_string(history[i - 1]) + " to " + std::to_string(history[i]) +
                            " at t = " + std::to_string(profiles[i + 1].t));
  }
  const auto& last = profiles.back();
  RadiationFieldEstimate e;
  e.R1 = last.R1;
  e.R2 = last.R2;
  e.dR = last.dR;
  e.R = last.R;
  e.theta_weights = last.theta_weights;
  e.G = last.g;
  e.t_star = last.t;
  e.cauchy_history = std::move(history);
  e.l2_norm2 = l2_norm2(e);
  return e;
}

double overlap_discrepancy(const RadiationFieldEstimate& a, const RadiationFieldEstimate& b)
{
  check_lattice(a.R1, a.dR, a.theta_weights, b.R1, b.dR, b.theta_weights);
  const double lo = std::max(a.R1, b.R1), hi = std::min(a.R2, b.R2);
  if (!(hi > lo + 0.5 * a.dR)) throw std::invalid_argument("windows do not overlap");
  const auto ka = static_cast<std::size_t>(std::lround((lo - a.R1) / a.dR));
  const auto kb = static_cast<std::size_t>(std::lround((lo - b.R1) / b.dR));
  const auto n = static_cast<std::size_t>(std::lround((hi - lo) / a.dR)) + 1;
  const std::size_t m = a.n_theta();
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = trapezoid_weight(k, n, a.dR);
    for (std::size_t j = 0; j < m; ++j) {
      const double x = a.G[(ka + k) * m + j], y = b.G[(kb + k) * m + j];
      diff += w * a.theta_weights[j] * (x - y) * (x - y);
      na += w * a.theta_weights[j] * x * x;
      nb += w * a.theta_weights[j] * y * y;
    }
  }
  const double scale = std::max(na, nb);
  return scale > 0.0 ? std::sqrt(diff / scale) : 0.0;
}

RadiationFieldEstimate glue(const RadiationFieldEstimate& a, const RadiationFieldEstimate& b,
                            double tolerance)
{
  const double mismatch = overlap_discrepancy(a, b);
  if (mismatch > tolerance)
    throw ExtractionError("overlapping windows disagree: relative L2 difference " +
                          std::to_string(mismatch) + " > " + std::to_string(tolerance));
  RadiationFieldEstimate e;
  e.dR = a.dR;
  e.theta_weights = a.theta_weights;
  e.R1 = std::min(a.R1, b.R1);
  const auto n =
      static_cast<std::size_t>(std::lround((std::max(a.R2, b.R2) - e.R1) / e.dR)) + 1;
  e.R2 = e.R1 + static_cast<double>(n - 1) * e.dR;
  const std::size_t m = e.n_theta();
  e.R.resize(n);
  e.G.assign(n * m, 0.0);
  std::vector<int> count(n, 0);
  for (const auto* src : {&a, &b}) {
    const auto off = static_cast<std::size_t>(std::lround((src->R1 - e.R1) / e.dR));
    for (std::size_t k = 0; k < src->R.size(); ++k) {
      ++count[off + k];
      for (std::size_t j = 0; j < m; ++j) e.G[(off + k) * m + j] += src->G[k * m + j];
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    e.R[k] = e.R1 + static_cast<double>(k) * e.dR;
    if (count[k] > 1)
      for (std::size_t j = 0; j < m; ++j) e.G[k * m + j] /= count[k];
  }
  e.t_star = std::min(a.t_star, b.t_star);
  if (a.cauchy_history.size() == b.cauchy_history.size()) {
    e.cauchy_history.resize(a.cauchy_history.size());
    for (std::size_t i = 0; i < e.cauchy_history.size(); ++i)
      e.cauchy_history[i] = std::hypot(a.cauchy_history[i], b.cauchy_history[i]);
  }
  e.l2_norm2 = l2_norm2(e);
  return e;
}

bool g_norm_bound_check(const RadiationFieldEstimate& estimate, double E)
{
  return estimate.l2_norm2 <= 2.0 * E * (1.0 + 1e-6);
}

FreeWave3d::FreeWave3d(const RadiationFieldEstimate& e)
    : R1_(e.R1), R2_(e.R2), dR_(e.dR), G_(e.G)
{
  if (e.n_theta() != 1) throw std::invalid_argument("free-wave reconstruction needs a radial estimate");
  if (G_.size() < 4) throw std::invalid_argument("free-wave reconstruction needs >= 4 samples of G");
  const std::size_t n = G_.size();
  cell_integral_.assign(n, 0.0);
  for (std::size_t k = n - 1; k-- > 0;) {
    const std::size_t s = std::min(k == 0 ? 0 : k - 1, n - 4);
    const Cubic c(&G_[s]);
    const double a = static_cast<double>(k - s);
    cell_integral_[k] = cell_integral_[k + 1] + dR_ * (c.antiderivative(a + 1) - c.antiderivative(a));
  }
}

void FreeWave3d::interpolate(double R, double out[3]) const
{
  out[0] = out[1] = out[2] = 0.0;
  if (!(R >= R1_ && R <= R2_)) return;
  const std::size_t n = G_.size();
  const double x = (R - R1_) / dR_;
  const auto k = std::min(static_cast<std::size_t>(x), n - 2);
  const std::size_t s = std::min(k == 0 ? 0 : k - 1, n - 4);
  const Cubic c(&G_[s]);
  const double xi = x - static_cast<double>(s);
  out[0] = c.value(xi);
  out[1] = c.first(xi) / dR_;
  out[2] = c.second(xi) / (dR_ * dR_);
}

double FreeWave3d::integral_from_right(double R) const
{
  if (R >= R2_) return 0.0;
  if (R <= R1_) return cell_integral_[0];
  const std::size_t n = G_.size();
  const double x = (R - R1_) / dR_;
  const auto k = std::min(static_cast<std::size_t>(x), n - 2);
  const std::size_t s = std::min(k == 0 ? 0 : k - 1, n - 4);
  const Cubic c(&G_[s]);
  const double xi = x - static_cast<double>(s);
  const double right = static_cast<double>(k + 1 - s);
  return cell_integral_[k + 1] + dR_ * (c.antiderivative(right) - c.antiderivative(xi));
}

double FreeWave3d::phi(double s) const { return integral_from_right(-s); }

double FreeWave3d::phi_derivative(int k, double s) const
{
  double g[3];
  interpolate(-s, g);
  switch (k) {
    case 1: return g[0];
    case 2: return -g[1];
    case 3: return g[2];
    default: throw std::invalid_argument("phi derivative order must be 1, 2 or 3");
  }
}

WaveSample FreeWave3d::operator()(double r, double t) const
{
  WaveSample w;
  if (r < 1e-3) {
    const double f1 = phi_derivative(1, t), f2 = phi_derivative(2, t), f3 = phi_derivative(3, t);
    w.u = -2 * f1 - r * r * f3 / 3;
    w.ut = -2 * f2;
    w.ur = -2 * r * f3 / 3;
    return w;
  }
  const double a = phi(t - r), b = phi(t + r);
  const double a1 = phi_derivative(1, t - r), b1 = phi_derivative(1, t + r);
  w.u = (a - b) / r;
  w.ut = (a1 - b1) / r;
  w.ur = -(a1 + b1) / r - (a - b) / (r * r);
  return w;
}

GradientField FreeWave3d::gradient_field() const
{
  return [wave = *this](const Vec3& x, double t) {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const auto w = wave(r, t);
    if (r == 0.0) return std::array<double, 4>{0.0, 0.0, 0.0, w.ut};
    return std::array<double, 4>{w.ur * x[0] / r, w.ur * x[1] / r, w.ur * x[2] / r, w.ut};
  };
}

FreeWave3d free_wave_from_G_radial3d(const RadiationFieldEstimate& estimate, int d)
{
  if (d != 3) throw std::invalid_argument("free-wave reconstruction is implemented for d = 3 only");
  return FreeWave3d(estimate);
}

double exterior_scattering_residual(const FieldState& state, const GridSpec& grid,
                                    const FreeWave3d& free_wave, double R)
{
  if (grid.d != 3) throw std::invalid_argument("free-wave comparator needs d = 3");
  const GradientField field = free_wave.gradient_field();
  DensityParams par;
  par.comparator = &field;
  return region_integral(state, grid, RegionSpec::exterior(R), Density::scattering_residual_pair, par);
}

double exterior_scattering_residual(const FieldState& state, const GridSpec& grid,
                                    const RadiationFieldEstimate& estimate, double R,
                                    const SphereGrid& sphere)
{
  if (R < estimate.R1 - 1e-12 || R >= estimate.R2)
    throw std::invalid_argument("comparator window does not cover |x| > t + " + std::to_string(R) +
                                "; covered sub-window is [" + std::to_string(estimate.R1) + ", " +
                                std::to_string(estimate.R2) + "]");
  if (!same(grid.h, estimate.dR))
    throw std::invalid_argument("profile residual needs the estimate on the grid's R spacing");
  const auto p = sample_profile(state, grid, estimate.R1, estimate.R2, sphere);
  check_lattice(p.R1, p.dR, p.theta_weights, estimate.R1, estimate.dR, estimate.theta_weights);
  const std::size_t m = p.n_theta(), n = p.R.size();
  std::size_t first = 0;
  while (first < n && p.R[first] < R - 1e-12) ++first;
  double s = 0.0;
  for (std::size_t k = first; k < n; ++k) {
    const double w = trapezoid_weight(k - first, n - first, p.dR);
    for (std::size_t j = 0; j < m; ++j) {
      const double G = estimate.G[k * m + j];
      const double a = p.g[k * m + j] - G, b = p.ghat[k * m + j] + G;
      s += w * p.theta_weights[j] * (a * a + b * b);
    }
  }
  const double lo = std::max(R, estimate.R1);
  return s + angular_energy(state, grid, RegionSpec::shell(lo, estimate.R2));
}

}  // namespace cwave

#include "cwave/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cwave/parallel.hpp"

namespace cwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Spectral radius of the radial flux-form operator times h^2, d = 3, 4, 5
// (the origin row 2d(u1-u0)/h^2 dominates).  Verified by the eigenvalue
// test in test_grid.cpp.
constexpr double kRadialSpectralRadius[3] = {6.366793983420843, 8.154794788027495,
                                             10.063097239216322};

// Cubic Lagrange weights and derivative weights on nodes 0,1,2,3 at xi.
void cubic_weights(double xi, double w[4], double dw[4])
{
  const double a = xi, b = xi - 1.0, c = xi - 2.0, e = xi - 3.0;
  w[0] = -b * c * e / 6.0;
  w[1] = a * c * e / 2.0;
  w[2] = -a * b * e / 2.0;
  w[3] = a * b * c / 6.0;
  dw[0] = -(c * e + b * e + b * c) / 6.0;
  dw[1] = (c * e + a * e + a * c) / 2.0;
  dw[2] = -(b * e + a * e + a * b) / 2.0;
  dw[3] = (b * c + a * c + a * b) / 6.0;
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Linear fraction of a cartesian cell centred at radius r lying outside rho.
double outside_fraction(double r, double rho, double h)
{
  if (rho == -kInf) return 1.0;
  if (rho == kInf) return 0.0;
  return clamp01((r - rho) / h + 0.5);
}

double region_fraction(const RegionSpec& region, double r, double t, double h)
{
  switch (region.kind) {
    case RegionKind::exterior: return outside_fraction(r, t + region.R1, h);
    case RegionKind::ball: return 1.0 - outside_fraction(r, t + region.R1, h);
    case RegionKind::shell:
      return outside_fraction(r, t + region.R1, h) - outside_fraction(r, t + region.R2, h);
  }
  return 0.0;
}

}  // namespace

std::string to_string(GridMode mode)
{
  return mode == GridMode::radial ? "radial" : "cartesian3d";
}

GridMode parse_grid_mode(std::string_view name)
{
  if (name == "radial") return GridMode::radial;
  if (name == "cartesian3d") return GridMode::cartesian3d;
  throw std::invalid_argument("unknown grid mode '" + std::string(name) + "'");
}

double cfl_limit(GridMode mode, int d)
{
  if (mode == GridMode::cartesian3d) return 0.9 / std::sqrt(3.0);
  if (mode != GridMode::radial) throw std::invalid_argument("invalid grid mode");
  if (d < 3 || d > 5) throw std::invalid_argument("radial mode supports d in {3,4,5}");
  return 0.9 * 2.0 / std::sqrt(kRadialSpectralRadius[d - 3]);
}

std::size_t GridSpec::size() const
{
  const auto m = static_cast<std::size_t>(n);
  return radial() ? m : m * m * m;
}

double GridSpec::radius(std::size_t idx) const
{
  if (radial()) return static_cast<double>(idx) * h;
  const Vec3 x = position(idx);
  return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
}

Vec3 GridSpec::position(std::size_t idx) const
{
  if (radial()) return {static_cast<double>(idx) * h, 0.0, 0.0};
  const auto m = static_cast<std::size_t>(n);
  const int i = static_cast<int>(idx % m);
  const int j = static_cast<int>((idx / m) % m);
  const int k = static_cast<int>(idx / (m * m));
  return {coordinate(i), coordinate(j), coordinate(k)};
}

bool GridSpec::is_boundary(std::size_t idx) const
{
  if (radial()) return idx + 1 == static_cast<std::size_t>(n);
  const auto m = static_cast<std::size_t>(n);
  const std::size_t i = idx % m, j = (idx / m) % m, k = idx / (m * m);
  return i == 0 || j == 0 || k == 0 || i + 1 == m || j + 1 == m || k + 1 == m;
}

double GridSpec::max_sample_radius() const
{
  // Cubic stencils stay inside the grid; keep one cell off the Dirichlet face.
  return extent - h;
}

GridSpec make_grid(GridMode mode, int d, double h, double extent, double dt)
{
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing h must be positive");
  if (!(extent > 0.0)) throw std::invalid_argument("grid extent must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("time step dt must be positive");
  if (mode == GridMode::cartesian3d && d != 3)
    throw std::invalid_argument("cartesian3d mode is fixed to d = 3");
  if (mode == GridMode::radial && (d < 3 || d > 5))
    throw std::invalid_argument("radial mode supports d in {3,4,5}");

  GridSpec g;
  g.mode = mode;
  g.d = d;
  g.h = h;
  g.extent = extent;
  g.dt = dt;
  const double span = mode == GridMode::radial ? extent : 2.0 * extent;
  const double cells = span / h;
  const long long m = std::llround(cells);
  if (std::abs(cells - static_cast<double>(m)) > 1e-9 * std::max(1.0, cells))
    throw std::invalid_argument("extent must be a whole number of cells: span/h = " +
                                std::to_string(cells));
  if (m < 4) throw std::invalid_argument("grid needs at least 5 points per axis");
  g.n = static_cast<int>(m + 1);

  const double limit = cfl_limit(mode, d);
  if (dt > limit * h * (1.0 + 1e-12))
    throw CflError("dt = " + std::to_string(dt) + " exceeds cfl limit " + std::to_string(limit) +
                       " * h = " + std::to_string(limit * h),
                   limit);
  return g;
}

FieldState zero_state(const GridSpec& grid, double t)
{
  FieldState s;
  s.u.assign(grid.size(), 0.0);
  s.ut.assign(grid.size(), 0.0);
  s.t = t;
  return s;
}

void validate_state(const FieldState& state, const GridSpec& grid)
{
  if (state.u.size() != grid.size() || state.ut.size() != grid.size())
    throw std::invalid_argument("field size does not match grid");
  for (std::size_t i = 0; i < state.u.size(); ++i)
    if (!std::isfinite(state.u[i]) || !std::isfinite(state.ut[i]))
      throw std::invalid_argument("non-finite sample at node " + std::to_string(i));
  if (!std::isfinite(state.t)) throw std::invalid_argument("non-finite time");
  if (state.has_levels() &&
      (state.u_prev.size() != grid.size() || state.u_next.size() != grid.size() || !(state.dt > 0.0)))
    throw std::invalid_argument("neighbouring levels do not match the grid");
}

RegionSpec RegionSpec::exterior(double R) { return {RegionKind::exterior, R, 0.0}; }

RegionSpec RegionSpec::shell(double R1, double R2)
{
  if (!(R1 < R2)) throw std::invalid_argument("shell requires R1 < R2");
  return {RegionKind::shell, R1, R2};
}

RegionSpec RegionSpec::ball(double R) { return {RegionKind::ball, R, 0.0}; }

RegionSpec RegionSpec::whole() { return exterior(-kInf); }

std::pair<double, double> RegionSpec::radii(double t) const
{
  switch (kind) {
    case RegionKind::exterior: return {t + R1, kInf};
    case RegionKind::ball: return {-kInf, t + R1};
    case RegionKind::shell: return {t + R1, t + R2};
  }
  return {0.0, 0.0};
}

bool RegionSpec::contains(double r, double t) const
{
  switch (kind) {
    case RegionKind::exterior: return r >= t + R1;
    case RegionKind::ball: return r < t + R1;
    case RegionKind::shell: return r > t + R1 && r < t + R2;
  }
  return false;
}

double SphereGrid::total_weight() const
{
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

SphereGrid SphereGrid::gauss_product(int n_theta, int n_phi)
{
  if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("sphere grid needs positive sizes");
  // Gauss-Legendre nodes by Newton iteration on P_n.
  std::vector<double> mu(n_theta), wmu(n_theta);
  for (int i = 0; i < n_theta; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n_theta + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n_theta; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n_theta == 1) p0 = 1.0;
      dp = n_theta * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    mu[i] = x;
    wmu[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  SphereGrid s;
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    const double st = std::sqrt(std::max(0.0, 1.0 - mu[i] * mu[i]));
    for (int k = 0; k < n_phi; ++k) {
      const double phi = (k + 0.5) * dphi;
      s.directions.push_back({st * std::cos(phi), st * std::sin(phi), mu[i]});
      s.weights.push_back(wmu[i] * dphi);
    }
  }
  s.exact_degree = std::min(2 * n_theta - 1, n_phi - 1);
  return s;
}

SphereGrid SphereGrid::collapsed(int d)
{
  SphereGrid s;
  s.directions.push_back({1.0, 0.0, 0.0});
  s.weights.push_back(sphere_area(d));
  s.exact_degree = 0;
  return s;
}

double sphere_area(int d)
{
  return 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
}

void laplacian(std::span<const double> u, const GridSpec& grid, std::span<double> out)
{
  const double h = grid.h;
  if (grid.radial()) {
    const int n = grid.n;
    const int d = grid.d;
    // Flux form: face areas r_{i+1/2}^{d-1}, cell volumes (r_{i+1/2}^d - r_{i-1/2}^d)/d.
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t idx) {
      const int i = static_cast<int>(idx);
      if (i == n - 1) {
        out[idx] = 0.0;
        return;
      }
      if (i == 0) {
        out[idx] = 2.0 * d * (u[1] - u[0]) / (h * h);
        return;
      }
      const double rp = (i + 0.5) * h, rm = (i - 0.5) * h;
      const double ap = std::pow(rp, d - 1), am = std::pow(rm, d - 1);
      const double vol = (std::pow(rp, d) - std::pow(rm, d)) / d;
      out[idx] = (ap * (u[idx + 1] - u[idx]) - am * (u[idx] - u[idx - 1])) / (h * vol);
    });
    return;
  }
  const auto m = static_cast<std::size_t>(grid.n);
  const double ih2 = 1.0 / (h * h);
  parallel_for(grid.size(), [&](std::size_t idx) {
    const std::size_t i = idx % m, j = (idx / m) % m, k = idx / (m * m);
    if (i == 0 || j == 0 || k == 0 || i + 1 == m || j + 1 == m || k + 1 == m) {
      out[idx] = 0.0;
      return;
    }
    out[idx] = (u[idx - 1] + u[idx + 1] + u[idx - m] + u[idx + m] + u[idx - m * m] +
                u[idx + m * m] - 6.0 * u[idx]) *
               ih2;
  });
}

std::vector<double> laplacian(const FieldState& state, const GridSpec& grid)
{
  std::vector<double> out(grid.size());
  laplacian(state.u, grid, out);
  return out;
}

std::vector<double> node_volumes(const GridSpec& grid)
{
  std::vector<double> vol(grid.size());
  if (!grid.radial()) {
    std::fill(vol.begin(), vol.end(), grid.h * grid.h * grid.h);
    return vol;
  }
  const double sigma = sphere_area(grid.d);
  const int d = grid.d;
  for (std::size_t i = 0; i < vol.size(); ++i) {
    const double rm = std::max(0.0, (static_cast<double>(i) - 0.5) * grid.h);
    const double rp = std::min(grid.extent, (static_cast<double>(i) + 0.5) * grid.h);
    vol[i] = sigma * (std::pow(rp, d) - std::pow(rm, d)) / d;
  }
  return vol;
}

double gradient_form(std::span<const double> u, std::span<const double> v, const GridSpec& grid)
{
  const double h = grid.h;
  if (grid.radial()) {
    const double sigma = sphere_area(grid.d);
    const std::size_t n = grid.size();
    return parallel_sum(n - 1, [&](std::size_t i) {
      const double rf = (static_cast<double>(i) + 0.5) * h;
      return sigma * std::pow(rf, grid.d - 1) * (u[i + 1] - u[i]) * (v[i + 1] - v[i]) / h;
    });
  }
  const auto m = static_cast<std::size_t>(grid.n);
  const std::size_t stride[3] = {1, m, m * m};
  return h * parallel_sum(grid.size(), [&](std::size_t idx) {
           const std::size_t c[3] = {idx % m, (idx / m) % m, idx / (m * m)};
           double s = 0.0;
           for (int a = 0; a < 3; ++a) {
             if (c[a] + 1 == m) continue;
             const std::size_t j = idx + stride[a];
             s += (u[j] - u[idx]) * (v[j] - v[idx]);
           }
           return s;
         });
}

std::vector<double> gradient_product(std::span<const double> u, std::span<const double> v,
                                     const GridSpec& grid)
{
  const std::size_t n = grid.size();
  std::vector<double> g(n, 0.0);
  const double h = grid.h;
  if (grid.radial()) {
    const int d = grid.d;
    const double sigma = sphere_area(d);
    const auto vol = node_volumes(grid);
    auto shell = [&](double a, double b) { return sigma * (std::pow(b, d) - std::pow(a, d)) / d; };
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double ri = static_cast<double>(i) * h, rf = ri + 0.5 * h, rn = ri + h;
      const double term =
          sigma * std::pow(rf, d - 1) * (u[i + 1] - u[i]) * (v[i + 1] - v[i]) / h;
      const double left = shell(ri, rf) / shell(ri, rn);
      g[i] += term * left;
      g[i + 1] += term * (1.0 - left);
    }
    for (std::size_t i = 0; i < n; ++i) g[i] /= vol[i];
    return g;
  }
  const auto m = static_cast<std::size_t>(grid.n);
  const std::size_t stride[3] = {1, m, m * m};
  const double ih2 = 1.0 / (h * h);
  parallel_for(n, [&](std::size_t idx) {
    const std::size_t c[3] = {idx % m, (idx / m) % m, idx / (m * m)};
    double s = 0.0;
    for (int a = 0; a < 3; ++a) {
      if (c[a] + 1 < m) {
        const std::size_t j = idx + stride[a];
        s += (u[j] - u[idx]) * (v[j] - v[idx]);
      }
      if (c[a] > 0) {
        const std::size_t j = idx - stride[a];
        s += (u[idx] - u[j]) * (v[idx] - v[j]);
      }
    }
    g[idx] = 0.5 * s * ih2;
  });
  return g;
}

std::vector<double> gradient_squared(std::span<const double> u, const GridSpec& grid)
{
  return gradient_product(u, u, grid);
}

Vec3 centered_gradient(std::span<const double> u, const GridSpec& grid, std::size_t idx)
{
  const double h = grid.h;
  if (grid.radial()) {
    const std::size_t n = grid.size();
    if (idx == 0) return {0.0, 0.0, 0.0};
    if (idx + 1 == n) return {(u[idx] - u[idx - 1]) / h, 0.0, 0.0};
    return {(u[idx + 1] - u[idx - 1]) / (2.0 * h), 0.0, 0.0};
  }
  const auto m = static_cast<std::size_t>(grid.n);
  const std::size_t stride[3] = {1, m, m * m};
  const std::size_t c[3] = {idx % m, (idx / m) % m, idx / (m * m)};
  Vec3 g{};
  for (int a = 0; a < 3; ++a) {
    if (c[a] == 0)
      g[a] = (u[idx + stride[a]] - u[idx]) / h;
    else if (c[a] + 1 == m)
      g[a] = (u[idx] - u[idx - stride[a]]) / h;
    else
      g[a] = (u[idx + stride[a]] - u[idx - stride[a]]) / (2.0 * h);
  }
  return g;
}

double integrate_nodal(const GridSpec& grid, const RegionSpec& region, double t,
                       std::span<const double> values, CutCell cut)
{
  if (values.size() != grid.size()) throw std::invalid_argument("nodal array size mismatch");
  const double h = grid.h;
  if (grid.radial()) {
    auto [a, b] = region.radii(t);
    a = std::max(a, 0.0);
    b = std::min(b, grid.extent);
    if (!(a < b)) return 0.0;
    const int d = grid.d;
    const std::size_t n = grid.size();
    const auto first = static_cast<std::size_t>(std::max(0.0, std::floor(a / h - 0.5)));
    const auto last = std::min(n - 1, static_cast<std::size_t>(std::ceil(b / h + 0.5)));
    double total = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
      const double lo = std::max(a, std::max(0.0, (static_cast<double>(i) - 0.5) * h));
      const double hi = std::min(b, std::min(grid.extent, (static_cast<double>(i) + 0.5) * h));
      if (hi <= lo) continue;
      const double m0 = (std::pow(hi, d) - std::pow(lo, d)) / d;
      double v = values[i] * m0;
      // A cut cell gets a linear profile through the node value with the
      // centered slope, pinned to the cell centroid so the full-cell integral
      // is unchanged.  E_ext then moves smoothly as the boundary sweeps a cell.
      const double c0 = std::max(0.0, (static_cast<double>(i) - 0.5) * h);
      const double c1 = std::min(grid.extent, (static_cast<double>(i) + 0.5) * h);
      if (cut == CutCell::linear && (lo > c0 || hi < c1) && i > 0 && i + 1 < n) {
        const double slope = (values[i + 1] - values[i - 1]) / (2 * h);
        const double centroid = d * (std::pow(c1, d + 1) - std::pow(c0, d + 1)) /
                                ((d + 1) * (std::pow(c1, d) - std::pow(c0, d)));
        const double m1 = (std::pow(hi, d + 1) - std::pow(lo, d + 1)) / (d + 1);
        v += slope * (m1 - centroid * m0);
      }
      total += v;
    }
    return total * sphere_area(d);
  }
  const double cell = h * h * h;
  return cell * parallel_sum(grid.size(), [&](std::size_t idx) {
           const double f = region_fraction(region, grid.radius(idx), t, h);
           return f == 0.0 ? 0.0 : f * values[idx];
         });
}

Density parse_density(std::string_view name)
{
  if (name == "energy") return Density::energy;
  if (name == "kinetic") return Density::kinetic;
  if (name == "gradient") return Density::gradient;
  if (name == "potential") return Density::potential;
  if (name == "lp_mass") return Density::lp_mass;
  if (name == "morawetz") return Density::morawetz;
  if (name == "scattering_residual_pair") return Density::scattering_residual_pair;
  throw std::invalid_argument("unknown density '" + std::string(name) + "'");
}

double potential_density(double u, double p)
{
  const double a = std::abs(u);
  if (a == 0.0) return 0.0;
  return std::exp((p + 1.0) * std::log(a)) / (p + 1.0);
}

double nonlinearity(double u, double p)
{
  const double a = std::abs(u);
  if (a == 0.0) return 0.0;
  return std::copysign(std::exp(p * std::log(a)), u);
}

std::vector<double> nodal_density(const FieldState& state, const GridSpec& grid, Density density,
                                  const DensityParams& params)
{
  validate_state(state, grid);
  const std::size_t n = grid.size();
  std::vector<double> out(n, 0.0);
  const auto& u = state.u;
  const auto& ut = state.ut;
  const double p = params.p;

  switch (density) {
    case Density::kinetic:
      if (state.has_levels()) {
        const double dt = state.dt;
        parallel_for(n, [&](std::size_t i) {
          const double a = (state.u_next[i] - u[i]) / dt, b = (u[i] - state.u_prev[i]) / dt;
          out[i] = 0.25 * (a * a + b * b);
        });
      } else {
        parallel_for(n, [&](std::size_t i) { out[i] = 0.5 * ut[i] * ut[i]; });
      }
      return out;
    case Density::potential:
      if (!params.nonlinear) return out;
      if (state.has_levels()) {
        parallel_for(n, [&](std::size_t i) {
          out[i] = 0.25 * potential_density(state.u_next[i], p) + 0.5 * potential_density(u[i], p) +
                   0.25 * potential_density(state.u_prev[i], p);
        });
      } else {
        parallel_for(n, [&](std::size_t i) { out[i] = potential_density(u[i], p); });
      }
      return out;
    case Density::lp_mass:
      parallel_for(n, [&](std::size_t i) { out[i] = (p + 1.0) * potential_density(u[i], p); });
      return out;
    case Density::gradient:
      if (state.has_levels()) {
        // average of the two staggered forms a(u^{n+1}, u^n) and a(u^n, u^{n-1})
        const auto a = gradient_product(state.u_next, u, grid);
        const auto b = gradient_product(u, state.u_prev, grid);
        for (std::size_t i = 0; i < n; ++i) out[i] = 0.25 * (a[i] + b[i]);
      } else {
        const auto g = gradient_squared(u, grid);
        for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * g[i];
      }
      return out;
    case Density::energy: {
      out = nodal_density(state, grid, Density::kinetic, params);
      const auto g = nodal_density(state, grid, Density::gradient, params);
      const auto f = nodal_density(state, grid, Density::potential, params);
      for (std::size_t i = 0; i < n; ++i) out[i] += g[i] + f[i];
      return out;
    }
    case Density::morawetz: {
      const int d = grid.d;
      const double k = 0.5 * (d - 1);
      const double c = (d - 1.0) * (d - 3.0) / 16.0;
      const double h = grid.h;
      parallel_for(n, [&](std::size_t i) {
        const Vec3 x = grid.position(i);
        const double r = grid.radius(i);
        const Vec3 g = centered_gradient(u, grid, i);
        double ur = 0.0, ang2 = 0.0;
        double inv1 = 0.0, inv2 = 0.0;
        if (grid.radial()) {
          ur = g[0];
          if (i == 0) {
            // averages of 1/r and 1/r^2 over the origin cell r < h/2
            inv1 = 2.0 * d / ((d - 1.0) * h);
            inv2 = 4.0 * d / ((d - 2.0) * h * h);
          } else {
            inv1 = 1.0 / r;
            inv2 = inv1 * inv1;
          }
        } else {
          const double g2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
          if (r < h) {
            const double b = h * std::cbrt(3.0 / (4.0 * std::numbers::pi));
            inv1 = r > 0.5 * b ? 1.0 / r : 1.5 / b;
            inv2 = r > 0.5 * b ? inv1 * inv1 : 3.0 / (b * b);
            ur = r > 0.0 ? (x[0] * g[0] + x[1] * g[1] + x[2] * g[2]) / r : 0.0;
          } else {
            inv1 = 1.0 / r;
            inv2 = inv1 * inv1;
            ur = (x[0] * g[0] + x[1] * g[1] + x[2] * g[2]) * inv1;
            ang2 = std::max(0.0, g2 - ur * ur);
          }
        }
        // (a + k u/r)^2 expanded so each singular factor uses its own average
        const double a = ur + ut[i];
        out[i] = a * a + 2.0 * a * k * u[i] * inv1 + (k * k + c) * u[i] * u[i] * inv2 + ang2;
      });
      return out;
    }
    case Density::scattering_residual_pair: {
      if (params.comparator == nullptr)
        throw std::invalid_argument("scattering_residual_pair needs a comparator field");
      const auto& cmp = *params.comparator;
      for (std::size_t i = 0; i < n; ++i) {
        const Vec3 x = grid.position(i);
        const Vec3 g = centered_gradient(u, grid, i);
        const auto ref = cmp(x, state.t);
        double s = 0.0;
        for (int a = 0; a < 3; ++a) s += (g[a] - ref[a]) * (g[a] - ref[a]);
        s += (ut[i] - ref[3]) * (ut[i] - ref[3]);
        out[i] = s;
      }
      return out;
    }
  }
  return out;
}

double region_integral(const FieldState& state, const GridSpec& grid, const RegionSpec& region,
                       Density density, const DensityParams& params)
{
  auto values = nodal_density(state, grid, density, params);
  const auto cut = density == Density::lp_mass ? CutCell::constant : CutCell::linear;
  return integrate_nodal(grid, region, state.t, values, cut);
}

PointSample interpolate_at(const FieldState& state, const GridSpec& grid, double r)
{
  if (!grid.radial()) throw std::invalid_argument("radius sampling needs a radial grid");
  if (!(r >= 0.0 && r <= grid.extent * (1.0 + 1e-14)))
    throw std::out_of_range("sample radius " + std::to_string(r) + " outside grid");
  const double h = grid.h;
  const int n = grid.n;
  int j0 = static_cast<int>(std::floor(r / h)) - 1;
  j0 = std::min(j0, n - 4);
  double w[4], dw[4];
  cubic_weights(r / h - j0, w, dw);
  PointSample s;
  for (int m = 0; m < 4; ++m) {
    const auto j = static_cast<std::size_t>(std::abs(j0 + m));  // even extension
    s.u += w[m] * state.u[j];
    s.ut += w[m] * state.ut[j];
    s.ur += dw[m] * state.u[j] / h;
  }
  s.grad = {s.ur, 0.0, 0.0};
  return s;
}

PointSample interpolate_at(const FieldState& state, const GridSpec& grid, const Vec3& x)
{
  if (grid.radial()) {
    PointSample s = interpolate_at(state, grid, std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
    return s;
  }
  const double h = grid.h;
  const int n = grid.n;
  int j0[3];
  double w[3][4], dw[3][4];
  for (int a = 0; a < 3; ++a) {
    const double xi = (x[a] + grid.extent) / h;
    if (!(xi >= 0.0 && xi <= n - 1 + 1e-12))
      throw std::out_of_range("sample point outside the cartesian box");
    j0[a] = std::clamp(static_cast<int>(std::floor(xi)) - 1, 0, n - 4);
    cubic_weights(xi - j0[a], w[a], dw[a]);
  }
  PointSample s;
  for (int c = 0; c < 4; ++c) {
    for (int b = 0; b < 4; ++b) {
      for (int a = 0; a < 4; ++a) {
        const std::size_t idx = grid.index(j0[0] + a, j0[1] + b, j0[2] + c);
        const double u = state.u[idx];
        s.u += w[0][a] * w[1][b] * w[2][c] * u;
        s.ut += w[0][a] * w[1][b] * w[2][c] * state.ut[idx];
        s.grad[0] += dw[0][a] * w[1][b] * w[2][c] * u / h;
        s.grad[1] += w[0][a] * dw[1][b] * w[2][c] * u / h;
        s.grad[2] += w[0][a] * w[1][b] * dw[2][c] * u / h;
      }
    }
  }
  const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  const double g2 = s.grad[0] * s.grad[0] + s.grad[1] * s.grad[1] + s.grad[2] * s.grad[2];
  if (r > 0.0) {
    s.ur = (x[0] * s.grad[0] + x[1] * s.grad[1] + x[2] * s.grad[2]) / r;
    s.angular2 = std::max(0.0, g2 - s.ur * s.ur);
  }
  return s;
}

}  // namespace cwave

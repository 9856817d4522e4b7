#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "cwave/grid.hpp"

using namespace cwave;

namespace {

constexpr double kPi = std::numbers::pi;

// Largest eigenvalue of -Lap_h (times h^2) on the radial grid by power
// iteration in the volume-weighted inner product.
double radial_spectral_radius(int d)
{
  const GridSpec g = make_grid(GridMode::radial, d, 1.0, 200.0, 0.1);
  std::vector<double> v(g.size()), w(g.size());
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& x : v) x = dist(rng);
  v.back() = 0.0;
  double lambda = 0.0;
  for (int it = 0; it < 4000; ++it) {
    laplacian(v, g, w);
    double norm = 0.0;
    for (double x : w) norm = std::max(norm, std::abs(x));
    lambda = norm;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = -w[i] / norm;
  }
  return lambda;
}

// Runs leapfrog at dt/h = ratio; true if the volume-weighted norm stays bounded.
bool leapfrog_bounded(int d, double ratio)
{
  GridSpec g = make_grid(GridMode::radial, d, 1.0, 120.0, 0.01);
  g.dt = ratio;
  std::vector<double> a(g.size()), b(g.size()), c(g.size()), lap(g.size());
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::size_t i = 0; i + 1 < a.size(); ++i) a[i] = b[i] = dist(rng);
  auto norm = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += std::pow(i + 0.5, d - 1) * v[i] * v[i];
    return s;
  };
  const double n0 = norm(b);
  for (int n = 0; n < 3000; ++n) {
    laplacian(b, g, lap);
    for (std::size_t i = 0; i + 1 < a.size(); ++i) c[i] = 2 * b[i] - a[i] + ratio * ratio * lap[i];
    std::swap(a, b);
    std::swap(b, c);
  }
  const double growth = norm(b) / n0;
  return std::isfinite(growth) && growth < 1e6;
}

double max_abs_error(const GridSpec& g, const std::vector<double>& lap,
                     double (*exact)(double), double rmax)
{
  double e = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.radius(i);
    if (r > rmax) break;
    e = std::max(e, std::abs(lap[i] - exact(r)));
  }
  return e;
}

}  // namespace

TEST_CASE("cfl limit matches the stencil's spectral radius")
{
  CHECK(cfl_limit(GridMode::cartesian3d) == doctest::Approx(0.9 / std::sqrt(3.0)));
  for (int d = 3; d <= 5; ++d) {
    CAPTURE(d);
    const double lambda = radial_spectral_radius(d);
    const double bound = 2.0 / std::sqrt(lambda);
    CHECK(cfl_limit(GridMode::radial, d) == doctest::Approx(0.9 * bound).epsilon(1e-6));
    CHECK(leapfrog_bounded(d, 0.99 * bound));
    CHECK_FALSE(leapfrog_bounded(d, 1.02 * bound));
  }
  CHECK_THROWS_AS(cfl_limit(static_cast<GridMode>(7)), std::invalid_argument);
}

TEST_CASE("make_grid validates spacing, extent and cfl")
{
  auto g = make_grid(GridMode::radial, 3, 0.02, 40.0, 0.01);
  CHECK(g.n == 2001);
  CHECK(g.size() == 2001);
  CHECK(make_grid(GridMode::radial, 5, 0.05, 10.0, 0.025).n == 201);

  try {
    make_grid(GridMode::cartesian3d, 3, 0.25, 5.0, 0.2);
    FAIL("expected a cfl error");
  } catch (const CflError& e) {
    CHECK(e.limit() == doctest::Approx(0.9 / std::sqrt(3.0)));
  }
  CHECK_THROWS(make_grid(GridMode::radial, 3, -0.1, 40.0, 0.01));
  CHECK_THROWS(make_grid(GridMode::radial, 3, 0.03, 1.0, 0.01));
  CHECK_THROWS(make_grid(GridMode::cartesian3d, 4, 0.25, 5.0, 0.1));

  const auto c = make_grid(GridMode::cartesian3d, 3, 0.25, 5.0, 0.1);
  CHECK(c.n == 41);
  CHECK(c.coordinate(0) == -5.0);
  CHECK(c.coordinate(40) == doctest::Approx(5.0));
  CHECK(c.is_boundary(c.index(0, 3, 3)));
  CHECK_FALSE(c.is_boundary(c.index(1, 3, 3)));
}

TEST_CASE("radial laplacian: constants, r^2, and second-order convergence")
{
  for (int d = 3; d <= 5; ++d) {
    const auto g = make_grid(GridMode::radial, d, 0.1, 10.0, 0.05);
    std::vector<double> one(g.size(), 1.0), sq(g.size()), out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) sq[i] = g.radius(i) * g.radius(i);
    laplacian(one, g, out);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(out[i] == doctest::Approx(0.0));
    laplacian(sq, g, out);
    for (std::size_t i = 0; i + 1 < g.size(); ++i)
      CHECK(out[i] == doctest::Approx(2.0 * d).epsilon(1e-11));
  }

  // d = 5, u = exp(-r^2): Lap u = (4 r^2 - 2d) exp(-r^2)
  auto exact = [](double r) { return (4 * r * r - 10.0) * std::exp(-r * r); };
  double prev = 0.0;
  for (double h : {0.04, 0.02, 0.01}) {
    const auto g = make_grid(GridMode::radial, 5, h, 8.0, h / 2);
    std::vector<double> u(g.size()), out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = std::exp(-g.radius(i) * g.radius(i));
    laplacian(u, g, out);
    const double err = max_abs_error(g, out, +exact, 6.0);
    if (prev > 0.0) {
      CAPTURE(h);
      CHECK(prev / err >= 3.4);
      CHECK(prev / err <= 4.6);
    }
    prev = err;
  }
}

TEST_CASE("cartesian laplacian converges at second order")
{
  double prev = 0.0;
  for (int m : {20, 40}) {
    const double L = 3.0, h = 2 * L / m;
    const auto g = make_grid(GridMode::cartesian3d, 3, h, L, h / 2);
    std::vector<double> u(g.size()), out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec3 x = g.position(i);
      u[i] = std::sin(x[0]) * std::cos(0.5 * x[1]) * std::exp(-0.1 * x[2] * x[2]);
    }
    laplacian(u, g, out);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.is_boundary(i)) continue;
      const Vec3 x = g.position(i);
      const double z = x[2];
      const double ez = std::exp(-0.1 * z * z);
      const double exact = std::sin(x[0]) * std::cos(0.5 * x[1]) *
                           (-1.0 - 0.25 + (-0.2 + 0.04 * z * z)) * ez;
      err = std::max(err, std::abs(out[i] - exact));
    }
    if (prev > 0.0) {
      CHECK(prev / err >= 3.4);
      CHECK(prev / err <= 4.6);
    }
    prev = err;
  }
}

TEST_CASE("sphere quadrature")
{
  CHECK(sphere_area(3) == doctest::Approx(4 * kPi).epsilon(1e-14));
  CHECK(sphere_area(4) == doctest::Approx(2 * kPi * kPi).epsilon(1e-14));
  CHECK(sphere_area(5) == doctest::Approx(8 * kPi * kPi / 3).epsilon(1e-14));
  for (int d = 3; d <= 5; ++d)
    CHECK(SphereGrid::collapsed(d).total_weight() == doctest::Approx(sphere_area(d)).epsilon(1e-12));

  const auto s = SphereGrid::gauss_product();
  CHECK(s.size() == 32 * 64);
  CHECK(std::abs(s.total_weight() / (4 * kPi) - 1.0) < 1e-12);
  // int z^2 = 4pi/3, int x^2 y^2 = 4pi/15, int x = 0
  double z2 = 0, x2y2 = 0, x1 = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const auto& n = s.directions[j];
    z2 += s.weights[j] * n[2] * n[2];
    x2y2 += s.weights[j] * n[0] * n[0] * n[1] * n[1];
    x1 += s.weights[j] * n[0];
  }
  CHECK(z2 == doctest::Approx(4 * kPi / 3).epsilon(1e-12));
  CHECK(x2y2 == doctest::Approx(4 * kPi / 15).epsilon(1e-12));
  CHECK(std::abs(x1) < 1e-12);
}

TEST_CASE("region integrals")
{
  const auto g = make_grid(GridMode::radial, 3, 0.02, 10.0, 0.01);
  FieldState z = zero_state(g);
  CHECK(region_integral(z, g, RegionSpec::whole(), Density::energy) == 0.0);

  // u = 1, p = 3 potential on the shell 0 < r < 1 at t = 0: (4pi/3)/4
  FieldState one = zero_state(g);
  std::fill(one.u.begin(), one.u.end(), 1.0);
  DensityParams p3{3.0, true, nullptr};
  CHECK(region_integral(one, g, RegionSpec::shell(0, 1), Density::potential, p3) ==
        doctest::Approx(kPi / 3).epsilon(1e-12));
  // off-node shell boundary and nonzero time
  one.t = 0.313;
  CHECK(region_integral(one, g, RegionSpec::shell(0.5, 1.7), Density::potential, p3) ==
        doctest::Approx(kPi / 3 * (std::pow(2.013, 3) - std::pow(0.813, 3))).epsilon(1e-12));

  CHECK_THROWS_AS(parse_density("entropy"), std::invalid_argument);
}

TEST_CASE("free-wave data energy against a refined quadrature")
{
  // u0 = -2 exp(-r^2), u1 = 0: energy density 8 r^2 exp(-2 r^2), weight 4 pi r^2.
  // Oracle: composite trapezoid of the analytic density at h/8.
  auto density = [](double r) { return 8 * r * r * std::exp(-2 * r * r) * 4 * kPi * r * r; };
  const double ho = 0.02 / 8;
  double oracle = 0.0;
  for (int i = 1; i * ho < 10.0; ++i) oracle += density(i * ho) * ho;

  double prev = 0.0;
  for (double h : {0.04, 0.02}) {
    const auto g = make_grid(GridMode::radial, 3, h, 10.0, h / 2);
    FieldState s = zero_state(g);
    for (std::size_t i = 0; i < g.size(); ++i) s.u[i] = -2 * std::exp(-g.radius(i) * g.radius(i));
    DensityParams lin{4.0, false, nullptr};
    const double e = region_integral(s, g, RegionSpec::whole(), Density::energy, lin);
    const double err = std::abs(e - oracle) / oracle;
    CHECK(err < 2e-3);
    if (prev > 0.0) CHECK(prev / err > 3.0);
    prev = err;
  }
}

TEST_CASE("property: ball + shell + exterior partitions the whole domain")
{
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (auto mode : {GridMode::radial, GridMode::cartesian3d}) {
    const auto g = mode == GridMode::radial ? make_grid(mode, 4, 0.05, 6.0, 0.02)
                                            : make_grid(mode, 3, 0.2, 3.0, 0.1);
    FieldState s = zero_state(g, 0.37);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.is_boundary(i)) continue;
      const double r = g.radius(i);
      s.u[i] = std::exp(-r * r) * (1 + 0.3 * std::sin(3 * r));
      s.ut[i] = std::cos(r) * std::exp(-0.5 * r * r);
    }
    for (int trial = 0; trial < 20; ++trial) {
      const double R1 = -1.0 + 2.0 * uni(rng);
      const double R2 = R1 + 0.05 + 1.5 * uni(rng);
      for (auto dens : {Density::energy, Density::lp_mass, Density::morawetz}) {
        DensityParams par{4.0, true, nullptr};
        const double whole = region_integral(s, g, RegionSpec::whole(), dens, par);
        const double parts = region_integral(s, g, RegionSpec::ball(R1), dens, par) +
                             region_integral(s, g, RegionSpec::shell(R1, R2), dens, par) +
                             region_integral(s, g, RegionSpec::exterior(R2), dens, par);
        CHECK(std::abs(parts - whole) <= 1e-10 * std::abs(whole));
      }
    }
  }
}

TEST_CASE("cubic interpolation")
{
  const auto g = make_grid(GridMode::radial, 3, 0.05, 5.0, 0.02);
  FieldState s = zero_state(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.radius(i);
    s.u[i] = r * r * r;
    s.ut[i] = std::cos(r);
  }
  const auto node = interpolate_at(s, g, 1.25);
  CHECK(node.u == doctest::Approx(1.25 * 1.25 * 1.25).epsilon(1e-14));
  CHECK(node.ut == doctest::Approx(std::cos(1.25)).epsilon(1e-14));
  const auto off = interpolate_at(s, g, 1.2345);
  CHECK(off.u == doctest::Approx(std::pow(1.2345, 3)).epsilon(1e-12));
  CHECK(off.ur == doctest::Approx(3 * 1.2345 * 1.2345).epsilon(1e-10));
  CHECK_THROWS_AS(interpolate_at(s, g, 5.5), std::out_of_range);

  // even data near the origin: r^2 reproduced through the mirrored stencil
  for (std::size_t i = 0; i < g.size(); ++i) s.u[i] = g.radius(i) * g.radius(i);
  CHECK(interpolate_at(s, g, 0.013).u == doctest::Approx(0.013 * 0.013).epsilon(1e-12));

  const auto c = make_grid(GridMode::cartesian3d, 3, 0.25, 2.0, 0.1);
  FieldState cs = zero_state(c);
  for (std::size_t i = 0; i < c.size(); ++i) cs.u[i] = c.position(i)[0];
  const auto ps = interpolate_at(cs, c, Vec3{0.3141, -1.2, 0.77});
  CHECK(std::abs(ps.u - 0.3141) < 1e-12);
  CHECK(std::abs(ps.grad[0] - 1.0) < 1e-12);
  CHECK(std::abs(ps.grad[1]) < 1e-12);
  CHECK_THROWS_AS(interpolate_at(cs, c, Vec3{2.5, 0, 0}), std::out_of_range);
}

TEST_CASE("nonlinearity helpers")
{
  CHECK(nonlinearity(0.0, 3.4) == 0.0);
  CHECK(nonlinearity(-2.0, 3.0) == doctest::Approx(-8.0));
  CHECK(potential_density(2.0, 3.0) == doctest::Approx(4.0));
  CHECK(potential_density(0.0, 2.5) == 0.0);
}

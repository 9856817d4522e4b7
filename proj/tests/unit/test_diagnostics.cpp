#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cwave/diagnostics.hpp"
#include "cwave/exponents.hpp"

using namespace cwave;

namespace {

constexpr double kPi = std::numbers::pi;

ProblemSpec gaussian_problem(bool linear)
{
  ProblemSpec p;
  p.d = 3;
  p.p = 4.0;
  p.linear = linear;
  p.scheme = Scheme::conservative;
  p.data.family = "gaussian-odd";
  p.R_support = 6.0;
  return p;
}

// Composite Simpson on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n)
{
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Energy density of the gaussian-odd data (u = -2 exp(-r^2), u_t = 0, p = 4)
// weighted by (1 + r)^kappa, integrated over R^3.
double gaussian_weighted_energy(double kappa)
{
  auto dens = [&](double r) {
    const double e = std::exp(-r * r);
    const double ur = 4 * r * e;
    return 4 * kPi * r * r * std::pow(1 + r, kappa) * (0.5 * ur * ur + std::pow(2 * e, 5) / 5);
  };
  return simpson(dens, 0.0, 6.0, 24000);
}

FieldState exact_state(const GridSpec& g, double t)
{
  const GaussianOdd f;
  FieldState s = zero_state(g, t);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto w = exact_free_wave_3d(f, g.radius(i), t);
    s.u[i] = w.u;
    s.ut[i] = w.ut;
  }
  return s;
}

}  // namespace

TEST_CASE("zero state gives zero diagnostics")
{
  const auto g = make_grid(GridMode::radial, 3, 0.05, 10.0, 0.025);
  const auto p = gaussian_problem(false);
  const auto z = zero_state(g, 1.0);
  const auto e = total_energy(z, g, p);
  CHECK(e.total == 0.0);
  CHECK(exterior_energy(z, g, p, -2.0) == 0.0);
  CHECK(morawetz_report(z, g, p) == 0.0);
  CHECK(weighted_energy(z, g, p, 2.0) == 0.0);
  CHECK(shell_lp_density(z, g, p, 0.0, 2.0) == 0.0);
  CHECK(cone_flux_density(z, g, p, 0.0, SphereGrid::collapsed(3)) == 0.0);
  MixedNormAccumulator m(2.0, 3.0);
  m.add(0.0, lr_integral(g, RegionSpec::whole(), 0.0, z.u, 3.0));
  m.add(0.5, 0.0);
  CHECK(m.finalize(0.0, 1.0) == 0.0);
}

TEST_CASE("energy report components")
{
  const auto g = make_grid(GridMode::radial, 3, 0.02, 10.0, 0.01);
  const auto p = gaussian_problem(false);
  const auto s = init_from_data(p, g);
  const auto e = total_energy(s, g, p);
  CHECK(e.kinetic == 0.0);
  CHECK(e.gradient > 0.0);
  CHECK(e.potential > 0.0);
  CHECK(std::abs(e.total - (e.kinetic + e.gradient + e.potential)) <= 1e-12 * e.total);

  // refined-quadrature oracle, kappa = 0 and 1
  for (double kappa : {0.0, 1.0}) {
    const double exact = gaussian_weighted_energy(kappa);
    CAPTURE(kappa);
    CHECK(std::abs(weighted_energy(s, g, p, kappa) - exact) <= 2e-3 * exact);
  }
  CHECK(weighted_energy(s, g, p, 0.0) == doctest::Approx(e.total).epsilon(1e-12));
  CHECK_THROWS_AS(weighted_energy(s, g, p, -1.0), std::invalid_argument);

  // constant state on a ball: potential only
  FieldState c = zero_state(g);
  for (auto& v : c.u) v = -1.5;
  const double vol = 4.0 / 3.0 * kPi * std::pow(2.3, 3);
  CHECK(region_energy(c, g, p, RegionSpec::ball(2.3)) ==
        doctest::Approx(std::pow(1.5, 5) / 5 * vol).epsilon(1e-12));

  // exterior limits
  CHECK(exterior_energy(s, g, p, 20.0) == 0.0);
  CHECK(exterior_energy(s, g, p, -1e9) == doctest::Approx(e.total).epsilon(1e-12));
}

TEST_CASE("weighted energy converges at second order")
{
  const auto p = gaussian_problem(false);
  const double exact = gaussian_weighted_energy(1.0);
  double err[2];
  int k = 0;
  for (double h : {0.04, 0.02}) {
    const auto g = make_grid(GridMode::radial, 3, h, 10.0, h / 2);
    err[k++] = std::abs(weighted_energy(init_from_data(p, g), g, p, 1.0) - exact);
  }
  CHECK(err[0] / err[1] > 3.4);
}

TEST_CASE("morawetz density: d = 3 drops the u/|x| square term")
{
  // For d = 3 the density is |u_r + u/r + u_t|^2; a state u = c/r outside
  // the origin cell makes u_r + u/r vanish.
  const auto g = make_grid(GridMode::radial, 3, 0.05, 10.0, 0.025);
  const auto p = gaussian_problem(true);
  FieldState s = zero_state(g);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double r = g.radius(i);
    if (r > 1.0 && r < 5.0) s.u[i] = 1.0 / r;
  }
  const double full = morawetz_report(s, g, p);
  double shell = 0.0;
  auto dens = nodal_density(s, g, Density::morawetz, density_params(p));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.radius(i);
    if (r > 1.5 && r < 4.5) shell = std::max(shell, std::abs(dens[i]) * r * r);
  }
  CHECK(shell < 1e-4);
  CHECK(full > 0.0);  // the jumps at r = 1 and r = 5 contribute
}

TEST_CASE("flux of an outgoing free wave through far cones is negligible")
{
  const auto g = make_grid(GridMode::radial, 3, 0.02, 40.0, 0.01);
  const auto p = gaussian_problem(true);
  const auto sphere = SphereGrid::collapsed(3);
  const double E = total_energy(exact_state(g, 0.0), g, p).total;
  for (double R : {8.0, 10.0}) {
    FluxLedger ledger;
    ledger.R = R;
    for (int k = 0; k <= 100; ++k) cone_flux_accumulate(ledger, exact_state(g, 0.1 * k), g, p, sphere);
    CHECK(ledger.Phi.back() >= 0.0);
    CHECK(ledger.Phi.back() < 1e-3 * E);
  }
  CHECK_THROWS_AS(cone_flux_density(exact_state(g, 1.0), g, p, 45.0, sphere), std::out_of_range);
  CHECK(cone_flux_density(exact_state(g, 1.0), g, p, -3.0, sphere) == 0.0);
}

TEST_CASE("nonlinear run: partition, exterior monotonicity, flux closure, Holder chain")
{
  const double h = 0.04;
  const auto g = make_grid(GridMode::radial, 3, h, 30.0, h / 2);
  const auto p = gaussian_problem(false);
  const auto sphere = SphereGrid::collapsed(3);
  const auto table = lemma_pair(3, Rational(4));
  const double q = to_double(table.q), r = to_double(table.r);
  const double k1 = to_double(table.k1), k2 = to_double(table.k2);
  const auto chi2 = RegionSpec::shell(0.0, 2.0);

  std::vector<FluxLedger> ledgers;
  for (double R : {-2.0, 0.0, 2.0}) {
    FluxLedger l;
    l.R = R;
    ledgers.push_back(l);
  }
  MixedNormAccumulator lhs(1.0, 2.0), mass(p.p + 1, p.p + 1), strich(q, r);
  TimeSeries shell_mass;
  double E = 0.0, worst_partition = 0.0, first_morawetz = 0.0, last_morawetz = 0.0;
  auto observe = [&](const Stepper& st) {
    const auto s = st.state();
    if (st.step() == 0) E = total_energy(s, g, p).total;
    for (auto& l : ledgers) cone_flux_accumulate(l, s, g, p, sphere);
    if (st.step() % 10 != 0) return;
    const double whole = region_energy(s, g, p, RegionSpec::whole());
    const double parts = region_energy(s, g, p, RegionSpec::ball(1.0)) +
                         region_energy(s, g, p, RegionSpec::shell(1.0, 3.0)) +
                         exterior_energy(s, g, p, 3.0);
    worst_partition = std::max(worst_partition, std::abs(whole - parts) / whole);

    std::vector<double> nl(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) nl[i] = nonlinearity(s.u[i], p.p);
    lhs.add(s.t, lr_integral(g, chi2, s.t, nl, 2.0));
    mass.add(s.t, lr_integral(g, chi2, s.t, s.u, p.p + 1));
    strich.add(s.t, lr_integral(g, chi2, s.t, s.u, r));
    shell_mass.add(s.t, shell_lp_density(s, g, p, 0.0, 2.0));
    last_morawetz = morawetz_report(s, g, p);
    if (st.step() == 0) first_morawetz = last_morawetz;
  };
  run(p, g, {8.0, 1, 2.0}, {observe});

  CHECK(worst_partition <= 1e-10);
  for (const auto& l : ledgers) {
    CAPTURE(l.R);
    CHECK(l.max_increase() <= 1e-6 * E);
    CHECK(std::abs(l.closure_residual(l.t.size() - 1)) <= 0.02 * E);
  }
  for (auto [T, t1] : {std::pair{0.0, 8.0}, {0.0, 2.0}, {2.0, 6.0}, {5.0, 8.0}}) {
    CAPTURE(T);
    const double left = lhs.finalize(T, t1);
    const double right = std::pow(mass.finalize(T, t1), k1) * std::pow(strich.finalize(T, t1), k2);
    CHECK(left <= right * (1 + 1e-12));
  }
  CHECK(shell_mass.integrate(0.0, 8.0) <= (p.p + 1) * 2.0 * E);
  CHECK(shell_mass.integrate(4.0, 6.0) < shell_mass.integrate(2.0, 4.0));
  CHECK(last_morawetz < first_morawetz);
}

TEST_CASE("mixed norm of a constant on the unit ball")
{
  const auto g = make_grid(GridMode::radial, 3, 0.05, 4.0, 0.025);
  std::vector<double> c(g.size(), 0.7);
  const double vol = 4.0 / 3.0 * kPi;
  for (auto [q, r] : {std::pair{2.0, 3.0}, {4.0, 6.0}, {1.0, 2.0}}) {
    MixedNormAccumulator m(q, r);
    for (int k = 0; k < 10; ++k) m.add(0.1 * k, lr_integral(g, RegionSpec::ball(1.0), 0.0, c, r));  // fixed ball
    const double tau = 0.75;
    CHECK(m.finalize(0.0, tau) ==
          doctest::Approx(0.7 * std::pow(vol, 1 / r) * std::pow(tau, 1 / q)).epsilon(1e-12));
    // monotone in the window
    CHECK(m.finalize(0.0, 0.5) <= m.finalize(0.0, tau));
    CHECK(m.finalize(0.2, tau) <= m.finalize(0.0, tau));
    CHECK_THROWS_AS(m.finalize(5.0, 6.0), std::invalid_argument);
  }
  CHECK_THROWS_AS(MixedNormAccumulator(0.5, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(MixedNormAccumulator(2.0, 2.0).finalize(), std::invalid_argument);
}

TEST_CASE("angular energy on the cartesian grid")
{
  // u = z exp(-r^2): |angular grad u|^2 = exp(-2r^2) sin^2(theta), whose
  // integral over R^3 is pi sqrt(pi/2) / 3.
  const auto g = make_grid(GridMode::cartesian3d, 3, 0.1, 4.0, 0.05);
  FieldState s = zero_state(g);
  FieldState radial = zero_state(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.position(i);
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    s.u[i] = x[2] * std::exp(-r2);
    radial.u[i] = std::exp(-r2);
  }
  const double exact = kPi * std::sqrt(kPi / 2) / 3;
  CHECK(angular_energy(s, g, RegionSpec::whole()) == doctest::Approx(exact).epsilon(0.03));
  CHECK(angular_energy(radial, g, RegionSpec::whole()) < 1e-3 * exact);
  const auto rg = make_grid(GridMode::radial, 3, 0.1, 4.0, 0.05);
  CHECK(angular_energy(zero_state(rg), rg, RegionSpec::whole()) == 0.0);
}

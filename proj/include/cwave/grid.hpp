// Grids, field storage, discrete operators, interpolation and region
// quadrature shared by the solver and every diagnostic.
//
// Two grid modes exist.  `radial` stores samples at r_i = i*h, i = 0..n-1,
// for a radially symmetric field in dimension d; the outer node is a
// homogeneous Dirichlet node.  `cartesian3d` stores an n^3 box
// [-L, L]^3 with Dirichlet faces, x-fastest ordering.

#ifndef CWAVE_GRID_HPP
#define CWAVE_GRID_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cwave {

using Vec3 = std::array<double, 3>;

enum class GridMode { radial, cartesian3d };

std::string to_string(GridMode mode);
GridMode parse_grid_mode(std::string_view name);

class CflError : public std::invalid_argument {
 public:
  CflError(const std::string& what, double limit) : std::invalid_argument(what), limit_(limit) {}
  /// Largest admissible dt/h.
  double limit() const { return limit_; }

 private:
  double limit_;
};

/// Stable dt/h for the leapfrog stencil of `mode`, times a 0.9 safety
/// factor.  The radial bound depends on d through the origin row.
double cfl_limit(GridMode mode, int d = 3);

struct GridSpec {
  GridMode mode = GridMode::radial;
  int d = 3;
  double h = 0.0;
  double extent = 0.0;  // r_max (radial) or half-box L (cartesian3d)
  int n = 0;            // points per axis
  double dt = 0.0;

  std::size_t size() const;
  bool radial() const { return mode == GridMode::radial; }
  /// Axis coordinate of index i in cartesian mode.
  double coordinate(int i) const { return -extent + i * h; }
  std::size_t index(int i, int j, int k) const
  {
    return (static_cast<std::size_t>(k) * n + j) * n + i;
  }
  /// |x| of node idx.
  double radius(std::size_t idx) const;
  /// Radial mode returns (r, 0, 0).
  Vec3 position(std::size_t idx) const;
  bool is_boundary(std::size_t idx) const;
  /// Largest sphere radius that can be interpolated with a full stencil.
  double max_sample_radius() const;
};

GridSpec make_grid(GridMode mode, int d, double h, double extent, double dt);

struct FieldState {
  std::vector<double> u;
  std::vector<double> ut;
  double t = 0.0;
  // Neighbouring leapfrog levels u^{n-1}, u^{n+1} when the state comes from
  // a stepper; energy densities then reproduce the scheme's conserved
  // energy.  Empty for synthetic or reloaded states.
  std::vector<double> u_prev;
  std::vector<double> u_next;
  double dt = 0.0;

  bool has_levels() const { return !u_prev.empty() && !u_next.empty(); }
};

FieldState zero_state(const GridSpec& grid, double t = 0.0);
/// Throws std::invalid_argument on size mismatch or non-finite samples.
void validate_state(const FieldState& state, const GridSpec& grid);

enum class RegionKind { exterior, shell, ball };

// Time-dependent region {|x| > t+R1}, {t+R1 < |x| < t+R2} or {|x| < t+R1}.
struct RegionSpec {
  RegionKind kind = RegionKind::exterior;
  double R1 = 0.0;
  double R2 = 0.0;

  static RegionSpec exterior(double R);
  static RegionSpec shell(double R1, double R2);
  static RegionSpec ball(double R);
  /// Exterior with R = -inf.
  static RegionSpec whole();

  /// Radial interval covered at time t; bounds may be infinite.
  std::pair<double, double> radii(double t) const;
  /// Sharp indicator used for source masks: exterior includes its boundary.
  bool contains(double r, double t) const;
};

struct SphereGrid {
  std::vector<Vec3> directions;
  std::vector<double> weights;
  int exact_degree = 0;

  std::size_t size() const { return weights.size(); }
  double total_weight() const;

  /// Gauss-Legendre in cos(theta) times uniform longitude.
  static SphereGrid gauss_product(int n_theta = 32, int n_phi = 64);
  /// Single node carrying the whole sphere area; used by radial runs.
  static SphereGrid collapsed(int d);
};

/// Surface area of the unit sphere S^{d-1}.
double sphere_area(int d);

void laplacian(std::span<const double> u, const GridSpec& grid, std::span<double> out);
std::vector<double> laplacian(const FieldState& state, const GridSpec& grid);

/// Control volume of each node: the radial shell [r_i - h/2, r_i + h/2]
/// clipped to [0, r_max] (sphere area included), or h^3.
std::vector<double> node_volumes(const GridSpec& grid);

/// Bilinear gradient form a(u, v) = sum over faces of area * Du * Dv / h,
/// so that sum vol * (-Lap u) * v = a(u, v) when v vanishes on the boundary.
double gradient_form(std::span<const double> u, std::span<const double> v, const GridSpec& grid);

/// Nodal density of a(u, v): each face term is shared between its two
/// nodes in proportion to their half-cell volumes, so that
/// sum vol_i * density_i = a(u, v) exactly.
std::vector<double> gradient_product(std::span<const double> u, std::span<const double> v,
                                     const GridSpec& grid);
/// gradient_product(u, u): |grad u|^2 per node.
std::vector<double> gradient_squared(std::span<const double> u, const GridSpec& grid);
/// Centered gradient at a node (zero at the radial origin).
Vec3 centered_gradient(std::span<const double> u, const GridSpec& grid, std::size_t idx);

/// Integral of nodal values over a region at time t: each node's value is
/// held constant on its control volume.  Radial mode uses the exact volume
/// of the part of the shell inside the region; cartesian mode weights each
/// cell by the linear fraction of its radial extent inside the region.  The
/// implied node measure is nonnegative and additive over disjoint regions.
///
/// CutCell::linear (radial only) replaces the constant in a cell cut by the
/// region boundary with a linear profile of centered slope and the same
/// cell integral.  Still additive, but the weights depend on the values, so
/// L^r-type norms use the constant rule.
enum class CutCell { constant, linear };

double integrate_nodal(const GridSpec& grid, const RegionSpec& region, double t,
                       std::span<const double> values, CutCell cut = CutCell::constant);

/// Gradient (x, y, z) and time derivative of a comparison field.
using GradientField = std::function<std::array<double, 4>(const Vec3& x, double t)>;

enum class Density {
  energy,
  kinetic,
  gradient,
  potential,
  lp_mass,
  morawetz,
  scattering_residual_pair
};

Density parse_density(std::string_view name);

struct DensityParams {
  double p = 3.0;
  bool nonlinear = true;
  const GradientField* comparator = nullptr;  // scattering_residual_pair only
};

std::vector<double> nodal_density(const FieldState& state, const GridSpec& grid, Density density,
                                  const DensityParams& params);
/// integrate_nodal of the density; energy-type densities use CutCell::linear.
double region_integral(const FieldState& state, const GridSpec& grid, const RegionSpec& region,
                       Density density, const DensityParams& params = {});

struct PointSample {
  double u = 0.0;
  double ut = 0.0;
  double ur = 0.0;
  Vec3 grad{};            // full gradient; radial mode stores (ur, 0, 0)
  double angular2 = 0.0;  // |grad|^2 - ur^2, clamped at 0
};

/// Cubic interpolation (tricubic in cartesian mode) of u and ut with the
/// interpolant's derivative.  Throws std::out_of_range outside the grid.
PointSample interpolate_at(const FieldState& state, const GridSpec& grid, double r);
PointSample interpolate_at(const FieldState& state, const GridSpec& grid, const Vec3& x);

/// Defocusing potential |u|^{p+1}/(p+1) and force |u|^{p-1}u.
double potential_density(double u, double p);
double nonlinearity(double u, double p);

}  // namespace cwave

#endif  // CWAVE_GRID_HPP

// Radiation fields: profiles r^{(d-1)/2} (u_t, u_r) sampled along outgoing
// characteristics |x| = t + R, their late-time limit G, free waves rebuilt
// from G (d = 3 radial) and the exterior scattering residual.

#ifndef CWAVE_RADIATION_HPP
#define CWAVE_RADIATION_HPP

#include <stdexcept>
#include <vector>

#include "cwave/grid.hpp"
#include "cwave/solver.hpp"

namespace cwave {

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Samples on an (R, theta) product grid; R runs over R1 + k dR, theta over
// the sphere nodes (a single node carrying the full area for radial grids).
// Values are stored R-major: index k * n_theta + j.
struct CharacteristicProfile {
  double t = 0.0;
  double R1 = 0.0, R2 = 0.0, dR = 0.0;
  std::vector<double> R;
  std::vector<double> theta_weights;
  std::vector<double> g;     // r^{(d-1)/2} u_t
  std::vector<double> ghat;  // r^{(d-1)/2} u_r

  std::size_t n_theta() const { return theta_weights.size(); }
};

/// Profile on [R1, R2] with R-spacing grid.h.  Points with t + R <= 0 lie
/// outside space and are recorded as 0; throws std::out_of_range when
/// t + R2 leaves the interpolation range.
CharacteristicProfile sample_profile(const FieldState& state, const GridSpec& grid, double R1,
                                     double R2, const SphereGrid& sphere);

/// L^2([R1,R2] x S^{d-1}) distance of the g components (trapezoid in R).
/// Throws std::invalid_argument on mismatched grids.
double cauchy_distance(const CharacteristicProfile& a, const CharacteristicProfile& b);

struct RadiationFieldEstimate {
  double R1 = 0.0, R2 = 0.0, dR = 0.0;
  std::vector<double> R;
  std::vector<double> theta_weights;
  std::vector<double> G;
  double t_star = 0.0;
  std::vector<double> cauchy_history;  // distances between successive profiles
  double l2_norm2 = 0.0;

  std::size_t n_theta() const { return theta_weights.size(); }
};

/// Integral of |G|^2 over the window and the sphere.
double l2_norm2(const RadiationFieldEstimate& estimate);

/// G = latest profile.  Needs at least three profiles at increasing times
/// whose successive distances do not grow; throws ExtractionError otherwise.
RadiationFieldEstimate extract_G(const std::vector<CharacteristicProfile>& profiles);

/// Relative L^2 difference of two estimates on their common R-window.
/// Throws std::invalid_argument when the windows do not overlap or the
/// lattices differ.
double overlap_discrepancy(const RadiationFieldEstimate& a, const RadiationFieldEstimate& b);

/// One estimate on the union of the windows; overlaps are averaged.  Throws
/// ExtractionError when overlap_discrepancy exceeds `tolerance`.
RadiationFieldEstimate glue(const RadiationFieldEstimate& a, const RadiationFieldEstimate& b,
                            double tolerance);

/// l2_norm2 <= 2E (1 + 1e-6).
bool g_norm_bound_check(const RadiationFieldEstimate& estimate, double E);

// u_L(r, t) = (phi(t - r) - phi(t + r)) / r with phi'(s) = G(-s), G the
// piecewise cubic interpolant of the estimate extended by 0, and
// phi(s) = integral of phi' from -inf to s.
class FreeWave3d {
 public:
  explicit FreeWave3d(const RadiationFieldEstimate& estimate);

  WaveSample operator()(double r, double t) const;
  /// Comparator for region integrals (gradient along x/|x|, then u_t).
  GradientField gradient_field() const;

  double phi(double s) const;
  /// k-th derivative of phi, 1 <= k <= 3.
  double phi_derivative(int k, double s) const;

 private:
  // G and its first two derivatives at R.
  void interpolate(double R, double out[3]) const;
  double integral_from_right(double R) const;  // integral of G over [R, R2]

  double R1_, R2_, dR_;
  std::vector<double> G_;
  std::vector<double> cell_integral_;  // integral of the interpolant over [R_k, R2]
};

/// Builds the d = 3 radial free wave whose radiation field is the estimate.
/// Throws std::invalid_argument for non-scalar (angular) estimates.
FreeWave3d free_wave_from_G_radial3d(const RadiationFieldEstimate& estimate, int d = 3);

/// Integral over |x| > t + R of |grad_{x,t}(u - u_L)|^2.
double exterior_scattering_residual(const FieldState& state, const GridSpec& grid,
                                    const FreeWave3d& free_wave, double R);

/// Profile form: integral over [max(R, R1), R2] x S^{d-1} of
/// |g_t - G|^2 + |ghat_t + G|^2 plus the angular energy in the shell
/// t + max(R, R1) < |x| < t + R2.  Throws std::invalid_argument naming the
/// covered window when R lies outside [R1, R2).
double exterior_scattering_residual(const FieldState& state, const GridSpec& grid,
                                    const RadiationFieldEstimate& estimate, double R,
                                    const SphereGrid& sphere);

}  // namespace cwave

#endif  // CWAVE_RADIATION_HPP

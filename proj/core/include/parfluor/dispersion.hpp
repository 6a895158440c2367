#pragma once

#include <string>

namespace parfluor {

/// A plane-wave component (omega, kx, ky): angular frequency [rad/s] and
/// transverse wavevector [rad/m].
struct SpectralPoint {
  double omega = 0.0;
  double kx = 0.0;
  double ky = 0.0;

  friend SpectralPoint operator+(const SpectralPoint& a, const SpectralPoint& b) {
    return {a.omega + b.omega, a.kx + b.kx, a.ky + b.ky};
  }
  friend bool operator==(const SpectralPoint&, const SpectralPoint&) = default;
};

/// n^2(lambda) = B0 + B1 / (lambda^2 - C1) - B2 * lambda^2, lambda in micrometres.
struct SellmeierSet {
  double b0 = 0.0;
  double b1 = 0.0;
  double c1 = 0.0;
  double b2 = 0.0;

  double n_squared(double lambda_um) const {
    const double l2 = lambda_um * lambda_um;
    return b0 + b1 / (l2 - c1) - b2 * l2;
  }
};

/// Uniaxial material: ordinary and principal extraordinary dispersion plus
/// the wavelength window in which the fits may be evaluated.
struct Material {
  std::string name;
  SellmeierSet ordinary;
  SellmeierSet extraordinary;
  double window_lo_nm = 180.0;
  double window_hi_nm = 2600.0;

  /// Beta-barium borate, the constants shipped in data/crystals/bbo.json.
  static Material bbo();

  /// Throws InvalidArgument for an empty or inverted window, or if n^2 <= 1
  /// anywhere on a probe grid over the window.
  void validate() const;
};

/// Crystal cut, length and pump carrier. All angles in radians, lengths in
/// metres, frequencies in rad/s.
struct CrystalSpec {
  double theta_cut = 0.0;
  double length = 0.0;
  Material material = Material::bbo();
  /// Pump carrier 2*omega0.
  double pump_center_omega = 0.0;

  double degenerate_omega() const { return 0.5 * pump_center_omega; }
  /// Throws InvalidArgument if theta is outside (0, pi/2) or L <= 0.
  void validate() const;
};

enum class Ray { pump, signal };
enum class Axis { x, y };

double index_ordinary(double omega, const CrystalSpec& crystal);
double index_extraordinary_principal(double omega, const CrystalSpec& crystal);
/// Effective extraordinary index for on-axis propagation at the cut angle:
/// 1/n^2 = cos^2(theta)/n_o^2 + sin^2(theta)/n_e^2.
double index_extraordinary_at_cut(double omega, const CrystalSpec& crystal);

/// Longitudinal wavevector of an o-ray fluorescence component.
/// Throws EvanescentMode beyond the light cone.
double kz_signal(const SpectralPoint& kappa, const CrystalSpec& crystal);

/// Longitudinal wavevector of an e-ray pump component: the forward root of
/// the uniaxial dispersion relation for a crystal cut at theta.
/// Throws NoRealRoot if the quadratic has no real solution.
double kz_pump(const SpectralPoint& kappa_p, const CrystalSpec& crystal);

/// Relative residual of the e-ray dispersion relation at (kappa_p, kz).
double pump_dispersion_residual(const SpectralPoint& kappa_p, double kz,
                                const CrystalSpec& crystal);

double kz(Ray ray, const SpectralPoint& kappa, const CrystalSpec& crystal);

/// Default relative step (fraction of omega) for the Richardson-extrapolated
/// central differences below.
inline constexpr double kDerivativeRelStep = 1e-6;

/// Group slowness dkz/domega [s/m].
double d_kz_d_omega(Ray ray, const SpectralPoint& kappa, const CrystalSpec& crystal,
                    double rel_step = kDerivativeRelStep);

/// Walk-off slope dkz/dk_axis (dimensionless). The step is rel_step * omega/c.
double d_kz_d_ktrans(Ray ray, Axis axis, const SpectralPoint& kappa,
                     const CrystalSpec& crystal, double rel_step = kDerivativeRelStep);

}  // namespace parfluor

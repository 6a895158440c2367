#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "parfluor/dispersion.hpp"

namespace parfluor {

/// A point on the perfect phase-matching surface for the central pump
/// component: signal at (omega_obs, k0, 0), idler at (2w0 - omega_obs, -k0, 0).
struct PhaseMatchPoint {
  double omega_obs = 0.0;
  double k0 = 0.0;
};

/// First-order expansion of the mismatch around a PhaseMatchPoint.
/// d_beta1 is the pump-idler group slowness difference [s/m]; the rho terms
/// are pump-minus-fluorescence transverse walk-off slopes, unprimed for the
/// signal and primed (p) for the idler. d_beta1_signal (pump-signal) only
/// matters away from omega = omega_obs.
struct LinearizedCoeffs {
  double omega_obs = 0.0;
  double k0 = 0.0;
  double d_beta1 = 0.0;
  double d_beta1_signal = 0.0;
  double d_rho_x = 0.0;
  double d_rho_y = 0.0;
  double d_rho_px = 0.0;
  double d_rho_py = 0.0;
};

/// Root-finding parameters for the perfect phase-matching curve.
inline constexpr int kPhaseMatchScanPoints = 512;
inline constexpr double kPhaseMatchTolerance = 1e-3;  // rad/m

/// k_pz(kappa + kappa') - k_z(kappa) - k_z(kappa').
double delta_k(const SpectralPoint& kappa, const SpectralPoint& kappa_prime,
               const CrystalSpec& crystal);

/// Mismatch of the degenerate-pump pair (omega, k, 0) / (2w0 - omega, -k, 0).
double delta_k_on_pump_axis(double omega_obs, double k_trans, const CrystalSpec& crystal);

/// Every transverse root of the central-pump mismatch on [0, k_max], in
/// ascending order. Empty if the scan finds no sign change.
std::vector<double> perfect_curve_roots(double omega_obs, const CrystalSpec& crystal);

/// Smallest root k0(omega_obs); further roots are logged at warn level.
std::optional<PhaseMatchPoint> perfect_curve(double omega_obs, const CrystalSpec& crystal);

/// External propagation angle arcsin(c k / omega) after refraction at the
/// exit face. Throws TotalInternalReflection when c k / omega > 1.
double exterior_angle(double omega_obs, double k_trans);

/// Throws NoPhaseMatch if perfect_curve(omega_obs) is empty.
LinearizedCoeffs linearize(double omega_obs, const CrystalSpec& crystal);
LinearizedCoeffs linearize(const PhaseMatchPoint& point, const CrystalSpec& crystal);

/// Linearized mismatch for the expansion `c` evaluated at (kappa, kappa').
double delta_k_linear(const LinearizedCoeffs& c, const SpectralPoint& kappa,
                      const SpectralPoint& kappa_prime, const CrystalSpec& crystal);

struct CurveRow {
  double lambda_nm = 0.0;
  std::optional<PhaseMatchPoint> point;
  std::optional<double> alpha_ext;  // rad
  std::optional<LinearizedCoeffs> coeffs;
};

/// Uniform wavelength grid lambda_lo..lambda_hi (inclusive, nm) with one row
/// per point. Rows without a phase-matching solution carry empty optionals.
std::vector<CurveRow> scan_curve(double lambda_lo_nm, double lambda_hi_nm, int n_points,
                                 const CrystalSpec& crystal);

/// CSV: lambda_nm,k0_rad_per_m,alpha_ext_deg,d_beta1_s_per_m,d_rho_px,d_rho_py
void write_curve_csv(std::ostream& os, const std::vector<CurveRow>& rows);

}  // namespace parfluor

#pragma once

#include <complex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "parfluor/dispersion.hpp"
#include "parfluor/phasematch.hpp"

namespace parfluor {

/// Gaussian pump pulse at the crystal entrance face.
///
/// `amplitude` is the position-space peak in units of the reference
/// amplitude that defines `nonlinear_length`; the default 1 makes the
/// effective gain parameter exactly L / L_NL.
struct PumpSpec {
  double tau = 0.0;           // pulse duration [s]
  double width = 0.0;         // beam width [m]
  double omega_center = 0.0;  // 2*omega0 [rad/s]
  double amplitude = 1.0;
  double nonlinear_length = 0.0;  // L_NL [m]

  void validate() const;
  /// L * amplitude / L_NL for a crystal of length L.
  double gain(double crystal_length) const { return crystal_length * amplitude / nonlinear_length; }
};

/// 1/L_NL = w_p^2 d_eff A / (8 c^2 k(w_p/2)). Converts a physical field
/// amplitude A [V/m] and effective nonlinearity d_eff [m/V] into a
/// nonlinear length; k_half is the wavevector at the degenerate frequency.
double nonlinear_length_from_deff(double omega_pump, double d_eff, double field_amplitude,
                                  double k_half);

/// Spectral pump amplitude
///   A (w^2 tau / (2 pi)^{3/2}) exp(-tau^2 (omega - 2w0)^2 / 2 - w^2 (kx^2 + ky^2) / 2)
/// normalised so that its integral over d^3 kappa equals the peak amplitude A.
std::complex<double> pump_spectrum(const SpectralPoint& kappa_p, const PumpSpec& pump);

/// Photon flux at one plane-wave component. `flux` is a density per unit
/// spectral volume d(omega) d(kx) d(ky) [s m^2]; multiply by a mode cell
/// volume to obtain a mean occupation per discrete mode.
struct FluxPoint {
  double omega_obs = 0.0;
  double k_trans = 0.0;
  double flux = 0.0;
  /// Relative convergence estimate of a quadrature, 0 for closed forms.
  double error_estimate = 0.0;
};

/// Tensor-product midpoint quadrature over the pump support.
struct QuadratureSpec {
  double tolerance = 0.01;       // relative change between refinements
  double support_sigmas = 5.0;   // half-width of the box in |A_p|^2 standard deviations
  int initial_points = 16;       // per axis
  int max_points = 256;          // per axis
};

/// Bracket of the Gaussian closed form.
///  - gaussian_consistent: exact integral of the exp(-L^2 dk^2 / 12) surrogate,
///      n = g^2 w^2 tau / (8 pi^{3/2}) [1 + L^2 X / 12]^{-1/2}
///  - as_printed: n = g^2 w^2 tau / (4 pi^{3/2}) [4 + L^2 X]^{-1/2}
/// with X = (d_rho_px^2 + d_rho_py^2) / w^2 + (d_beta1 / tau)^2. The two agree
/// when X = 0; as_printed corresponds to an exp(-L^2 dk^2 / 4) surrogate.
enum class BracketConvention { gaussian_consistent, as_printed };

FluxPoint flux_closed_form(const LinearizedCoeffs& coeffs, const CrystalSpec& crystal,
                           const PumpSpec& pump,
                           BracketConvention convention = BracketConvention::gaussian_consistent);

/// Throws NoPhaseMatch if there is no perfect phase matching at omega_obs.
FluxPoint flux_closed_form(double omega_obs, const CrystalSpec& crystal, const PumpSpec& pump,
                           BracketConvention convention = BracketConvention::gaussian_consistent);

/// (g)^2 Integral d^3kappa' |A_p(kappa + kappa')/A_ref|^2 sinc^2(L dk / 2).
/// Throws NotConverged if max_points is reached without meeting tolerance.
FluxPoint flux_quadrature_exact(const SpectralPoint& kappa, const CrystalSpec& crystal,
                                const PumpSpec& pump, const QuadratureSpec& quad = {});

/// Same integral with sinc^2 replaced by exp(-L^2 dk_lin^2 / 12), the
/// mismatch linearized around the phase-matching point at kappa.omega.
/// Throws NoPhaseMatch or NotConverged.
FluxPoint flux_quadrature_gaussianized(const SpectralPoint& kappa, const CrystalSpec& crystal,
                                       const PumpSpec& pump, const QuadratureSpec& quad = {});
FluxPoint flux_quadrature_gaussianized(const SpectralPoint& kappa, const LinearizedCoeffs& coeffs,
                                       const CrystalSpec& crystal, const PumpSpec& pump,
                                       const QuadratureSpec& quad = {});

enum class FluxMethod { closed_form, closed_form_printed, exact, gaussianized };

std::string_view to_string(FluxMethod method);
/// Throws InvalidArgument for an unknown name.
FluxMethod flux_method_from_string(std::string_view name);

struct SpectrumRow {
  double lambda_nm = 0.0;
  FluxMethod method = FluxMethod::closed_form;
  std::optional<double> alpha_ext;  // rad
  std::optional<FluxPoint> point;
};

/// Flux along the perfect phase-matching line, one row per wavelength [nm];
/// rows without phase matching are left empty.
std::vector<SpectrumRow> spectrum_along_curve(const std::vector<double>& lambda_grid_nm,
                                              const CrystalSpec& crystal, const PumpSpec& pump,
                                              FluxMethod method, const QuadratureSpec& quad = {});

/// CSV: lambda_nm,alpha_ext_deg,flux,method,quad_error_estimate
void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRow>& rows);

}  // namespace parfluor

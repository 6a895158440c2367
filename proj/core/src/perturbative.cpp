#include "parfluor/perturbative.hpp"

#include <cmath>
#include <sstream>

#include "parfluor/constants.hpp"
#include "parfluor/errors.hpp"
#include "parfluor/io.hpp"

namespace parfluor {

namespace {

void check_pump_matches_crystal(const CrystalSpec& crystal, const PumpSpec& pump) {
  if (std::abs(crystal.pump_center_omega - pump.omega_center) >
      1e-12 * crystal.pump_center_omega) {
    throw InvalidArgument("pump carrier differs from the crystal's pump frequency");
  }
}

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// |A_p / A_ref|^2 peak value: (A w^2 tau / (2 pi)^{3/2})^2.
double pump_peak_sq(const PumpSpec& pump) {
  const double p = pump.amplitude * pump.width * pump.width * pump.tau /
                   std::pow(2.0 * kPi, 1.5);
  return p * p;
}

// Midpoint rule on the scaled box [-S, S]^3 of the pump offset u, where
// u_omega = s_omega / (tau sqrt 2) and u_x,y = s_x,y / (w sqrt 2). The
// integrand factory is called once per omega slice and returns a callable of
// (u_x, u_y) giving the phase-matching factor; the Gaussian pump weight is
// applied here.
template <class SliceFactory>
double midpoint_box(int n, const QuadratureSpec& quad, const PumpSpec& pump,
                    SliceFactory&& slice_for) {
  const double sig_w = 1.0 / (pump.tau * std::sqrt(2.0));
  const double sig_k = 1.0 / (pump.width * std::sqrt(2.0));
  const double s_max = quad.support_sigmas;
  const double h = 2.0 * s_max / n;

  std::vector<double> s(static_cast<std::size_t>(n));
  std::vector<double> weight(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    s[static_cast<std::size_t>(i)] = -s_max + (i + 0.5) * h;
    weight[static_cast<std::size_t>(i)] = std::exp(-0.5 * s[static_cast<std::size_t>(i)] *
                                                   s[static_cast<std::size_t>(i)]);
  }

  double total = 0.0;
  for (int iw = 0; iw < n; ++iw) {
    auto slice = slice_for(s[static_cast<std::size_t>(iw)] * sig_w);
    double plane = 0.0;
    for (int ix = 0; ix < n; ++ix) {
      const double ux = s[static_cast<std::size_t>(ix)] * sig_k;
      double row = 0.0;
      for (int iy = 0; iy < n; ++iy) {
        const double uy = s[static_cast<std::size_t>(iy)] * sig_k;
        row += weight[static_cast<std::size_t>(iy)] * slice(ux, uy);
      }
      plane += weight[static_cast<std::size_t>(ix)] * row;
    }
    total += weight[static_cast<std::size_t>(iw)] * plane;
  }
  return total * h * h * h * sig_w * sig_k * sig_k * pump_peak_sq(pump);
}

template <class SliceFactory>
FluxPoint refine(const SpectralPoint& kappa, const QuadratureSpec& quad, const PumpSpec& pump,
                 double gain, SliceFactory&& slice_for) {
  if (quad.initial_points < 2 || quad.max_points < quad.initial_points ||
      !(quad.tolerance > 0.0) || !(quad.support_sigmas > 0.0)) {
    throw InvalidArgument("invalid quadrature settings");
  }
  int n = quad.initial_points;
  double coarse = midpoint_box(n, quad, pump, slice_for);
  while (true) {
    const int n2 = 2 * n;
    if (n2 > quad.max_points) {
      std::ostringstream os;
      os << "quadrature did not reach relative tolerance " << quad.tolerance << " with "
         << n << " points per axis";
      throw NotConverged(os.str());
    }
    const double fine = midpoint_box(n2, quad, pump, slice_for);
    const double change = std::abs(fine - coarse);
    const double scale = std::abs(fine);
    if (change <= quad.tolerance * scale || (scale == 0.0 && change == 0.0)) {
      // Second-order midpoint error: Richardson with ratio 4.
      const double extrapolated = (4.0 * fine - coarse) / 3.0;
      FluxPoint out;
      out.omega_obs = kappa.omega;
      out.k_trans = std::hypot(kappa.kx, kappa.ky);
      out.flux = std::max(0.0, gain * gain * extrapolated);
      out.error_estimate = scale > 0.0 ? change / (3.0 * scale) : 0.0;
      return out;
    }
    coarse = fine;
    n = n2;
  }
}

}  // namespace

void PumpSpec::validate() const {
  if (!(tau > 0.0)) throw InvalidArgument("pump duration must be positive");
  if (!(width > 0.0)) throw InvalidArgument("pump width must be positive");
  if (!(omega_center > 0.0)) throw InvalidArgument("pump frequency must be positive");
  if (!(nonlinear_length > 0.0)) throw InvalidArgument("nonlinear length must be positive");
  if (!std::isfinite(amplitude) || amplitude < 0.0) {
    throw InvalidArgument("pump amplitude must be finite and non-negative");
  }
}

double nonlinear_length_from_deff(double omega_pump, double d_eff, double field_amplitude,
                                  double k_half) {
  const double inv = omega_pump * omega_pump * d_eff * field_amplitude /
                     (8.0 * kSpeedOfLight * kSpeedOfLight * k_half);
  return 1.0 / inv;
}

std::complex<double> pump_spectrum(const SpectralPoint& kappa_p, const PumpSpec& pump) {
  const double dw = kappa_p.omega - pump.omega_center;
  const double k2 = kappa_p.kx * kappa_p.kx + kappa_p.ky * kappa_p.ky;
  const double norm =
      pump.amplitude * pump.width * pump.width * pump.tau / std::pow(2.0 * kPi, 1.5);
  return norm * std::exp(-0.5 * pump.tau * pump.tau * dw * dw -
                         0.5 * pump.width * pump.width * k2);
}

FluxPoint flux_closed_form(const LinearizedCoeffs& c, const CrystalSpec& crystal,
                           const PumpSpec& pump, BracketConvention convention) {
  const double L = crystal.length;
  const double g = pump.gain(L);
  const double w = pump.width;
  const double tau = pump.tau;
  const double x = (c.d_rho_px * c.d_rho_px + c.d_rho_py * c.d_rho_py) / (w * w) +
                   (c.d_beta1 / tau) * (c.d_beta1 / tau);
  FluxPoint out;
  out.omega_obs = c.omega_obs;
  out.k_trans = c.k0;
  if (convention == BracketConvention::as_printed) {
    out.flux = w * w * tau / (4.0 * std::pow(kPi, 1.5)) * g * g / std::sqrt(4.0 + L * L * x);
  } else {
    out.flux = w * w * tau / (8.0 * std::pow(kPi, 1.5)) * g * g /
               std::sqrt(1.0 + L * L * x / 12.0);
  }
  return out;
}

FluxPoint flux_closed_form(double omega_obs, const CrystalSpec& crystal, const PumpSpec& pump,
                           BracketConvention convention) {
  return flux_closed_form(linearize(omega_obs, crystal), crystal, pump, convention);
}

FluxPoint flux_quadrature_exact(const SpectralPoint& kappa, const CrystalSpec& crystal,
                                const PumpSpec& pump, const QuadratureSpec& quad) {
  check_pump_matches_crystal(crystal, pump);
  const double L = crystal.length;
  const double c2 = kSpeedOfLight * kSpeedOfLight;
  const double kz_sig = kz_signal(kappa, crystal);
  const double s = std::sin(crystal.theta_cut);
  const double co = std::cos(crystal.theta_cut);
  const double w0p = crystal.pump_center_omega;

  // Per frequency slice the pump quadratic and idler light cone are fixed;
  // only the transverse terms vary inside the slice.
  const auto slice_for = [&](double u_w) {
    const double omega_p = w0p + u_w;
    const double omega_i = omega_p - kappa.omega;
    struct Slice {
      bool valid;
      double a, b_per_kx, cxx, cyy, k0sq, ki_sq, kz_sig, ikx, iky, half_l;
      double operator()(double ux, double uy) const {
        if (!valid) return 0.0;
        const double b = b_per_kx * ux;
        const double c = cxx * ux * ux + cyy * uy * uy - k0sq;
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0.0) return 0.0;
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (b + std::copysign(sq, b));
        const double kzp = q == 0.0 ? 0.0 : std::max(q / a, c / q);
        const double kx_i = ux - ikx;
        const double ky_i = uy - iky;
        const double rad = ki_sq - kx_i * kx_i - ky_i * ky_i;
        if (rad < 0.0) return 0.0;
        const double dk = kzp - kz_sig - std::sqrt(rad);
        const double sn = sinc(half_l * dk);
        return sn * sn;
      }
    };
    Slice sl{};
    sl.valid = omega_i > 0.0;
    if (!sl.valid) return sl;
    const double inv_no2 = 1.0 / std::pow(index_ordinary(omega_p, crystal), 2);
    const double inv_ne2 = 1.0 / std::pow(index_extraordinary_principal(omega_p, crystal), 2);
    sl.a = s * s * inv_ne2 + co * co * inv_no2;
    sl.b_per_kx = 2.0 * s * co * (inv_no2 - inv_ne2);
    sl.cxx = co * co * inv_ne2 + s * s * inv_no2;
    sl.cyy = inv_no2;
    sl.k0sq = omega_p * omega_p / c2;
    const double n_i = index_ordinary(omega_i, crystal);
    sl.ki_sq = n_i * n_i * omega_i * omega_i / c2;
    sl.kz_sig = kz_sig;
    sl.ikx = kappa.kx;
    sl.iky = kappa.ky;
    sl.half_l = 0.5 * L;
    return sl;
  };
  return refine(kappa, quad, pump, crystal.length / pump.nonlinear_length, slice_for);
}

FluxPoint flux_quadrature_gaussianized(const SpectralPoint& kappa, const LinearizedCoeffs& coeffs,
                                       const CrystalSpec& crystal, const PumpSpec& pump,
                                       const QuadratureSpec& quad) {
  check_pump_matches_crystal(crystal, pump);
  const double L = crystal.length;
  const double w0p = crystal.pump_center_omega;
  const auto slice_for = [&](double u_w) {
    return [&, u_w](double ux, double uy) {
      const SpectralPoint idler{w0p + u_w - kappa.omega, ux - kappa.kx, uy - kappa.ky};
      const double dk = delta_k_linear(coeffs, kappa, idler, crystal);
      return std::exp(-L * L * dk * dk / 12.0);
    };
  };
  return refine(kappa, quad, pump, crystal.length / pump.nonlinear_length, slice_for);
}

FluxPoint flux_quadrature_gaussianized(const SpectralPoint& kappa, const CrystalSpec& crystal,
                                       const PumpSpec& pump, const QuadratureSpec& quad) {
  return flux_quadrature_gaussianized(kappa, linearize(kappa.omega, crystal), crystal, pump,
                                      quad);
}

std::string_view to_string(FluxMethod method) {
  switch (method) {
    case FluxMethod::closed_form: return "closed_form";
    case FluxMethod::closed_form_printed: return "closed_form_printed";
    case FluxMethod::exact: return "exact";
    case FluxMethod::gaussianized: return "gaussianized";
  }
  return "unknown";
}

FluxMethod flux_method_from_string(std::string_view name) {
  for (auto m : {FluxMethod::closed_form, FluxMethod::closed_form_printed, FluxMethod::exact,
                 FluxMethod::gaussianized}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidArgument("unknown flux method '" + std::string(name) + "'");
}

std::vector<SpectrumRow> spectrum_along_curve(const std::vector<double>& lambda_grid_nm,
                                              const CrystalSpec& crystal, const PumpSpec& pump,
                                              FluxMethod method, const QuadratureSpec& quad) {
  std::vector<SpectrumRow> rows;
  rows.reserve(lambda_grid_nm.size());
  for (double lambda_nm : lambda_grid_nm) {
    SpectrumRow row;
    row.lambda_nm = lambda_nm;
    row.method = method;
    const double omega = omega_from_wavelength(lambda_nm * 1e-9);
    const auto point = perfect_curve(omega, crystal);
    if (point) {
      try {
        row.alpha_ext = exterior_angle(omega, point->k0);
      } catch (const TotalInternalReflection&) {
      }
      const auto coeffs = linearize(*point, crystal);
      const SpectralPoint kappa{omega, point->k0, 0.0};
      switch (method) {
        case FluxMethod::closed_form:
          row.point = flux_closed_form(coeffs, crystal, pump);
          break;
        case FluxMethod::closed_form_printed:
          row.point = flux_closed_form(coeffs, crystal, pump, BracketConvention::as_printed);
          break;
        case FluxMethod::exact:
          row.point = flux_quadrature_exact(kappa, crystal, pump, quad);
          break;
        case FluxMethod::gaussianized:
          row.point = flux_quadrature_gaussianized(kappa, coeffs, crystal, pump, quad);
          break;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRow>& rows) {
  os << "lambda_nm,alpha_ext_deg,flux,method,quad_error_estimate\n";
  for (const auto& r : rows) {
    os << io::format_number(r.lambda_nm) << ',';
    if (r.alpha_ext) os << io::format_number(rad_to_deg(*r.alpha_ext));
    os << ',';
    if (r.point) os << io::format_number(r.point->flux);
    os << ',' << to_string(r.method) << ',';
    if (r.point && (r.method == FluxMethod::exact || r.method == FluxMethod::gaussianized)) {
      os << io::format_number(r.point->error_estimate);
    }
    os << '\n';
  }
}

}  // namespace parfluor

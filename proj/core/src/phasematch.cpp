#include "parfluor/phasematch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "parfluor/constants.hpp"
#include "parfluor/errors.hpp"
#include "parfluor/io.hpp"
#include "parfluor/log.hpp"

namespace parfluor {

double delta_k(const SpectralPoint& kappa, const SpectralPoint& kappa_prime,
               const CrystalSpec& crystal) {
  return kz_pump(kappa + kappa_prime, crystal) - kz_signal(kappa, crystal) -
         kz_signal(kappa_prime, crystal);
}

double delta_k_on_pump_axis(double omega_obs, double k_trans, const CrystalSpec& crystal) {
  const double idler = crystal.pump_center_omega - omega_obs;
  // kx + kx' = 0 exactly, so evaluate the pump on axis directly.
  return kz_pump({crystal.pump_center_omega, 0.0, 0.0}, crystal) -
         kz_signal({omega_obs, k_trans, 0.0}, crystal) -
         kz_signal({idler, -k_trans, 0.0}, crystal);
}

std::vector<double> perfect_curve_roots(double omega_obs, const CrystalSpec& crystal) {
  const double idler = crystal.pump_center_omega - omega_obs;
  if (!(idler > 0.0)) {
    throw OutOfDispersionWindow("observation frequency exceeds the pump frequency");
  }
  // Light cone of the tighter photon, pulled in by a few ulps so both kz
  // stay real on [0, k_max].
  const double k_max = (1.0 - 1e-12) *
                       std::min(index_ordinary(omega_obs, crystal) * omega_obs,
                                index_ordinary(idler, crystal) * idler) /
                       kSpeedOfLight;
  const auto f = [&](double k) { return delta_k_on_pump_axis(omega_obs, k, crystal); };

  std::vector<double> roots;
  const int n = kPhaseMatchScanPoints;
  double k_prev = 0.0;
  double f_prev = f(0.0);
  if (f_prev == 0.0) roots.push_back(0.0);
  for (int i = 1; i < n; ++i) {
    const double k = k_max * static_cast<double>(i) / (n - 1);
    const double fk = f(k);
    if (fk == 0.0) {
      roots.push_back(k);
    } else if (f_prev != 0.0 && std::signbit(fk) != std::signbit(f_prev)) {
      double lo = k_prev;
      double hi = k;
      double f_lo = f_prev;
      double mid = 0.5 * (lo + hi);
      for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::abs(fm) < kPhaseMatchTolerance || hi - lo <= 1e-14 * k_max) break;
        if (std::signbit(fm) == std::signbit(f_lo)) {
          lo = mid;
          f_lo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(mid);
    }
    k_prev = k;
    f_prev = fk;
  }
  return roots;
}

std::optional<PhaseMatchPoint> perfect_curve(double omega_obs, const CrystalSpec& crystal) {
  const auto roots = perfect_curve_roots(omega_obs, crystal);
  if (roots.empty()) return std::nullopt;
  if (roots.size() > 1) {
    std::ostringstream os;
    os << "perfect_curve: " << roots.size() << " roots at lambda="
       << wavelength_from_omega(omega_obs) * 1e9 << " nm; keeping k0=" << roots.front()
       << ", discarding";
    for (std::size_t i = 1; i < roots.size(); ++i) os << ' ' << roots[i];
    log::warn(os.str());
  }
  return PhaseMatchPoint{omega_obs, roots.front()};
}

double exterior_angle(double omega_obs, double k_trans) {
  const double ratio = kSpeedOfLight * k_trans / omega_obs;
  if (ratio > 1.0) {
    std::ostringstream os;
    os << "c k / omega = " << ratio << " > 1";
    throw TotalInternalReflection(os.str());
  }
  return std::asin(ratio);
}

LinearizedCoeffs linearize(const PhaseMatchPoint& point, const CrystalSpec& crystal) {
  const SpectralPoint signal{point.omega_obs, point.k0, 0.0};
  const SpectralPoint idler{crystal.pump_center_omega - point.omega_obs, -point.k0, 0.0};
  const SpectralPoint pump = signal + idler;

  const double pump_slowness = d_kz_d_omega(Ray::pump, pump, crystal);
  const double pump_rho_x = d_kz_d_ktrans(Ray::pump, Axis::x, pump, crystal);
  const double pump_rho_y = d_kz_d_ktrans(Ray::pump, Axis::y, pump, crystal);

  LinearizedCoeffs c;
  c.omega_obs = point.omega_obs;
  c.k0 = point.k0;
  c.d_beta1 = pump_slowness - d_kz_d_omega(Ray::signal, idler, crystal);
  c.d_beta1_signal = pump_slowness - d_kz_d_omega(Ray::signal, signal, crystal);
  c.d_rho_x = pump_rho_x - d_kz_d_ktrans(Ray::signal, Axis::x, signal, crystal);
  c.d_rho_y = pump_rho_y - d_kz_d_ktrans(Ray::signal, Axis::y, signal, crystal);
  c.d_rho_px = pump_rho_x - d_kz_d_ktrans(Ray::signal, Axis::x, idler, crystal);
  c.d_rho_py = pump_rho_y - d_kz_d_ktrans(Ray::signal, Axis::y, idler, crystal);
  return c;
}

LinearizedCoeffs linearize(double omega_obs, const CrystalSpec& crystal) {
  const auto point = perfect_curve(omega_obs, crystal);
  if (!point) {
    std::ostringstream os;
    os << "no perfect phase matching at lambda=" << wavelength_from_omega(omega_obs) * 1e9
       << " nm";
    throw NoPhaseMatch(os.str());
  }
  return linearize(*point, crystal);
}

double delta_k_linear(const LinearizedCoeffs& c, const SpectralPoint& kappa,
                      const SpectralPoint& kappa_prime, const CrystalSpec& crystal) {
  const double idler_omega = crystal.pump_center_omega - c.omega_obs;
  return (kappa.omega - c.omega_obs) * c.d_beta1_signal +
         (kappa_prime.omega - idler_omega) * c.d_beta1 + (kappa.kx - c.k0) * c.d_rho_x +
         kappa.ky * c.d_rho_y + (kappa_prime.kx + c.k0) * c.d_rho_px +
         kappa_prime.ky * c.d_rho_py;
}

std::vector<CurveRow> scan_curve(double lambda_lo_nm, double lambda_hi_nm, int n_points,
                                 const CrystalSpec& crystal) {
  if (n_points < 1) throw InvalidArgument("scan_curve needs at least one point");
  if (!(lambda_hi_nm >= lambda_lo_nm) || !(lambda_lo_nm > 0.0)) {
    throw InvalidArgument("scan_curve wavelength range must be positive and ascending");
  }
  std::vector<CurveRow> rows(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    CurveRow& row = rows[static_cast<std::size_t>(i)];
    row.lambda_nm = n_points == 1 ? lambda_lo_nm
                                  : lambda_lo_nm + (lambda_hi_nm - lambda_lo_nm) * i /
                                                       (n_points - 1);
    const double omega = omega_from_wavelength(row.lambda_nm * 1e-9);
    row.point = perfect_curve(omega, crystal);
    if (!row.point) continue;
    row.coeffs = linearize(*row.point, crystal);
    try {
      row.alpha_ext = exterior_angle(omega, row.point->k0);
    } catch (const TotalInternalReflection&) {
      row.alpha_ext.reset();
    }
  }
  return rows;
}

void write_curve_csv(std::ostream& os, const std::vector<CurveRow>& rows) {
  os << "lambda_nm,k0_rad_per_m,alpha_ext_deg,d_beta1_s_per_m,d_rho_px,d_rho_py\n";
  for (const auto& r : rows) {
    os << io::format_number(r.lambda_nm) << ',';
    if (r.point) os << io::format_number(r.point->k0);
    os << ',';
    if (r.alpha_ext) os << io::format_number(rad_to_deg(*r.alpha_ext));
    os << ',';
    if (r.coeffs) {
      os << io::format_number(r.coeffs->d_beta1) << ',' << io::format_number(r.coeffs->d_rho_px)
         << ',' << io::format_number(r.coeffs->d_rho_py);
    } else {
      os << ",,";
    }
    os << '\n';
  }
}

}  // namespace parfluor

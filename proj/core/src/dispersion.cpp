#include "parfluor/dispersion.hpp"

#include <cmath>
#include <sstream>

#include "parfluor/constants.hpp"
#include "parfluor/errors.hpp"

namespace parfluor {

namespace {

double wavelength_um_checked(double omega, const Material& m) {
  if (!(omega > 0.0)) {
    throw OutOfDispersionWindow("non-positive angular frequency");
  }
  const double lambda_nm = wavelength_from_omega(omega) * 1e9;
  if (lambda_nm < m.window_lo_nm || lambda_nm > m.window_hi_nm) {
    std::ostringstream os;
    os << "wavelength " << lambda_nm << " nm outside [" << m.window_lo_nm << ", "
       << m.window_hi_nm << "] nm for " << m.name;
    throw OutOfDispersionWindow(os.str());
  }
  return lambda_nm * 1e-3;
}

double n2_ordinary(double omega, const Material& m) {
  return m.ordinary.n_squared(wavelength_um_checked(omega, m));
}

double n2_extraordinary(double omega, const Material& m) {
  return m.extraordinary.n_squared(wavelength_um_checked(omega, m));
}

struct PumpQuadratic {
  double a, b, c;
};

// (kx cos - kz sin)^2 / ne^2 + ((kz cos + kx sin)^2 + ky^2) / no^2 = w^2/c^2
// rearranged as a kz^2 + b kz + c = 0.
PumpQuadratic pump_quadratic(const SpectralPoint& p, const CrystalSpec& crystal) {
  const double inv_no2 = 1.0 / n2_ordinary(p.omega, crystal.material);
  const double inv_ne2 = 1.0 / n2_extraordinary(p.omega, crystal.material);
  const double s = std::sin(crystal.theta_cut);
  const double co = std::cos(crystal.theta_cut);
  const double k0 = p.omega / kSpeedOfLight;
  PumpQuadratic q{};
  q.a = s * s * inv_ne2 + co * co * inv_no2;
  q.b = 2.0 * p.kx * s * co * (inv_no2 - inv_ne2);
  q.c = p.kx * p.kx * (co * co * inv_ne2 + s * s * inv_no2) + p.ky * p.ky * inv_no2 - k0 * k0;
  return q;
}

template <class F>
double richardson_central(F&& f, double x, double h) {
  const double d_h = (f(x + h) - f(x - h)) / (2.0 * h);
  const double h2 = 0.5 * h;
  const double d_h2 = (f(x + h2) - f(x - h2)) / (2.0 * h2);
  return (4.0 * d_h2 - d_h) / 3.0;
}

}  // namespace

Material Material::bbo() {
  Material m;
  m.name = "BBO";
  m.ordinary = {2.7405, 0.0184, 0.0179, 0.0155};
  m.extraordinary = {2.3730, 0.0128, 0.0156, 0.0044};
  m.window_lo_nm = 180.0;
  m.window_hi_nm = 2600.0;
  return m;
}

void Material::validate() const {
  if (!(window_lo_nm > 0.0) || !(window_hi_nm > window_lo_nm)) {
    throw InvalidArgument("material '" + name + "': invalid wavelength window");
  }
  constexpr int kProbe = 256;
  for (int i = 0; i <= kProbe; ++i) {
    const double l_um = 1e-3 * (window_lo_nm + (window_hi_nm - window_lo_nm) * i / kProbe);
    const double no2 = ordinary.n_squared(l_um);
    const double ne2 = extraordinary.n_squared(l_um);
    if (!(no2 > 1.0) || !(ne2 > 1.0) || !std::isfinite(no2) || !std::isfinite(ne2)) {
      std::ostringstream os;
      os << "material '" << name << "': n^2 <= 1 at " << l_um * 1e3 << " nm";
      throw InvalidArgument(os.str());
    }
  }
}

void CrystalSpec::validate() const {
  if (!(theta_cut > 0.0 && theta_cut < 0.5 * kPi)) {
    throw InvalidArgument("cut angle must lie in (0, 90) degrees");
  }
  if (!(length > 0.0)) throw InvalidArgument("crystal length must be positive");
  if (!(pump_center_omega > 0.0)) throw InvalidArgument("pump frequency must be positive");
  material.validate();
}

double index_ordinary(double omega, const CrystalSpec& crystal) {
  return std::sqrt(n2_ordinary(omega, crystal.material));
}

double index_extraordinary_principal(double omega, const CrystalSpec& crystal) {
  return std::sqrt(n2_extraordinary(omega, crystal.material));
}

double index_extraordinary_at_cut(double omega, const CrystalSpec& crystal) {
  const double s = std::sin(crystal.theta_cut);
  const double co = std::cos(crystal.theta_cut);
  const double inv_n2 = co * co / n2_ordinary(omega, crystal.material) +
                        s * s / n2_extraordinary(omega, crystal.material);
  return 1.0 / std::sqrt(inv_n2);
}

double kz_signal(const SpectralPoint& kappa, const CrystalSpec& crystal) {
  const double n = index_ordinary(kappa.omega, crystal);
  const double k = n * kappa.omega / kSpeedOfLight;
  const double radicand = k * k - kappa.kx * kappa.kx - kappa.ky * kappa.ky;
  if (radicand < 0.0) {
    std::ostringstream os;
    os << "transverse wavevector " << std::hypot(kappa.kx, kappa.ky)
       << " rad/m exceeds the o-ray light cone " << k << " rad/m";
    throw EvanescentMode(os.str());
  }
  return std::sqrt(radicand);
}

double kz_pump(const SpectralPoint& kappa_p, const CrystalSpec& crystal) {
  const auto [a, b, c] = pump_quadratic(kappa_p, crystal);
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) {
    std::ostringstream os;
    os << "e-ray dispersion has no real kz at omega=" << kappa_p.omega
       << " kx=" << kappa_p.kx << " ky=" << kappa_p.ky;
    throw NoRealRoot(os.str());
  }
  // Numerically stable pair of roots; the forward one is the larger.
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + std::copysign(sq, b));
  if (q == 0.0) return 0.0;
  const double r1 = q / a;
  const double r2 = c / q;
  return std::max(r1, r2);
}

double pump_dispersion_residual(const SpectralPoint& p, double kz,
                                const CrystalSpec& crystal) {
  const double no2 = n2_ordinary(p.omega, crystal.material);
  const double ne2 = n2_extraordinary(p.omega, crystal.material);
  const double s = std::sin(crystal.theta_cut);
  const double co = std::cos(crystal.theta_cut);
  const double lhs = p.omega * p.omega / (kSpeedOfLight * kSpeedOfLight);
  const double u = p.kx * co - kz * s;
  const double v = kz * co + p.kx * s;
  const double rhs = u * u / ne2 + (v * v + p.ky * p.ky) / no2;
  return (rhs - lhs) / lhs;
}

double kz(Ray ray, const SpectralPoint& kappa, const CrystalSpec& crystal) {
  return ray == Ray::pump ? kz_pump(kappa, crystal) : kz_signal(kappa, crystal);
}

double d_kz_d_omega(Ray ray, const SpectralPoint& kappa, const CrystalSpec& crystal,
                    double rel_step) {
  const auto f = [&](double w) { return kz(ray, {w, kappa.kx, kappa.ky}, crystal); };
  return richardson_central(f, kappa.omega, rel_step * kappa.omega);
}

double d_kz_d_ktrans(Ray ray, Axis axis, const SpectralPoint& kappa,
                     const CrystalSpec& crystal, double rel_step) {
  const double h = rel_step * kappa.omega / kSpeedOfLight;
  if (axis == Axis::x) {
    const auto f = [&](double k) { return kz(ray, {kappa.omega, k, kappa.ky}, crystal); };
    return richardson_central(f, kappa.kx, h);
  }
  const auto f = [&](double k) { return kz(ray, {kappa.omega, kappa.kx, k}, crystal); };
  return richardson_central(f, kappa.ky, h);
}

}  // namespace parfluor

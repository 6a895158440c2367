#include "parfluor/grid.hpp"

#include <cmath>
#include <sstream>

#include "parfluor/constants.hpp"
#include "parfluor/errors.hpp"

namespace parfluor {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_in_window(double omega, const CrystalSpec& crystal, const char* what) {
  const double lambda_nm = wavelength_from_omega(omega) * 1e9;
  const Material& m = crystal.material;
  if (!(omega > 0.0) || lambda_nm < m.window_lo_nm || lambda_nm > m.window_hi_nm) {
    std::ostringstream os;
    os << "grid " << what << " frequency window reaches " << lambda_nm
       << " nm, outside [" << m.window_lo_nm << ", " << m.window_hi_nm << "] nm";
    throw OutOfDispersionWindow(os.str());
  }
}

}  // namespace

double SimulationGrid::d_omega() const { return 2.0 * kPi / span_t; }
double SimulationGrid::d_kx() const { return 2.0 * kPi / span_x; }
double SimulationGrid::d_ky() const { return 2.0 * kPi / span_y; }

void SimulationGrid::validate(const CrystalSpec& crystal) const {
  if (!power_of_two(n_t) || !power_of_two(n_x) || !power_of_two(n_y)) {
    throw InvalidArgument("grid mode counts must be powers of two");
  }
  if (!(span_t > 0.0) || !(span_x > 0.0) || !(span_y > 0.0)) {
    throw InvalidArgument("grid spans must be positive");
  }
  if (n_z < 1) throw InvalidArgument("grid n_z must be at least 1");
  if (!(omega_center > 0.0)) throw InvalidArgument("grid carrier must be positive");

  const double w_lo = omega_center + omega_offset(n_t / 2);
  const double w_hi = omega_center + omega_offset(n_t / 2 - 1);
  check_in_window(w_lo, crystal, "signal");
  check_in_window(w_hi, crystal, "signal");
  const double pump_center = 2.0 * omega_center;
  check_in_window(pump_center + omega_offset(n_t / 2), crystal, "pump");
  check_in_window(pump_center + omega_offset(n_t / 2 - 1), crystal, "pump");

  // The corner of the transverse lattice must stay inside the o-ray light
  // cone at the lowest frequency.
  const double kx_max = 0.5 * n_x * d_kx();
  const double ky_max = 0.5 * n_y * d_ky();
  const double k_corner = std::hypot(kx_max, ky_max);
  const double k_cone = index_ordinary(w_lo, crystal) * w_lo / kSpeedOfLight;
  if (k_corner >= k_cone) {
    std::ostringstream os;
    os << "transverse lattice corner " << k_corner << " rad/m exceeds the light cone "
       << k_cone << " rad/m at the lowest grid frequency";
    throw GridUnderresolved(os.str());
  }
}

SimulationGrid SimulationGrid::desk_default(const CrystalSpec& crystal, const PumpSpec& pump) {
  SimulationGrid g;
  g.span_t = 8.0 * pump.tau;
  g.span_x = 8.0 * pump.width;
  g.span_y = 8.0 * pump.width;
  g.omega_center = crystal.degenerate_omega();
  return g;
}

}  // namespace parfluor

#include "lattice_oracle.hpp"

#include <cmath>

namespace parfluor::testing {

namespace {

struct PumpTap {
  int st, sx, sy;
  double g2;
  double kz;
};

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 : std::sin(x) / x; }

}  // namespace

std::vector<double> lattice_flux(const CrystalSpec& crystal, const PumpSpec& pump,
                                 const SimulationGrid& grid, const LatticeOptions& options) {
  const int nt = grid.n_t;
  const int nx = grid.n_x;
  const int ny = grid.n_y;
  const double L = crystal.length;
  const double dw = 2.0 * 3.141592653589793 / grid.span_t;
  const double dkx = 2.0 * 3.141592653589793 / grid.span_x;
  const double dky = 2.0 * 3.141592653589793 / grid.span_y;
  const auto signed_of = [](int m, int n) { return m < n / 2 ? m : m - n; };
  const auto index_of = [](int s, int n) { return ((s % n) + n) % n; };

  const double dz = L / grid.n_z;
  // frame slopes of the pump carrier; zero when the physical mismatch is wanted
  double beta = 0.0, rho_x = 0.0, rho_y = 0.0;
  if (options.moving_frame) {
    const SpectralPoint pc{2.0 * grid.omega_center, 0.0, 0.0};
    beta = d_kz_d_omega(Ray::pump, pc, crystal);
    rho_x = d_kz_d_ktrans(Ray::pump, Axis::x, pc, crystal);
    rho_y = d_kz_d_ktrans(Ray::pump, Axis::y, pc, crystal);
  }
  const auto frame = [&](int st, int sx, int sy) {
    return beta * st * dw + rho_x * sx * dkx + rho_y * sy * dky;
  };
  const auto kernel = [&](double dk) {
    if (!options.discrete_z) {
      const double s = sinc(0.5 * dk * L);
      return s * s;
    }
    const double den = std::sin(0.5 * dk * dz);
    if (std::abs(den) < 1e-12) return 1.0;
    const double s = std::sin(0.5 * dk * L) / (grid.n_z * den);
    return s * s;
  };

  std::vector<double> ks(grid.size());
  for (int it = 0; it < nt; ++it)
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy) {
        const SpectralPoint m{grid.omega_center + signed_of(it, nt) * dw,
                              signed_of(ix, nx) * dkx, signed_of(iy, ny) * dky};
        ks[(static_cast<std::size_t>(it) * nx + ix) * ny + iy] =
            kz_signal(m, crystal) - frame(signed_of(it, nt), signed_of(ix, nx), signed_of(iy, ny));
      }

  std::vector<PumpTap> taps;
  for (int st = -nt / 2; st < nt / 2; ++st)
    for (int sx = -nx / 2; sx < nx / 2; ++sx)
      for (int sy = -ny / 2; sy < ny / 2; ++sy) {
        const double a = 0.5 * std::pow(pump.tau * st * dw, 2) +
                         0.5 * std::pow(pump.width * sx * dkx, 2) +
                         0.5 * std::pow(pump.width * sy * dky, 2);
        if (2.0 * a > 16.0 * std::log(10.0)) continue;
        const SpectralPoint p{pump.omega_center + st * dw, sx * dkx, sy * dky};
        const double g = dw * dkx * dky * std::abs(pump_spectrum(p, pump)) / pump.nonlinear_length;
        taps.push_back({st, sx, sy, g * g * L * L, kz_pump(p, crystal) - frame(st, sx, sy)});
      }

  std::vector<double> out(grid.size(), 0.0);
  for (int it = 0; it < nt; ++it)
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy) {
        const std::size_t m = (static_cast<std::size_t>(it) * nx + ix) * ny + iy;
        const int mt = signed_of(it, nt);
        const int mx = signed_of(ix, nx);
        const int my = signed_of(iy, ny);
        double sum = 0.0;
        for (const PumpTap& q : taps) {
          const std::size_t mp =
              (static_cast<std::size_t>(index_of(q.st - mt, nt)) * nx + index_of(q.sx - mx, nx)) *
                  ny +
              index_of(q.sy - my, ny);
          const double dk = q.kz - ks[m] - ks[mp];
          sum += q.g2 * kernel(dk);
        }
        out[m] = sum;
      }
  return out;
}

}  // namespace parfluor::testing

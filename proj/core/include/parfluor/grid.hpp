#pragma once

#include <cstddef>

#include "parfluor/dispersion.hpp"
#include "parfluor/perturbative.hpp"

namespace parfluor {

/// Periodic (t, x, y) <-> (omega, kx, ky) lattice. Storage is row-major with
/// y fastest: index = (it * n_x + ix) * n_y + iy. Spectral index m maps to
/// the signed offset (m < n/2 ? m : m - n) times the lattice spacing
/// 2 pi / span, so offsets of two modes add modulo n.
struct SimulationGrid {
  int n_t = 128;
  int n_x = 64;
  int n_y = 64;
  double span_t = 0.0;  // [s]
  double span_x = 0.0;  // [m]
  double span_y = 0.0;  // [m]
  int n_z = 200;
  double omega_center = 0.0;  // carrier omega0 of the fluorescence [rad/s]

  std::size_t size() const {
    return static_cast<std::size_t>(n_t) * static_cast<std::size_t>(n_x) *
           static_cast<std::size_t>(n_y);
  }
  double d_omega() const;
  double d_kx() const;
  double d_ky() const;
  /// d_omega * d_kx * d_ky, the spectral volume of one mode.
  double cell_volume() const { return d_omega() * d_kx() * d_ky(); }

  static int signed_index(int m, int n) { return m < n / 2 ? m : m - n; }
  /// Inverse of signed_index (wraps modulo n).
  static int wrap_index(int s, int n) { return ((s % n) + n) % n; }

  std::size_t flat(int it, int ix, int iy) const {
    return (static_cast<std::size_t>(it) * static_cast<std::size_t>(n_x) +
            static_cast<std::size_t>(ix)) *
               static_cast<std::size_t>(n_y) +
           static_cast<std::size_t>(iy);
  }

  double omega_offset(int it) const { return signed_index(it, n_t) * d_omega(); }
  double kx_at(int ix) const { return signed_index(ix, n_x) * d_kx(); }
  double ky_at(int iy) const { return signed_index(iy, n_y) * d_ky(); }

  /// Absolute fluorescence mode (omega0 + offset, kx, ky).
  SpectralPoint mode(int it, int ix, int iy) const {
    return {omega_center + omega_offset(it), kx_at(ix), ky_at(iy)};
  }

  /// Checks powers of two, positive spans, n_z >= 1, the frequency window
  /// against the dispersion window for signal and pump, and that no mode is
  /// evanescent at the lowest grid frequency. Throws InvalidArgument,
  /// OutOfDispersionWindow or GridUnderresolved.
  void validate(const CrystalSpec& crystal) const;

  /// Desk-scale default: 128 x 64 x 64, span_t = 8 tau, span_x = span_y = 8 w,
  /// n_z = 200, carrier at the degenerate frequency.
  static SimulationGrid desk_default(const CrystalSpec& crystal, const PumpSpec& pump);
};

}  // namespace parfluor

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "parfluor/dispersion.hpp"
#include "parfluor/field.hpp"
#include "parfluor/grid.hpp"
#include "parfluor/perturbative.hpp"

namespace parfluor {

struct EnsembleSpec {
  int n_realizations = 10;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Per-realization photon-number estimator.
///  - plain:  |alpha_out|^2 - 1/2
///  - paired: propagate alpha and i*alpha from the same draw and use
///      (|out(alpha)|^2 + |out(i alpha)|^2) / 2 - |alpha|^2.
///    Same mean as plain (the Bogoliubov cross terms cancel between the two
///    copies and the input norm has mean 1/2), far smaller variance at low
///    gain, twice the propagation cost.
enum class Estimator { plain, paired };

std::string_view to_string(Estimator e);
/// Throws InvalidArgument for an unknown name.
Estimator estimator_from_string(std::string_view name);

struct RunOptions {
  Estimator estimator = Estimator::paired;
  int threads = 1;
  /// Fields propagated together so each pump evaluation is shared.
  int batch = 8;
};

/// Vacuum Wigner sample: independent complex Gaussians with Re, Im of
/// variance 1/4 each, addressed by (seed, realization, mode) so any subset
/// of realizations can be drawn in any order.
ComplexField sample_vacuum(const SimulationGrid& grid, std::uint64_t seed,
                           std::uint64_t realization);

/// Pump envelope A_p(t, x, y, z) / A_ref in the position domain on the pump
/// lattice (carrier 2 omega0, same spacing as the signal grid), with the
/// full phase exp(i k_pz z) of every component. The z = 0 peak sits at the
/// lattice origin (index 0) with value PumpSpec.amplitude.
ComplexField pump_field_at(double z, const PumpSpec& pump, const CrystalSpec& crystal,
                           const SimulationGrid& grid);

/// Exact solution of d alpha/dz = g alpha* over dz for constant g:
/// alpha <- c alpha + s conj(alpha), c = cosh(|g| dz), s = (g/|g|) sinh(|g| dz).
struct BogoliubovStep {
  double c = 1.0;
  cplx s{0.0, 0.0};

  cplx apply(cplx a) const { return c * a + s * std::conj(a); }
};
BogoliubovStep bogoliubov_step(cplx g, double dz);

/// Strang split-step propagator from z = 0 to z = L for one pump/crystal/
/// grid triple. Linear half steps multiply each mode by its exact
/// exp(i kz dz / 2); the nonlinear step is a BogoliubovStep per point with
/// g = A_p(z_mid) / (A_ref L_NL). Internally both fields are referred to a
/// frame moving with the pump's on-axis group slowness and walk-off, which
/// leaves every pair mismatch unchanged; the returned amplitudes are in
/// the lab frame.
class Propagator {
 public:
  Propagator(const CrystalSpec& crystal, const PumpSpec& pump, const SimulationGrid& grid);

  const SimulationGrid& grid() const { return grid_; }
  const Fft3d& fft() const { return fft_; }
  double step_length() const { return dz_; }
  /// Number of pump lattice components kept (Gaussian weight above 1e-20).
  std::size_t pump_support() const { return support_index_.size(); }

  /// Propagates every field (spectral, z = 0) to z = L in place. The pump
  /// is evaluated once per step and shared by the batch; the fields are
  /// processed on up to `threads` threads.
  void propagate(const std::vector<ComplexField*>& fields, int threads = 1) const;

 private:
  void pump_position(double z_mid, FieldBuffer& out) const;

  SimulationGrid grid_;
  Fft3d fft_;
  double length_ = 0.0;
  double dz_ = 0.0;
  bool coupled_ = false;
  FieldBuffer lin_first_;
  FieldBuffer lin_mid_;
  FieldBuffer lin_last_;
  std::vector<std::size_t> support_index_;
  std::vector<double> support_amp_;
  std::vector<double> support_rate_;
};

/// Convenience single-field propagation.
ComplexField propagate(ComplexField field, const PumpSpec& pump, const CrystalSpec& crystal,
                       const SimulationGrid& grid);

/// Per-mode ensemble mean flux and its standard error (NaN with one
/// realization).
struct ModeFlux {
  std::vector<double> mean;
  std::vector<double> stderr_mean;
  int n_realizations = 0;

  double total() const;
};

/// Plain estimator over a set of output fields: mean |alpha|^2 - 1/2.
ModeFlux estimate_flux(const std::vector<ComplexField>& outputs);

/// Bins over wavelength [nm] and exterior angle [deg], both uniform.
struct BinningSpec {
  double lambda_lo_nm = 0.0;
  double lambda_hi_nm = 0.0;
  int n_lambda = 0;
  double alpha_lo_deg = 0.0;
  double alpha_hi_deg = 0.0;
  int n_alpha = 0;

  void validate() const;
  double lambda_width() const { return (lambda_hi_nm - lambda_lo_nm) / n_lambda; }
  double alpha_width() const { return (alpha_hi_deg - alpha_lo_deg) / n_alpha; }
  double lambda_center(int i) const { return lambda_lo_nm + (i + 0.5) * lambda_width(); }
  double alpha_center(int j) const { return alpha_lo_deg + (j + 0.5) * alpha_width(); }
  /// -1 outside the range.
  int lambda_bin(double lambda_nm) const;
  int alpha_bin(double alpha_deg) const;

  /// Wavelength range of the grid's frequency window in n_t / 2 bins;
  /// angles from 0 to the on-axis transverse Nyquist angle at the carrier
  /// in n_x / 4 bins.
  static BinningSpec for_grid(const SimulationGrid& grid);
};

/// Mode -> bin map; modes outside the binning range or beyond total
/// internal reflection map to -1.
std::vector<int> bin_modes(const SimulationGrid& grid, const BinningSpec& binning);

struct FluxBin {
  double mean = 0.0;
  double stderr_mean = 0.0;  // NaN when unavailable
  int n_modes = 0;           // 0 marks an empty bin
};

struct FluxMap {
  BinningSpec binning;
  std::vector<FluxBin> bins;  // index i_lambda * n_alpha + i_alpha

  const FluxBin& at(int i_lambda, int i_alpha) const {
    return bins[static_cast<std::size_t>(i_lambda * binning.n_alpha + i_alpha)];
  }
  FluxBin& at(int i_lambda, int i_alpha) {
    return bins[static_cast<std::size_t>(i_lambda * binning.n_alpha + i_alpha)];
  }
};

/// Bin value = mean of member modes; SE = sqrt(sum SE_m^2) / M, which
/// treats modes as independent.
FluxMap azimuthal_average(const ModeFlux& flux, const SimulationGrid& grid,
                          const BinningSpec& binning);

/// CSV: lambda_nm,alpha_deg,flux,stderr,n_modes. Empty bins have empty flux
/// and stderr; unavailable standard errors are empty.
void write_flux_map_csv(std::ostream& os, const FluxMap& map);

/// Binary 8-bit PGM, width n_lambda, height n_alpha, row 0 = smallest angle,
/// values clamp(mean, 0) * 255 / max. Returns the flux represented by 255
/// through `scale` (0 when the map has no positive bin).
std::string flux_map_pgm(const FluxMap& map, double* scale);

struct EnsembleResult {
  ModeFlux modes;
  /// Bin standard errors come from the spread of per-realization bin means,
  /// so correlations between modes in a bin are accounted for.
  FluxMap map;
  double total_photons = 0.0;
  double total_stderr = 0.0;  // NaN with one realization
};

/// Samples, propagates and reduces realizations 0..n-1 of `ensemble`.
/// Reduction is sequential in realization index, so the result does not
/// depend on threads or batch size.
EnsembleResult run_ensemble(const CrystalSpec& crystal, const PumpSpec& pump,
                            const SimulationGrid& grid, const EnsembleSpec& ensemble,
                            const BinningSpec& binning, const RunOptions& options = {});

struct CalibrationSpec {
  double target_photons = 1e6;
  int probe_realizations = 2;
  double tolerance = 0.2;
  int max_probes = 30;
  /// Starting gain L * A / L_NL of the bracket search.
  double initial_gain = 1.0;

  void validate() const;
};

struct CalibrationProbe {
  double nonlinear_length = 0.0;
  double total_photons = 0.0;
};

struct CalibrationResult {
  double nonlinear_length = 0.0;
  double achieved_total = 0.0;
  std::vector<CalibrationProbe> trace;
};

/// Bracket then bisect log(1/L_NL) until the probe total is within
/// `tolerance` of the target, using realizations 0..probe_realizations-1 of
/// `ensemble` for every probe. Throws NotConverged after max_probes.
CalibrationResult calibrate_gain(const CalibrationSpec& spec, const CrystalSpec& crystal,
                                 const PumpSpec& pump, const SimulationGrid& grid,
                                 const EnsembleSpec& ensemble, const RunOptions& options = {});

struct SimulationOptions {
  std::optional<BinningSpec> binning;  // BinningSpec::for_grid when empty
  RunOptions run;
  /// When set, L_NL is calibrated first and the pump's value is ignored.
  std::optional<CalibrationSpec> calibration;
};

struct SimulationResult {
  EnsembleResult ensemble;
  double nonlinear_length = 0.0;
  std::optional<CalibrationResult> calibration;
  double wall_seconds = 0.0;
};

SimulationResult run_simulation(const CrystalSpec& crystal, const PumpSpec& pump,
                                const SimulationGrid& grid, const EnsembleSpec& ensemble,
                                const SimulationOptions& options = {});

}  // namespace parfluor

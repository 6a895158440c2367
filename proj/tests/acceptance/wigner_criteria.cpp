#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "acceptance.hpp"
#include "lattice_oracle.hpp"
#include "parfluor/phasematch.hpp"
#include "parfluor/wigner.hpp"

using namespace parfluor;

namespace acceptance {

namespace {

SimulationGrid desk_grid(const CrystalSpec& c, const PumpSpec& p) {
  return SimulationGrid::desk_default(c, p);
}

// wide-angle grid: coarser in time, finer in k, so the 31.3 deg ring
// (6-13 deg outside) lies inside the transverse Nyquist angle
SimulationGrid ring_grid(const CrystalSpec& c, const PumpSpec& p) {
  SimulationGrid g;
  g.n_t = 64;
  g.n_x = 128;
  g.n_y = 128;
  g.span_t = 4 * p.tau;
  g.span_x = g.span_y = 4 * p.width;
  g.n_z = 200;
  g.omega_center = c.degenerate_omega();
  return g;
}

double max_over_median(const FluxMap& map) {
  std::vector<double> v;
  for (const auto& b : map.bins)
    if (b.n_modes > 0) v.push_back(b.mean);
  std::sort(v.begin(), v.end());
  const double med = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  return v.back() / med;
}

}  // namespace

Verdict wigner_oracle() {
  Verdict v{6, "low-gain Wigner map vs binned first-order lattice quadrature"};
  const auto c = bbo(29.0);
  const auto p = pump(c, 60, 80, 0.1);
  const auto g = desk_grid(c, p);
  const auto b = BinningSpec::for_grid(g);
  const EnsembleSpec e{100, 2024};
  const auto r = run_ensemble(c, p, g, e, b);

  ModeFlux oracle_modes;
  oracle_modes.mean = parfluor::testing::lattice_flux(c, p, g);
  oracle_modes.stderr_mean.assign(oracle_modes.mean.size(), 0.0);
  oracle_modes.n_realizations = 1;
  const auto oracle = azimuthal_average(oracle_modes, g, b);

  int compared = 0, fails = 0, noise_limited = 0;
  double worst = 0;
  for (int i = 0; i < b.n_lambda; ++i)
    for (int j = 0; j < b.n_alpha; ++j) {
      const auto& w = r.map.at(i, j);
      const auto& o = oracle.at(i, j);
      if (w.n_modes < 20) continue;
      ++compared;
      const double allowed = 3 * w.stderr_mean + 0.25 * o.mean;
      const double dev = std::abs(w.mean - o.mean);
      if (0.25 * o.mean < w.stderr_mean) ++noise_limited;
      worst = std::max(worst, dev / allowed);
      if (dev > allowed) {
        ++fails;
        v.lines.push_back(fmt("bin %.1f nm / %.2f deg (%d modes): wigner %.4g +- %.2g, oracle %.4g",
                              b.lambda_center(i), b.alpha_center(j), w.n_modes, w.mean,
                              w.stderr_mean, o.mean));
      }
    }
  const double total_oracle =
      std::accumulate(oracle_modes.mean.begin(), oracle_modes.mean.end(), 0.0);
  v.lines.push_back(fmt("29 deg, 60 fs, 80 um, L/L_NL = 0.1, grid %dx%dx%d, n_z %d, %d "
                        "realizations (paired estimator), %dx%d bins",
                        g.n_t, g.n_x, g.n_y, g.n_z, e.n_realizations, b.n_lambda, b.n_alpha));
  v.lines.push_back(fmt("total photons: wigner %.4g +- %.2g, oracle %.4g", r.total_photons,
                        r.total_stderr, total_oracle));
  v.lines.push_back(fmt("%d bins with >= 20 modes, %d outside 3 SE + 25%%, worst deviation / "
                        "allowance = %.2f",
                        compared, fails, worst));
  v.lines.push_back(fmt("%d of those bins are noise-limited (25%% of oracle < 1 SE); each is a "
                        "plain 3-sigma test, expected false alarms about %.1f",
                        noise_limited, 0.0027 * noise_limited));
  v.pass = compared > 0 && fails == 0;
  return v;
}

std::vector<Verdict> high_gain() {
  Verdict v7{7, "calibrated high-gain ridge follows the perfect-matching curve (31.3 deg)"};
  Verdict v8{8, "max/median bin contrast grows from low to high gain"};
  const auto c = bbo(31.3);
  const auto p = pump(c, 60, 80, 1.0);
  const auto g = ring_grid(c, p);
  auto b = BinningSpec::for_grid(g);
  b.alpha_lo_deg = 0;
  b.alpha_hi_deg = 16;
  b.n_alpha = 32;
  const EnsembleSpec e{10, 11};

  SimulationOptions opt;
  opt.binning = b;
  CalibrationSpec cal;
  cal.target_photons = 1e6;
  opt.calibration = cal;
  const auto hi = run_simulation(c, p, g, e, opt);

  int rows = 0, ok = 0;
  for (int i = 0; i < b.n_lambda; ++i) {
    int best = -1;
    double bv = -1e300;
    for (int j = 0; j < b.n_alpha; ++j) {
      const auto& x = hi.ensemble.map.at(i, j);
      if (x.n_modes > 0 && x.mean > bv) {
        bv = x.mean;
        best = j;
      }
    }
    if (best < 0) continue;
    ++rows;
    const double nm = b.lambda_center(i);
    const auto pt = perfect_curve(omega_from_wavelength(nm * 1e-9), c);
    int curve_bin = -1;
    double a = NAN;
    if (pt) {
      a = rad_to_deg(exterior_angle(pt->omega_obs, pt->k0));
      curve_bin = b.alpha_bin(a);
    }
    const bool good = curve_bin >= 0 && std::abs(curve_bin - best) <= 2;
    ok += good;
    if (!good)
      v7.lines.push_back(fmt("%.1f nm: argmax %.2f deg, curve %.2f deg", nm, b.alpha_center(best), a));
  }
  const auto& trace = hi.calibration->trace;
  v7.lines.push_back(fmt("grid %dx%dx%d (span %.0f fs, %.0f um), n_z %d, %d realizations; "
                         "calibration: %zu probes, L_NL = %.4g mm, gain L/L_NL = %.3f",
                         g.n_t, g.n_x, g.n_y, g.span_t * 1e15, g.span_x * 1e6, g.n_z,
                         e.n_realizations, trace.size(), hi.nonlinear_length * 1e3,
                         c.length / hi.nonlinear_length));
  v7.lines.push_back(fmt("total photons %.4g +- %.2g (target 1e6)", hi.ensemble.total_photons,
                         hi.ensemble.total_stderr));
  v7.lines.push_back(fmt("argmax within 2 bins (%.2f deg) of the curve in %d of %d wavelength rows",
                         2 * b.alpha_width(), ok, rows));
  v7.pass = rows > 0 && ok >= 0.9 * rows;

  const auto low_pump = pump(c, 60, 80, 0.1);
  const auto low = run_ensemble(c, low_pump, g, e, b);
  const double r_hi = max_over_median(hi.ensemble.map);
  const double r_lo = max_over_median(low.map);
  v8.lines.push_back(fmt("same grid, binning and seed: low gain (0.1) max/median = %.3g, "
                         "calibrated (%.3f) max/median = %.3g",
                         r_lo, c.length / hi.nonlinear_length, r_hi));
  v8.pass = r_hi > r_lo;
  return {v7, v8};
}

Verdict invariants() {
  Verdict v{9, "numerical invariants"};
  bool ok = true;
  const auto c = bbo(31.3);
  auto p = pump(c, 60, 80, 0.5);
  const auto g = desk_grid(c, p);

  {
    const Fft3d fft(g);
    auto f = sample_vacuum(g, 5, 0);
    const auto orig = f;
    const double n0 = f.norm_squared();
    fft.to_position(f);
    const double parseval = std::abs(f.norm_squared() - n0) / n0;
    fft.to_spectral(f);
    double rt = 0;
    for (std::size_t i = 0; i < f.size(); ++i) rt = std::max(rt, std::abs(f.data[i] - orig.data[i]));
    const bool pass = parseval < 1e-12 && rt < 1e-12;
    ok = ok && pass;
    v.lines.push_back(fmt("Parseval %.1e, round trip max error %.1e (limit 1e-12)%s", parseval, rt,
                          pass ? "" : "  <- fail"));
  }
  {
    auto free = p;
    free.amplitude = 0;
    const auto in = sample_vacuum(g, 6, 0);
    const auto out = propagate(in, free, c, g);
    const double d = std::abs(out.norm_squared() - in.norm_squared()) / in.norm_squared();
    const bool pass = d < 1e-12;
    ok = ok && pass;
    v.lines.push_back(fmt("linear propagation norm change %.1e over %d steps (limit 1e-12)%s", d,
                          g.n_z, pass ? "" : "  <- fail"));
  }
  {
    double worst = 0;
    for (double mag : {1e-6, 0.1, 3.0, 30.0})
      for (double ph : {0.0, 0.9, -2.2}) {
        const auto s = bogoliubov_step(std::polar(mag, ph), 0.5);
        worst = std::max(worst, std::abs(s.c * s.c - std::norm(s.s) - 1) / (s.c * s.c));
      }
    const bool pass = worst < 1e-12;
    ok = ok && pass;
    v.lines.push_back(fmt("Bogoliubov determinant: max relative |c^2 - |s|^2 - 1| = %.1e%s", worst,
                          pass ? "" : "  <- fail"));
  }
  {
    auto free = p;
    free.amplitude = 0;
    const auto b = BinningSpec::for_grid(g);
    const auto r = run_ensemble(c, free, g, EnsembleSpec{8, 77}, b, {Estimator::plain, 1, 8});
    const bool pass = std::abs(r.total_photons) < 3 * r.total_stderr;
    ok = ok && pass;
    v.lines.push_back(fmt("vacuum null test (no pump, plain estimator, 8 realizations): "
                          "%.3g +- %.3g photons%s",
                          r.total_photons, r.total_stderr, pass ? "" : "  <- fail"));
  }
  {
    const auto b = BinningSpec::for_grid(g);
    const auto a = run_ensemble(c, p, g, EnsembleSpec{2, 31}, b, {Estimator::paired, 1, 8});
    const auto x = run_ensemble(c, p, g, EnsembleSpec{2, 31}, b, {Estimator::paired, 2, 1});
    const bool pass = a.modes.mean == x.modes.mean && a.total_photons == x.total_photons;
    ok = ok && pass;
    v.lines.push_back(fmt("fixed seed, different threads/batch: bit-identical = %s",
                          pass ? "yes" : "no  <- fail"));
  }
  v.pass = ok;
  return v;
}

Verdict desk_scale_statement() {
  Verdict v{10, "items not reproducible at desk scale are stated"};
  v.lines.push_back("not reproduced: bin-by-bin values of the high-gain angle/wavelength map and "
                    "the absolute axes of the perturbative spectra, because grid sizes, time and "
                    "space windows and the field-unit calibration are not given");
  v.lines.push_back("substituted by: oracle agreement (3, 6), stated qualitative structure "
                    "(2, 4, 5, 7, 8) and invariants (9)");
  v.pass = true;
  return v;
}

}  // namespace acceptance

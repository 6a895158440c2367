#include <benchmark/benchmark.h>

#include "parfluor/constants.hpp"
#include "parfluor/perturbative.hpp"
#include "parfluor/phasematch.hpp"
#include "parfluor/wigner.hpp"

using namespace parfluor;

namespace {

CrystalSpec bbo() {
  CrystalSpec c;
  c.theta_cut = deg_to_rad(31.3);
  c.length = 2e-3;
  c.pump_center_omega = omega_from_wavelength(400e-9);
  return c;
}

PumpSpec pump(const CrystalSpec& c) { return {60e-15, 80e-6, c.pump_center_omega, 1.0, 20e-3}; }

SimulationGrid grid(const CrystalSpec& c, int nt, int nxy) {
  SimulationGrid g;
  g.n_t = nt;
  g.n_x = g.n_y = nxy;
  g.span_t = 480e-15;
  g.span_x = g.span_y = 640e-6;
  g.n_z = 20;
  g.omega_center = c.degenerate_omega();
  return g;
}

void BM_kz_pump(benchmark::State& s) {
  const auto c = bbo();
  double kx = 0;
  for (auto _ : s) {
    benchmark::DoNotOptimize(kz_pump({c.pump_center_omega, kx, 1e4}, c));
    kx += 1.0;
  }
}
BENCHMARK(BM_kz_pump);

void BM_perfect_curve(benchmark::State& s) {
  const auto c = bbo();
  const double w = omega_from_wavelength(700e-9);
  for (auto _ : s) benchmark::DoNotOptimize(perfect_curve(w, c));
}
BENCHMARK(BM_perfect_curve);

void BM_flux_closed_form(benchmark::State& s) {
  const auto c = bbo();
  const auto p = pump(c);
  const auto lc = linearize(omega_from_wavelength(700e-9), c);
  for (auto _ : s) benchmark::DoNotOptimize(flux_closed_form(lc, c, p));
}
BENCHMARK(BM_flux_closed_form);

void BM_flux_exact(benchmark::State& s) {
  const auto c = bbo();
  const auto p = pump(c);
  const auto pt = *perfect_curve(omega_from_wavelength(700e-9), c);
  for (auto _ : s) benchmark::DoNotOptimize(flux_quadrature_exact({pt.omega_obs, pt.k0, 0}, c, p));
}
BENCHMARK(BM_flux_exact)->Unit(benchmark::kMillisecond);

void BM_fft_roundtrip(benchmark::State& s) {
  const auto c = bbo();
  const auto g = grid(c, static_cast<int>(s.range(0)), static_cast<int>(s.range(1)));
  const Fft3d fft(g);
  auto f = sample_vacuum(g, 1, 0);
  for (auto _ : s) {
    fft.to_position(f);
    fft.to_spectral(f);
  }
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_fft_roundtrip)->Args({32, 16})->Args({128, 64})->Unit(benchmark::kMillisecond);

// one Strang step per z-slice; n_z = 20
void BM_propagate(benchmark::State& s) {
  const auto c = bbo();
  const auto p = pump(c);
  const auto g = grid(c, static_cast<int>(s.range(0)), static_cast<int>(s.range(1)));
  const Propagator prop(c, p, g);
  auto f = sample_vacuum(g, 1, 0);
  for (auto _ : s) prop.propagate({&f});
  s.SetItemsProcessed(s.iterations() * g.n_z);
}
BENCHMARK(BM_propagate)->Args({32, 16})->Args({128, 64})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

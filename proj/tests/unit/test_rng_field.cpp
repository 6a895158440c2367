#include <cmath>
#include <complex>

#include "doctest.h"
#include "parfluor/constants.hpp"
#include "parfluor/errors.hpp"
#include "parfluor/field.hpp"
#include "parfluor/grid.hpp"
#include "parfluor/rng.hpp"

using namespace parfluor;

namespace {

SimulationGrid small_grid(int nt, int nx, int ny) {
  SimulationGrid g;
  g.n_t = nt;
  g.n_x = nx;
  g.n_y = ny;
  g.span_t = 480e-15;
  g.span_x = g.span_y = 640e-6;
  g.n_z = 10;
  g.omega_center = omega_from_wavelength(800e-9);
  return g;
}

ComplexField noise(const SimulationGrid& g, std::uint64_t seed) {
  ComplexField f(g, Domain::spectral);
  const NormalStream s(seed, 0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto [a, b] = s.pair(i);
    f.data[i] = {a, b};
  }
  return f;
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using P = Philox4x32;
  CHECK(P::generate({0, 0, 0, 0}, {0, 0}) ==
        P::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(P::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        P::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(P::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        P::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal stream moments") {
  const NormalStream s(42, 7);
  const int n = 200000;
  double m1 = 0, m2 = 0, m4 = 0, cross = 0;
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = s.pair(static_cast<std::uint64_t>(i));
    m1 += a + b;
    m2 += a * a + b * b;
    m4 += a * a * a * a + b * b * b * b;
    cross += a * b;
  }
  m1 /= 2 * n;
  m2 /= 2 * n;
  m4 /= 2 * n;
  cross /= n;
  CHECK(std::abs(m1) < 4 / std::sqrt(2.0 * n));
  CHECK(m2 == doctest::Approx(1.0).epsilon(0.01));
  CHECK(m4 == doctest::Approx(3.0).epsilon(0.03));
  CHECK(std::abs(cross) < 4 / std::sqrt(1.0 * n));
  CHECK(s.pair(123) == NormalStream(42, 7).pair(123));
  CHECK(s.pair(123) != NormalStream(42, 8).pair(123));
  CHECK(s.pair(123) != NormalStream(43, 7).pair(123));
}

TEST_CASE("unitary transforms: Parseval and round trip") {
  const auto g = small_grid(32, 16, 8);
  const Fft3d fft(g);
  auto f = noise(g, 3);
  const auto original = f;
  const double n0 = f.norm_squared();
  fft.to_position(f);
  CHECK(f.domain == Domain::position);
  CHECK(std::abs(f.norm_squared() - n0) / n0 < 1e-12);
  fft.to_spectral(f);
  double err = 0;
  for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(f.data[i] - original.data[i]));
  CHECK(err < 1e-12);
  CHECK_THROWS_AS(fft.to_spectral(f), InvalidArgument);
}

TEST_CASE("spectral to position matches a direct DFT") {
  const auto g = small_grid(4, 4, 2);
  const Fft3d fft(g);
  auto f = noise(g, 9);
  const auto spec = f;
  fft.to_position(f);
  const double norm = 1 / std::sqrt(static_cast<double>(g.size()));
  for (int t = 0; t < g.n_t; ++t)
    for (int x = 0; x < g.n_x; ++x)
      for (int y = 0; y < g.n_y; ++y) {
        std::complex<double> acc = 0;
        for (int a = 0; a < g.n_t; ++a)
          for (int b = 0; b < g.n_x; ++b)
            for (int c = 0; c < g.n_y; ++c) {
              const double ph = 2 * kPi *
                                (static_cast<double>(a * t) / g.n_t +
                                 static_cast<double>(b * x) / g.n_x +
                                 static_cast<double>(c * y) / g.n_y);
              acc += spec.data[g.flat(a, b, c)] * std::polar(1.0, ph);
            }
        CHECK(std::abs(acc * norm - f.data[g.flat(t, x, y)]) < 1e-12);
      }
}

TEST_CASE("field buffers are 64-byte aligned") {
  const auto g = small_grid(8, 8, 8);
  ComplexField f(g, Domain::spectral);
  CHECK(reinterpret_cast<std::uintptr_t>(f.data.data()) % 64 == 0);
  CHECK(f.matches(g));
}

TEST_CASE("grid lattice and validation") {
  CrystalSpec c;
  c.theta_cut = deg_to_rad(31.3);
  c.length = 2e-3;
  c.pump_center_omega = omega_from_wavelength(400e-9);
  auto g = small_grid(16, 8, 8);
  CHECK(g.d_omega() == doctest::Approx(2 * kPi / g.span_t));
  CHECK(g.kx_at(5) == doctest::Approx(-3 * g.d_kx()));
  CHECK_NOTHROW(g.validate(c));
  g.n_x = 12;
  CHECK_THROWS_AS(g.validate(c), InvalidArgument);
  g = small_grid(16, 8, 8);
  g.span_t = 2e-15;  // frequency window far beyond the Sellmeier range
  CHECK_THROWS_AS(g.validate(c), OutOfDispersionWindow);
  g = small_grid(16, 512, 8);
  g.span_x = 20e-6;  // transverse Nyquist beyond the light cone
  CHECK_THROWS_AS(g.validate(c), GridUnderresolved);

  PumpSpec p{60e-15, 80e-6, c.pump_center_omega, 1, 20e-3};
  const auto d = SimulationGrid::desk_default(c, p);
  CHECK(d.n_t == 128);
  CHECK(d.span_t == doctest::Approx(8 * p.tau));
  CHECK(d.span_x == doctest::Approx(8 * p.width));
  CHECK(d.omega_center == doctest::Approx(c.degenerate_omega()));
}

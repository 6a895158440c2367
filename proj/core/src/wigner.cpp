#include "parfluor/wigner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "parfluor/constants.hpp"
#include "parfluor/errors.hpp"
#include "parfluor/io.hpp"
#include "parfluor/log.hpp"
#include "parfluor/rng.hpp"

namespace parfluor {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPumpSupportCut = 1e-20;

template <class F>
void parallel_for(int n, int threads, F&& f) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void check_pump_grid(const CrystalSpec& crystal, const PumpSpec& pump,
                     const SimulationGrid& grid) {
  const double w = crystal.pump_center_omega;
  if (std::abs(pump.omega_center - w) > 1e-12 * w ||
      std::abs(2.0 * grid.omega_center - w) > 1e-12 * w) {
    throw InvalidArgument("pump carrier, crystal pump frequency and 2 x grid carrier differ");
  }
}

void multiply(cplx* d, const cplx* m, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double ar = d[k].real();
    const double ai = d[k].imag();
    const double br = m[k].real();
    const double bi = m[k].imag();
    d[k] = cplx(ar * br - ai * bi, ar * bi + ai * br);
  }
}

struct Welford {
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x, int n) {
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  double stderr_mean(int n) const {
    return n > 1 ? std::sqrt(m2 / (n - 1) / n) : kNaN;
  }
};

}  // namespace

void EnsembleSpec::validate() const {
  if (n_realizations < 1) throw InvalidArgument("ensemble needs at least one realization");
}

std::string_view to_string(Estimator e) { return e == Estimator::plain ? "plain" : "paired"; }

Estimator estimator_from_string(std::string_view name) {
  if (name == "plain") return Estimator::plain;
  if (name == "paired") return Estimator::paired;
  throw InvalidArgument("unknown estimator '" + std::string(name) + "'");
}

ComplexField sample_vacuum(const SimulationGrid& grid, std::uint64_t seed,
                           std::uint64_t realization) {
  ComplexField f(grid, Domain::spectral);
  const NormalStream stream(seed, realization);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto [a, b] = stream.pair(i);
    f.data[i] = cplx(0.5 * a, 0.5 * b);
  }
  return f;
}

ComplexField pump_field_at(double z, const PumpSpec& pump, const CrystalSpec& crystal,
                           const SimulationGrid& grid) {
  pump.validate();
  check_pump_grid(crystal, pump, grid);
  if (z < 0.0 || z > crystal.length) throw InvalidArgument("z outside [0, L]");
  ComplexField f(grid, Domain::spectral);
  const double cell = grid.cell_volume();
  for (int it = 0; it < grid.n_t; ++it) {
    for (int ix = 0; ix < grid.n_x; ++ix) {
      for (int iy = 0; iy < grid.n_y; ++iy) {
        const SpectralPoint p{pump.omega_center + grid.omega_offset(it), grid.kx_at(ix),
                              grid.ky_at(iy)};
        const cplx a = pump_spectrum(p, pump);
        if (a == 0.0) continue;
        f.data[grid.flat(it, ix, iy)] = cell * a * std::polar(1.0, kz_pump(p, crystal) * z);
      }
    }
  }
  Fft3d(grid).backward(f.data.data());
  f.domain = Domain::position;
  f.z = z;
  return f;
}

BogoliubovStep bogoliubov_step(cplx g, double dz) {
  const double mag = std::abs(g);
  const double a = mag * dz;
  if (a == 0.0) return {};
  const double em = std::expm1(a);
  const double e = 1.0 + em;
  BogoliubovStep s;
  s.c = 1.0 + em * em / (2.0 * e);
  s.s = (g / mag) * (em * (em + 2.0) / (2.0 * e));
  return s;
}

Propagator::Propagator(const CrystalSpec& crystal, const PumpSpec& pump,
                       const SimulationGrid& grid)
    : grid_(grid), fft_(grid) {
  crystal.validate();
  pump.validate();
  grid.validate(crystal);
  check_pump_grid(crystal, pump, grid);

  length_ = crystal.length;
  dz_ = length_ / grid.n_z;
  coupled_ = pump.amplitude > 0.0;

  const double w0 = grid.omega_center;
  const double k_ref = kz_signal({w0, 0.0, 0.0}, crystal);
  const SpectralPoint pc{2.0 * w0, 0.0, 0.0};
  const double beta = d_kz_d_omega(Ray::pump, pc, crystal);
  const double rho_x = d_kz_d_ktrans(Ray::pump, Axis::x, pc, crystal);
  const double rho_y = d_kz_d_ktrans(Ray::pump, Axis::y, pc, crystal);
  const auto frame = [&](double dw, double kx, double ky) {
    return beta * dw + rho_x * kx + rho_y * ky;
  };

  const std::size_t n = grid.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  lin_first_.resize(n);
  lin_mid_.resize(n);
  lin_last_.resize(n);
  for (int it = 0; it < grid.n_t; ++it) {
    for (int ix = 0; ix < grid.n_x; ++ix) {
      for (int iy = 0; iy < grid.n_y; ++iy) {
        const SpectralPoint m = grid.mode(it, ix, iy);
        double kz = 0.0;
        try {
          kz = kz_signal(m, crystal);
        } catch (const EvanescentMode& e) {
          throw GridUnderresolved(e.what());
        }
        const double f = k_ref + frame(grid.omega_offset(it), m.kx, m.ky);
        const double phi = kz - f;
        const std::size_t i = grid.flat(it, ix, iy);
        lin_first_[i] = std::polar(1.0, 0.5 * phi * dz_);
        lin_mid_[i] = std::polar(inv_n, phi * dz_);
        lin_last_[i] = std::polar(inv_n, 0.5 * phi * dz_ + f * length_);
      }
    }
  }

  if (!coupled_) return;
  const double cell = grid.cell_volume();
  for (int it = 0; it < grid.n_t; ++it) {
    for (int ix = 0; ix < grid.n_x; ++ix) {
      for (int iy = 0; iy < grid.n_y; ++iy) {
        const double dw = grid.omega_offset(it);
        const double kx = grid.kx_at(ix);
        const double ky = grid.ky_at(iy);
        const double weight = std::exp(-0.5 * pump.tau * pump.tau * dw * dw -
                                       0.5 * pump.width * pump.width * (kx * kx + ky * ky));
        if (weight < kPumpSupportCut) continue;
        const SpectralPoint p{pump.omega_center + dw, kx, ky};
        support_index_.push_back(grid.flat(it, ix, iy));
        support_amp_.push_back(cell * pump_spectrum(p, pump).real() / pump.nonlinear_length);
        support_rate_.push_back(kz_pump(p, crystal) - 2.0 * k_ref - frame(dw, kx, ky));
      }
    }
  }
}

void Propagator::pump_position(double z_mid, FieldBuffer& out) const {
  std::fill(out.begin(), out.end(), cplx(0.0, 0.0));
  for (std::size_t q = 0; q < support_index_.size(); ++q) {
    out[support_index_[q]] = std::polar(support_amp_[q], support_rate_[q] * z_mid);
  }
  fft_.backward(out.data());
}

void Propagator::propagate(const std::vector<ComplexField*>& fields, int threads) const {
  for (const ComplexField* f : fields) {
    if (!f || !f->matches(grid_)) throw InvalidArgument("field does not match the grid");
    if (f->domain != Domain::spectral) throw InvalidArgument("propagate needs spectral input");
  }
  const std::size_t n = grid_.size();
  FieldBuffer g;
  std::vector<double> c;
  FieldBuffer s;
  if (coupled_) {
    g.resize(n);
    c.resize(n);
    s.resize(n);
  }
  const int nf = static_cast<int>(fields.size());
  for (int j = 0; j < grid_.n_z; ++j) {
    if (coupled_) {
      pump_position((j + 0.5) * dz_, g);
      for (std::size_t k = 0; k < n; ++k) {
        const BogoliubovStep b = bogoliubov_step(g[k], dz_);
        c[k] = b.c;
        s[k] = b.s;
      }
    }
    const FieldBuffer& lin = j == 0 ? lin_first_ : lin_mid_;
    parallel_for(nf, threads, [&](int i) {
      cplx* d = fields[static_cast<std::size_t>(i)]->data.data();
      multiply(d, lin.data(), n);
      fft_.backward(d);
      if (coupled_) {
        // alpha <- c alpha + s conj(alpha), written out to avoid the
        // NaN-recovery path of std::complex multiplication.
        for (std::size_t k = 0; k < n; ++k) {
          const double ar = d[k].real();
          const double ai = d[k].imag();
          const double sr = s[k].real();
          const double si = s[k].imag();
          d[k] = cplx(c[k] * ar + sr * ar + si * ai, c[k] * ai + si * ar - sr * ai);
        }
      }
      fft_.forward(d);
    });
  }
  parallel_for(nf, threads, [&](int i) {
    ComplexField& f = *fields[static_cast<std::size_t>(i)];
    multiply(f.data.data(), lin_last_.data(), n);
    f.z = length_;
  });
}

ComplexField propagate(ComplexField field, const PumpSpec& pump, const CrystalSpec& crystal,
                       const SimulationGrid& grid) {
  const Propagator prop(crystal, pump, grid);
  prop.propagate({&field});
  return field;
}

double ModeFlux::total() const {
  double s = 0.0;
  for (double v : mean) s += v;
  return s;
}

ModeFlux estimate_flux(const std::vector<ComplexField>& outputs) {
  if (outputs.empty()) throw InvalidArgument("estimate_flux needs at least one realization");
  const std::size_t n = outputs.front().size();
  std::vector<Welford> acc(n);
  int r = 0;
  for (const auto& f : outputs) {
    if (f.size() != n) throw InvalidArgument("realizations have different sizes");
    if (f.domain != Domain::spectral) throw InvalidArgument("estimate_flux needs spectral fields");
    ++r;
    for (std::size_t k = 0; k < n; ++k) acc[k].add(std::norm(f.data[k]) - 0.5, r);
  }
  ModeFlux out;
  out.n_realizations = r;
  out.mean.resize(n);
  out.stderr_mean.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.mean[k] = acc[k].mean;
    out.stderr_mean[k] = acc[k].stderr_mean(r);
  }
  return out;
}

void BinningSpec::validate() const {
  if (n_lambda < 1 || n_alpha < 1) throw InvalidArgument("binning needs at least one bin per axis");
  if (!(lambda_hi_nm > lambda_lo_nm) || !(lambda_lo_nm > 0.0)) {
    throw InvalidArgument("binning wavelength edges must be positive and ascending");
  }
  if (!(alpha_hi_deg > alpha_lo_deg) || alpha_lo_deg < 0.0 || alpha_hi_deg > 90.0) {
    throw InvalidArgument("binning angle edges must be ascending inside [0, 90] deg");
  }
}

int BinningSpec::lambda_bin(double lambda_nm) const {
  if (!(lambda_nm >= lambda_lo_nm && lambda_nm <= lambda_hi_nm)) return -1;
  return std::min(n_lambda - 1, static_cast<int>((lambda_nm - lambda_lo_nm) / lambda_width()));
}

int BinningSpec::alpha_bin(double alpha_deg) const {
  if (!(alpha_deg >= alpha_lo_deg && alpha_deg <= alpha_hi_deg)) return -1;
  return std::min(n_alpha - 1, static_cast<int>((alpha_deg - alpha_lo_deg) / alpha_width()));
}

BinningSpec BinningSpec::for_grid(const SimulationGrid& grid) {
  BinningSpec b;
  const double dw = grid.d_omega();
  const double w_hi = grid.omega_center + (grid.n_t / 2 - 0.5) * dw;
  const double w_lo = grid.omega_center - (grid.n_t / 2 + 0.5) * dw;
  b.lambda_lo_nm = wavelength_from_omega(w_hi) * 1e9;
  b.lambda_hi_nm = wavelength_from_omega(w_lo) * 1e9;
  b.n_lambda = std::max(1, grid.n_t / 2);
  const double k_axis = 0.5 * grid.n_x * grid.d_kx();
  b.alpha_lo_deg = 0.0;
  b.alpha_hi_deg =
      rad_to_deg(std::asin(std::min(1.0, kSpeedOfLight * k_axis / grid.omega_center)));
  b.n_alpha = std::max(1, grid.n_x / 4);
  return b;
}

std::vector<int> bin_modes(const SimulationGrid& grid, const BinningSpec& binning) {
  binning.validate();
  std::vector<int> out(grid.size(), -1);
  for (int it = 0; it < grid.n_t; ++it) {
    const double omega = grid.omega_center + grid.omega_offset(it);
    const int lb = binning.lambda_bin(wavelength_from_omega(omega) * 1e9);
    if (lb < 0) continue;
    for (int ix = 0; ix < grid.n_x; ++ix) {
      for (int iy = 0; iy < grid.n_y; ++iy) {
        const double ratio =
            kSpeedOfLight * std::hypot(grid.kx_at(ix), grid.ky_at(iy)) / omega;
        if (ratio > 1.0) continue;
        const int ab = binning.alpha_bin(rad_to_deg(std::asin(ratio)));
        if (ab < 0) continue;
        out[grid.flat(it, ix, iy)] = lb * binning.n_alpha + ab;
      }
    }
  }
  return out;
}

FluxMap azimuthal_average(const ModeFlux& flux, const SimulationGrid& grid,
                          const BinningSpec& binning) {
  if (flux.mean.size() != grid.size() || flux.stderr_mean.size() != grid.size()) {
    throw InvalidArgument("flux array does not match the grid");
  }
  const auto index = bin_modes(grid, binning);
  FluxMap map;
  map.binning = binning;
  map.bins.assign(static_cast<std::size_t>(binning.n_lambda * binning.n_alpha), FluxBin{});
  std::vector<double> var(map.bins.size(), 0.0);
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] < 0) continue;
    auto b = static_cast<std::size_t>(index[k]);
    map.bins[b].mean += flux.mean[k];
    map.bins[b].n_modes += 1;
    var[b] += flux.stderr_mean[k] * flux.stderr_mean[k];
  }
  for (std::size_t b = 0; b < map.bins.size(); ++b) {
    FluxBin& bin = map.bins[b];
    if (bin.n_modes == 0) {
      bin.stderr_mean = kNaN;
      continue;
    }
    bin.mean /= bin.n_modes;
    bin.stderr_mean = std::sqrt(var[b]) / bin.n_modes;
  }
  return map;
}

void write_flux_map_csv(std::ostream& os, const FluxMap& map) {
  os << "lambda_nm,alpha_deg,flux,stderr,n_modes\n";
  const auto& b = map.binning;
  for (int i = 0; i < b.n_lambda; ++i) {
    for (int j = 0; j < b.n_alpha; ++j) {
      const FluxBin& bin = map.at(i, j);
      os << io::format_number(b.lambda_center(i)) << ',' << io::format_number(b.alpha_center(j))
         << ',';
      if (bin.n_modes > 0) {
        os << io::format_number(bin.mean);
        os << ',';
        if (std::isfinite(bin.stderr_mean)) os << io::format_number(bin.stderr_mean);
      } else {
        os << ',';
      }
      os << ',' << bin.n_modes << '\n';
    }
  }
}

std::string flux_map_pgm(const FluxMap& map, double* scale) {
  const auto& b = map.binning;
  double top = 0.0;
  for (const auto& bin : map.bins) {
    if (bin.n_modes > 0) top = std::max(top, bin.mean);
  }
  std::ostringstream os;
  os << "P5\n" << b.n_lambda << ' ' << b.n_alpha << "\n255\n";
  std::string pixels(static_cast<std::size_t>(b.n_lambda * b.n_alpha), '\0');
  for (int j = 0; j < b.n_alpha; ++j) {
    for (int i = 0; i < b.n_lambda; ++i) {
      const FluxBin& bin = map.at(i, j);
      double v = 0.0;
      if (bin.n_modes > 0 && top > 0.0) v = std::clamp(bin.mean / top, 0.0, 1.0);
      pixels[static_cast<std::size_t>(j * b.n_lambda + i)] =
          static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v)));
    }
  }
  os << pixels;
  if (scale) *scale = top;
  return os.str();
}

EnsembleResult run_ensemble(const CrystalSpec& crystal, const PumpSpec& pump,
                            const SimulationGrid& grid, const EnsembleSpec& ensemble,
                            const BinningSpec& binning, const RunOptions& options) {
  ensemble.validate();
  if (options.batch < 1 || options.threads < 1) {
    throw InvalidArgument("batch and threads must be at least 1");
  }
  const Propagator prop(crystal, pump, grid);
  const auto index = bin_modes(grid, binning);
  const std::size_t n = grid.size();
  const std::size_t nb = static_cast<std::size_t>(binning.n_lambda * binning.n_alpha);
  const bool paired = options.estimator == Estimator::paired;
  const int per_batch = paired ? std::max(1, options.batch / 2) : options.batch;

  std::vector<int> members(nb, 0);
  for (int b : index) {
    if (b >= 0) ++members[static_cast<std::size_t>(b)];
  }

  std::vector<Welford> mode_acc(n);
  std::vector<Welford> bin_acc(nb);
  Welford total_acc;
  std::vector<double> x(n);
  std::vector<double> bin_sum(nb);

  const int R = ensemble.n_realizations;
  int done = 0;
  for (int r0 = 0; r0 < R; r0 += per_batch) {
    const int r1 = std::min(R, r0 + per_batch);
    const int count = r1 - r0;
    std::vector<ComplexField> fields(static_cast<std::size_t>(paired ? 2 * count : count));
    std::vector<std::vector<double>> input_norm(paired ? static_cast<std::size_t>(count) : 0);
    parallel_for(count, options.threads, [&](int i) {
      const auto u = static_cast<std::size_t>(i);
      ComplexField in = sample_vacuum(grid, ensemble.seed, static_cast<std::uint64_t>(r0 + i));
      if (paired) {
        input_norm[u].resize(n);
        for (std::size_t k = 0; k < n; ++k) input_norm[u][k] = std::norm(in.data[k]);
        fields[2 * u + 1] = in;
        for (auto& v : fields[2 * u + 1].data) v *= cplx(0.0, 1.0);
        fields[2 * u] = std::move(in);
      } else {
        fields[u] = std::move(in);
      }
    });
    std::vector<ComplexField*> ptrs;
    for (auto& f : fields) ptrs.push_back(&f);
    prop.propagate(ptrs, options.threads);

    for (int i = 0; i < count; ++i) {
      const auto u = static_cast<std::size_t>(i);
      if (paired) {
        const auto& a = fields[2 * u].data;
        const auto& b = fields[2 * u + 1].data;
        for (std::size_t k = 0; k < n; ++k) {
          x[k] = 0.5 * (std::norm(a[k]) + std::norm(b[k])) - input_norm[u][k];
        }
      } else {
        const auto& a = fields[u].data;
        for (std::size_t k = 0; k < n; ++k) x[k] = std::norm(a[k]) - 0.5;
      }
      ++done;
      double total = 0.0;
      std::fill(bin_sum.begin(), bin_sum.end(), 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        mode_acc[k].add(x[k], done);
        total += x[k];
        if (index[k] >= 0) bin_sum[static_cast<std::size_t>(index[k])] += x[k];
      }
      total_acc.add(total, done);
      for (std::size_t b = 0; b < nb; ++b) {
        if (members[b] > 0) bin_acc[b].add(bin_sum[b] / members[b], done);
      }
    }
    std::ostringstream os;
    os << "wigner: " << done << "/" << R << " realizations";
    log::info(os.str());
  }

  EnsembleResult res;
  res.modes.n_realizations = R;
  res.modes.mean.resize(n);
  res.modes.stderr_mean.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    res.modes.mean[k] = mode_acc[k].mean;
    res.modes.stderr_mean[k] = mode_acc[k].stderr_mean(R);
  }
  res.map.binning = binning;
  res.map.bins.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    FluxBin& bin = res.map.bins[b];
    bin.n_modes = members[b];
    bin.mean = members[b] > 0 ? bin_acc[b].mean : 0.0;
    bin.stderr_mean = members[b] > 0 ? bin_acc[b].stderr_mean(R) : kNaN;
  }
  res.total_photons = total_acc.mean;
  res.total_stderr = total_acc.stderr_mean(R);
  return res;
}

void CalibrationSpec::validate() const {
  if (!(target_photons > 0.0)) throw InvalidArgument("calibration target must be positive");
  if (probe_realizations < 1) throw InvalidArgument("calibration needs at least one probe realization");
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw InvalidArgument("calibration tolerance must lie in (0, 1)");
  if (max_probes < 1) throw InvalidArgument("calibration needs at least one probe");
  if (!(initial_gain > 0.0)) throw InvalidArgument("initial gain must be positive");
}

CalibrationResult calibrate_gain(const CalibrationSpec& spec, const CrystalSpec& crystal,
                                 const PumpSpec& pump, const SimulationGrid& grid,
                                 const EnsembleSpec& ensemble, const RunOptions& options) {
  spec.validate();
  ensemble.validate();
  if (!(pump.amplitude > 0.0)) throw InvalidArgument("calibration needs a nonzero pump amplitude");
  const double scale = crystal.length * pump.amplitude;  // L_NL = scale / gain
  const EnsembleSpec probe{spec.probe_realizations, ensemble.seed};
  const BinningSpec binning = BinningSpec::for_grid(grid);
  const double target = spec.target_photons;

  CalibrationResult result;
  const auto run = [&](double gain) {
    if (static_cast<int>(result.trace.size()) >= spec.max_probes) {
      std::ostringstream os;
      os << "calibration did not reach " << target << " photons within " << spec.max_probes
         << " probes; last total " << result.trace.back().total_photons;
      throw NotConverged(os.str());
    }
    PumpSpec p = pump;
    p.nonlinear_length = scale / gain;
    const double total = run_ensemble(crystal, p, grid, probe, binning, options).total_photons;
    result.trace.push_back({p.nonlinear_length, total});
    std::ostringstream os;
    os << "calibrate: gain " << gain << " -> " << total << " photons";
    log::info(os.str());
    return total;
  };
  const auto within = [&](double t) { return std::abs(t - target) / target < spec.tolerance; };
  const auto finish = [&](double gain, double total) {
    result.nonlinear_length = scale / gain;
    result.achieved_total = total;
    return result;
  };

  double gain = spec.initial_gain;
  double total = run(gain);
  if (within(total)) return finish(gain, total);
  double lo = 0.0;
  double hi = 0.0;
  if (total < target) {
    for (;;) {
      lo = gain;
      gain *= 2.0;
      total = run(gain);
      if (within(total)) return finish(gain, total);
      if (total > target) break;
    }
    hi = gain;
  } else {
    for (;;) {
      hi = gain;
      gain *= 0.5;
      total = run(gain);
      if (within(total)) return finish(gain, total);
      if (total < target) break;
    }
    lo = gain;
  }
  for (;;) {
    gain = std::sqrt(lo * hi);
    total = run(gain);
    if (within(total)) return finish(gain, total);
    (total < target ? lo : hi) = gain;
  }
}

SimulationResult run_simulation(const CrystalSpec& crystal, const PumpSpec& pump,
                                const SimulationGrid& grid, const EnsembleSpec& ensemble,
                                const SimulationOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const BinningSpec binning = options.binning ? *options.binning : BinningSpec::for_grid(grid);
  binning.validate();
  SimulationResult out;
  PumpSpec p = pump;
  if (options.calibration) {
    out.calibration =
        calibrate_gain(*options.calibration, crystal, pump, grid, ensemble, options.run);
    p.nonlinear_length = out.calibration->nonlinear_length;
  }
  out.nonlinear_length = p.nonlinear_length;
  out.ensemble = run_ensemble(crystal, p, grid, ensemble, binning, options.run);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace parfluor

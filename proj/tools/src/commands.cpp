#include "parfluor_cli/commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "parfluor/constants.hpp"
#include "parfluor/errors.hpp"
#include "parfluor/io.hpp"
#include "parfluor/phasematch.hpp"
#include "parfluor/version.hpp"

namespace parfluor::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// NaN and infinities are not JSON; record them as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string config_hash(const json& doc) { return io::hex64(io::fnv1a64(doc.dump())); }

void write_manifest(const RunConfig& config, const std::string& command,
                    const std::string& stem, CommandOutput& out, double wall) {
  json m;
  m["tool"] = "parfluor";
  m["version"] = std::string(version());
  m["command"] = command;
  m["config"] = config.document;
  m["config_hash"] = config_hash(config.document);
  m["seed"] = config.ensemble.seed;
  m["material_file"] = config.material_source;
  m["wall_seconds"] = wall;
  json files = json::array();
  for (const auto& f : out.files) files.push_back(f.filename().string());
  m["outputs"] = files;
  for (const auto& [k, v] : out.summary.items()) m[k] = v;
  const fs::path path = config.output_dir / (stem + ".manifest.json");
  io::write_file_atomic(path, m.dump(2) + "\n");
  out.files.push_back(path);
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  }
  return v;
}

std::string cell_dir_name(std::size_t index, const SweepCell& c) {
  std::ostringstream os;
  os << "cell_" << std::setw(2) << std::setfill('0') << index << "_theta"
     << io::format_number(c.theta_deg) << "_tau" << io::format_number(c.tau_fs) << "_w"
     << io::format_number(c.width_um);
  return os.str();
}

CommandOutput dispatch(const std::string& command, const RunConfig& config) {
  if (command == "phasematch") return cmd_phasematch(config);
  if (command == "pert-flux") return cmd_pert_flux(config);
  if (command == "wigner") return cmd_wigner(config);
  if (command == "calibrate") return cmd_calibrate(config);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace

CommandOutput cmd_phasematch(const RunConfig& config) {
  const auto t0 = Clock::now();
  const auto& s = config.phasematch;
  const auto rows = scan_curve(s.lambda_lo_nm, s.lambda_hi_nm, s.points, config.crystal);
  std::ostringstream csv;
  write_curve_csv(csv, rows);
  CommandOutput out;
  const fs::path path = config.output_dir / "phasematch.csv";
  io::write_file_atomic(path, csv.str());
  out.files.push_back(path);
  int matched = 0;
  for (const auto& r : rows) matched += r.point.has_value();
  out.summary["rows"] = rows.size();
  out.summary["phase_matched_rows"] = matched;
  write_manifest(config, "phasematch", "phasematch", out, seconds_since(t0));
  return out;
}

CommandOutput cmd_pert_flux(const RunConfig& config) {
  const auto t0 = Clock::now();
  const auto& s = config.pert_flux;
  const auto grid = linspace(s.lambda_lo_nm, s.lambda_hi_nm, s.points);
  std::vector<SpectrumRow> rows;
  json methods = json::array();
  for (FluxMethod m : config.methods) {
    auto part = spectrum_along_curve(grid, config.crystal, config.pump, m, config.quadrature);
    rows.insert(rows.end(), part.begin(), part.end());
    methods.push_back(std::string(to_string(m)));
  }
  std::ostringstream csv;
  write_spectrum_csv(csv, rows);
  CommandOutput out;
  const fs::path path = config.output_dir / "pert_flux.csv";
  io::write_file_atomic(path, csv.str());
  out.files.push_back(path);
  out.summary["methods"] = methods;
  out.summary["flux_units"] = "photons per unit d(omega) d(kx) d(ky) [s m^2]";
  write_manifest(config, "pert-flux", "pert_flux", out, seconds_since(t0));
  return out;
}

CommandOutput cmd_wigner(const RunConfig& config) {
  const auto t0 = Clock::now();
  validate_grid(config);
  SimulationOptions options;
  options.binning = config.binning;
  options.run = config.run;
  options.calibration = config.calibration;
  const SimulationResult r =
      run_simulation(config.crystal, config.pump, config.grid, config.ensemble, options);

  CommandOutput out;
  std::ostringstream csv;
  write_flux_map_csv(csv, r.ensemble.map);
  const fs::path csv_path = config.output_dir / "flux_map.csv";
  io::write_file_atomic(csv_path, csv.str());
  out.files.push_back(csv_path);
  double scale = 0.0;
  const std::string pgm = flux_map_pgm(r.ensemble.map, &scale);
  const fs::path pgm_path = config.output_dir / "flux_map.pgm";
  io::write_file_atomic(pgm_path, pgm);
  out.files.push_back(pgm_path);

  out.summary["total_photons"] = number(r.ensemble.total_photons);
  out.summary["total_photons_stderr"] = number(r.ensemble.total_stderr);
  out.summary["nonlinear_length_mm"] = r.nonlinear_length * 1e3;
  out.summary["gain"] = config.crystal.length * config.pump.amplitude / r.nonlinear_length;
  out.summary["pgm_scale"] = scale;
  out.summary["realizations"] = config.ensemble.n_realizations;
  out.summary["estimator"] = std::string(to_string(config.run.estimator));
  out.summary["flux_units"] = "mean photons per lattice mode";
  if (r.calibration) {
    json trace = json::array();
    for (const auto& p : r.calibration->trace) {
      trace.push_back({{"nonlinear_length_mm", p.nonlinear_length * 1e3},
                       {"total_photons", number(p.total_photons)}});
    }
    out.summary["calibration"] = {{"target_photons", config.calibration->target_photons},
                                  {"probe_total", r.calibration->achieved_total},
                                  {"probes", r.calibration->trace.size()},
                                  {"trace", trace}};
  }
  write_manifest(config, "wigner", "flux_map", out, seconds_since(t0));
  return out;
}

CommandOutput cmd_calibrate(const RunConfig& config) {
  const auto t0 = Clock::now();
  validate_grid(config);
  const CalibrationSpec spec = config.calibration ? *config.calibration : CalibrationSpec{};
  const CalibrationResult r =
      calibrate_gain(spec, config.crystal, config.pump, config.grid, config.ensemble, config.run);
  json trace = json::array();
  for (const auto& p : r.trace) {
    trace.push_back({{"nonlinear_length_mm", p.nonlinear_length * 1e3},
                     {"total_photons", number(p.total_photons)}});
  }
  json result = {{"target_photons", spec.target_photons},
                 {"achieved_total", r.achieved_total},
                 {"nonlinear_length_mm", r.nonlinear_length * 1e3},
                 {"gain", config.crystal.length * config.pump.amplitude / r.nonlinear_length},
                 {"probes", r.trace.size()},
                 {"trace", trace}};
  CommandOutput out;
  const fs::path path = config.output_dir / "calibration.json";
  io::write_file_atomic(path, result.dump(2) + "\n");
  out.files.push_back(path);
  out.summary["calibration"] = result;
  write_manifest(config, "calibrate", "calibration", out, seconds_since(t0));
  return out;
}

int cmd_sweep(const RunConfig& config, std::ostream& err) {
  if (config.sweep_cells.empty()) throw ConfigError("sweep.cells: empty sweep list");
  const std::size_t n = config.sweep_cells.size();
  std::vector<json> records(n);
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;

  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const SweepCell& cell = config.sweep_cells[i];
      const std::string dir = cell_dir_name(i, cell);
      json rec = {{"index", i},         {"theta_deg", cell.theta_deg},
                  {"tau_fs", cell.tau_fs}, {"width_um", cell.width_um},
                  {"dir", dir}};
      try {
        json doc = with_cell(config.document, cell);
        doc["output_dir"] = (config.output_dir / dir).string();
        const RunConfig cell_config = resolve(doc);
        const CommandOutput out = dispatch(config.sweep_command, cell_config);
        json files = json::array();
        for (const auto& f : out.files) files.push_back(f.filename().string());
        rec["status"] = "ok";
        rec["outputs"] = files;
        rec["config_hash"] = config_hash(doc);
        if (out.summary.contains("total_photons")) rec["total_photons"] = out.summary["total_photons"];
      } catch (const std::exception& e) {
        rec["status"] = "failed";
        rec["error"] = e.what();
        std::lock_guard<std::mutex> lock(err_mutex);
        err << "sweep: cell " << i << " (" << dir << ") failed: " << e.what() << '\n';
      }
      records[i] = std::move(rec);
    }
  };
  const int jobs = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config.jobs), n));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  int failed = 0;
  for (const auto& r : records) failed += r["status"] == "failed";
  json index = {{"tool", "parfluor"},
                {"version", std::string(version())},
                {"command", config.sweep_command},
                {"config", config.document},
                {"config_hash", config_hash(config.document)},
                {"seed", config.ensemble.seed},
                {"cells", records},
                {"failed", failed}};
  io::write_file_atomic(config.output_dir / "index.json", index.dump(2) + "\n");
  return failed > 0 ? kExitPartial : kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spontaneous parametric fluorescence from a type-I crystal: phase matching, "
               "perturbative flux and stochastic Wigner simulation.",
               "parfluor"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  struct Flags {
    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::vector<std::string> sets;
    std::string method;
    std::optional<double> target;
    std::optional<int> realizations;
  } flags;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON configuration file");
    sub->add_option("--out", flags.out_dir, "Output directory");
    sub->add_option("--set", flags.sets, "Override a config key, e.g. crystal.theta_deg=35")
        ->allow_extra_args(false);
    sub->add_option("--seed", flags.seed, "Ensemble seed");
    sub->add_option("--jobs", flags.jobs, "Parallel sweep cells");
    sub->add_option("--method", flags.method,
                    "pert-flux method: closed_form|closed_form_printed|exact|gaussianized|all");
    sub->add_option("--target-photons", flags.target, "Calibration target total photons");
    sub->add_option("--realizations", flags.realizations, "Ensemble size");
  };
  std::vector<CLI::App*> subs;
  subs.push_back(app.add_subcommand("phasematch", "Perfect phase-matching curve (CSV)"));
  subs.push_back(app.add_subcommand("pert-flux", "Perturbative flux along the curve (CSV)"));
  subs.push_back(app.add_subcommand("wigner", "Stochastic Wigner flux map (CSV, PGM, manifest)"));
  subs.push_back(app.add_subcommand("sweep", "Run a command over a (theta, tau, w) matrix"));
  subs.push_back(app.add_subcommand("calibrate", "Calibrate L_NL to a target photon number"));
  for (auto* s : subs) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  std::string command;
  for (auto* s : subs) {
    if (s->parsed()) command = s->get_name();
  }

  try {
    json doc = default_document();
    if (!flags.config.empty()) merge_checked(doc, read_json_file(flags.config));
    for (const auto& s : flags.sets) apply_override(doc, s);
    json cli_overlay = json::object();
    if (!flags.out_dir.empty()) cli_overlay["output_dir"] = flags.out_dir;
    if (flags.seed) cli_overlay["ensemble"]["seed"] = *flags.seed;
    if (flags.realizations) cli_overlay["ensemble"]["realizations"] = *flags.realizations;
    if (flags.jobs) cli_overlay["sweep"]["jobs"] = *flags.jobs;
    if (!flags.method.empty()) cli_overlay["pert_flux"]["method"] = flags.method;
    if (flags.target) cli_overlay["wigner"]["target_photons"] = *flags.target;
    merge_checked(doc, cli_overlay);
    const RunConfig config = resolve(doc);

    if (command == "sweep") return cmd_sweep(config, err);
    const CommandOutput result = dispatch(command, config);
    for (const auto& f : result.files) out << "wrote " << f.string() << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "parfluor: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "parfluor: " << e.what() << '\n';
    return kExitCompute;
  } catch (const std::exception& e) {
    err << "parfluor: " << e.what() << '\n';
    return kExitCompute;
  }
}

}  // namespace parfluor::cli

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "parfluor/dispersion.hpp"
#include "parfluor/grid.hpp"
#include "parfluor/perturbative.hpp"
#include "parfluor/wigner.hpp"

namespace parfluor::cli {

using nlohmann::json;

/// One (theta, tau, w) tuple of a sweep, interface units.
struct SweepCell {
  double theta_deg = 0.0;
  double tau_fs = 0.0;
  double width_um = 0.0;
};

struct ScanOptions {
  double lambda_lo_nm = 500.0;
  double lambda_hi_nm = 1200.0;
  int points = 141;
};

/// Fully resolved configuration in internal SI units, plus the resolved
/// JSON document (interface units) it was built from.
struct RunConfig {
  json document;
  std::string material_source;

  CrystalSpec crystal;
  PumpSpec pump;
  SimulationGrid grid;
  EnsembleSpec ensemble;
  RunOptions run;
  std::optional<CalibrationSpec> calibration;
  /// BinningSpec::for_grid with any non-null binning.* keys applied.
  BinningSpec binning;

  ScanOptions phasematch;
  ScanOptions pert_flux;
  std::vector<FluxMethod> methods;
  QuadratureSpec quadrature;

  std::vector<SweepCell> sweep_cells;
  std::string sweep_command;
  int jobs = 1;

  std::filesystem::path output_dir;
};

/// Every recognised key with its default value; null marks "derived from
/// other settings" (grid spans, binning) or "disabled".
json default_document();

/// Deep-merges `overlay` into `base`. Throws ConfigError naming the dotted
/// key for unknown keys or values whose JSON type differs from the default.
void merge_checked(json& base, const json& overlay, const std::string& prefix = "");

/// Applies "a.b.c=value"; the value is parsed as JSON when possible and
/// taken as a string otherwise.
void apply_override(json& doc, const std::string& assignment);

/// Reads a JSON file (ConfigError on malformed JSON, naming the file and
/// position).
json read_json_file(const std::filesystem::path& path);

/// Crystal file lookup: an explicit path, else <dir>/crystals/<name>.json
/// for dir in $PARFLUOR_DATA_DIR, the installed data dir and the source
/// data dir.
std::filesystem::path locate_material(const std::string& name);
Material material_from_json(const json& j, const std::string& source);

/// Converts a merged document to a RunConfig and validates every sub-spec.
/// Throws ConfigError.
RunConfig resolve(const json& doc);

/// Grid and binning checks, only needed by the stochastic commands.
/// Throws ConfigError.
void validate_grid(const RunConfig& config);

/// Document with theta/tau/w replaced by a sweep cell.
json with_cell(const json& doc, const SweepCell& cell);

}  // namespace parfluor::cli

#include "parfluor_cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "parfluor/constants.hpp"
#include "parfluor/errors.hpp"
#include "parfluor/io.hpp"

#ifndef PARFLUOR_INSTALL_DATA_DIR
#define PARFLUOR_INSTALL_DATA_DIR ""
#endif
#ifndef PARFLUOR_SOURCE_DATA_DIR
#define PARFLUOR_SOURCE_DATA_DIR ""
#endif

namespace parfluor::cli {

namespace {

const std::set<std::string>& nullable_keys() {
  static const std::set<std::string> keys = {
      "grid.span_t_fs",       "grid.span_x_um",        "grid.span_y_um",
      "binning.lambda_lo_nm", "binning.lambda_hi_nm",  "binning.n_lambda",
      "binning.alpha_lo_deg", "binning.alpha_hi_deg",  "binning.n_alpha",
      "wigner.target_photons"};
  return keys;
}

const std::set<std::string>& integer_keys() {
  static const std::set<std::string> keys = {
      "grid.n_t",         "grid.n_x",           "grid.n_y",
      "grid.n_z",         "ensemble.realizations", "ensemble.seed",
      "wigner.threads",   "wigner.batch",       "wigner.probe_realizations",
      "wigner.max_probes", "binning.n_lambda",  "binning.n_alpha",
      "phasematch.points", "pert_flux.points",  "pert_flux.initial_points",
      "pert_flux.max_points", "sweep.jobs"};
  return keys;
}

std::string type_name(const json& v) {
  if (v.is_null()) return "null";
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  return "object";
}

json default_matrix() {
  json cells = json::array();
  for (double theta : {29.0, 31.3, 35.0, 40.0}) {
    for (auto [tau, w] : {std::pair{60.0, 80.0}, std::pair{60.0, 160.0}, std::pair{120.0, 80.0}}) {
      cells.push_back({{"theta_deg", theta}, {"tau_fs", tau}, {"width_um", w}});
    }
  }
  return cells;
}

void check_cells(const json& cells, const std::string& key) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string at = key + "[" + std::to_string(i) + "]";
    if (!cells[i].is_object()) throw ConfigError(at + ": expected object");
    for (const auto& [k, v] : cells[i].items()) {
      if (k != "theta_deg" && k != "tau_fs" && k != "width_um") {
        throw ConfigError(at + "." + k + ": unknown key");
      }
      if (!v.is_number()) throw ConfigError(at + "." + k + ": expected number");
    }
    for (const char* k : {"theta_deg", "tau_fs", "width_um"}) {
      if (!cells[i].contains(k)) throw ConfigError(at + "." + k + ": missing");
    }
  }
}

template <class T>
T get(const json& doc, const std::string& section, const std::string& key) {
  return doc.at(section).at(key).get<T>();
}

std::optional<double> get_opt(const json& doc, const std::string& section,
                              const std::string& key) {
  const json& v = doc.at(section).at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

// Runs `f`; library validation errors become ConfigErrors prefixed by `what`.
template <class F>
void validated(const std::string& what, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

json default_document() {
  return {
      {"crystal",
       {{"material", "bbo"}, {"theta_deg", 31.3}, {"length_mm", 2.0},
        {"pump_wavelength_nm", 400.0}}},
      {"pump",
       {{"tau_fs", 60.0}, {"width_um", 80.0}, {"amplitude", 1.0},
        {"nonlinear_length_mm", 20.0}}},
      {"grid",
       {{"n_t", 128}, {"n_x", 64}, {"n_y", 64}, {"span_t_fs", nullptr},
        {"span_x_um", nullptr}, {"span_y_um", nullptr}, {"n_z", 200}}},
      {"ensemble", {{"realizations", 10}, {"seed", 1}}},
      {"wigner",
       {{"estimator", "paired"}, {"threads", 1}, {"batch", 8}, {"target_photons", 1e6},
        {"probe_realizations", 2}, {"tolerance", 0.2}, {"max_probes", 30},
        {"initial_gain", 1.0}}},
      {"binning",
       {{"lambda_lo_nm", nullptr}, {"lambda_hi_nm", nullptr}, {"n_lambda", nullptr},
        {"alpha_lo_deg", nullptr}, {"alpha_hi_deg", nullptr}, {"n_alpha", nullptr}}},
      {"phasematch", {{"lambda_lo_nm", 500.0}, {"lambda_hi_nm", 1200.0}, {"points", 141}}},
      {"pert_flux",
       {{"method", "closed_form"}, {"lambda_lo_nm", 500.0}, {"lambda_hi_nm", 1200.0},
        {"points", 71}, {"tolerance", 0.01}, {"support_sigmas", 5.0},
        {"initial_points", 16}, {"max_points", 256}}},
      {"sweep", {{"command", "pert-flux"}, {"jobs", 1}, {"cells", default_matrix()}}},
      {"output_dir", "out"},
  };
}

void merge_checked(json& base, const json& overlay, const std::string& prefix) {
  if (!overlay.is_object()) {
    throw ConfigError((prefix.empty() ? std::string("config") : prefix) +
                      ": expected object, got " + type_name(overlay));
  }
  for (const auto& [key, value] : overlay.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw ConfigError(path + ": unknown key");
    json& target = base[key];
    if (target.is_object()) {
      merge_checked(target, value, path);
      continue;
    }
    const bool nullable = nullable_keys().count(path) > 0;
    if (value.is_null()) {
      if (!nullable) throw ConfigError(path + ": may not be null");
      target = value;
      continue;
    }
    if (integer_keys().count(path)) {
      if (!value.is_number_integer()) {
        throw ConfigError(path + ": expected integer, got " + type_name(value));
      }
    } else if (target.is_number() || (nullable && target.is_null())) {
      if (!value.is_number()) throw ConfigError(path + ": expected number, got " + type_name(value));
    } else if (target.is_string()) {
      if (!value.is_string()) throw ConfigError(path + ": expected string, got " + type_name(value));
    } else if (target.is_array()) {
      if (!value.is_array()) throw ConfigError(path + ": expected array, got " + type_name(value));
      if (path == "sweep.cells") check_cells(value, path);
    } else if (target.is_boolean()) {
      if (!value.is_boolean()) throw ConfigError(path + ": expected boolean, got " + type_name(value));
    }
    target = value;
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects KEY=VALUE, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json overlay = value;
  std::string::size_type end = key.size();
  while (true) {
    const auto dot = key.rfind('.', end - 1);
    const std::string part =
        key.substr(dot == std::string::npos ? 0 : dot + 1,
                   end - (dot == std::string::npos ? 0 : dot + 1));
    if (part.empty()) throw ConfigError("--set: malformed key '" + key + "'");
    overlay = json{{part, overlay}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  merge_checked(doc, overlay);
}

json read_json_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON at byte " + std::to_string(e.byte) +
                      ": " + e.what());
  }
}

std::filesystem::path locate_material(const std::string& name) {
  namespace fs = std::filesystem;
  if (name.find('/') != std::string::npos || fs::path(name).extension() == ".json") {
    if (!fs::exists(name)) throw ConfigError("crystal.material: file '" + name + "' not found");
    return name;
  }
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("PARFLUOR_DATA_DIR"); env && *env) dirs.emplace_back(env);
  if (*PARFLUOR_INSTALL_DATA_DIR) dirs.emplace_back(PARFLUOR_INSTALL_DATA_DIR);
  if (*PARFLUOR_SOURCE_DATA_DIR) dirs.emplace_back(PARFLUOR_SOURCE_DATA_DIR);
  for (const auto& d : dirs) {
    const fs::path p = d / "crystals" / (name + ".json");
    if (fs::exists(p)) return p;
  }
  throw ConfigError("crystal.material: no crystal file '" + name +
                    ".json' under $PARFLUOR_DATA_DIR or the installed data directory");
}

Material material_from_json(const json& j, const std::string& source) {
  const auto sellmeier = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_object()) {
      throw ConfigError(source + ": " + key + ": missing object");
    }
    SellmeierSet s;
    const json& o = j[key];
    for (const auto& [k, v] : o.items()) {
      if (k != "B0" && k != "B1" && k != "C1" && k != "B2") {
        throw ConfigError(source + ": " + key + "." + k + ": unknown key");
      }
      if (!v.is_number()) throw ConfigError(source + ": " + key + "." + k + ": expected number");
    }
    for (const char* k : {"B0", "B1", "C1", "B2"}) {
      if (!o.contains(k)) throw ConfigError(source + ": " + key + "." + k + ": missing");
    }
    s.b0 = o["B0"].get<double>();
    s.b1 = o["B1"].get<double>();
    s.c1 = o["C1"].get<double>();
    s.b2 = o["B2"].get<double>();
    return s;
  };
  if (!j.is_object()) throw ConfigError(source + ": expected object");
  for (const auto& [k, v] : j.items()) {
    if (k != "name" && k != "sellmeier_o" && k != "sellmeier_e" && k != "window_nm") {
      throw ConfigError(source + ": " + k + ": unknown key");
    }
  }
  Material m;
  m.name = j.value("name", std::string("unnamed"));
  m.ordinary = sellmeier("sellmeier_o");
  m.extraordinary = sellmeier("sellmeier_e");
  if (j.contains("window_nm")) {
    const json& w = j["window_nm"];
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
      throw ConfigError(source + ": window_nm: expected [lo, hi]");
    }
    m.window_lo_nm = w[0].get<double>();
    m.window_hi_nm = w[1].get<double>();
  }
  validated(source, [&] { m.validate(); });
  return m;
}

RunConfig resolve(const json& doc) {
  RunConfig c;
  c.document = doc;

  const std::string material = get<std::string>(doc, "crystal", "material");
  const auto material_path = locate_material(material);
  c.material_source = material_path.string();
  c.crystal.material = material_from_json(read_json_file(material_path), c.material_source);
  c.crystal.theta_cut = deg_to_rad(get<double>(doc, "crystal", "theta_deg"));
  c.crystal.length = 1e-3 * get<double>(doc, "crystal", "length_mm");
  const double pump_nm = get<double>(doc, "crystal", "pump_wavelength_nm");
  if (!(pump_nm > 0.0)) throw ConfigError("crystal.pump_wavelength_nm: must be positive");
  c.crystal.pump_center_omega = omega_from_wavelength(pump_nm * 1e-9);
  validated("crystal", [&] { c.crystal.validate(); });

  c.pump.tau = 1e-15 * get<double>(doc, "pump", "tau_fs");
  c.pump.width = 1e-6 * get<double>(doc, "pump", "width_um");
  c.pump.amplitude = get<double>(doc, "pump", "amplitude");
  c.pump.nonlinear_length = 1e-3 * get<double>(doc, "pump", "nonlinear_length_mm");
  c.pump.omega_center = c.crystal.pump_center_omega;
  validated("pump", [&] { c.pump.validate(); });

  c.grid.n_t = get<int>(doc, "grid", "n_t");
  c.grid.n_x = get<int>(doc, "grid", "n_x");
  c.grid.n_y = get<int>(doc, "grid", "n_y");
  c.grid.n_z = get<int>(doc, "grid", "n_z");
  c.grid.span_t = 1e-15 * get_opt(doc, "grid", "span_t_fs").value_or(8.0 * c.pump.tau * 1e15);
  c.grid.span_x = 1e-6 * get_opt(doc, "grid", "span_x_um").value_or(8.0 * c.pump.width * 1e6);
  c.grid.span_y = 1e-6 * get_opt(doc, "grid", "span_y_um").value_or(8.0 * c.pump.width * 1e6);
  c.grid.omega_center = c.crystal.degenerate_omega();

  c.ensemble.n_realizations = get<int>(doc, "ensemble", "realizations");
  const json& seed = doc.at("ensemble").at("seed");
  if (seed.is_number_integer() && seed.get<long long>() < 0 && !seed.is_number_unsigned()) {
    throw ConfigError("ensemble.seed: must be non-negative");
  }
  c.ensemble.seed = seed.get<std::uint64_t>();
  validated("ensemble", [&] { c.ensemble.validate(); });

  const json& w = doc.at("wigner");
  validated("wigner.estimator",
            [&] { c.run.estimator = estimator_from_string(w.at("estimator").get<std::string>()); });
  c.run.threads = w.at("threads").get<int>();
  c.run.batch = w.at("batch").get<int>();
  if (c.run.threads < 1) throw ConfigError("wigner.threads: must be at least 1");
  if (c.run.batch < 1) throw ConfigError("wigner.batch: must be at least 1");
  if (!w.at("target_photons").is_null()) {
    CalibrationSpec cal;
    cal.target_photons = w.at("target_photons").get<double>();
    cal.probe_realizations = w.at("probe_realizations").get<int>();
    cal.tolerance = w.at("tolerance").get<double>();
    cal.max_probes = w.at("max_probes").get<int>();
    cal.initial_gain = w.at("initial_gain").get<double>();
    validated("wigner", [&] { cal.validate(); });
    c.calibration = cal;
  }

  c.binning = BinningSpec::for_grid(c.grid);
  const json& b = doc.at("binning");
  if (!b.at("lambda_lo_nm").is_null()) c.binning.lambda_lo_nm = b.at("lambda_lo_nm").get<double>();
  if (!b.at("lambda_hi_nm").is_null()) c.binning.lambda_hi_nm = b.at("lambda_hi_nm").get<double>();
  if (!b.at("n_lambda").is_null()) c.binning.n_lambda = b.at("n_lambda").get<int>();
  if (!b.at("alpha_lo_deg").is_null()) c.binning.alpha_lo_deg = b.at("alpha_lo_deg").get<double>();
  if (!b.at("alpha_hi_deg").is_null()) c.binning.alpha_hi_deg = b.at("alpha_hi_deg").get<double>();
  if (!b.at("n_alpha").is_null()) c.binning.n_alpha = b.at("n_alpha").get<int>();

  const auto scan = [&](const char* section) {
    ScanOptions s;
    s.lambda_lo_nm = get<double>(doc, section, "lambda_lo_nm");
    s.lambda_hi_nm = get<double>(doc, section, "lambda_hi_nm");
    s.points = get<int>(doc, section, "points");
    const std::string p(section);
    if (s.points < 1) throw ConfigError(p + ".points: must be at least 1");
    if (!(s.lambda_lo_nm > 0.0) || !(s.lambda_hi_nm >= s.lambda_lo_nm)) {
      throw ConfigError(p + ".lambda_lo_nm: range must be positive and ascending");
    }
    return s;
  };
  c.phasematch = scan("phasematch");
  c.pert_flux = scan("pert_flux");

  const std::string method = get<std::string>(doc, "pert_flux", "method");
  if (method == "all") {
    c.methods = {FluxMethod::closed_form, FluxMethod::closed_form_printed, FluxMethod::exact,
                 FluxMethod::gaussianized};
  } else {
    validated("pert_flux.method", [&] { c.methods = {flux_method_from_string(method)}; });
  }
  c.quadrature.tolerance = get<double>(doc, "pert_flux", "tolerance");
  c.quadrature.support_sigmas = get<double>(doc, "pert_flux", "support_sigmas");
  c.quadrature.initial_points = get<int>(doc, "pert_flux", "initial_points");
  c.quadrature.max_points = get<int>(doc, "pert_flux", "max_points");
  if (c.quadrature.initial_points < 2 || c.quadrature.max_points < c.quadrature.initial_points ||
      !(c.quadrature.tolerance > 0.0) || !(c.quadrature.support_sigmas > 0.0)) {
    throw ConfigError("pert_flux: invalid quadrature settings");
  }

  c.sweep_command = get<std::string>(doc, "sweep", "command");
  if (c.sweep_command != "phasematch" && c.sweep_command != "pert-flux" &&
      c.sweep_command != "wigner") {
    throw ConfigError("sweep.command: expected phasematch, pert-flux or wigner");
  }
  c.jobs = get<int>(doc, "sweep", "jobs");
  if (c.jobs < 1) throw ConfigError("sweep.jobs: must be at least 1");
  for (const auto& cell : doc.at("sweep").at("cells")) {
    c.sweep_cells.push_back({cell.at("theta_deg").get<double>(), cell.at("tau_fs").get<double>(),
                             cell.at("width_um").get<double>()});
  }
  c.output_dir = doc.at("output_dir").get<std::string>();
  return c;
}

void validate_grid(const RunConfig& config) {
  validated("grid", [&] { config.grid.validate(config.crystal); });
  validated("binning", [&] { config.binning.validate(); });
}

json with_cell(const json& doc, const SweepCell& cell) {
  json d = doc;
  d["crystal"]["theta_deg"] = cell.theta_deg;
  d["pump"]["tau_fs"] = cell.tau_fs;
  d["pump"]["width_um"] = cell.width_um;
  return d;
}

}  // namespace parfluor::cli

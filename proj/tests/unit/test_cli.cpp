#include <unistd.h>

#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "parfluor/errors.hpp"
#include "parfluor_cli/commands.hpp"
#include "parfluor_cli/config.hpp"

using namespace parfluor;
using namespace parfluor::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("parfluor_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int invoke(std::vector<std::string> args, std::string* out_text = nullptr,
           std::string* err_text = nullptr) {
  args.insert(args.begin(), "parfluor");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

json load(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

TEST_CASE("default document resolves to the desk configuration") {
  const auto cfg = resolve(default_document());
  CHECK(cfg.crystal.length == doctest::Approx(2e-3));
  CHECK(cfg.pump.tau == doctest::Approx(60e-15));
  CHECK(cfg.grid.span_t == doctest::Approx(8 * 60e-15));
  CHECK(cfg.grid.span_x == doctest::Approx(8 * 80e-6));
  CHECK(cfg.ensemble.n_realizations == 10);
  CHECK(cfg.sweep_cells.size() == 12);
  CHECK(cfg.methods.size() == 1);
  CHECK(cfg.calibration.has_value());
  CHECK(cfg.calibration->target_photons == 1e6);
}

TEST_CASE("unknown keys and wrong types name the key") {
  json doc = default_document();
  try {
    merge_checked(doc, json::parse(R"({"pump": {"tau": 60}})"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("pump.tau") != std::string::npos);
  }
  try {
    merge_checked(doc, json::parse(R"({"grid": {"n_t": 12.5}})"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("grid.n_t") != std::string::npos);
  }
}

TEST_CASE("dotted overrides") {
  json doc = default_document();
  apply_override(doc, "crystal.theta_deg=35");
  apply_override(doc, "wigner.estimator=plain");
  apply_override(doc, "wigner.target_photons=null");
  const auto cfg = resolve(doc);
  CHECK(cfg.crystal.theta_cut == doctest::Approx(35 * 3.14159265358979 / 180));
  CHECK(cfg.run.estimator == Estimator::plain);
  CHECK_FALSE(cfg.calibration.has_value());
  CHECK_THROWS_AS(apply_override(doc, "crystal.theta_deg"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "crystal.nothing=1"), ConfigError);
}

TEST_CASE("invalid physical values are config errors") {
  json doc = default_document();
  doc["pump"]["tau_fs"] = -5.0;
  CHECK_THROWS_AS(resolve(doc), ConfigError);
  doc = default_document();
  doc["crystal"]["material"] = "no_such_crystal";
  CHECK_THROWS_AS(resolve(doc), ConfigError);
  doc = default_document();
  doc["pert_flux"]["method"] = "trapezoid";
  CHECK_THROWS_AS(resolve(doc), ConfigError);
  doc = default_document();
  doc["grid"]["n_x"] = 60;
  CHECK_THROWS_AS(validate_grid(resolve(doc)), ConfigError);
}

TEST_CASE("sweep cells override theta, tau and width") {
  const json doc = with_cell(default_document(), {40, 120, 160});
  const auto cfg = resolve(doc);
  CHECK(cfg.crystal.theta_cut == doctest::Approx(40 * 3.14159265358979 / 180));
  CHECK(cfg.pump.tau == doctest::Approx(120e-15));
  CHECK(cfg.pump.width == doctest::Approx(160e-6));
}

TEST_CASE("phasematch command writes CSV and manifest") {
  TempDir dir;
  std::string out;
  REQUIRE(invoke({"phasematch", "--out", dir.path.string(), "--set", "phasematch.points=11"},
                 &out) == kExitOk);
  CHECK(fs::exists(dir.path / "phasematch.csv"));
  const auto m = load(dir.path / "phasematch.manifest.json");
  CHECK(m["command"] == "phasematch");
  CHECK(m["config_hash"].get<std::string>().size() == 16);
  CHECK(m["rows"] == 11);
  CHECK(m.contains("version"));
  CHECK(m.contains("wall_seconds"));
  CHECK(out.find("phasematch.csv") != std::string::npos);
}

TEST_CASE("config file and flags compose") {
  TempDir dir;
  const auto cfg_path = dir.path / "c.json";
  std::ofstream(cfg_path) << R"({"crystal": {"theta_deg": 40}, "pert_flux": {"points": 3}})";
  REQUIRE(invoke({"pert-flux", "--config", cfg_path.string(), "--out", dir.path.string(),
                  "--method", "all", "--set", "pert_flux.lambda_lo_nm=600",
                  "--set", "pert_flux.lambda_hi_nm=700"}) == kExitOk);
  const auto m = load(dir.path / "pert_flux.manifest.json");
  CHECK(m["config"]["crystal"]["theta_deg"] == 40.0);
  CHECK(m["methods"].size() == 4);
  std::ifstream csv(dir.path / "pert_flux.csv");
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 12);
}

TEST_CASE("exit codes") {
  TempDir dir;
  std::string err;
  CHECK(invoke({}, nullptr, &err) == kExitConfig);
  CHECK(invoke({"phasematch", "--set", "crystal.bogus=1"}, nullptr, &err) == kExitConfig);
  CHECK(err.find("crystal.bogus") != std::string::npos);
  CHECK(invoke({"phasematch", "--config", (dir.path / "missing.json").string()}) == kExitConfig);
  std::ofstream(dir.path / "bad.json") << "{ not json";
  CHECK(invoke({"phasematch", "--config", (dir.path / "bad.json").string()}) == kExitConfig);
  CHECK(invoke({"--help"}) == kExitOk);
  // no phase matching anywhere at 400 nm pump for a 5 degree cut is fine:
  // empty rows, not an error
  CHECK(invoke({"phasematch", "--out", dir.path.string(), "--set", "crystal.theta_deg=5",
                "--set", "phasematch.points=3"}) == kExitOk);
}

TEST_CASE("sweep writes one directory per cell and reports partial failure") {
  TempDir dir;
  const auto cfg_path = dir.path / "sweep.json";
  std::ofstream(cfg_path) << R"({
    "phasematch": {"points": 3},
    "sweep": {"command": "phasematch", "jobs": 2,
              "cells": [{"theta_deg": 29, "tau_fs": 60, "width_um": 80},
                        {"theta_deg": 35, "tau_fs": 60, "width_um": 80},
                        {"theta_deg": 95, "tau_fs": 60, "width_um": 80}]}
  })";
  std::string err;
  CHECK(invoke({"sweep", "--config", cfg_path.string(), "--out", dir.path.string()}, nullptr,
               &err) == kExitPartial);
  const auto index = load(dir.path / "index.json");
  REQUIRE(index["cells"].size() == 3);
  CHECK(index["cells"][0]["status"] == "ok");
  CHECK(index["cells"][1]["status"] == "ok");
  CHECK(index["cells"][2]["status"] == "failed");
  CHECK(index["failed"] == 1);
  CHECK(fs::exists(dir.path / index["cells"][0]["dir"].get<std::string>() / "phasematch.csv"));
  CHECK(err.find("cell 2") != std::string::npos);
}

TEST_CASE("wigner and calibrate commands on a small grid") {
  TempDir dir;
  const std::vector<std::string> small = {
      "--set", "grid.n_t=16", "--set", "grid.n_x=8", "--set", "grid.n_y=8",
      "--set", "grid.n_z=20", "--realizations", "3", "--out", dir.path.string()};
  auto args = small;
  args.insert(args.begin(), "wigner");
  args.insert(args.end(), {"--set", "wigner.target_photons=null", "--seed", "7"});
  REQUIRE(invoke(args) == kExitOk);
  const auto m = load(dir.path / "flux_map.manifest.json");
  CHECK(m["seed"] == 7);
  CHECK(m["realizations"] == 3);
  CHECK(m["total_photons"].is_number());
  CHECK(fs::exists(dir.path / "flux_map.csv"));
  CHECK(fs::exists(dir.path / "flux_map.pgm"));

  args = small;
  args.insert(args.begin(), "calibrate");
  args.insert(args.end(), {"--target-photons", "20"});
  REQUIRE(invoke(args) == kExitOk);
  const auto cal = load(dir.path / "calibration.json");
  CHECK(cal["achieved_total"].get<double>() == doctest::Approx(20).epsilon(0.2));
}

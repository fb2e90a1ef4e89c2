#pragma once

// Scenario configuration: a JSON key tree with desk/full presets, dotted
// key=value overrides, and the typed view the experiments run from.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmaloc/beamopt.hpp"
#include "dmaloc/channel.hpp"
#include "dmaloc/fim.hpp"
#include "dmaloc/geometry.hpp"
#include "dmaloc/simloc.hpp"

namespace dmaloc {

enum class Scale { kDesk, kFull };

Scale parse_scale(const std::string& name);

// Complete default key tree for a scale.
nlohmann::json preset(Scale scale);

// Recursive merge; objects merge key by key, everything else replaces.
void merge_config(nlohmann::json& base, const nlohmann::json& patch);

// "a.b.c=value". The value is parsed as JSON when it parses (numbers, bools,
// arrays), otherwise taken as a string. Unknown keys are rejected.
void apply_override(nlohmann::json& doc, const std::string& assignment);

nlohmann::json load_config_file(const std::string& path);

struct PanelSpec {
  int n_rf = 4;
  int n_e = 32;
  double d_rf_wavelengths = 0.5;
  double d_e_wavelengths = 0.2;
  double alpha_wg = 0.0;           // 1/m
  double beta_wg_per_k0 = 1.0;     // waveguide wavenumber in units of 2 pi / lambda
};

struct CodebookSpec {
  int bits = 3;
  double r_min = 1.0, r_max = 12.0;
  int n_ranges = 12;
  double phi_min = 0.0, phi_max = 0.0;  // radians
  int n_azimuths = 16;
  double theta = 0.0;
};

struct SolverSpec {
  Solver solver = Solver::kProjection;
  bool distinct = false;
  LiftMode lift = LiftMode::kUnitModulus;
  int phase_search = 64;
  double work_cap = 1e7;
};

struct Fig2Spec {
  std::vector<double> powers_dbm;
  std::vector<Solver> solvers;
};

struct Fig3Spec {
  std::vector<double> diagonals_m;
  double p_max_dbm = -4.0;
  std::vector<Solver> solvers;
  double hbf_d_e_wavelengths = 0.5;
};

struct Fig4Spec {
  double p_max_dbm = 20.0;
  std::vector<Solver> solvers;
  EstimationGrid map;
  int seeds = 20;
  int repeats = 1;
};

struct ScenarioConfig {
  RadioConfig radio;
  PanelSpec panel;
  std::vector<UePosition> ues;
  int pilot_length = 100;
  double p_max_dbm = 20.0;
  PilotMode pilot_mode = PilotMode::kOrthogonal;
  CodebookSpec codebook;
  SolverSpec solver;
  int trials = 50;
  std::uint64_t master_seed = 1;
  EstimationGrid grid;
  MleOptions mle;
  Fig2Spec fig2;
  Fig3Spec fig3;
  Fig4Spec fig4;
  int threads = 1;

  nlohmann::json source;  // the resolved key tree this was parsed from

  DmaGeometry geometry() const;
  ArrayModel array_model() const;
  std::vector<UePosition> codebook_focal_points() const;
};

// Throws ConfigError naming the offending key.
ScenarioConfig parse_config(const nlohmann::json& doc);

// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace dmaloc

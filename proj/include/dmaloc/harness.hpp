#pragma once

// Monte Carlo experiments over a ScenarioConfig and their CSV/JSON output.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dmaloc/beamopt.hpp"
#include "dmaloc/config.hpp"
#include "dmaloc/simloc.hpp"

namespace dmaloc {

inline constexpr const char* kVersion = "0.1.0";

struct Record {
  double sweep = 0.0;
  std::string solver;
  std::string metric;
  double value = 0.0;
  double std = 0.0;
};

struct MapPayload {
  std::string solver;
  int seed_index = 0;
  EstimationGrid map;
  Eigen::MatrixXd errors;  // map.ranges x map.azimuths
};

struct ExperimentResult {
  std::string experiment;
  std::vector<Record> records;  // sorted by sweep value
  std::vector<MapPayload> maps;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::map<std::string, double> timing_s;  // wall time per solver call, summed
  std::vector<std::string> notices;

  // First record matching (sweep, solver, metric); throws std::out_of_range.
  const Record& find(double sweep, const std::string& solver, const std::string& metric) const;
};

// Runs body(i) for i in [0, n) on up to `threads` workers. Results must be
// written to per-index slots; the first exception (lowest index) is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

// Beamformer for the given channels (with derivatives) under the solver spec.
BeamformerSolution design_beamformer(Solver solver, const SolverSpec& spec, const std::vector<NearFieldChannel>& channels,
                                     const PropagationMatrix& prop, const VectorCodebook& cb, std::uint64_t seed);

std::vector<NearFieldChannel> channels_with_derivatives(const ArrayModel& model, const std::vector<UePosition>& ues);

ExperimentResult run_fig2(const ScenarioConfig& cfg);
ExperimentResult run_fig3(const ScenarioConfig& cfg);
ExperimentResult run_fig4(const ScenarioConfig& cfg);

// Nearest map node to a position, as (range index, azimuth index).
std::pair<int, int> nearest_cell(const EstimationGrid& map, const UePosition& ue);
// True when some cell within Chebyshev distance `radius` of (row, col) is no
// larger than any of its eight neighbours.
bool has_local_minimum_near(const Eigen::MatrixXd& surface, int row, int col, int radius = 1);

std::string records_csv(const ExperimentResult& result);
std::string maps_csv(const ExperimentResult& result);
// Sidecar: config, hashes, seed, version, timing, notices; records included
// when `with_records`.
nlohmann::json result_json(const ExperimentResult& result, bool with_records);

enum class OutputFormat { kCsv, kJson };
OutputFormat parse_format(const std::string& name);

// Writes <dir>/<experiment>.csv (+ _map.csv) and <dir>/<experiment>.json for
// kCsv, or only the JSON for kJson. Returns the written paths.
std::vector<std::string> emit(const ExperimentResult& result, OutputFormat format, const std::string& dir);

}  // namespace dmaloc

#pragma once

// Pilot reception, grid maximum-likelihood localization and error scoring.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dmaloc/channel.hpp"
#include "dmaloc/codebook.hpp"
#include "dmaloc/fim.hpp"
#include "dmaloc/geometry.hpp"

namespace dmaloc {

// Radio, panel and the propagation matrix derived from the panel.
struct ArrayModel {
  RadioConfig radio;
  DmaGeometry geom;
  PropagationMatrix prop;

  static ArrayModel make(const RadioConfig& radio, const DmaGeometry& geom);
};

struct ReceivedBlock {
  Eigen::MatrixXcd y;  // N_RF x T
  std::uint64_t noise_seed = 0;
  double noise_power_mw = 0.0;
};

// Y = W^H P^H (sum_u conj(h_u) s_u + N) with N an N x T matrix of i.i.d.
// CN(0, sigma^2) entries drawn from `seed`.
ReceivedBlock synthesize_rx(const std::vector<NearFieldChannel>& channels, const AnalogBeamformer& bf,
                            const PropagationMatrix& prop, const PilotBlock& pilots, double noise_power_mw,
                            std::uint64_t seed);

struct EstimationGrid {
  std::vector<double> ranges;      // meters, strictly increasing
  std::vector<double> azimuths;    // radians, strictly increasing
  std::vector<double> elevations;  // radians, strictly increasing; one entry when theta is known

  // Inclusive evenly spaced axes.
  static EstimationGrid uniform(double r_min, double r_max, double r_step, double phi_min, double phi_max,
                                double phi_step, std::vector<double> elevations);

  std::size_t size() const { return ranges.size() * azimuths.size() * elevations.size(); }
  // Cell order: elevation slowest, then range, azimuth fastest.
  UePosition cell(std::size_t k) const;
  std::size_t index(std::size_t ir, std::size_t iphi, std::size_t itheta = 0) const {
    return (itheta * ranges.size() + ir) * azimuths.size() + iphi;
  }
  void validate() const;
};

// p o h for every grid cell; independent of the beamformer.
struct GridDictionary {
  EstimationGrid grid;
  Eigen::MatrixXcd responses;  // N x cells

  static GridDictionary build(const ArrayModel& model, const EstimationGrid& grid);
};

enum class MleStatistic {
  kCorrelation,  // |a|^2 / q: unknown complex gain
  kAmplitude,    // 2|a| - q: known amplitude, unknown carrier phase
  kCoherent,     // 2 Re(a) - q: fully known channel
};

struct MleOptions {
  MleStatistic statistic = MleStatistic::kAmplitude;
  // Gauss-Newton refinement from the winning cell, confined to two grid steps
  // around it. The final stage uses the model matching the statistic's
  // knowledge, except kAmplitude which hands over to the coherent model once
  // the carrier phase is locked. Coherent fits also restart one and two
  // carrier wavelengths out in range and keep the lowest residual.
  bool polish = true;
  bool polish_elevation = false;
  int max_iterations = 40;
  bool keep_surface = false;
};

struct LocalizationResult {
  std::vector<UePosition> estimates;
  std::vector<std::size_t> cells;  // winning grid cell per UE
  // Optional: per UE, negative statistic over (range x azimuth) at the first
  // elevation.
  std::vector<Eigen::MatrixXd> surfaces;
  int skipped_cells = 0;  // zero-signature cells ignored
};

LocalizationResult mle_estimate(const ReceivedBlock& rx, const AnalogBeamformer& bf, const ArrayModel& model,
                                const PilotBlock& pilots, const GridDictionary& dict, const MleOptions& opts = {});

double cartesian_error(const UePosition& estimate, const UePosition& truth);

// Root mean square Cartesian error over all trials and UEs; truth is shared
// by every trial.
double rmse(const std::vector<LocalizationResult>& results, const std::vector<UePosition>& truth);

struct ErrorMapOptions {
  int repeats = 1;  // noise draws per cell; the cell value is their RMS error
  double p_max_mw = 100.0;
  int pilot_length = 100;
};

// Cartesian MLE error with a single UE placed at each (range, azimuth) node of
// `map` (first elevation). Rows follow map.ranges, columns map.azimuths.
Eigen::MatrixXd error_map(const ArrayModel& model, const AnalogBeamformer& bf, const EstimationGrid& map,
                          const GridDictionary& dict, const MleOptions& mle, const ErrorMapOptions& opts,
                          std::uint64_t seed);

}  // namespace dmaloc

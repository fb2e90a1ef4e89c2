#pragma once

// Lorentzian-constrained metamaterial weights and the per-microstrip vector
// codebooks the beamformer solvers select from.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "dmaloc/channel.hpp"
#include "dmaloc/geometry.hpp"

namespace dmaloc {

// 0.5 (j + e^{j phase}); lies on the circle of radius 0.5 centred at 0.5j.
struct LorentzianWeight {
  std::complex<double> value;
  double phase = 0.0;
};

// Weight after in-waveguide phase compensation. `clamped` is set when the
// combined phase left [-pi/2, pi/2] and was pinned to the nearest endpoint.
struct CompensatedWeight {
  std::complex<double> value;
  double phase = 0.0;
  bool clamped = false;
};

// Throws ConfigError when `phase` lies outside [-pi/2, pi/2].
LorentzianWeight lorentzian(double phase);

// Distance of a weight from the Lorentzian circle, ||w - 0.5j| - 0.5|.
double lorentzian_violation(std::complex<double> w);

// 2^bits phases spanning [-pi/2, pi/2] with inclusive endpoints.
std::vector<double> quantized_phase_set(int bits);

// Wraps an angle into [-pi, pi).
double wrap_phase(double phase);

CompensatedWeight compensated_weight(double phase, double rho, double beta);

enum class WeightModel { kLorentzian, kPhaseShifter };

struct VectorCodebook {
  WeightModel model = WeightModel::kLorentzian;
  int bits = 0;  // 0 for phase-shifter codebooks
  int reference_microstrip = 0;  // 0-based microstrip the focusing beams were cut from
  std::vector<UePosition> focal_grid;
  std::vector<Eigen::VectorXcd> entries;
  int clamped_elements = 0;

  std::size_t size() const { return entries.size(); }
  int n_e() const { return entries.empty() ? 0 : static_cast<int>(entries.front().size()); }
};

// Range x azimuth focal grid at a fixed elevation; ranges and azimuths are
// evenly spaced including both endpoints.
std::vector<UePosition> focal_grid(double r_min, double r_max, int n_ranges, double phi_min, double phi_max,
                                   int n_azimuths, double theta);

// Quantized near-field focusing beams, one per focal point, deduplicated and
// sorted so the result does not depend on focal-grid order. Throws
// ConfigError on an empty grid or bits < 1.
VectorCodebook build_codebook(const DmaGeometry& geom, const RadioConfig& cfg, std::vector<UePosition> focal_points,
                              int bits);

// Unit-modulus columns of the n_e-point DFT matrix (phase-shifter arrays).
VectorCodebook dft_codebook(int n_e);

nlohmann::json codebook_to_json(const VectorCodebook& cb);
VectorCodebook codebook_from_json(const nlohmann::json& doc);

// Block-diagonal analog combiner: one weight vector per microstrip.
struct AnalogBeamformer {
  int n_e = 0;
  std::vector<Eigen::VectorXcd> weights;

  int n_rf() const { return static_cast<int>(weights.size()); }
  // Dense N x N_RF matrix W_RX.
  Eigen::MatrixXcd dense() const;

  static AnalogBeamformer from_codebook(const VectorCodebook& cb, const std::vector<int>& indices);
  static AnalogBeamformer constant(int n_rf, int n_e, std::complex<double> value);
};

nlohmann::json beamformer_to_json(const AnalogBeamformer& bf);

}  // namespace dmaloc

#pragma once

// Fisher information for the stacked UE position parameters
// zeta = [r_1, theta_1, phi_1, ..., r_U, theta_U, phi_U], the CRB/PEB derived
// from it, and the harmonic-mean lower bound on the CRB used as the design
// objective.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dmaloc/channel.hpp"
#include "dmaloc/codebook.hpp"

namespace dmaloc {

enum class PilotMode { kOrthogonal, kRandomQpsk, kCustom };

// Which side of the received-signal model carries the complex conjugate.
//   kConjugatedChannel:     Y = W^H P^H sum_u conj(h_u) s_u + W^H P^H N
//   kConjugatedObservation: the element-wise conjugate of the above
// Both describe the same experiment, so the FIM is identical.
enum class ObservationModel { kConjugatedChannel, kConjugatedObservation };

struct PilotBlock {
  PilotMode mode = PilotMode::kOrthogonal;
  double p_max_mw = 1.0;
  Eigen::MatrixXcd sequences;  // U x T

  int n_ue() const { return static_cast<int>(sequences.rows()); }
  int length() const { return static_cast<int>(sequences.cols()); }

  // G(u, v) = sum_t conj(s_u(t)) s_v(t). Orthogonal blocks return their
  // design value T * P_max * I; other modes sum the sequences.
  Eigen::MatrixXcd gram() const;
  Eigen::MatrixXcd empirical_gram() const;

  // Copy with every sample scaled by sqrt(factor), i.e. P_max * factor.
  PilotBlock with_power(double p_max_mw) const;
};

// Orthogonal mode: DFT rows sqrt(P) exp(j 2 pi u t / T), requires T >= U.
// Random mode: i.i.d. unit-power QPSK scaled by sqrt(P).
PilotBlock make_pilots(int n_ue, int length, double p_max_mw, PilotMode mode, std::uint64_t seed = 0);
PilotBlock custom_pilots(Eigen::MatrixXcd sequences, double p_max_mw);

// Diagonal of R_n: sigma^2 ||w_i o p_i||^2 per RF chain. Throws
// SingularCovariance for a dark microstrip.
Eigen::VectorXd noise_covariance(const AnalogBeamformer& bf, const PropagationMatrix& prop, double noise_power_mw);

struct FimResult {
  Eigen::MatrixXd fim;  // 3U x 3U, real symmetric
  // Filled by peb():
  double crb = 0.0;
  double peb = 0.0;
  double trace_bound = 0.0;
  Eigen::VectorXd per_param_crb;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double condition = 0.0;
  bool bounds_ready = false;

  int n_params() const { return static_cast<int>(fim.rows()); }
};

struct FimOptions {
  ObservationModel model = ObservationModel::kConjugatedChannel;
};

FimResult fim_matrix(const std::vector<NearFieldChannel>& channels, const AnalogBeamformer& bf,
                     const PropagationMatrix& prop, const PilotBlock& pilots, double noise_power_mw,
                     const FimOptions& opts = {});

// Tr{FIM^-1} via a symmetric eigendecomposition; fills the bound fields and
// returns sqrt(Tr{FIM^-1}). Throws UnidentifiableConfiguration when the FIM is
// not positive definite or its condition number exceeds `condition_cap`.
double peb(FimResult& result, double condition_cap = 1e12);

// (3U)^2 / Tr{FIM}. Never exceeds Tr{FIM^-1}. Throws NumericalError on a
// non-positive trace.
double trace_bound(const Eigen::MatrixXd& fim);

// Position error bound after mapping each UE's (r, theta, phi) block to
// Cartesian meters. Not part of the mixed-unit bound above.
double cartesian_peb(const FimResult& result, const std::vector<UePosition>& ues, double condition_cap = 1e12);

// "r_2", "theta_1", ... for 0-based parameter index.
std::string param_name(int index);

}  // namespace dmaloc

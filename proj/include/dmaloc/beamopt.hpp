#pragma once

// Analog weight design for the DMA. Maximizing Tr{FIM} separates across
// microstrips into quotients w_i^H Q_i w_i / ||w_i o p_i||^2 where Q_i is
// the i-th diagonal block of Q = sum_u (a_u a_u^H + b_u b_u^H + c_u c_u^H).
// Every solver here selects per-microstrip codewords from a VectorCodebook.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dmaloc/channel.hpp"
#include "dmaloc/codebook.hpp"

namespace dmaloc {

struct ObjectiveMatrix {
  int n_rf = 0;
  int n_e = 0;
  // N x 3U; column 3u + a is P^H conj(dh_u / d zeta_a). Q = G G^H.
  Eigen::MatrixXcd generators;
  // Scalar removed from Tr{FIM} (2 T P_max / sigma^2); argmax-invariant.
  double factored_scale = 1.0;
  // Diagonal of P_RX; the noise at RF chain i scales with ||w_i o p_i||^2.
  Eigen::VectorXcd guide;

  Eigen::MatrixXcd dense() const;
  Eigen::MatrixXcd block(int i) const;  // Q_i, N_E x N_E
  // Rows of the generators belonging to microstrip i.
  Eigen::Block<const Eigen::MatrixXcd> block_generators(int i) const {
    return generators.middleRows(static_cast<Eigen::Index>(i) * n_e, n_e);
  }
  Eigen::VectorXcd::ConstSegmentReturnType block_guide(int i) const {
    return guide.segment(static_cast<Eigen::Index>(i) * n_e, n_e);
  }
  int rank_bound() const { return static_cast<int>(generators.cols()); }
};

ObjectiveMatrix objective_matrix(const std::vector<NearFieldChannel>& channels, const PropagationMatrix& prop);

// w^H Q_i w / ||w o p_i||^2 evaluated through the low-rank generators.
double block_quotient(const ObjectiveMatrix& q, int i, const Eigen::VectorXcd& w);
// Sum of block quotients.
double separable_objective(const ObjectiveMatrix& q, const AnalogBeamformer& bf);

struct RayleighSolution {
  Eigen::VectorXcd vector;  // unit norm, first non-negligible entry real positive
  double value = 0.0;       // largest eigenvalue
  double gap = 0.0;         // largest minus second largest
  bool tie = false;         // top eigenvalue (numerically) repeated
};

// Principal eigenpair of a Hermitian block.
RayleighSolution rayleigh_opt(const Eigen::MatrixXcd& block);
// Same result for Q_i = G G^H through the small Gram matrix G^H G.
RayleighSolution rayleigh_opt_factored(const Eigen::MatrixXcd& generators);
// Maximizer of block_quotient(q, i, .): the principal eigenvector of
// D^-1/2 Q_i D^-1/2 with D = diag|p_i|^2, mapped back through D^-1/2 and
// renormalized. `value` is the largest attainable quotient.
RayleighSolution block_rayleigh(const ObjectiveMatrix& q, int i);

// 0.5 (j 1 + q)
Eigen::VectorXcd lorentzian_lift(const Eigen::VectorXcd& q);
// 0.5 (j 1 + e^{j arg q}): every entry on the Lorentzian circle. Zero entries
// take phase 0.
Eigen::VectorXcd unit_modulus_lift(const Eigen::VectorXcd& q);

// sqrt(1 - |w^H w_bar| / (||w|| ||w_bar||)); throws ConfigError on a zero vector.
double codebook_distance(const Eigen::VectorXcd& w, const Eigen::VectorXcd& w_bar);

enum class Solver { kProjection, kGreedy, kExhaustive, kAssignment, kRandom, kSnrMax };

std::string solver_name(Solver s);
Solver parse_solver(const std::string& name);

struct BeamformerSolution {
  AnalogBeamformer beamformer;
  double objective = 0.0;
  Solver solver = Solver::kProjection;
  std::vector<int> codewords;             // selected codebook index per microstrip
  std::vector<double> block_quotients;
  std::vector<double> eigen_gaps;         // projection only
  std::vector<bool> ties;                 // projection only
  std::vector<double> objective_trace;    // greedy: objective after each drawn codeword
};

// Quotient of every codeword on every block: B(i, c).
Eigen::MatrixXd benefit_matrix(const ObjectiveMatrix& q, const VectorCodebook& cb);

// kNone projects the eigenvector itself; used for phase-shifter codebooks,
// which carry no Lorentzian offset.
enum class LiftMode { kLiteral, kUnitModulus, kNone };

struct ProjectionOptions {
  bool distinct = false;
  LiftMode lift = LiftMode::kUnitModulus;
  // The principal eigenvector is defined up to a global phase that the lift
  // does not ignore. Rotations e^{j 2 pi k / K}, k < K, are tried and the one
  // whose lift lands closest to the codebook wins. K = 1 keeps the phase-fixed
  // eigenvector.
  int phase_search = 64;
};

BeamformerSolution solve_projection(const ObjectiveMatrix& q, const VectorCodebook& cb,
                                    const ProjectionOptions& opts = {});

BeamformerSolution solve_greedy(const ObjectiveMatrix& q, const VectorCodebook& cb, std::uint64_t seed);

struct ExhaustiveOptions {
  bool distinct = true;
  // Maximum number of codeword quotient evaluations.
  double work_cap = 1e7;
};

// Global optimum of the separable objective. Without distinctness this is the
// per-block argmax; with it, an optimal assignment on the benefit matrix.
// Throws WorkCapExceeded when N_RF * N_W exceeds the cap.
BeamformerSolution solve_exhaustive(const ObjectiveMatrix& q, const VectorCodebook& cb,
                                    const ExhaustiveOptions& opts = {});

// Received-pilot-power baseline: per microstrip the codeword maximizing
// sum_u |w^T (p_i o h_{u,i})|^2 / ||w o p_i||^2. Objective reported under q.
BeamformerSolution solve_snr_max(const std::vector<NearFieldChannel>& channels, const PropagationMatrix& prop,
                                 const VectorCodebook& cb, const ObjectiveMatrix& q);

// Uniform i.i.d. codeword per microstrip.
BeamformerSolution solve_random(const VectorCodebook& cb, int n_rf, std::uint64_t seed, const ObjectiveMatrix& q);

}  // namespace dmaloc

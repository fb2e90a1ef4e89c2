#include "dmaloc/beamopt.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>

#include "dmaloc/assignment.hpp"
#include "dmaloc/errors.hpp"
#include "dmaloc/kernels.hpp"
#include "dmaloc/rng.hpp"
#include "dmaloc/units.hpp"

namespace dmaloc {

using cd = std::complex<double>;

namespace {

std::span<const cd> view(const Eigen::VectorXcd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

constexpr double kTieTolerance = 1e-10;

// First entry above the noise floor made real positive.
void fix_phase(Eigen::VectorXcd& v) {
  const double floor = 1e-12 * v.norm();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double mag = std::abs(v[k]);
    if (mag > floor) {
      v *= std::conj(v[k]) / mag;
      v[k] = cd(std::abs(v[k]), 0.0);
      return;
    }
  }
}

// Canonical unit vector inside span(basis) (orthonormal columns): the
// projection of the first standard basis vector with a non-negligible
// component.
Eigen::VectorXcd canonical_in_span(const Eigen::MatrixXcd& basis) {
  const Eigen::Index n = basis.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXcd proj = basis * basis.row(j).adjoint();
    const double len = proj.norm();
    if (len > 1e-6) return proj / len;
  }
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
  e[0] = 1.0;
  return e;
}

}  // namespace

Eigen::MatrixXcd ObjectiveMatrix::dense() const { return generators * generators.adjoint(); }

Eigen::MatrixXcd ObjectiveMatrix::block(int i) const {
  const auto g = block_generators(i);
  return g * g.adjoint();
}

ObjectiveMatrix objective_matrix(const std::vector<NearFieldChannel>& channels, const PropagationMatrix& prop) {
  ObjectiveMatrix q;
  q.n_rf = prop.n_rf;
  q.n_e = prop.n_e;
  const Eigen::Index n = prop.diag.size();
  q.generators.resize(n, static_cast<Eigen::Index>(3 * channels.size()));
  for (std::size_t u = 0; u < channels.size(); ++u) {
    const NearFieldChannel& ch = channels[u];
    if (!ch.has_derivatives) throw ConfigError("objective matrix needs channel derivatives");
    if (ch.h.size() != n) throw ConfigError("channel length does not match the panel");
    for (int a = 0; a < 3; ++a) {
      q.generators.col(static_cast<Eigen::Index>(3 * u + a)) =
          (prop.diag.array() * ch.derivative(a).array()).conjugate().matrix();
    }
  }
  q.guide = prop.diag;
  return q;
}

double block_quotient(const ObjectiveMatrix& q, int i, const Eigen::VectorXcd& w) {
  const std::size_t ne = static_cast<std::size_t>(q.n_e);
  if (q.guide.size() != q.generators.rows()) throw ConfigError("objective matrix has no propagation diagonal");
  const cd* p = q.guide.data() + static_cast<Eigen::Index>(i) * q.n_e;
  const double wn = kernels::hadamard_norm2(view(w), {p, ne});
  if (!(wn > 0.0)) throw ConfigError("Rayleigh quotient of a zero vector");
  double acc = 0.0;
  const Eigen::Index rows = q.generators.rows();
  for (Eigen::Index m = 0; m < q.generators.cols(); ++m) {
    const cd* g = q.generators.data() + m * rows + static_cast<Eigen::Index>(i) * q.n_e;
    acc += std::norm(kernels::dotc({g, ne}, view(w)));
  }
  return acc / wn;
}

double separable_objective(const ObjectiveMatrix& q, const AnalogBeamformer& bf) {
  double total = 0.0;
  for (int i = 0; i < bf.n_rf(); ++i) total += block_quotient(q, i, bf.weights[static_cast<std::size_t>(i)]);
  return total;
}

RayleighSolution rayleigh_opt(const Eigen::MatrixXcd& block) {
  if (block.rows() != block.cols() || block.rows() == 0) throw ConfigError("Rayleigh block must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const Eigen::Index n = ev.size();
  RayleighSolution sol;
  sol.value = ev[n - 1];
  sol.gap = n > 1 ? ev[n - 1] - ev[n - 2] : sol.value;
  const double tol = kTieTolerance * std::max(std::abs(sol.value), 1e-300);
  Eigen::Index first_top = n - 1;
  while (first_top > 0 && sol.value - ev[first_top - 1] <= tol) --first_top;
  if (first_top < n - 1) {
    sol.tie = true;
    sol.vector = canonical_in_span(es.eigenvectors().rightCols(n - first_top));
  } else {
    sol.vector = es.eigenvectors().col(n - 1);
  }
  fix_phase(sol.vector);
  return sol;
}

RayleighSolution rayleigh_opt_factored(const Eigen::MatrixXcd& generators) {
  const Eigen::Index n = generators.rows();
  const Eigen::Index m = generators.cols();
  if (n == 0) throw ConfigError("Rayleigh block must be non-empty");
  RayleighSolution sol;
  if (m == 0 || generators.norm() == 0.0) {
    sol.tie = n > 1;
    sol.vector = Eigen::VectorXcd::Zero(n);
    sol.vector[0] = 1.0;
    return sol;
  }
  const Eigen::MatrixXcd gram = generators.adjoint() * generators;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  sol.value = ev[m - 1];
  // Q has n - rank(G) further zero eigenvalues.
  const double second = m > 1 ? std::max(ev[m - 2], 0.0) : 0.0;
  sol.gap = n > 1 ? sol.value - second : sol.value;
  const double tol = kTieTolerance * std::max(std::abs(sol.value), 1e-300);
  Eigen::Index first_top = m - 1;
  while (first_top > 0 && sol.value - ev[first_top - 1] <= tol) --first_top;
  const Eigen::Index top_count = m - first_top;
  if (top_count > 1 || (n > 1 && sol.value - second <= tol && m == 1)) {
    sol.tie = true;
    Eigen::MatrixXcd basis = generators * es.eigenvectors().rightCols(top_count);
    for (Eigen::Index c = 0; c < basis.cols(); ++c) basis.col(c) /= std::sqrt(ev[first_top + c]);
    sol.vector = canonical_in_span(basis);
  } else {
    sol.vector = generators * es.eigenvectors().col(m - 1);
    sol.vector /= sol.vector.norm();
  }
  fix_phase(sol.vector);
  return sol;
}

RayleighSolution block_rayleigh(const ObjectiveMatrix& q, int i) {
  if (q.guide.size() != q.generators.rows()) throw ConfigError("objective matrix has no propagation diagonal");
  const Eigen::VectorXd scale = q.block_guide(i).cwiseAbs().cwiseInverse();
  if (!scale.allFinite()) throw SingularCovariance("microstrip " + std::to_string(i) + " has a dark element");
  RayleighSolution sol = rayleigh_opt_factored(scale.asDiagonal() * q.block_generators(i));
  sol.vector = scale.asDiagonal() * sol.vector;
  sol.vector /= sol.vector.norm();
  fix_phase(sol.vector);
  return sol;
}

Eigen::VectorXcd lorentzian_lift(const Eigen::VectorXcd& q) {
  return 0.5 * (Eigen::VectorXcd::Constant(q.size(), cd(0.0, 1.0)) + q);
}

Eigen::VectorXcd unit_modulus_lift(const Eigen::VectorXcd& q) {
  Eigen::VectorXcd out(q.size());
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    const double mag = std::abs(q[k]);
    out[k] = 0.5 * (cd(0.0, 1.0) + (mag > 0.0 ? q[k] / mag : cd(1.0, 0.0)));
  }
  return out;
}

double codebook_distance(const Eigen::VectorXcd& w, const Eigen::VectorXcd& w_bar) {
  if (w.size() != w_bar.size()) throw ConfigError("codebook distance needs equal lengths");
  const double nw = std::sqrt(kernels::norm2(view(w)));
  const double nb = std::sqrt(kernels::norm2(view(w_bar)));
  if (!(nw > 0.0) || !(nb > 0.0)) throw ConfigError("codebook distance of a zero vector");
  const double corr = std::abs(kernels::dotc(view(w), view(w_bar))) / (nw * nb);
  return std::sqrt(std::max(0.0, 1.0 - corr));
}

std::string solver_name(Solver s) {
  switch (s) {
    case Solver::kProjection:
      return "projection";
    case Solver::kGreedy:
      return "greedy";
    case Solver::kExhaustive:
      return "exhaustive";
    case Solver::kAssignment:
      return "assignment";
    case Solver::kRandom:
      return "random";
    case Solver::kSnrMax:
      return "snr_max";
  }
  return "unknown";
}

Solver parse_solver(const std::string& name) {
  for (Solver s : {Solver::kProjection, Solver::kGreedy, Solver::kExhaustive, Solver::kAssignment, Solver::kRandom,
                   Solver::kSnrMax}) {
    if (solver_name(s) == name) return s;
  }
  throw ConfigError("unknown solver '" + name + "'");
}

Eigen::MatrixXd benefit_matrix(const ObjectiveMatrix& q, const VectorCodebook& cb) {
  if (cb.n_e() != q.n_e) throw ConfigError("codebook vector length differs from N_E");
  Eigen::MatrixXd b(q.n_rf, static_cast<Eigen::Index>(cb.size()));
  for (int i = 0; i < q.n_rf; ++i) {
    for (std::size_t c = 0; c < cb.size(); ++c) b(i, static_cast<Eigen::Index>(c)) = block_quotient(q, i, cb.entries[c]);
  }
  return b;
}

namespace {

void require_codebook(const VectorCodebook& cb) {
  if (cb.size() == 0) throw ConfigError("codebook is empty");
}

BeamformerSolution finish(Solver solver, const VectorCodebook& cb, std::vector<int> picks, const Eigen::MatrixXd& b) {
  BeamformerSolution sol;
  sol.solver = solver;
  sol.beamformer = AnalogBeamformer::from_codebook(cb, picks);
  sol.block_quotients.resize(picks.size());
  for (std::size_t i = 0; i < picks.size(); ++i) {
    sol.block_quotients[i] = b(static_cast<Eigen::Index>(i), picks[i]);
    sol.objective += sol.block_quotients[i];
  }
  sol.codewords = std::move(picks);
  return sol;
}

// Argmax over a row, lowest index on ties.
int row_argmax(const Eigen::MatrixXd& b, int i, const std::vector<char>* taken = nullptr) {
  int best = -1;
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    if (taken != nullptr && (*taken)[static_cast<std::size_t>(c)]) continue;
    if (best < 0 || b(i, c) > b(i, best)) best = static_cast<int>(c);
  }
  return best;
}

}  // namespace

BeamformerSolution solve_projection(const ObjectiveMatrix& q, const VectorCodebook& cb,
                                    const ProjectionOptions& opts) {
  require_codebook(cb);
  if (cb.n_e() != q.n_e) throw ConfigError("codebook vector length differs from N_E");
  if (opts.distinct && cb.size() < static_cast<std::size_t>(q.n_rf)) {
    throw ConfigError("distinct projection needs at least N_RF codewords");
  }
  if (opts.phase_search < 1) throw ConfigError("projection phase search needs at least one rotation");
  std::vector<int> picks(static_cast<std::size_t>(q.n_rf));
  std::vector<char> taken(cb.size(), 0);
  std::vector<double> gaps;
  std::vector<bool> ties;
  for (int i = 0; i < q.n_rf; ++i) {
    const RayleighSolution rs = block_rayleigh(q, i);
    gaps.push_back(rs.gap);
    ties.push_back(rs.tie);
    int best = -1;
    double best_dist = 0.0;
    for (int k = 0; k < opts.phase_search; ++k) {
      const Eigen::VectorXcd rotated = rs.vector * std::polar(1.0, 2.0 * kPi * k / opts.phase_search);
      Eigen::VectorXcd target;
      switch (opts.lift) {
        case LiftMode::kLiteral:
          target = lorentzian_lift(rotated);
          break;
        case LiftMode::kUnitModulus:
          target = unit_modulus_lift(rotated);
          break;
        case LiftMode::kNone:
          target = rotated;
          break;
      }
      for (std::size_t c = 0; c < cb.size(); ++c) {
        if (opts.distinct && taken[c]) continue;
        const double d = codebook_distance(cb.entries[c], target);
        if (best < 0 || d < best_dist) {
          best = static_cast<int>(c);
          best_dist = d;
        }
      }
    }
    picks[static_cast<std::size_t>(i)] = best;
    taken[static_cast<std::size_t>(best)] = 1;
  }
  // Quotients only for the picked codewords.
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(q.n_rf, static_cast<Eigen::Index>(cb.size()));
  for (int i = 0; i < q.n_rf; ++i) {
    const int c = picks[static_cast<std::size_t>(i)];
    b(i, c) = block_quotient(q, i, cb.entries[static_cast<std::size_t>(c)]);
  }
  BeamformerSolution sol = finish(Solver::kProjection, cb, std::move(picks), b);
  sol.eigen_gaps = std::move(gaps);
  sol.ties = std::move(ties);
  return sol;
}

BeamformerSolution solve_greedy(const ObjectiveMatrix& q, const VectorCodebook& cb, std::uint64_t seed) {
  require_codebook(cb);
  const Eigen::MatrixXd b = benefit_matrix(q, cb);
  const int n_rf = q.n_rf;
  const int n_w = static_cast<int>(cb.size());
  // With fewer codewords than microstrips, the pool holds enough copies of
  // the codebook to fill every slot.
  const int copies = (n_rf + n_w - 1) / n_w;
  const int pool = n_w * copies;
  auto codeword = [n_w](int item) { return item % n_w; };

  Rng rng(seed);
  std::vector<int> order(static_cast<std::size_t>(pool));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> slots(order.begin(), order.begin() + n_rf);
  std::vector<char> in_set(static_cast<std::size_t>(pool), 0);
  for (int item : slots) in_set[static_cast<std::size_t>(item)] = 1;

  // Remaining draws: the whole pool in a fresh random order.
  std::shuffle(order.begin(), order.end(), rng);

  double objective = 0.0;
  for (int i = 0; i < n_rf; ++i) objective += b(i, codeword(slots[static_cast<std::size_t>(i)]));
  std::vector<double> trace{objective};

  for (int item : order) {
    if (!in_set[static_cast<std::size_t>(item)]) {
      const int c = codeword(item);
      int best_slot = -1;
      double best_gain = 0.0;
      for (int i = 0; i < n_rf; ++i) {
        const double gain = b(i, c) - b(i, codeword(slots[static_cast<std::size_t>(i)]));
        if (gain > best_gain) {
          best_gain = gain;
          best_slot = i;
        }
      }
      if (best_slot >= 0) {
        in_set[static_cast<std::size_t>(slots[static_cast<std::size_t>(best_slot)])] = 0;
        slots[static_cast<std::size_t>(best_slot)] = item;
        in_set[static_cast<std::size_t>(item)] = 1;
        objective += best_gain;
      }
    }
    trace.push_back(objective);
  }

  std::vector<int> picks(static_cast<std::size_t>(n_rf));
  for (int i = 0; i < n_rf; ++i) picks[static_cast<std::size_t>(i)] = codeword(slots[static_cast<std::size_t>(i)]);
  BeamformerSolution sol = finish(Solver::kGreedy, cb, std::move(picks), b);
  sol.objective_trace = std::move(trace);
  return sol;
}

BeamformerSolution solve_exhaustive(const ObjectiveMatrix& q, const VectorCodebook& cb, const ExhaustiveOptions& opts) {
  require_codebook(cb);
  const double work = static_cast<double>(q.n_rf) * static_cast<double>(cb.size());
  if (work > opts.work_cap) {
    throw WorkCapExceeded("exhaustive search needs " + std::to_string(work) + " quotient evaluations, cap is " +
                          std::to_string(opts.work_cap));
  }
  const Eigen::MatrixXd b = benefit_matrix(q, cb);
  const int n_rf = q.n_rf;
  const int n_w = static_cast<int>(cb.size());
  std::vector<int> picks(static_cast<std::size_t>(n_rf));
  if (!opts.distinct) {
    for (int i = 0; i < n_rf; ++i) picks[static_cast<std::size_t>(i)] = row_argmax(b, i);
  } else {
    const int copies = (n_rf + n_w - 1) / n_w;
    Eigen::MatrixXd tiled(n_rf, static_cast<Eigen::Index>(n_w) * copies);
    for (int k = 0; k < copies; ++k) tiled.middleCols(static_cast<Eigen::Index>(k) * n_w, n_w) = b;
    const std::vector<int> cols = max_benefit_assignment(tiled);
    for (int i = 0; i < n_rf; ++i) picks[static_cast<std::size_t>(i)] = cols[static_cast<std::size_t>(i)] % n_w;
  }
  return finish(opts.distinct ? Solver::kAssignment : Solver::kExhaustive, cb, std::move(picks), b);
}

BeamformerSolution solve_snr_max(const std::vector<NearFieldChannel>& channels, const PropagationMatrix& prop,
                                 const VectorCodebook& cb, const ObjectiveMatrix& q) {
  require_codebook(cb);
  if (cb.n_e() != prop.n_e) throw ConfigError("codebook vector length differs from N_E");
  const int n_e = prop.n_e;
  std::vector<int> picks(static_cast<std::size_t>(prop.n_rf));
  Eigen::VectorXcd s(n_e);
  for (int i = 0; i < prop.n_rf; ++i) {
    std::vector<Eigen::VectorXcd> sigs;
    for (const NearFieldChannel& ch : channels) {
      s = (prop.microstrip(i).array() * ch.h.segment(static_cast<Eigen::Index>(i) * n_e, n_e).array()).matrix();
      sigs.push_back(s);
    }
    const Eigen::VectorXcd p = prop.microstrip(i);
    int best = -1;
    double best_power = 0.0;
    for (std::size_t c = 0; c < cb.size(); ++c) {
      const Eigen::VectorXcd& w = cb.entries[c];
      double power = 0.0;
      for (const Eigen::VectorXcd& sig : sigs) power += std::norm(kernels::dotu(view(w), view(sig)));
      power /= kernels::hadamard_norm2(view(w), view(p));
      if (best < 0 || power > best_power) {
        best = static_cast<int>(c);
        best_power = power;
      }
    }
    picks[static_cast<std::size_t>(i)] = best;
  }
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(prop.n_rf, static_cast<Eigen::Index>(cb.size()));
  for (int i = 0; i < prop.n_rf; ++i) {
    const int c = picks[static_cast<std::size_t>(i)];
    b(i, c) = block_quotient(q, i, cb.entries[static_cast<std::size_t>(c)]);
  }
  return finish(Solver::kSnrMax, cb, std::move(picks), b);
}

BeamformerSolution solve_random(const VectorCodebook& cb, int n_rf, std::uint64_t seed, const ObjectiveMatrix& q) {
  require_codebook(cb);
  Rng rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(cb.size()) - 1);
  std::vector<int> picks(static_cast<std::size_t>(n_rf));
  for (int& p : picks) p = pick(rng);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n_rf, static_cast<Eigen::Index>(cb.size()));
  for (int i = 0; i < n_rf; ++i) {
    const int c = picks[static_cast<std::size_t>(i)];
    b(i, c) = block_quotient(q, i, cb.entries[static_cast<std::size_t>(c)]);
  }
  return finish(Solver::kRandom, cb, std::move(picks), b);
}

}  // namespace dmaloc

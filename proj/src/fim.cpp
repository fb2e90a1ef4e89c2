#include "dmaloc/fim.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "dmaloc/errors.hpp"
#include "dmaloc/kernels.hpp"
#include "dmaloc/rng.hpp"
#include "dmaloc/units.hpp"

namespace dmaloc {

using cd = std::complex<double>;

Eigen::MatrixXcd PilotBlock::empirical_gram() const { return sequences.conjugate() * sequences.transpose(); }

Eigen::MatrixXcd PilotBlock::gram() const {
  if (mode == PilotMode::kOrthogonal) {
    return Eigen::MatrixXcd::Identity(n_ue(), n_ue()) * cd(length() * p_max_mw, 0.0);
  }
  return empirical_gram();
}

PilotBlock PilotBlock::with_power(double new_p_max_mw) const {
  if (!(new_p_max_mw > 0.0)) throw ConfigError("pilot power must be positive");
  PilotBlock out = *this;
  out.sequences *= std::sqrt(new_p_max_mw / p_max_mw);
  out.p_max_mw = new_p_max_mw;
  return out;
}

PilotBlock make_pilots(int n_ue, int length, double p_max_mw, PilotMode mode, std::uint64_t seed) {
  if (n_ue < 1 || length < 1) throw ConfigError("pilot block needs U >= 1 and T >= 1");
  if (!(p_max_mw > 0.0)) throw ConfigError("pilot power must be positive");
  PilotBlock pb;
  pb.mode = mode;
  pb.p_max_mw = p_max_mw;
  pb.sequences.resize(n_ue, length);
  const double amp = std::sqrt(p_max_mw);
  switch (mode) {
    case PilotMode::kOrthogonal:
      if (length < n_ue) throw ConfigError("orthogonal pilots need T >= U");
      for (int u = 0; u < n_ue; ++u) {
        for (int t = 0; t < length; ++t) {
          const long long ut = (static_cast<long long>(u) * t) % length;
          pb.sequences(u, t) = std::polar(amp, 2.0 * kPi * static_cast<double>(ut) / length);
        }
      }
      break;
    case PilotMode::kRandomQpsk: {
      Rng rng(seed);
      std::uniform_int_distribution<int> sym(0, 3);
      for (int u = 0; u < n_ue; ++u) {
        for (int t = 0; t < length; ++t) pb.sequences(u, t) = std::polar(amp, kPi * (0.25 + 0.5 * sym(rng)));
      }
      break;
    }
    case PilotMode::kCustom:
      throw ConfigError("custom pilots are built with custom_pilots()");
  }
  return pb;
}

PilotBlock custom_pilots(Eigen::MatrixXcd sequences, double p_max_mw) {
  PilotBlock pb;
  pb.mode = PilotMode::kCustom;
  pb.p_max_mw = p_max_mw;
  pb.sequences = std::move(sequences);
  return pb;
}

Eigen::VectorXd noise_covariance(const AnalogBeamformer& bf, const PropagationMatrix& prop, double noise_power_mw) {
  if (bf.n_rf() != prop.n_rf || bf.n_e != prop.n_e) throw ConfigError("beamformer and propagation shapes differ");
  Eigen::VectorXd diag(bf.n_rf());
  for (int i = 0; i < bf.n_rf(); ++i) {
    const Eigen::VectorXcd& w = bf.weights[static_cast<std::size_t>(i)];
    const Eigen::VectorXcd p = prop.microstrip(i);
    const double energy = kernels::hadamard_norm2({w.data(), static_cast<std::size_t>(w.size())},
                                                  {p.data(), static_cast<std::size_t>(p.size())});
    if (!(energy > 0.0)) {
      throw SingularCovariance("microstrip " + std::to_string(i + 1) + " has all weights off; R_n is singular");
    }
    diag[i] = noise_power_mw * energy;
  }
  return diag;
}

FimResult fim_matrix(const std::vector<NearFieldChannel>& channels, const AnalogBeamformer& bf,
                     const PropagationMatrix& prop, const PilotBlock& pilots, double noise_power_mw,
                     const FimOptions& opts) {
  const int n_ue = static_cast<int>(channels.size());
  if (n_ue == 0) throw ConfigError("FIM needs at least one UE");
  if (pilots.n_ue() != n_ue) throw ConfigError("pilot block and channel list disagree on U");
  for (const NearFieldChannel& ch : channels) {
    if (!ch.has_derivatives) throw ConfigError("FIM needs channel derivatives for every UE");
    if (ch.h.size() != prop.diag.size()) throw ConfigError("channel length does not match the panel");
  }
  const Eigen::VectorXd rn = noise_covariance(bf, prop, noise_power_mw);
  const int n_rf = bf.n_rf();
  const int n_e = bf.n_e;
  const int n_par = 3 * n_ue;

  // dmu[col](i) = derivative of RF chain i's noiseless output for parameter col,
  // before the pilot factor.
  Eigen::MatrixXcd dmu(n_rf, n_par);
  Eigen::VectorXcd g(n_e);
  for (int u = 0; u < n_ue; ++u) {
    for (int a = 0; a < 3; ++a) {
      const Eigen::VectorXcd& dh = channels[static_cast<std::size_t>(u)].derivative(a);
      for (int i = 0; i < n_rf; ++i) {
        const Eigen::VectorXcd& w = bf.weights[static_cast<std::size_t>(i)];
        const auto p = prop.microstrip(i);
        const auto dhi = dh.segment(i * n_e, n_e);
        cd x;
        if (opts.model == ObservationModel::kConjugatedChannel) {
          g = (p.array() * dhi.array()).conjugate().matrix();  // P^H conj(dh)
          x = kernels::dotc({w.data(), static_cast<std::size_t>(n_e)}, {g.data(), static_cast<std::size_t>(n_e)});
        } else {
          g = (p.array() * dhi.array()).matrix();
          x = kernels::dotu({w.data(), static_cast<std::size_t>(n_e)}, {g.data(), static_cast<std::size_t>(n_e)});
        }
        dmu(i, 3 * u + a) = x;
      }
    }
  }

  Eigen::MatrixXcd gram = pilots.gram();
  if (opts.model == ObservationModel::kConjugatedObservation) gram = gram.conjugate().eval();

  // Whitened cross products: C(a, b) = sum_i conj(dmu_ia) dmu_ib / R_i
  const Eigen::MatrixXcd whitened = rn.cwiseSqrt().cwiseInverse().asDiagonal() * dmu;
  const Eigen::MatrixXcd cross = whitened.adjoint() * whitened;

  FimResult res;
  res.fim.resize(n_par, n_par);
  for (int a = 0; a < n_par; ++a) {
    for (int b = 0; b < n_par; ++b) {
      res.fim(a, b) = 2.0 * std::real(gram(a / 3, b / 3) * cross(a, b));
    }
  }
  // exact symmetry
  res.fim = (0.5 * (res.fim + res.fim.transpose())).eval();
  return res;
}

std::string param_name(int index) {
  static const char* names[] = {"r", "theta", "phi"};
  return std::string(names[index % 3]) + "_" + std::to_string(index / 3 + 1);
}

double trace_bound(const Eigen::MatrixXd& fim) {
  const double tr = fim.trace();
  if (!(tr > 0.0)) throw NumericalError("trace bound needs a positive FIM trace");
  const double n = static_cast<double>(fim.rows());
  return n * n / tr;
}

namespace {

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& fim, double condition_cap, double& min_ev, double& max_ev) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fim);
  if (es.info() != Eigen::Success) throw NumericalError("FIM eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  min_ev = ev[0];
  max_ev = ev[ev.size() - 1];
  if (!(max_ev > 0.0) || !(min_ev > 0.0) || max_ev / min_ev > condition_cap) {
    const Eigen::VectorXd dir = es.eigenvectors().col(0);
    Eigen::Index worst = 0;
    dir.cwiseAbs().maxCoeff(&worst);
    std::ostringstream msg;
    msg << "FIM is singular or ill-conditioned (eigenvalues " << min_ev << " .. " << max_ev
        << "); near-null direction dominated by " << param_name(static_cast<int>(worst));
    throw UnidentifiableConfiguration(msg.str());
  }
  return es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double peb(FimResult& result, double condition_cap) {
  const Eigen::MatrixXd inv = checked_inverse(result.fim, condition_cap, result.min_eigenvalue, result.max_eigenvalue);
  result.condition = result.max_eigenvalue / result.min_eigenvalue;
  result.per_param_crb = inv.diagonal();
  result.crb = result.per_param_crb.sum();
  result.peb = std::sqrt(result.crb);
  result.trace_bound = trace_bound(result.fim);
  result.bounds_ready = true;
  return result.peb;
}

double cartesian_peb(const FimResult& result, const std::vector<UePosition>& ues, double condition_cap) {
  if (static_cast<int>(ues.size()) * 3 != result.n_params()) throw ConfigError("UE list does not match FIM size");
  double lo = 0.0, hi = 0.0;
  const Eigen::MatrixXd inv = checked_inverse(result.fim, condition_cap, lo, hi);
  double total = 0.0;
  for (std::size_t u = 0; u < ues.size(); ++u) {
    const UePosition& ue = ues[u];
    const double st = std::sin(ue.theta), ct = std::cos(ue.theta);
    const double sp = std::sin(ue.phi), cp = std::cos(ue.phi);
    Eigen::Matrix3d jac;
    jac << st * cp, ue.r * ct * cp, -ue.r * st * sp,
           st * sp, ue.r * ct * sp, ue.r * st * cp,
           ct, -ue.r * st, 0.0;
    const Eigen::Index o = static_cast<Eigen::Index>(3 * u);
    total += (jac * inv.block<3, 3>(o, o) * jac.transpose()).trace();
  }
  return std::sqrt(total);
}

}  // namespace dmaloc

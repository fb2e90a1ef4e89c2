#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

namespace oracle {

using dmaloc::AnalogBeamformer;
using dmaloc::DmaGeometry;
using dmaloc::NearFieldChannel;
using dmaloc::RadioConfig;
using dmaloc::UePosition;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Vector3d ue_point(const UePosition& ue) {
  return {ue.r * std::sin(ue.theta) * std::cos(ue.phi), ue.r * std::sin(ue.theta) * std::sin(ue.phi),
          ue.r * std::cos(ue.theta)};
}

UePosition perturbed(UePosition ue, int param, double delta) {
  if (param == 0) ue.r += delta;
  if (param == 1) ue.theta += delta;
  if (param == 2) ue.phi += delta;
  return ue;
}

double param_value(const UePosition& ue, int param) { return param == 0 ? ue.r : (param == 1 ? ue.theta : ue.phi); }

}  // namespace

double uniform(dmaloc::Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double distance(const DmaGeometry& geom, const UePosition& ue, int i, int n) {
  const Eigen::Vector3d elem((i - 1) * geom.d_rf, 0.0, (n - 1) * geom.d_e);
  return (ue_point(ue) - elem).norm();
}

namespace {

using ld = long double;
using cld = std::complex<ld>;

// Whole model in long double so that differences of nearby evaluations are
// not swamped by the rounding of a 10^4 rad carrier phase.
std::vector<cld> channel_ext(const RadioConfig& cfg, const DmaGeometry& geom, const UePosition& ue) {
  const ld pi = std::numbers::pi_v<ld>;
  const ld lambda = 299792458.0L / static_cast<ld>(cfg.carrier_hz);
  const ld r = ue.r, th = ue.theta, ph = ue.phi;
  const ld ux = r * std::sin(th) * std::cos(ph), uy = r * std::sin(th) * std::sin(ph), uz = r * std::cos(th);
  std::vector<cld> h(static_cast<std::size_t>(geom.n_rf * geom.n_e));
  for (int i = 1; i <= geom.n_rf; ++i) {
    for (int n = 1; n <= geom.n_e; ++n) {
      const ld ex = (i - 1) * static_cast<ld>(geom.d_rf), ez = (n - 1) * static_cast<ld>(geom.d_e);
      const ld d = std::sqrt((ux - ex) * (ux - ex) + uy * uy + (uz - ez) * (uz - ez));
      const ld elev = std::asin(std::min(1.0L, std::abs(ez - uz) / d));
      const ld gain = 2.0L * (cfg.b_gain + 1.0L) * std::pow(std::cos(elev), static_cast<ld>(cfg.b_gain));
      const ld amp = std::sqrt(gain) * lambda / (4.0L * pi * d) * std::exp(-static_cast<ld>(cfg.kappa_abs) * d / 2.0L);
      const ld cycles = std::fmod(d / lambda, 1.0L);
      h[static_cast<std::size_t>((i - 1) * geom.n_e + (n - 1))] = std::polar(amp, 2.0L * pi * cycles);
    }
  }
  return h;
}

}  // namespace

Eigen::VectorXcd channel(const RadioConfig& cfg, const DmaGeometry& geom, const UePosition& ue) {
  const std::vector<cld> h = channel_ext(cfg, geom, ue);
  Eigen::VectorXcd out(static_cast<Eigen::Index>(h.size()));
  for (std::size_t k = 0; k < h.size(); ++k) out[static_cast<Eigen::Index>(k)] = cd(h[k]);
  return out;
}

Eigen::VectorXcd channel_fd(const RadioConfig& cfg, const DmaGeometry& geom, const UePosition& ue, int param,
                            double rel_step) {
  const double step = rel_step * std::max(std::abs(param_value(ue, param)), 1.0);
  std::vector<cld> f[4];
  const int k[4] = {2, 1, -1, -2};
  for (int j = 0; j < 4; ++j) f[j] = channel_ext(cfg, geom, perturbed(ue, param, k[j] * step));
  Eigen::VectorXcd out(static_cast<Eigen::Index>(f[0].size()));
  for (std::size_t e = 0; e < f[0].size(); ++e) {
    const cld d = (-f[0][e] + 8.0L * f[1][e] - 8.0L * f[2][e] + f[3][e]) / (12.0L * static_cast<ld>(step));
    out[static_cast<Eigen::Index>(e)] = cd(d);
  }
  return out;
}

double kink_margin(const DmaGeometry& geom, const UePosition& ue) {
  double m = 1e300;
  for (int n = 0; n < geom.n_e; ++n) m = std::min(m, std::abs(n * geom.d_e - ue.r * std::cos(ue.theta)));
  return m;
}

Eigen::MatrixXcd dense_propagation(const DmaGeometry& geom) {
  const int n = geom.n_rf * geom.n_e;
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < geom.n_rf; ++i) {
    for (int e = 0; e < geom.n_e; ++e) {
      const double rho = e * geom.d_e;
      p(i * geom.n_e + e, i * geom.n_e + e) = std::exp(-rho * cd(geom.alpha_wg[i], geom.beta_wg[i]));
    }
  }
  return p;
}

Eigen::MatrixXcd dense_noise_covariance(const AnalogBeamformer& bf, const Eigen::MatrixXcd& p, double noise_power) {
  const Eigen::MatrixXcd w = bf.dense();
  return noise_power * w.adjoint() * p.adjoint() * p * w;
}

Eigen::MatrixXd dense_fim(const std::vector<NearFieldChannel>& channels, const AnalogBeamformer& bf,
                          const DmaGeometry& geom, const Eigen::MatrixXcd& pilots, double noise_power) {
  const Eigen::MatrixXcd p = dense_propagation(geom);
  const Eigen::MatrixXcd w = bf.dense();
  const Eigen::MatrixXcd r_inv = dense_noise_covariance(bf, p, noise_power).inverse();
  const int k = 3 * static_cast<int>(channels.size());
  std::vector<Eigen::MatrixXcd> dm;
  for (std::size_t u = 0; u < channels.size(); ++u) {
    const NearFieldChannel& ch = channels[u];
    const Eigen::VectorXcd* d[3] = {&ch.dh_dr, &ch.dh_dtheta, &ch.dh_dphi};
    for (int a = 0; a < 3; ++a) {
      dm.push_back(w.adjoint() * p.adjoint() * d[a]->conjugate() * pilots.row(static_cast<Eigen::Index>(u)));
    }
  }
  Eigen::MatrixXd fim(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) fim(a, b) = 2.0 * (dm[a].adjoint() * r_inv * dm[b]).trace().real();
  }
  return fim;
}

double dense_objective(const std::vector<NearFieldChannel>& channels, const AnalogBeamformer& bf,
                       const DmaGeometry& geom) {
  const Eigen::MatrixXcd p = dense_propagation(geom);
  const Eigen::MatrixXcd w = bf.dense();
  const int n = geom.n_rf * geom.n_e;
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(n, n);
  for (const NearFieldChannel& ch : channels) {
    for (const Eigen::VectorXcd* d : {&ch.dh_dr, &ch.dh_dtheta, &ch.dh_dphi}) {
      const Eigen::VectorXcd g = p.adjoint() * d->conjugate();
      q += g * g.adjoint();
    }
  }
  const Eigen::MatrixXcd f = w * dense_noise_covariance(bf, p, 1.0).inverse() * w.adjoint();
  return (q * f).trace().real();
}

double block_lambda_max(const std::vector<NearFieldChannel>& channels, const DmaGeometry& geom, int microstrip) {
  const Eigen::MatrixXcd p = dense_propagation(geom);
  const int ne = geom.n_e;
  const Eigen::Index off = static_cast<Eigen::Index>(microstrip) * ne;
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(ne, ne);
  for (const NearFieldChannel& ch : channels) {
    for (const Eigen::VectorXcd* d : {&ch.dh_dr, &ch.dh_dtheta, &ch.dh_dphi}) {
      const Eigen::VectorXcd g = (p.adjoint() * d->conjugate()).segment(off, ne);
      q += g * g.adjoint();
    }
  }
  Eigen::VectorXd inv_mag(ne);
  for (int e = 0; e < ne; ++e) inv_mag[e] = 1.0 / std::abs(p(off + e, off + e));
  const Eigen::MatrixXcd whitened = inv_mag.asDiagonal() * q * inv_mag.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(whitened);
  return es.eigenvalues().maxCoeff();
}

Enumerated brute_force(const std::vector<NearFieldChannel>& channels, const DmaGeometry& geom,
                       const dmaloc::VectorCodebook& cb, bool distinct) {
  const int n_rf = geom.n_rf;
  const int n_w = static_cast<int>(cb.size());
  Enumerated best;
  best.value = -1.0;
  std::vector<int> picks(n_rf, 0);
  while (true) {
    bool ok = true;
    if (distinct) {
      for (int a = 0; a < n_rf && ok; ++a) {
        for (int b = a + 1; b < n_rf && ok; ++b) ok = picks[a] != picks[b];
      }
    }
    if (ok) {
      const double v = dense_objective(channels, AnalogBeamformer::from_codebook(cb, picks), geom);
      if (v > best.value) best = {picks, v};
    }
    int k = n_rf - 1;
    while (k >= 0 && ++picks[k] == n_w) picks[k--] = 0;
    if (k < 0) break;
  }
  return best;
}

AnalogBeamformer random_lorentzian(int n_rf, int n_e, dmaloc::Rng& rng) {
  AnalogBeamformer bf;
  bf.n_e = n_e;
  for (int i = 0; i < n_rf; ++i) {
    Eigen::VectorXcd w(n_e);
    for (int e = 0; e < n_e; ++e) w[e] = 0.5 * (cd(0.0, 1.0) + std::polar(1.0, uniform(rng, -kPi / 2, kPi / 2)));
    bf.weights.push_back(w);
  }
  return bf;
}

Scenario random_scenario(dmaloc::Rng& rng, int max_rf, int max_e, int max_ue, bool lossy) {
  Scenario s;
  s.radio = RadioConfig::with_thermal_noise(uniform(rng, 60e9, 300e9), 150e3, uniform(rng, 0.0, 0.01),
                                            std::floor(uniform(rng, 0.0, 4.0)));
  const double lambda = s.radio.wavelength();
  const int n_rf = 1 + static_cast<int>(uniform(rng, 0.0, max_rf));
  const int n_e = 1 + static_cast<int>(uniform(rng, 0.0, max_e));
  s.geom = DmaGeometry::uniform(std::min(n_rf, max_rf), std::min(n_e, max_e), lambda * uniform(rng, 0.3, 0.7),
                                lambda * uniform(rng, 0.1, 0.5), lossy ? uniform(rng, 0.0, 8.0) : 0.0,
                                s.radio.wavenumber() * uniform(rng, 0.8, 1.5));
  const int n_ue = 1 + static_cast<int>(uniform(rng, 0.0, max_ue));
  while (static_cast<int>(s.ues.size()) < std::min(n_ue, max_ue)) {
    UePosition ue{uniform(rng, 0.5, 12.0), uniform(rng, 0.3, kPi - 0.3), uniform(rng, 0.2, kPi - 0.2)};
    if (kink_margin(s.geom, ue) > 1e-3) s.ues.push_back(ue);
  }
  return s;
}

double timed(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace oracle

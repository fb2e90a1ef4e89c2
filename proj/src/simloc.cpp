#include "dmaloc/simloc.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>

#include "dmaloc/errors.hpp"
#include "dmaloc/kernels.hpp"
#include "dmaloc/rng.hpp"

namespace dmaloc {

using cd = std::complex<double>;

ArrayModel ArrayModel::make(const RadioConfig& radio, const DmaGeometry& geom) {
  radio.validate();
  geom.validate();
  return {radio, geom, propagation_matrix(geom)};
}

ReceivedBlock synthesize_rx(const std::vector<NearFieldChannel>& channels, const AnalogBeamformer& bf,
                            const PropagationMatrix& prop, const PilotBlock& pilots, double noise_power_mw,
                            std::uint64_t seed) {
  if (pilots.n_ue() != static_cast<int>(channels.size())) throw ConfigError("pilot block and channel list disagree on U");
  if (bf.n_rf() != prop.n_rf || bf.n_e != prop.n_e) throw ConfigError("beamformer and propagation shapes differ");
  if (noise_power_mw < 0.0) throw ConfigError("noise power must be non-negative");
  const Eigen::Index n = prop.diag.size();
  for (const NearFieldChannel& ch : channels) {
    if (ch.h.size() != n) throw ConfigError("channel length does not match the panel");
  }
  const int t_len = pilots.length();

  // Element-domain signal X = sum_u conj(h_u) s_u + N.
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(n, t_len);
  for (std::size_t u = 0; u < channels.size(); ++u) {
    x.noalias() += channels[u].h.conjugate() * pilots.sequences.row(static_cast<Eigen::Index>(u));
  }
  if (noise_power_mw > 0.0) {
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise_power_mw / 2.0));
    for (Eigen::Index t = 0; t < t_len; ++t) {
      for (Eigen::Index k = 0; k < n; ++k) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        x(k, t) += cd(re, im);
      }
    }
  }

  ReceivedBlock rx;
  rx.noise_seed = seed;
  rx.noise_power_mw = noise_power_mw;
  rx.y.resize(bf.n_rf(), t_len);
  for (int i = 0; i < bf.n_rf(); ++i) {
    // conj(w_i o p_i)^T applied to the microstrip's rows
    const Eigen::VectorXcd comb = bf.weights[static_cast<std::size_t>(i)].cwiseProduct(prop.microstrip(i)).conjugate();
    rx.y.row(i) = comb.transpose() * x.middleRows(static_cast<Eigen::Index>(i) * prop.n_e, prop.n_e);
  }
  return rx;
}

EstimationGrid EstimationGrid::uniform(double r_min, double r_max, double r_step, double phi_min, double phi_max,
                                       double phi_step, std::vector<double> elevations) {
  if (!(r_step > 0.0) || !(phi_step > 0.0)) throw ConfigError("grid steps must be positive");
  EstimationGrid g;
  auto axis = [](double lo, double hi, double step) {
    std::vector<double> out;
    const long count = std::lround(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
  };
  g.ranges = axis(r_min, r_max, r_step);
  g.azimuths = axis(phi_min, phi_max, phi_step);
  g.elevations = std::move(elevations);
  g.validate();
  return g;
}

UePosition EstimationGrid::cell(std::size_t k) const {
  const std::size_t na = azimuths.size();
  const std::size_t nr = ranges.size();
  return {ranges[(k / na) % nr], elevations[k / (na * nr)], azimuths[k % na]};
}

void EstimationGrid::validate() const {
  auto check = [](const std::vector<double>& axis, const char* name) {
    if (axis.empty()) throw ConfigError(std::string("grid axis '") + name + "' is empty");
    for (std::size_t k = 0; k < axis.size(); ++k) {
      if (!std::isfinite(axis[k])) throw ConfigError(std::string("grid axis '") + name + "' has a non-finite value");
      if (k > 0 && !(axis[k] > axis[k - 1])) {
        throw ConfigError(std::string("grid axis '") + name + "' is not strictly increasing");
      }
    }
  };
  check(ranges, "ranges");
  check(azimuths, "azimuths");
  check(elevations, "elevations");
  if (!(ranges.front() > 0.0)) throw ConfigError("grid ranges must be positive");
}

GridDictionary GridDictionary::build(const ArrayModel& model, const EstimationGrid& grid) {
  grid.validate();
  GridDictionary d;
  d.grid = grid;
  d.responses.resize(model.prop.diag.size(), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const NearFieldChannel ch = channel_vector(model.radio, model.geom, grid.cell(k));
    d.responses.col(static_cast<Eigen::Index>(k)) = model.prop.diag.cwiseProduct(ch.h);
  }
  return d;
}

namespace {

// Per-chain signature conj(w_i^T (p_i o h_i)) of a response vector p o h.
Eigen::VectorXcd signature(const AnalogBeamformer& bf, const cd* response) {
  Eigen::VectorXcd mu(bf.n_rf());
  const std::size_t ne = static_cast<std::size_t>(bf.n_e);
  for (int i = 0; i < bf.n_rf(); ++i) {
    const Eigen::VectorXcd& w = bf.weights[static_cast<std::size_t>(i)];
    mu[i] = std::conj(kernels::dotu({w.data(), ne}, {response + static_cast<std::size_t>(i) * ne, ne}));
  }
  return mu;
}

double statistic(MleStatistic s, cd a, double q) {
  switch (s) {
    case MleStatistic::kCorrelation:
      return std::norm(a) / q;
    case MleStatistic::kAmplitude:
      return 2.0 * std::abs(a) - q;
    case MleStatistic::kCoherent:
      return 2.0 * a.real() - q;
  }
  return 0.0;
}

enum class Nuisance { kNone, kPhase, kGain };

struct Box {
  UePosition lo, hi;
};

// Grid hull around `cell`, widened by `steps` grid spacings on each side.
Box trust_box(const EstimationGrid& g, const UePosition& cell, double steps) {
  auto span = [steps](const std::vector<double>& axis, double v, double& lo, double& hi) {
    const double h = axis.size() > 1 ? (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1) : 0.0;
    lo = std::max(axis.front(), v - steps * h);
    hi = std::min(axis.back(), v + steps * h);
  };
  Box b;
  span(g.ranges, cell.r, b.lo.r, b.hi.r);
  span(g.azimuths, cell.phi, b.lo.phi, b.hi.phi);
  span(g.elevations, cell.theta, b.lo.theta, b.hi.theta);
  return b;
}

// Weighted least-squares fit of c * mu(zeta) to y_hat by Gauss-Newton with
// step halving. zeta moves within a box.
class Refiner {
 public:
  Refiner(const ArrayModel& model, const AnalogBeamformer& bf, const Eigen::VectorXd& weights,
          const Eigen::VectorXcd& y_hat, const Box& box, bool free_elevation)
      : model_(model), bf_(bf), inv_r_(weights.cwiseInverse()), y_(y_hat), box_(box),
        free_elevation_(free_elevation && box.hi.theta > box.lo.theta) {}

  double cost() const { return cost_; }

  UePosition run(UePosition start, Nuisance nuisance, int max_iterations) {
    zeta_ = clamp(start);
    nuisance_ = nuisance;
    evaluate(zeta_, false);
    init_nuisance();
    double cost = cost_with(c_);
    for (int it = 0; it < max_iterations; ++it) {
      evaluate(zeta_, true);
      const Eigen::VectorXd step = gauss_newton_step();
      if (!step.allFinite()) break;
      bool improved = false;
      double scale = 1.0;
      for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
        const UePosition trial_zeta = clamp(shift(zeta_, step, scale));
        const cd trial_c = shift_nuisance(step, scale);
        evaluate(trial_zeta, false);
        const double trial_cost = cost_with(trial_c);
        if (trial_cost < cost) {
          const double moved = std::abs(trial_zeta.r - zeta_.r) + std::abs(trial_zeta.phi - zeta_.phi) +
                               std::abs(trial_zeta.theta - zeta_.theta);
          zeta_ = trial_zeta;
          c_ = trial_c;
          improved = cost - trial_cost > 1e-15 * cost && moved > 1e-15 * zeta_.r;
          cost = trial_cost;
          break;
        }
      }
      if (!improved) break;
    }
    cost_ = cost;
    return zeta_;
  }

 private:
  int n_active() const { return free_elevation_ ? 3 : 2; }
  int n_nuisance() const { return nuisance_ == Nuisance::kNone ? 0 : (nuisance_ == Nuisance::kPhase ? 1 : 2); }

  void evaluate(const UePosition& z, bool derivatives) {
    const NearFieldChannel ch = derivatives ? channel_derivatives(model_.radio, model_.geom, z)
                                            : channel_vector(model_.radio, model_.geom, z);
    const Eigen::VectorXcd ph = model_.prop.diag.cwiseProduct(ch.h);
    mu_ = signature(bf_, ph.data());
    if (derivatives) {
      jac_.resize(mu_.size(), 3);
      for (int a = 0; a < 3; ++a) {
        const Eigen::VectorXcd pd = model_.prop.diag.cwiseProduct(ch.derivative(a));
        jac_.col(a) = signature(bf_, pd.data());
      }
    }
  }

  void init_nuisance() {
    const cd corr = mu_.dot(inv_r_.cwiseProduct(y_));  // sum conj(mu) y / R
    const double q = (mu_.cwiseAbs2().cwiseProduct(inv_r_)).sum();
    switch (nuisance_) {
      case Nuisance::kNone:
        c_ = 1.0;
        break;
      case Nuisance::kPhase:
        c_ = std::abs(corr) > 0.0 ? corr / std::abs(corr) : cd(1.0, 0.0);
        break;
      case Nuisance::kGain:
        c_ = q > 0.0 ? corr / q : cd(1.0, 0.0);
        break;
    }
  }

  double cost_with(cd c) const { return ((y_ - c * mu_).cwiseAbs2().cwiseProduct(inv_r_)).sum(); }

  Eigen::VectorXd gauss_newton_step() const {
    const int p = n_active() + n_nuisance();
    Eigen::MatrixXcd j(mu_.size(), p);
    // zeta columns in the order r, phi[, theta]
    j.col(0) = c_ * jac_.col(0);
    j.col(1) = c_ * jac_.col(2);
    if (free_elevation_) j.col(2) = c_ * jac_.col(1);
    const int o = n_active();
    if (nuisance_ == Nuisance::kPhase) {
      j.col(o) = cd(0.0, 1.0) * c_ * mu_;
    } else if (nuisance_ == Nuisance::kGain) {
      j.col(o) = mu_;
      j.col(o + 1) = cd(0.0, 1.0) * mu_;
    }
    const Eigen::VectorXd sw = inv_r_.cwiseSqrt();
    const Eigen::MatrixXcd jw = sw.asDiagonal() * j;
    const Eigen::VectorXcd ew = sw.asDiagonal() * (y_ - c_ * mu_);
    Eigen::MatrixXd a(2 * jw.rows(), p);
    a.topRows(jw.rows()) = jw.real();
    a.bottomRows(jw.rows()) = jw.imag();
    Eigen::VectorXd b(2 * ew.size());
    b.head(ew.size()) = ew.real();
    b.tail(ew.size()) = ew.imag();
    return a.completeOrthogonalDecomposition().solve(b);
  }

  UePosition shift(const UePosition& z, const Eigen::VectorXd& step, double scale) const {
    UePosition out = z;
    out.r += scale * step[0];
    out.phi += scale * step[1];
    if (free_elevation_) out.theta += scale * step[2];
    return out;
  }

  cd shift_nuisance(const Eigen::VectorXd& step, double scale) const {
    const int o = n_active();
    switch (nuisance_) {
      case Nuisance::kNone:
        return c_;
      case Nuisance::kPhase:
        return c_ * std::polar(1.0, scale * step[o]);
      case Nuisance::kGain:
        return c_ + scale * cd(step[o], step[o + 1]);
    }
    return c_;
  }

  UePosition clamp(UePosition z) const {
    z.r = std::clamp(z.r, box_.lo.r, box_.hi.r);
    z.phi = std::clamp(z.phi, box_.lo.phi, box_.hi.phi);
    z.theta = std::clamp(z.theta, box_.lo.theta, box_.hi.theta);
    return z;
  }

  const ArrayModel& model_;
  const AnalogBeamformer& bf_;
  Eigen::VectorXd inv_r_;
  Eigen::VectorXcd y_;
  Box box_;
  bool free_elevation_;
  double cost_ = 0.0;

  UePosition zeta_;
  Nuisance nuisance_ = Nuisance::kNone;
  cd c_ = 1.0;
  Eigen::VectorXcd mu_;
  Eigen::MatrixXcd jac_;  // columns d mu / d(r, theta, phi)
};

constexpr double kTrustSteps = 2.0;
constexpr int kCycleOffsets = 2;

// Coherent fit started from the range offsets of whole carrier wavelengths
// around `start`; the lowest residual wins, ties to the smallest offset.
UePosition coherent_search(Refiner& refiner, const UePosition& start, double wavelength, int max_iterations) {
  UePosition best = refiner.run(start, Nuisance::kNone, max_iterations);
  double best_cost = refiner.cost();
  for (int k = 1; k <= kCycleOffsets; ++k) {
    for (int sign : {-1, 1}) {
      UePosition s = start;
      s.r += sign * k * wavelength;
      const UePosition z = refiner.run(s, Nuisance::kNone, max_iterations);
      if (refiner.cost() < best_cost) {
        best_cost = refiner.cost();
        best = z;
      }
    }
  }
  return best;
}

}  // namespace

LocalizationResult mle_estimate(const ReceivedBlock& rx, const AnalogBeamformer& bf, const ArrayModel& model,
                                const PilotBlock& pilots, const GridDictionary& dict, const MleOptions& opts) {
  if (rx.y.rows() != bf.n_rf() || rx.y.cols() != pilots.length()) throw ConfigError("received block shape mismatch");
  if (dict.responses.rows() != model.prop.diag.size()) throw ConfigError("grid dictionary built for another panel");
  const Eigen::MatrixXcd gram = pilots.empirical_gram();
  const double scale = gram.diagonal().cwiseAbs().maxCoeff();
  for (Eigen::Index u = 0; u < gram.rows(); ++u) {
    for (Eigen::Index v = 0; v < gram.cols(); ++v) {
      if (u != v && std::abs(gram(u, v)) > 1e-9 * scale) throw ConfigError("MLE needs orthogonal pilots");
    }
  }
  // R_n up to the common factor sigma^2, which no statistic depends on.
  const Eigen::VectorXd weights = noise_covariance(bf, model.prop, 1.0);
  const Eigen::VectorXd inv_r = weights.cwiseInverse();

  const std::size_t cells = dict.grid.size();
  Eigen::MatrixXcd sig(bf.n_rf(), static_cast<Eigen::Index>(cells));
  Eigen::VectorXd q(static_cast<Eigen::Index>(cells));
  for (std::size_t k = 0; k < cells; ++k) {
    const Eigen::Index kk = static_cast<Eigen::Index>(k);
    sig.col(kk) = signature(bf, dict.responses.col(kk).data());
    q[kk] = sig.col(kk).cwiseAbs2().cwiseProduct(inv_r).sum();
  }

  LocalizationResult res;
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    if (!(q[k] > 0.0)) ++res.skipped_cells;
  }
  const std::size_t n_r = dict.grid.ranges.size();
  const std::size_t n_phi = dict.grid.azimuths.size();
  for (int u = 0; u < pilots.n_ue(); ++u) {
    const Eigen::VectorXcd y_hat = rx.y * pilots.sequences.row(u).adjoint() / gram(u, u).real();
    const Eigen::VectorXcd wy = inv_r.cwiseProduct(y_hat);
    // a_k = mu_k^H R^-1 y_hat for every cell
    const Eigen::VectorXcd a = sig.adjoint() * wy;
    std::size_t best = cells;
    double best_stat = -std::numeric_limits<double>::infinity();
    Eigen::MatrixXd surface;
    if (opts.keep_surface) surface = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n_r),
                                                               static_cast<Eigen::Index>(n_phi),
                                                               std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < cells; ++k) {
      const double qk = q[static_cast<Eigen::Index>(k)];
      if (!(qk > 0.0)) continue;
      const double s = statistic(opts.statistic, a[static_cast<Eigen::Index>(k)], qk);
      if (opts.keep_surface && k < n_r * n_phi) {
        surface(static_cast<Eigen::Index>(k / n_phi), static_cast<Eigen::Index>(k % n_phi)) = -s;
      }
      if (s > best_stat) {
        best_stat = s;
        best = k;
      }
    }
    if (best == cells) throw NumericalError("every grid cell has a zero signature");
    UePosition est = dict.grid.cell(best);
    if (opts.polish) {
      Refiner refiner(model, bf, weights, y_hat, trust_box(dict.grid, est, kTrustSteps), opts.polish_elevation);
      switch (opts.statistic) {
        case MleStatistic::kCorrelation:
          est = refiner.run(est, Nuisance::kGain, opts.max_iterations);
          break;
        case MleStatistic::kAmplitude:
          est = refiner.run(est, Nuisance::kPhase, opts.max_iterations);
          est = coherent_search(refiner, est, model.radio.wavelength(), opts.max_iterations);
          break;
        case MleStatistic::kCoherent:
          est = coherent_search(refiner, est, model.radio.wavelength(), opts.max_iterations);
          break;
      }
    }
    res.estimates.push_back(est);
    res.cells.push_back(best);
    if (opts.keep_surface) res.surfaces.push_back(std::move(surface));
  }
  return res;
}

double cartesian_error(const UePosition& estimate, const UePosition& truth) {
  return norm(estimate.cartesian() - truth.cartesian());
}

double rmse(const std::vector<LocalizationResult>& results, const std::vector<UePosition>& truth) {
  if (results.empty()) throw ConfigError("RMSE needs at least one trial");
  double acc = 0.0;
  std::size_t count = 0;
  for (const LocalizationResult& r : results) {
    if (r.estimates.size() != truth.size()) throw ConfigError("estimate count differs from the number of UEs");
    for (std::size_t u = 0; u < truth.size(); ++u) {
      const double e = cartesian_error(r.estimates[u], truth[u]);
      acc += e * e;
      ++count;
    }
  }
  return std::sqrt(acc / static_cast<double>(count));
}

Eigen::MatrixXd error_map(const ArrayModel& model, const AnalogBeamformer& bf, const EstimationGrid& map,
                          const GridDictionary& dict, const MleOptions& mle, const ErrorMapOptions& opts,
                          std::uint64_t seed) {
  map.validate();
  if (opts.repeats < 1) throw ConfigError("error map needs at least one repeat per cell");
  const PilotBlock pilots = make_pilots(1, opts.pilot_length, opts.p_max_mw, PilotMode::kOrthogonal);
  MleOptions single = mle;
  single.keep_surface = false;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(map.ranges.size()), static_cast<Eigen::Index>(map.azimuths.size()));
  for (std::size_t ir = 0; ir < map.ranges.size(); ++ir) {
    for (std::size_t ip = 0; ip < map.azimuths.size(); ++ip) {
      const UePosition ue{map.ranges[ir], map.elevations.front(), map.azimuths[ip]};
      const std::vector<NearFieldChannel> ch{channel_vector(model.radio, model.geom, ue)};
      double acc = 0.0;
      for (int rep = 0; rep < opts.repeats; ++rep) {
        const std::uint64_t s = derive_seed(seed, {ir, ip, static_cast<std::uint64_t>(rep)});
        const ReceivedBlock rx = synthesize_rx(ch, bf, model.prop, pilots, model.radio.noise_power_mw, s);
        const LocalizationResult est = mle_estimate(rx, bf, model, pilots, dict, single);
        const double e = cartesian_error(est.estimates.front(), ue);
        acc += e * e;
      }
      out(static_cast<Eigen::Index>(ir), static_cast<Eigen::Index>(ip)) = std::sqrt(acc / opts.repeats);
    }
  }
  return out;
}

}  // namespace dmaloc

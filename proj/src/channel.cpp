#include "dmaloc/channel.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "dmaloc/errors.hpp"
#include "dmaloc/units.hpp"

namespace dmaloc {

using cd = std::complex<double>;

double RadioConfig::wavelength() const { return kSpeedOfLight / carrier_hz; }
double RadioConfig::wavenumber() const { return 2.0 * kPi / wavelength(); }

RadioConfig RadioConfig::with_thermal_noise(double carrier_hz, double bandwidth_hz, double kappa_abs, double b_gain) {
  RadioConfig cfg;
  cfg.carrier_hz = carrier_hz;
  cfg.bandwidth_hz = bandwidth_hz;
  cfg.kappa_abs = kappa_abs;
  cfg.b_gain = b_gain;
  cfg.noise_power_mw = dbm_to_mw(thermal_noise_dbm(bandwidth_hz));
  cfg.validate();
  return cfg;
}

void RadioConfig::validate() const {
  if (!(carrier_hz > 0.0)) throw ConfigError("carrier frequency must be positive");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth must be positive");
  if (!(kappa_abs >= 0.0)) throw ConfigError("absorption coefficient must be non-negative");
  if (!(b_gain >= 0.0)) throw ConfigError("radiation-profile exponent must be non-negative");
  if (!(noise_power_mw > 0.0)) throw ConfigError("noise power must be positive");
}

const Eigen::VectorXcd& NearFieldChannel::derivative(int param) const {
  switch (param) {
    case 0:
      return dh_dr;
    case 1:
      return dh_dtheta;
    case 2:
      return dh_dphi;
    default:
      throw std::out_of_range("channel derivative index must be 0, 1 or 2");
  }
}

double radiation_profile(double theta, double b_gain) {
  const double half_pi = 0.5 * kPi;
  if (std::abs(theta) > half_pi) return 0.0;
  if (b_gain > 0.0 && std::abs(theta) == half_pi) return 0.0;
  return 2.0 * (b_gain + 1.0) * std::pow(std::cos(theta), b_gain);
}

double attenuation(const RadioConfig& cfg, double distance, double elem_elevation) {
  if (!(distance > 0.0)) throw DegenerateGeometry("attenuation needs a positive distance");
  const double lambda = cfg.wavelength();
  return std::sqrt(radiation_profile(elem_elevation, cfg.b_gain)) * lambda / (4.0 * kPi * distance) *
         std::exp(-0.5 * cfg.kappa_abs * distance);
}

namespace {

struct ElementTerms {
  Vec3 delta;     // UE minus element
  double dist;    // r_{u,i,n}
  double offset;  // (n-1) d_e - r cos(theta)
  double elev;    // theta_{u,i,n}
  cd h;
};

// UE position in extended precision. The carrier phase spans 10^4 rad at
// meter range, so the distance and its wavelength fraction are carried in
// long double end to end.
struct ExtPoint {
  long double x, y, z;
};

ExtPoint ext_point(const UePosition& ue) {
  const long double r = ue.r, th = ue.theta, ph = ue.phi;
  return {r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph), r * std::cos(th)};
}

ElementTerms element_terms(const RadioConfig& cfg, const DmaGeometry& geom, const ExtPoint& ue, ElementIndex idx) {
  ElementTerms t;
  const long double dx = ue.x - (idx.i - 1) * static_cast<long double>(geom.d_rf);
  const long double dy = ue.y;
  const long double dz = ue.z - (idx.n - 1) * static_cast<long double>(geom.d_e);
  t.delta = {static_cast<double>(dx), static_cast<double>(dy), static_cast<double>(dz)};
  const long double dist_ext = std::sqrt(dx * dx + dy * dy + dz * dz);
  t.dist = static_cast<double>(dist_ext);
  if (!(t.dist > 0.0)) throw DegenerateGeometry("UE coincides with a metamaterial element");
  t.offset = static_cast<double>(-dz);
  t.elev = std::asin(std::min(1.0, std::abs(t.offset) / t.dist));
  const double amp = attenuation(cfg, t.dist, t.elev);
  const long double cycles = std::fmod(dist_ext / static_cast<long double>(cfg.wavelength()), 1.0L);
  t.h = std::polar(amp, 2.0 * kPi * static_cast<double>(cycles));
  return t;
}

}  // namespace

NearFieldChannel channel_vector(const RadioConfig& cfg, const DmaGeometry& geom, const UePosition& ue) {
  const ExtPoint p = ext_point(ue);
  NearFieldChannel ch;
  ch.h.resize(geom.total_elements());
  for (int k = 0; k < geom.total_elements(); ++k) {
    ch.h[k] = element_terms(cfg, geom, p, geom.element_at(static_cast<std::size_t>(k))).h;
  }
  return ch;
}

NearFieldChannel channel_derivatives(const RadioConfig& cfg, const DmaGeometry& geom, const UePosition& ue,
                                     const DerivativeOptions& opts) {
  const ExtPoint p = ext_point(ue);
  const double st = std::sin(ue.theta), ct = std::cos(ue.theta);
  const double sp = std::sin(ue.phi), cp = std::cos(ue.phi);
  // d(UE cartesian)/d(r, theta, phi)
  const Vec3 dp[3] = {
      {st * cp, st * sp, ct},
      {ue.r * ct * cp, ue.r * ct * sp, -ue.r * st},
      {-ue.r * st * sp, ue.r * st * cp, 0.0},
  };
  const double k0 = cfg.wavenumber();
  const double b = cfg.b_gain;

  const int n = geom.total_elements();
  NearFieldChannel ch;
  ch.h.resize(n);
  ch.dh_dr.resize(n);
  ch.dh_dtheta.resize(n);
  ch.dh_dphi.resize(n);
  ch.has_derivatives = true;
  Eigen::VectorXcd* out[3] = {&ch.dh_dr, &ch.dh_dtheta, &ch.dh_dphi};

  for (int k = 0; k < n; ++k) {
    const ElementIndex idx = geom.element_at(static_cast<std::size_t>(k));
    const ElementTerms t = element_terms(cfg, geom, p, idx);
    ch.h[k] = t.h;
    const double ex = (idx.i - 1) * geom.d_rf;

    const double abs_off = std::abs(t.offset);
    double sgn = 0.0;
    if (t.offset > 0.0) sgn = 1.0;
    if (t.offset < 0.0) sgn = -1.0;
    if (abs_off < opts.kink_eps) ch.near_kink = true;

    const double s = std::min(1.0, abs_off / t.dist);             // sin(theta_k)
    const double c = std::hypot(t.delta.x, t.delta.y) / t.dist;   // cos(theta_k)
    if (c == 0.0) ch.degenerate_profile = true;

    for (int q = 0; q < 3; ++q) {
      const Vec3& dq = dp[q];
      // For phi the UE terms cancel: d(dist)/d(phi) = r sin(theta) sin(phi) x_elem / dist.
      const double d_dist = q == 2 ? ue.r * st * sp * ex / t.dist
                                   : (t.delta.x * dq.x + t.delta.y * dq.y + t.delta.z * dq.z) / t.dist;
      // offset = (n-1) d_e - r cos(theta): its derivative is -d(UE z)
      const double d_offset = -dq.z;
      const double d_sin = sgn * d_offset / t.dist - abs_off * d_dist / (t.dist * t.dist);
      double d_log_profile = 0.0;
      if (b > 0.0 && c > 0.0) {
        const double d_elev = d_sin / c;
        d_log_profile = -0.5 * b * (s / c) * d_elev;
      }
      const double d_log_amp = d_log_profile - d_dist / t.dist - 0.5 * cfg.kappa_abs * d_dist;
      (*out[q])[k] = t.h * cd(d_log_amp, k0 * d_dist);
    }
  }
  return ch;
}

PropagationMatrix propagation_matrix(const DmaGeometry& geom) {
  geom.validate();
  PropagationMatrix pm;
  pm.n_rf = geom.n_rf;
  pm.n_e = geom.n_e;
  pm.diag.resize(geom.total_elements());
  for (int i = 0; i < geom.n_rf; ++i) {
    const cd gamma(geom.alpha_wg[i], geom.beta_wg[i]);
    for (int e = 0; e < geom.n_e; ++e) {
      const double rho = e * geom.d_e;
      pm.diag[i * geom.n_e + e] = std::exp(-rho * gamma);
    }
  }
  return pm;
}

}  // namespace dmaloc

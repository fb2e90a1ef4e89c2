#pragma once

// Near-field line-of-sight channel between a single-antenna UE and every
// metamaterial of the DMA, its analytic derivatives with respect to the UE's
// spherical coordinates, and the in-waveguide propagation matrix.

#include <Eigen/Dense>

#include "dmaloc/geometry.hpp"

namespace dmaloc {

struct RadioConfig {
  double carrier_hz = 120e9;
  double bandwidth_hz = 150e3;
  double kappa_abs = 0.0033;      // molecular absorption, 1/m
  double b_gain = 2.0;            // radiation-profile exponent
  double noise_power_mw = 0.0;    // sigma^2

  double wavelength() const;
  double wavenumber() const;  // 2 pi / lambda

  // Noise power set from the -174 dBm/Hz thermal floor over `bandwidth_hz`.
  static RadioConfig with_thermal_noise(double carrier_hz, double bandwidth_hz, double kappa_abs, double b_gain);

  void validate() const;
};

struct NearFieldChannel {
  Eigen::VectorXcd h;
  Eigen::VectorXcd dh_dr;
  Eigen::VectorXcd dh_dtheta;
  Eigen::VectorXcd dh_dphi;
  bool has_derivatives = false;
  // Some element had |(n-1) d_e - r cos(theta)| below the kink tolerance;
  // sign(0) = 0 was used there.
  bool near_kink = false;
  // Some element sat on its own boresight normal with cos(theta_k) = 0.
  bool degenerate_profile = false;

  const Eigen::VectorXcd& derivative(int param) const;  // 0:r 1:theta 2:phi
};

struct PropagationMatrix {
  Eigen::VectorXcd diag;  // length N
  int n_rf = 0;
  int n_e = 0;

  // Slice p_i for 0-based microstrip i.
  Eigen::VectorXcd::ConstSegmentReturnType microstrip(int i) const { return diag.segment(i * n_e, n_e); }
};

struct DerivativeOptions {
  double kink_eps = 1e-9;  // meters
};

// 2(b+1) cos^b(theta) on [-pi/2, pi/2], else 0.
double radiation_profile(double theta, double b_gain);

// sqrt(F(theta)) * lambda / (4 pi d) * exp(-kappa d / 2). Throws
// DegenerateGeometry for non-positive distance.
double attenuation(const RadioConfig& cfg, double distance, double elem_elevation);

NearFieldChannel channel_vector(const RadioConfig& cfg, const DmaGeometry& geom, const UePosition& ue);

NearFieldChannel channel_derivatives(const RadioConfig& cfg, const DmaGeometry& geom, const UePosition& ue,
                                     const DerivativeOptions& opts = {});

PropagationMatrix propagation_matrix(const DmaGeometry& geom);

}  // namespace dmaloc

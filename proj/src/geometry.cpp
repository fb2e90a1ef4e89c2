#include "dmaloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dmaloc/errors.hpp"
#include "dmaloc/units.hpp"

namespace dmaloc {

double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

Vec3 UePosition::cartesian() const {
  const double st = std::sin(theta);
  return {r * st * std::cos(phi), r * st * std::sin(phi), r * std::cos(theta)};
}

void UePosition::validate() const {
  if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("UE range must be positive, got " + std::to_string(r));
  if (!(theta >= 0.0 && theta <= kPi)) throw ConfigError("UE elevation outside [0, pi]: " + std::to_string(theta));
  if (!(phi > -kPi && phi <= kPi)) throw ConfigError("UE azimuth outside (-pi, pi]: " + std::to_string(phi));
}

DmaGeometry DmaGeometry::uniform(int n_rf, int n_e, double d_rf, double d_e, double alpha, double beta) {
  DmaGeometry g;
  g.n_rf = n_rf;
  g.n_e = n_e;
  g.d_rf = d_rf;
  g.d_e = d_e;
  g.alpha_wg.assign(static_cast<std::size_t>(std::max(n_rf, 0)), alpha);
  g.beta_wg.assign(static_cast<std::size_t>(std::max(n_rf, 0)), beta);
  g.validate();
  return g;
}

void DmaGeometry::validate() const {
  if (n_rf < 1 || n_e < 1) throw ConfigError("DMA needs n_rf >= 1 and n_e >= 1");
  if (!(d_rf > 0.0) || !(d_e > 0.0)) throw ConfigError("DMA spacings must be positive");
  if (alpha_wg.size() != static_cast<std::size_t>(n_rf) || beta_wg.size() != static_cast<std::size_t>(n_rf)) {
    throw ConfigError("waveguide constants must have one entry per microstrip");
  }
  for (double a : alpha_wg) {
    if (!(a >= 0.0)) throw ConfigError("waveguide attenuation must be non-negative");
  }
}

std::size_t DmaGeometry::flat_index(ElementIndex idx) const {
  if (idx.i < 1 || idx.i > n_rf || idx.n < 1 || idx.n > n_e) {
    throw ConfigError("element index (" + std::to_string(idx.i) + "," + std::to_string(idx.n) +
                      ") out of range for " + std::to_string(n_rf) + "x" + std::to_string(n_e) + " panel");
  }
  return static_cast<std::size_t>(idx.i - 1) * static_cast<std::size_t>(n_e) + static_cast<std::size_t>(idx.n - 1);
}

ElementIndex DmaGeometry::element_at(std::size_t flat) const {
  return {static_cast<int>(flat / static_cast<std::size_t>(n_e)) + 1,
          static_cast<int>(flat % static_cast<std::size_t>(n_e)) + 1};
}

double DmaGeometry::diagonal() const {
  const double wx = (n_rf - 1) * d_rf;
  const double wz = (n_e - 1) * d_e;
  return std::hypot(wx, wz);
}

Vec3 element_position(const DmaGeometry& geom, ElementIndex idx) {
  geom.flat_index(idx);
  return {(idx.i - 1) * geom.d_rf, 0.0, (idx.n - 1) * geom.d_e};
}

double element_arc_position(const DmaGeometry& geom, ElementIndex idx) {
  geom.flat_index(idx);
  return (idx.n - 1) * geom.d_e;
}

double ue_element_distance(const DmaGeometry& geom, const UePosition& ue, ElementIndex idx) {
  return norm(ue.cartesian() - element_position(geom, idx));
}

double ue_element_elevation(const DmaGeometry& geom, const UePosition& ue, ElementIndex idx) {
  const double dist = ue_element_distance(geom, ue, idx);
  if (!(dist > 0.0)) throw DegenerateGeometry("UE coincides with a metamaterial element");
  const double offset = std::abs((idx.n - 1) * geom.d_e - ue.r * std::cos(ue.theta));
  return std::asin(std::min(1.0, offset / dist));
}

}  // namespace dmaloc

#pragma once

// DMA panel layout and UE-to-element geometry.
//
// The panel lies in the xz-plane with the first microstrip at the origin.
// Microstrips advance along x (spacing d_rf), elements within a microstrip
// advance along z (spacing d_e). UE positions are spherical (r, theta, phi)
// about the origin with theta measured from +z.

#include <cstddef>
#include <vector>

namespace dmaloc {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
double norm(const Vec3& v);

struct UePosition {
  double r = 1.0;      // meters, > 0
  double theta = 0.0;  // elevation from +z, radians in [0, pi]
  double phi = 0.0;    // azimuth, radians in (-pi, pi]

  Vec3 cartesian() const;
  // Throws ConfigError on invariant violation.
  void validate() const;
};

// 1-based (microstrip, element) pair.
struct ElementIndex {
  int i = 1;
  int n = 1;
};

struct DmaGeometry {
  int n_rf = 1;
  int n_e = 1;
  double d_rf = 0.0;  // meters
  double d_e = 0.0;   // meters
  // Per-microstrip waveguide attenuation (1/m) and wavenumber (rad/m); size n_rf.
  std::vector<double> alpha_wg;
  std::vector<double> beta_wg;

  // Same waveguide constants on every microstrip.
  static DmaGeometry uniform(int n_rf, int n_e, double d_rf, double d_e, double alpha, double beta);

  int total_elements() const { return n_rf * n_e; }
  // 0-based flat index (i-1)*n_e + (n-1). Throws ConfigError when out of range.
  std::size_t flat_index(ElementIndex idx) const;
  ElementIndex element_at(std::size_t flat) const;
  // (n_rf - 1) d_rf by (n_e - 1) d_e rectangle diagonal.
  double diagonal() const;

  void validate() const;
};

Vec3 element_position(const DmaGeometry& geom, ElementIndex idx);

// Position of element n along its microstrip, (n-1) d_e.
double element_arc_position(const DmaGeometry& geom, ElementIndex idx);

double ue_element_distance(const DmaGeometry& geom, const UePosition& ue, ElementIndex idx);

// asin(|(n-1) d_e - r cos(theta)| / distance), in [0, pi/2]. Throws
// DegenerateGeometry when the UE sits on the element.
double ue_element_elevation(const DmaGeometry& geom, const UePosition& ue, ElementIndex idx);

}  // namespace dmaloc

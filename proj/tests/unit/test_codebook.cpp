#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "dmaloc/codebook.hpp"
#include "dmaloc/errors.hpp"
#include "oracles.hpp"

namespace {

using namespace dmaloc;
using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
const cd kJ(0.0, 1.0);

struct Panel {
  RadioConfig radio = RadioConfig::with_thermal_noise(120e9, 150e3, 0.0033, 2.0);
  DmaGeometry geom;
  Panel() {
    const double l = radio.wavelength();
    geom = DmaGeometry::uniform(4, 32, 0.5 * l, 0.2 * l, 0.0, radio.wavenumber());
  }
};

void expect_lorentzian(const VectorCodebook& cb) {
  for (const Eigen::VectorXcd& v : cb.entries) {
    for (Eigen::Index k = 0; k < v.size(); ++k) EXPECT_LE(std::abs(std::abs(v[k] - 0.5 * kJ) - 0.5), 1e-12);
  }
}

TEST(Codebook, LorentzianWeights) {
  EXPECT_NEAR(std::abs(lorentzian(kPi / 2).value - kJ), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(lorentzian(-kPi / 2).value), 0.0, 1e-15);
  const cd mid = lorentzian(0.0).value;
  EXPECT_NEAR(std::abs(mid - cd(0.5, 0.5)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(mid), std::sqrt(2.0) / 2, 1e-15);
  EXPECT_THROW(lorentzian(2.0), ConfigError);
  EXPECT_NEAR(lorentzian_violation(cd(0.5, 0.5)), 0.0, 1e-15);
  EXPECT_NEAR(lorentzian_violation(cd(0.0, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(lorentzian_violation(cd(0.5, 0.0)), std::sqrt(0.5) - 0.5, 1e-15);
}

TEST(Codebook, PhaseSets) {
  const std::vector<double> one = quantized_phase_set(1);
  ASSERT_EQ(one.size(), 2u);
  EXPECT_DOUBLE_EQ(one[0], -kPi / 2);
  EXPECT_DOUBLE_EQ(one[1], kPi / 2);
  const std::vector<double> two = quantized_phase_set(2);
  const std::vector<double> want = {-kPi / 2, -kPi / 6, kPi / 6, kPi / 2};
  ASSERT_EQ(two.size(), 4u);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(two[k], want[k], 1e-15);
  for (int bits = 1; bits <= 6; ++bits) {
    const std::vector<double> s = quantized_phase_set(bits);
    ASSERT_EQ(s.size(), std::size_t{1} << bits);
    EXPECT_DOUBLE_EQ(s.front(), -kPi / 2);
    EXPECT_DOUBLE_EQ(s.back(), kPi / 2);
    for (std::size_t k = 0; k < s.size(); ++k) {
      EXPECT_EQ(s[k], -s[s.size() - 1 - k]);
      if (k > 0) EXPECT_NEAR(s[k] - s[k - 1], kPi / static_cast<double>(s.size() - 1), 1e-14);
    }
  }
  EXPECT_THROW(quantized_phase_set(0), ConfigError);
}

TEST(Codebook, WrapPhase) {
  EXPECT_DOUBLE_EQ(wrap_phase(0.3), 0.3);
  EXPECT_NEAR(wrap_phase(0.3 + 6 * kPi), 0.3, 1e-12);
  EXPECT_DOUBLE_EQ(wrap_phase(kPi), -kPi);
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const double w = wrap_phase(oracle::uniform(rng, -100, 100));
    EXPECT_GE(w, -kPi);
    EXPECT_LT(w, kPi);
  }
}

TEST(Codebook, CompensatedWeight) {
  for (double phase : {-1.2, -0.3, 0.0, 0.9, 1.5}) {
    EXPECT_NEAR(std::abs(compensated_weight(phase, 0.0, 2500.0).value - lorentzian(phase).value), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(compensated_weight(phase, 2 * kPi / 2500.0, 2500.0).value - lorentzian(phase).value), 0.0,
                1e-12);
  }
  const CompensatedWeight w = compensated_weight(0.0, kPi / 4 / 2500.0, 2500.0);
  EXPECT_NEAR(std::abs(w.value - 0.5 * (kJ + std::polar(1.0, kPi / 4))), 0.0, 1e-15);
  EXPECT_FALSE(w.clamped);
  const CompensatedWeight c = compensated_weight(1.4, 0.5 / 2500.0, 2500.0);
  EXPECT_TRUE(c.clamped);
  EXPECT_DOUBLE_EQ(c.phase, kPi / 2);
  const CompensatedWeight d = compensated_weight(-1.4, 0.5 / 2500.0 * -1.0, 2500.0);
  EXPECT_TRUE(d.clamped);
  EXPECT_DOUBLE_EQ(d.phase, -kPi / 2);
}

TEST(Codebook, SingleFocalPointQuantizesFocusingPhases) {
  const Panel p;
  const UePosition f{5.0, kPi / 6, 0.6};
  const VectorCodebook cb = build_codebook(p.geom, p.radio, {f}, 3);
  ASSERT_EQ(cb.size(), 1u);
  const Eigen::VectorXcd h = oracle::channel(p.radio, p.geom, f);
  const std::vector<double> levels = quantized_phase_set(3);
  const int ref = cb.reference_microstrip;
  for (int n = 0; n < p.geom.n_e; ++n) {
    double combined = std::remainder(-std::arg(h[ref * p.geom.n_e + n]) + n * p.geom.d_e * p.geom.beta_wg[ref],
                                     2 * kPi);
    combined = std::clamp(combined, -kPi / 2, kPi / 2);
    double best = levels[0];
    for (double l : levels) {
      if (std::abs(l - combined) < std::abs(best - combined)) best = l;
    }
    EXPECT_NEAR(std::abs(cb.entries[0][n] - 0.5 * (kJ + std::polar(1.0, best))), 0.0, 1e-12) << n;
  }
}

TEST(Codebook, DuplicatesCollapse) {
  const Panel p;
  const UePosition f{5.0, kPi / 6, 0.6};
  EXPECT_EQ(build_codebook(p.geom, p.radio, {f, f, f}, 3).size(), 1u);
}

TEST(Codebook, DefaultGridSizeAndConstraint) {
  const Panel p;
  const std::vector<UePosition> grid = focal_grid(1.0, 12.0, 12, kPi / 180, kPi / 2, 16, kPi / 6);
  ASSERT_EQ(grid.size(), 192u);
  const VectorCodebook cb = build_codebook(p.geom, p.radio, grid, 3);
  EXPECT_GE(cb.size(), 1u);
  EXPECT_LE(cb.size(), 192u);
  EXPECT_EQ(cb.n_e(), 32);
  expect_lorentzian(cb);
}

TEST(Codebook, FocalGridEndpoints) {
  const std::vector<UePosition> g = focal_grid(1.0, 12.0, 12, 0.1, 1.5, 8, 0.5);
  ASSERT_EQ(g.size(), 96u);
  double rmin = 1e9, rmax = 0, pmin = 1e9, pmax = -1e9;
  for (const UePosition& u : g) {
    rmin = std::min(rmin, u.r);
    rmax = std::max(rmax, u.r);
    pmin = std::min(pmin, u.phi);
    pmax = std::max(pmax, u.phi);
    EXPECT_EQ(u.theta, 0.5);
  }
  EXPECT_DOUBLE_EQ(rmin, 1.0);
  EXPECT_DOUBLE_EQ(rmax, 12.0);
  EXPECT_DOUBLE_EQ(pmin, 0.1);
  EXPECT_DOUBLE_EQ(pmax, 1.5);
}

TEST(Codebook, OrderInvariant) {
  const Panel p;
  std::vector<UePosition> grid = focal_grid(1.0, 12.0, 6, 0.1, 1.5, 6, kPi / 6);
  const VectorCodebook a = build_codebook(p.geom, p.radio, grid, 3);
  std::mt19937_64 rng(9);
  std::shuffle(grid.begin(), grid.end(), rng);
  const VectorCodebook b = build_codebook(p.geom, p.radio, grid, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a.entries[k], b.entries[k]);
}

TEST(Codebook, Errors) {
  const Panel p;
  EXPECT_THROW(build_codebook(p.geom, p.radio, {}, 3), ConfigError);
  EXPECT_THROW(build_codebook(p.geom, p.radio, {{5.0, 0.5, 0.5}}, 0), ConfigError);
}

TEST(Codebook, JsonRoundTrip) {
  const Panel p;
  const VectorCodebook cb = build_codebook(p.geom, p.radio, focal_grid(1.0, 12.0, 4, 0.1, 1.5, 4, kPi / 6), 3);
  const VectorCodebook back = codebook_from_json(nlohmann::json::parse(codebook_to_json(cb).dump()));
  EXPECT_EQ(back.bits, cb.bits);
  EXPECT_EQ(back.reference_microstrip, cb.reference_microstrip);
  EXPECT_EQ(back.focal_grid.size(), cb.focal_grid.size());
  ASSERT_EQ(back.size(), cb.size());
  for (std::size_t k = 0; k < cb.size(); ++k) EXPECT_EQ(back.entries[k], cb.entries[k]);
  EXPECT_THROW(codebook_from_json(nlohmann::json{{"model", "nope"}}), ConfigError);
}

TEST(Codebook, DftColumns) {
  const VectorCodebook cb = dft_codebook(8);
  ASSERT_EQ(cb.size(), 8u);
  EXPECT_EQ(cb.model, WeightModel::kPhaseShifter);
  for (std::size_t a = 0; a < 8; ++a) {
    for (Eigen::Index k = 0; k < 8; ++k) EXPECT_NEAR(std::abs(cb.entries[a][k]), 1.0, 1e-15);
    for (std::size_t b = a + 1; b < 8; ++b) EXPECT_NEAR(std::abs(cb.entries[a].dot(cb.entries[b])), 0.0, 1e-12);
  }
}

TEST(Codebook, BeamformerFromCodebook) {
  const Panel p;
  const VectorCodebook cb = build_codebook(p.geom, p.radio, focal_grid(1.0, 12.0, 4, 0.1, 1.5, 4, kPi / 6), 3);
  const AnalogBeamformer bf = AnalogBeamformer::from_codebook(cb, {0, 1, 0, 1});
  EXPECT_EQ(bf.n_rf(), 4);
  const Eigen::MatrixXcd d = bf.dense();
  ASSERT_EQ(d.rows(), 128);
  ASSERT_EQ(d.cols(), 4);
  EXPECT_EQ(d.block(32, 1, 32, 1), cb.entries[1]);
  EXPECT_EQ(d.block(0, 1, 32, 1).norm(), 0.0);
  EXPECT_THROW(AnalogBeamformer::from_codebook(cb, {0, 99, 0, 0}), ConfigError);
}

}  // namespace

#include "dmaloc/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "dmaloc/errors.hpp"
#include "dmaloc/units.hpp"

namespace dmaloc {

using cd = std::complex<double>;
using nlohmann::json;

namespace {
constexpr double kHalfPi = 0.5 * kPi;
constexpr double kPhaseSlack = 1e-12;
const cd kJ{0.0, 1.0};
}  // namespace

LorentzianWeight lorentzian(double phase) {
  if (!(phase >= -kHalfPi - kPhaseSlack && phase <= kHalfPi + kPhaseSlack)) {
    throw ConfigError("Lorentzian phase outside [-pi/2, pi/2]: " + std::to_string(phase));
  }
  return {0.5 * (kJ + std::polar(1.0, phase)), phase};
}

double lorentzian_violation(cd w) { return std::abs(std::abs(w - 0.5 * kJ) - 0.5); }

std::vector<double> quantized_phase_set(int bits) {
  if (bits < 1 || bits > 16) throw ConfigError("phase bit depth must be in [1, 16]");
  const int levels = 1 << bits;
  std::vector<double> out(static_cast<std::size_t>(levels));
  // (2k - (L-1)) / (L-1) is exactly antisymmetric, so the set is symmetric about 0.
  for (int k = 0; k < levels; ++k) {
    out[static_cast<std::size_t>(k)] = static_cast<double>(2 * k - (levels - 1)) / (levels - 1) * kHalfPi;
  }
  return out;
}

double wrap_phase(double phase) {
  double w = std::fmod(phase + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  w -= kPi;
  if (w >= kPi) w -= 2.0 * kPi;
  return w;
}

CompensatedWeight compensated_weight(double phase, double rho, double beta) {
  CompensatedWeight out;
  double combined = wrap_phase(phase + rho * beta);
  if (combined > kHalfPi) {
    combined = kHalfPi;
    out.clamped = true;
  } else if (combined < -kHalfPi) {
    combined = -kHalfPi;
    out.clamped = true;
  }
  out.phase = combined;
  out.value = 0.5 * (kJ + std::polar(1.0, combined));
  return out;
}

std::vector<UePosition> focal_grid(double r_min, double r_max, int n_ranges, double phi_min, double phi_max,
                                   int n_azimuths, double theta) {
  if (n_ranges < 1 || n_azimuths < 1) throw ConfigError("focal grid needs at least one range and one azimuth");
  auto axis = [](double lo, double hi, int n, int k) { return n == 1 ? lo : lo + (hi - lo) * k / (n - 1); };
  std::vector<UePosition> out;
  out.reserve(static_cast<std::size_t>(n_ranges) * static_cast<std::size_t>(n_azimuths));
  for (int a = 0; a < n_ranges; ++a) {
    for (int b = 0; b < n_azimuths; ++b) {
      out.push_back({axis(r_min, r_max, n_ranges, a), theta, axis(phi_min, phi_max, n_azimuths, b)});
    }
  }
  return out;
}

namespace {

int nearest_level(const std::vector<double>& levels, double phase) {
  int best = 0;
  double best_gap = std::abs(levels[0] - phase);
  for (std::size_t k = 1; k < levels.size(); ++k) {
    const double gap = std::abs(levels[k] - phase);
    if (gap < best_gap) {
      best_gap = gap;
      best = static_cast<int>(k);
    }
  }
  return best;
}

}  // namespace

VectorCodebook build_codebook(const DmaGeometry& geom, const RadioConfig& cfg, std::vector<UePosition> focal_points,
                              int bits) {
  if (focal_points.empty()) throw ConfigError("codebook focal grid is empty");
  const std::vector<double> levels = quantized_phase_set(bits);
  const int ref = (geom.n_rf - 1) / 2;

  std::sort(focal_points.begin(), focal_points.end(), [](const UePosition& a, const UePosition& b) {
    if (a.r != b.r) return a.r < b.r;
    if (a.theta != b.theta) return a.theta < b.theta;
    return a.phi < b.phi;
  });

  VectorCodebook cb;
  cb.model = WeightModel::kLorentzian;
  cb.bits = bits;
  cb.reference_microstrip = ref;
  cb.focal_grid = focal_points;

  // Quantized level indices per element; std::map gives dedup plus a
  // canonical order.
  std::map<std::vector<int>, int> unique;
  for (const UePosition& f : focal_points) {
    f.validate();
    const NearFieldChannel ch = channel_vector(cfg, geom, f);
    std::vector<int> idx(static_cast<std::size_t>(geom.n_e));
    for (int n = 0; n < geom.n_e; ++n) {
      const std::size_t k = static_cast<std::size_t>(ref * geom.n_e + n);
      // Conjugate-phase focusing on the product p_{i,n} h_{i,n}; for a lossless
      // guide this is -arg(h) + rho * beta.
      const double focus = -std::arg(ch.h[static_cast<Eigen::Index>(k)]);
      const double rho = n * geom.d_e;
      const CompensatedWeight cw = compensated_weight(focus, rho, geom.beta_wg[static_cast<std::size_t>(ref)]);
      if (cw.clamped) ++cb.clamped_elements;
      idx[static_cast<std::size_t>(n)] = nearest_level(levels, cw.phase);
    }
    unique.emplace(std::move(idx), 0);
  }

  cb.entries.reserve(unique.size());
  for (const auto& [idx, unused] : unique) {
    Eigen::VectorXcd v(geom.n_e);
    for (int n = 0; n < geom.n_e; ++n) v[n] = lorentzian(levels[static_cast<std::size_t>(idx[static_cast<std::size_t>(n)])]).value;
    cb.entries.push_back(std::move(v));
  }
  return cb;
}

VectorCodebook dft_codebook(int n_e) {
  if (n_e < 1) throw ConfigError("DFT codebook size must be positive");
  VectorCodebook cb;
  cb.model = WeightModel::kPhaseShifter;
  cb.bits = 0;
  cb.entries.reserve(static_cast<std::size_t>(n_e));
  for (int m = 0; m < n_e; ++m) {
    Eigen::VectorXcd v(n_e);
    for (int n = 0; n < n_e; ++n) {
      // reduce m*n mod n_e first so the phase argument stays small
      const long long mn = (static_cast<long long>(m) * n) % n_e;
      v[n] = std::polar(1.0, -2.0 * kPi * static_cast<double>(mn) / n_e);
    }
    cb.entries.push_back(std::move(v));
  }
  return cb;
}

json codebook_to_json(const VectorCodebook& cb) {
  json doc;
  doc["model"] = cb.model == WeightModel::kLorentzian ? "lorentzian" : "phase_shifter";
  doc["bits"] = cb.bits;
  doc["reference_microstrip"] = cb.reference_microstrip;
  doc["clamped_elements"] = cb.clamped_elements;
  json grid = json::array();
  for (const UePosition& f : cb.focal_grid) grid.push_back({{"r", f.r}, {"theta", f.theta}, {"phi", f.phi}});
  doc["focal_grid"] = std::move(grid);
  json vectors = json::array();
  for (const Eigen::VectorXcd& v : cb.entries) {
    json row = json::array();
    for (Eigen::Index n = 0; n < v.size(); ++n) row.push_back({v[n].real(), v[n].imag()});
    vectors.push_back(std::move(row));
  }
  doc["vectors"] = std::move(vectors);
  return doc;
}

VectorCodebook codebook_from_json(const json& doc) {
  try {
    VectorCodebook cb;
    const std::string model = doc.value("model", std::string("lorentzian"));
    if (model == "lorentzian") {
      cb.model = WeightModel::kLorentzian;
    } else if (model == "phase_shifter") {
      cb.model = WeightModel::kPhaseShifter;
    } else {
      throw ConfigError("unknown codebook model '" + model + "'");
    }
    cb.bits = doc.at("bits").get<int>();
    cb.reference_microstrip = doc.value("reference_microstrip", 0);
    cb.clamped_elements = doc.value("clamped_elements", 0);
    for (const json& f : doc.at("focal_grid")) {
      cb.focal_grid.push_back({f.at("r").get<double>(), f.at("theta").get<double>(), f.at("phi").get<double>()});
    }
    for (const json& row : doc.at("vectors")) {
      Eigen::VectorXcd v(static_cast<Eigen::Index>(row.size()));
      for (std::size_t n = 0; n < row.size(); ++n) {
        v[static_cast<Eigen::Index>(n)] = cd(row[n].at(0).get<double>(), row[n].at(1).get<double>());
      }
      if (!cb.entries.empty() && v.size() != cb.entries.front().size()) {
        throw ConfigError("codebook vectors have inconsistent lengths");
      }
      cb.entries.push_back(std::move(v));
    }
    if (cb.entries.empty()) throw ConfigError("codebook has no vectors");
    return cb;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed codebook document: ") + e.what());
  }
}

Eigen::MatrixXcd AnalogBeamformer::dense() const {
  const int nrf = n_rf();
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(nrf) * n_e, nrf);
  for (int i = 0; i < nrf; ++i) w.block(static_cast<Eigen::Index>(i) * n_e, i, n_e, 1) = weights[static_cast<std::size_t>(i)];
  return w;
}

AnalogBeamformer AnalogBeamformer::from_codebook(const VectorCodebook& cb, const std::vector<int>& indices) {
  AnalogBeamformer bf;
  bf.n_e = cb.n_e();
  for (int idx : indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= cb.size()) throw ConfigError("codeword index out of range");
    bf.weights.push_back(cb.entries[static_cast<std::size_t>(idx)]);
  }
  return bf;
}

AnalogBeamformer AnalogBeamformer::constant(int n_rf, int n_e, cd value) {
  AnalogBeamformer bf;
  bf.n_e = n_e;
  bf.weights.assign(static_cast<std::size_t>(n_rf), Eigen::VectorXcd::Constant(n_e, value));
  return bf;
}

json beamformer_to_json(const AnalogBeamformer& bf) {
  json doc;
  doc["n_rf"] = bf.n_rf();
  doc["n_e"] = bf.n_e;
  json ws = json::array();
  for (const Eigen::VectorXcd& w : bf.weights) {
    json row = json::array();
    for (Eigen::Index n = 0; n < w.size(); ++n) row.push_back({w[n].real(), w[n].imag()});
    ws.push_back(std::move(row));
  }
  doc["weights"] = std::move(ws);
  return doc;
}

}  // namespace dmaloc

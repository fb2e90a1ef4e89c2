#include "dmaloc/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dmaloc/errors.hpp"
#include "dmaloc/units.hpp"

namespace dmaloc {

using nlohmann::json;

Scale parse_scale(const std::string& name) {
  if (name == "desk") return Scale::kDesk;
  if (name == "full") return Scale::kFull;
  throw ConfigError("unknown scale '" + name + "' (expected desk or full)");
}

json preset(Scale scale) {
  const bool desk = scale == Scale::kDesk;
  json doc = {
      {"radio", {{"carrier_hz", 120e9}, {"bandwidth_hz", 150e3}, {"kappa_abs", 0.0033}, {"b_gain", 2.0},
                 {"noise_dbm", nullptr}}},
      {"panel", {{"n_rf", 4}, {"n_e", desk ? 32 : 256}, {"d_rf_wavelengths", 0.5}, {"d_e_wavelengths", 0.2},
                 {"alpha_wg", 0.0}, {"beta_wg_per_k0", 1.0}}},
      {"ues", json::array({{{"r", 3.1}, {"theta_deg", 30.0}, {"phi_deg", 20.4}},
                           {{"r", 5.3}, {"theta_deg", 30.0}, {"phi_deg", 44.6}},
                           {{"r", 7.9}, {"theta_deg", 30.0}, {"phi_deg", 70.3}}})},
      {"pilots", {{"length", 100}, {"p_max_dbm", 20.0}, {"mode", "orthogonal"}}},
      {"codebook", {{"bits", 3}, {"r_min", 1.0}, {"r_max", 12.0}, {"n_ranges", 12}, {"phi_min_deg", 1.0},
                    {"phi_max_deg", 90.0}, {"n_azimuths", 16}, {"theta_deg", 30.0}}},
      {"solver", {{"name", "projection"}, {"distinct", false}, {"lift", "unit_modulus"}, {"phase_search", 64},
                  {"work_cap", 1e7}}},
      {"trials", desk ? 50 : 300},
      {"seed", 1},
      {"threads", 1},
      {"grid", {{"r_min", 1.0}, {"r_max", 12.0}, {"r_step", 0.25}, {"phi_min_deg", 1.0}, {"phi_max_deg", 90.0},
                {"phi_step_deg", 1.0}, {"theta_deg", json::array({30.0})}}},
      {"mle", {{"statistic", "amplitude"}, {"polish", true}, {"polish_elevation", false}, {"max_iterations", 40}}},
      {"fig2", {{"powers_dbm", json::array({-10.0, 0.0, 10.0, 20.0})},
                {"solvers", json::array({"projection", "greedy", "exhaustive", "random", "snr_max"})}}},
      {"fig3", {{"diagonals_m", json::array({0.05, 0.1, 0.2, 0.35, 0.5, 0.7})},
                {"p_max_dbm", -4.0},
                {"solvers", json::array({"projection", "greedy", "exhaustive"})},
                {"hbf_d_e_wavelengths", 0.5}}},
      {"fig4", {{"p_max_dbm", 20.0},
                {"solvers", json::array({"projection", "greedy"})},
                {"map", {{"r_min", 1.0}, {"r_max", 12.0}, {"r_step", 1.0}, {"phi_min_deg", 5.0},
                         {"phi_max_deg", 90.0}, {"phi_step_deg", 5.0}}},
                {"seeds", desk ? 20 : 1},
                {"repeats", 1}}},
  };
  return doc;
}

void merge_config(json& base, const json& patch) {
  if (!patch.is_object() || !base.is_object()) {
    base = patch;
    return;
  }
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object()) {
      merge_config(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown config key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = value;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json doc = json::parse(buf.str(), nullptr, false, true);
  if (doc.is_discarded() || !doc.is_object()) throw ConfigError("config file '" + path + "' is not a JSON object");
  return doc;
}

namespace {

// Typed reads with the dotted key in every error.
class Reader {
 public:
  explicit Reader(const json& root) : root_(root) {}

  const json& at(const std::string& key) const {
    const json* node = &root_;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!node->is_object() || !node->contains(part)) throw ConfigError("missing config key '" + key + "'");
      node = &(*node)[part];
      if (dot == std::string::npos) return *node;
      start = dot + 1;
    }
  }

  double number(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    return v.get<double>();
  }

  double positive(const std::string& key) const {
    const double v = number(key);
    if (!(v > 0.0)) throw ConfigError("config key '" + key + "' must be positive");
    return v;
  }

  int integer(const std::string& key, int min_value) const {
    const json& v = at(key);
    if (!v.is_number_integer() && !(v.is_number() && v.get<double>() == static_cast<double>(v.get<long long>()))) {
      throw ConfigError("config key '" + key + "' must be an integer");
    }
    const long long x = v.get<long long>();
    if (x < min_value || x > 1000000000LL) {
      throw ConfigError("config key '" + key + "' must be at least " + std::to_string(min_value));
    }
    return static_cast<int>(x);
  }

  bool boolean(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError("config key '" + key + "' must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array() || v.empty()) throw ConfigError("config key '" + key + "' must be a non-empty array");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) throw ConfigError("config key '" + key + "' must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<Solver> solvers(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array() || v.empty()) throw ConfigError("config key '" + key + "' must be a non-empty array");
    std::vector<Solver> out;
    for (const json& e : v) {
      if (!e.is_string()) throw ConfigError("config key '" + key + "' must hold solver names");
      out.push_back(parse_solver(e.get<std::string>()));
    }
    return out;
  }

 private:
  const json& root_;
};

EstimationGrid read_grid(const Reader& rd, const std::string& prefix, std::vector<double> elevations) {
  try {
    return EstimationGrid::uniform(rd.positive(prefix + ".r_min"), rd.positive(prefix + ".r_max"),
                                   rd.positive(prefix + ".r_step"), deg_to_rad(rd.number(prefix + ".phi_min_deg")),
                                   deg_to_rad(rd.number(prefix + ".phi_max_deg")),
                                   deg_to_rad(rd.positive(prefix + ".phi_step_deg")), std::move(elevations));
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + ": " + e.what());
  }
}

}  // namespace

ScenarioConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  const Reader rd(doc);
  ScenarioConfig cfg;
  cfg.source = doc;

  cfg.radio.carrier_hz = rd.positive("radio.carrier_hz");
  cfg.radio.bandwidth_hz = rd.positive("radio.bandwidth_hz");
  cfg.radio.kappa_abs = rd.number("radio.kappa_abs");
  cfg.radio.b_gain = rd.number("radio.b_gain");
  const json& noise = rd.at("radio.noise_dbm");
  if (noise.is_null()) {
    cfg.radio.noise_power_mw = dbm_to_mw(thermal_noise_dbm(cfg.radio.bandwidth_hz));
  } else {
    cfg.radio.noise_power_mw = dbm_to_mw(rd.number("radio.noise_dbm"));
  }
  try {
    cfg.radio.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("radio: ") + e.what());
  }

  cfg.panel.n_rf = rd.integer("panel.n_rf", 1);
  cfg.panel.n_e = rd.integer("panel.n_e", 1);
  cfg.panel.d_rf_wavelengths = rd.positive("panel.d_rf_wavelengths");
  cfg.panel.d_e_wavelengths = rd.positive("panel.d_e_wavelengths");
  cfg.panel.alpha_wg = rd.number("panel.alpha_wg");
  cfg.panel.beta_wg_per_k0 = rd.number("panel.beta_wg_per_k0");

  const json& ues = rd.at("ues");
  if (!ues.is_array() || ues.empty()) throw ConfigError("config key 'ues' must be a non-empty array");
  for (std::size_t u = 0; u < ues.size(); ++u) {
    const std::string key = "ues." + std::to_string(u);
    const json& e = ues[u];
    if (!e.is_object() || !e.contains("r") || !e.contains("theta_deg") || !e.contains("phi_deg") ||
        !e["r"].is_number() || !e["theta_deg"].is_number() || !e["phi_deg"].is_number()) {
      throw ConfigError("config key '" + key + "' needs numeric r, theta_deg, phi_deg");
    }
    UePosition p{e["r"].get<double>(), deg_to_rad(e["theta_deg"].get<double>()),
                 deg_to_rad(e["phi_deg"].get<double>())};
    try {
      p.validate();
    } catch (const ConfigError& err) {
      throw ConfigError(key + ": " + err.what());
    }
    cfg.ues.push_back(p);
  }

  cfg.pilot_length = rd.integer("pilots.length", 1);
  cfg.p_max_dbm = rd.number("pilots.p_max_dbm");
  const std::string mode = rd.string("pilots.mode");
  if (mode == "orthogonal") {
    cfg.pilot_mode = PilotMode::kOrthogonal;
  } else if (mode == "random_qpsk") {
    cfg.pilot_mode = PilotMode::kRandomQpsk;
  } else {
    throw ConfigError("config key 'pilots.mode' must be orthogonal or random_qpsk");
  }
  if (cfg.pilot_mode == PilotMode::kOrthogonal && cfg.pilot_length < static_cast<int>(cfg.ues.size())) {
    throw ConfigError("orthogonal pilots need pilots.length >= number of UEs");
  }

  cfg.codebook.bits = rd.integer("codebook.bits", 1);
  cfg.codebook.r_min = rd.positive("codebook.r_min");
  cfg.codebook.r_max = rd.positive("codebook.r_max");
  cfg.codebook.n_ranges = rd.integer("codebook.n_ranges", 1);
  cfg.codebook.phi_min = deg_to_rad(rd.number("codebook.phi_min_deg"));
  cfg.codebook.phi_max = deg_to_rad(rd.number("codebook.phi_max_deg"));
  cfg.codebook.n_azimuths = rd.integer("codebook.n_azimuths", 1);
  cfg.codebook.theta = deg_to_rad(rd.number("codebook.theta_deg"));

  cfg.solver.solver = parse_solver(rd.string("solver.name"));
  cfg.solver.distinct = rd.boolean("solver.distinct");
  const std::string lift = rd.string("solver.lift");
  if (lift == "unit_modulus") {
    cfg.solver.lift = LiftMode::kUnitModulus;
  } else if (lift == "literal") {
    cfg.solver.lift = LiftMode::kLiteral;
  } else if (lift == "none") {
    cfg.solver.lift = LiftMode::kNone;
  } else {
    throw ConfigError("config key 'solver.lift' must be unit_modulus, literal or none");
  }
  cfg.solver.phase_search = rd.integer("solver.phase_search", 1);
  cfg.solver.work_cap = rd.positive("solver.work_cap");

  cfg.trials = rd.integer("trials", 1);
  const json& seed = rd.at("seed");
  if (!seed.is_number_integer()) throw ConfigError("config key 'seed' must be an unsigned integer");
  cfg.master_seed = seed.is_number_unsigned() ? seed.get<std::uint64_t>()
                                              : static_cast<std::uint64_t>(seed.get<std::int64_t>());
  cfg.threads = rd.integer("threads", 1);

  std::vector<double> elevations;
  for (double d : rd.numbers("grid.theta_deg")) elevations.push_back(deg_to_rad(d));
  cfg.grid = read_grid(rd, "grid", elevations);

  const std::string stat = rd.string("mle.statistic");
  if (stat == "amplitude") {
    cfg.mle.statistic = MleStatistic::kAmplitude;
  } else if (stat == "correlation") {
    cfg.mle.statistic = MleStatistic::kCorrelation;
  } else if (stat == "coherent") {
    cfg.mle.statistic = MleStatistic::kCoherent;
  } else {
    throw ConfigError("config key 'mle.statistic' must be amplitude, correlation or coherent");
  }
  cfg.mle.polish = rd.boolean("mle.polish");
  cfg.mle.polish_elevation = rd.boolean("mle.polish_elevation");
  cfg.mle.max_iterations = rd.integer("mle.max_iterations", 0);

  cfg.fig2.powers_dbm = rd.numbers("fig2.powers_dbm");
  cfg.fig2.solvers = rd.solvers("fig2.solvers");

  cfg.fig3.diagonals_m = rd.numbers("fig3.diagonals_m");
  for (double d : cfg.fig3.diagonals_m) {
    if (!(d > 0.0)) throw ConfigError("config key 'fig3.diagonals_m' must hold positive lengths");
  }
  cfg.fig3.p_max_dbm = rd.number("fig3.p_max_dbm");
  cfg.fig3.solvers = rd.solvers("fig3.solvers");
  cfg.fig3.hbf_d_e_wavelengths = rd.positive("fig3.hbf_d_e_wavelengths");

  cfg.fig4.p_max_dbm = rd.number("fig4.p_max_dbm");
  cfg.fig4.solvers = rd.solvers("fig4.solvers");
  cfg.fig4.map = read_grid(rd, "fig4.map", {elevations.front()});
  cfg.fig4.seeds = rd.integer("fig4.seeds", 1);
  cfg.fig4.repeats = rd.integer("fig4.repeats", 1);

  try {
    cfg.geometry().validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("panel: ") + e.what());
  }
  return cfg;
}

DmaGeometry ScenarioConfig::geometry() const {
  const double lambda = radio.wavelength();
  return DmaGeometry::uniform(panel.n_rf, panel.n_e, panel.d_rf_wavelengths * lambda, panel.d_e_wavelengths * lambda,
                              panel.alpha_wg, panel.beta_wg_per_k0 * radio.wavenumber());
}

ArrayModel ScenarioConfig::array_model() const { return ArrayModel::make(radio, geometry()); }

std::vector<UePosition> ScenarioConfig::codebook_focal_points() const {
  return focal_grid(codebook.r_min, codebook.r_max, codebook.n_ranges, codebook.phi_min, codebook.phi_max,
                    codebook.n_azimuths, codebook.theta);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace dmaloc

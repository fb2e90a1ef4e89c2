#include "dmaloc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "dmaloc/errors.hpp"
#include "dmaloc/rng.hpp"
#include "dmaloc/units.hpp"

namespace dmaloc {

using nlohmann::json;

namespace {

// Stage labels for derive_seed paths.
enum Stage : std::uint64_t {
  kCoarseNoise = 1,
  kCoarseBeamformer = 2,
  kDesign = 3,
  kFinalNoise = 4,
  kBoundDesign = 5,
  kMapNoise = 6,
};

constexpr std::uint64_t kFig2 = 2, kFig3 = 3, kFig4 = 4;

using Clock = std::chrono::steady_clock;

class TimingSink {
 public:
  void add(const std::string& key, double seconds) {
    std::lock_guard<std::mutex> lock(mu_);
    totals_[key] += seconds;
  }
  std::map<std::string, double> totals() const { return totals_; }

 private:
  std::mutex mu_;
  std::map<std::string, double> totals_;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

bool exhaustive_feasible(Solver s, const SolverSpec& spec, int n_rf, std::size_t n_w) {
  if (s != Solver::kExhaustive) return true;
  return static_cast<double>(n_rf) * static_cast<double>(n_w) <= spec.work_cap;
}

void sort_records(std::vector<Record>& records) {
  std::stable_sort(records.begin(), records.end(), [](const Record& a, const Record& b) { return a.sweep < b.sweep; });
}

// Coarse position estimate from a random beamformer and grid-only MLE.
std::vector<UePosition> coarse_estimate(const ArrayModel& model, const std::vector<NearFieldChannel>& truth,
                                        const VectorCodebook& cb, const ObjectiveMatrix& q, const PilotBlock& pilots,
                                        const GridDictionary& dict, const MleOptions& mle, std::uint64_t bf_seed,
                                        std::uint64_t noise_seed) {
  const BeamformerSolution rnd = solve_random(cb, model.geom.n_rf, bf_seed, q);
  const ReceivedBlock rx =
      synthesize_rx(truth, rnd.beamformer, model.prop, pilots, model.radio.noise_power_mw, noise_seed);
  MleOptions coarse = mle;
  coarse.polish = false;
  coarse.keep_surface = false;
  return mle_estimate(rx, rnd.beamformer, model, pilots, dict, coarse).estimates;
}

}  // namespace

const Record& ExperimentResult::find(double sweep, const std::string& solver, const std::string& metric) const {
  for (const Record& r : records) {
    if (r.sweep == sweep && r.solver == solver && r.metric == metric) return r;
  }
  throw std::out_of_range("no record for " + solver + "/" + metric);
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (n <= 0) return;
  const int workers = std::max(1, std::min(threads, n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto work = [&]() {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<NearFieldChannel> channels_with_derivatives(const ArrayModel& model, const std::vector<UePosition>& ues) {
  std::vector<NearFieldChannel> out;
  out.reserve(ues.size());
  for (const UePosition& ue : ues) out.push_back(channel_derivatives(model.radio, model.geom, ue));
  return out;
}

BeamformerSolution design_beamformer(Solver solver, const SolverSpec& spec, const std::vector<NearFieldChannel>& channels,
                                     const PropagationMatrix& prop, const VectorCodebook& cb, std::uint64_t seed) {
  const ObjectiveMatrix q = objective_matrix(channels, prop);
  switch (solver) {
    case Solver::kProjection:
      return solve_projection(q, cb, {spec.distinct, spec.lift, spec.phase_search});
    case Solver::kGreedy:
      return solve_greedy(q, cb, seed);
    case Solver::kExhaustive:
      return solve_exhaustive(q, cb, {spec.distinct, spec.work_cap});
    case Solver::kAssignment:
      return solve_exhaustive(q, cb, {true, std::numeric_limits<double>::infinity()});
    case Solver::kRandom:
      return solve_random(cb, prop.n_rf, seed, q);
    case Solver::kSnrMax:
      return solve_snr_max(channels, prop, cb, q);
  }
  throw ConfigError("unknown solver");
}

ExperimentResult run_fig2(const ScenarioConfig& cfg) {
  ExperimentResult res;
  res.experiment = "fig2";
  res.config = cfg.source;
  res.seed = cfg.master_seed;

  const ArrayModel model = cfg.array_model();
  const VectorCodebook cb = build_codebook(model.geom, model.radio, cfg.codebook_focal_points(), cfg.codebook.bits);
  const GridDictionary dict = GridDictionary::build(model, cfg.grid);
  const std::vector<NearFieldChannel> truth = channels_with_derivatives(model, cfg.ues);
  const ObjectiveMatrix q_true = objective_matrix(truth, model.prop);
  const int n_ue = static_cast<int>(cfg.ues.size());

  std::vector<Solver> solvers;
  for (Solver s : cfg.fig2.solvers) {
    if (exhaustive_feasible(s, cfg.solver, model.geom.n_rf, cb.size())) {
      solvers.push_back(s);
    } else {
      res.notices.push_back("exhaustive skipped: N_RF * N_W exceeds solver.work_cap");
    }
  }
  const std::size_t n_p = cfg.fig2.powers_dbm.size();
  const std::size_t n_s = solvers.size();
  const std::size_t n_t = static_cast<std::size_t>(cfg.trials);

  std::vector<PilotBlock> pilots;
  for (double p : cfg.fig2.powers_dbm) {
    pilots.push_back(make_pilots(n_ue, cfg.pilot_length, dbm_to_mw(p), cfg.pilot_mode,
                                 derive_seed(cfg.master_seed, {kFig2, 0})));
  }

  struct Cell {
    double sq_error = 0.0;  // summed over UEs
    double crb = 0.0;
    double trace_bound = 0.0;
    double objective = 0.0;
  };
  // [trial][power][solver]
  std::vector<Cell> cells(n_t * n_p * n_s);
  auto at = [&](std::size_t t, std::size_t p, std::size_t s) -> Cell& { return cells[(t * n_p + p) * n_s + s]; };
  TimingSink timing;

  parallel_for(static_cast<int>(n_t), cfg.threads, [&](int ti) {
    const std::uint64_t t = static_cast<std::uint64_t>(ti);
    // Bounds: beamformers designed at the true positions, independent of power.
    std::vector<AnalogBeamformer> bound_bf;
    for (Solver s : solvers) {
      bound_bf.push_back(design_beamformer(s, cfg.solver, truth, model.prop, cb,
                                           derive_seed(cfg.master_seed, {kFig2, t, kBoundDesign}))
                             .beamformer);
    }
    for (std::size_t p = 0; p < n_p; ++p) {
      const std::vector<UePosition> coarse =
          coarse_estimate(model, truth, cb, q_true, pilots[p], dict, cfg.mle,
                          derive_seed(cfg.master_seed, {kFig2, t, kCoarseBeamformer}),
                          derive_seed(cfg.master_seed, {kFig2, t, kCoarseNoise}));
      const std::vector<NearFieldChannel> estimated = channels_with_derivatives(model, coarse);
      for (std::size_t s = 0; s < n_s; ++s) {
        Cell& c = at(t, p, s);
        const auto t0 = Clock::now();
        const BeamformerSolution sol = design_beamformer(solvers[s], cfg.solver, estimated, model.prop, cb,
                                                         derive_seed(cfg.master_seed, {kFig2, t, kDesign}));
        timing.add(solver_name(solvers[s]), seconds_since(t0));
        c.objective = separable_objective(q_true, sol.beamformer);
        const ReceivedBlock rx = synthesize_rx(truth, sol.beamformer, model.prop, pilots[p],
                                               model.radio.noise_power_mw,
                                               derive_seed(cfg.master_seed, {kFig2, t, kFinalNoise}));
        const LocalizationResult est = mle_estimate(rx, sol.beamformer, model, pilots[p], dict, cfg.mle);
        for (int u = 0; u < n_ue; ++u) {
          const double e = cartesian_error(est.estimates[static_cast<std::size_t>(u)], cfg.ues[static_cast<std::size_t>(u)]);
          c.sq_error += e * e;
        }
        FimResult f = fim_matrix(truth, bound_bf[s], model.prop, pilots[p], model.radio.noise_power_mw);
        peb(f);
        c.crb = f.crb;
        c.trace_bound = f.trace_bound;
      }
    }
  });

  for (std::size_t p = 0; p < n_p; ++p) {
    const double sweep = cfg.fig2.powers_dbm[p];
    for (std::size_t s = 0; s < n_s; ++s) {
      std::vector<double> per_trial_rms, pebs, tbs, objs;
      double sq = 0.0, crb = 0.0;
      for (std::size_t t = 0; t < n_t; ++t) {
        const Cell& c = at(t, p, s);
        sq += c.sq_error;
        crb += c.crb;
        per_trial_rms.push_back(std::sqrt(c.sq_error / n_ue));
        pebs.push_back(std::sqrt(c.crb));
        tbs.push_back(c.trace_bound);
        objs.push_back(c.objective);
      }
      const std::string name = solver_name(solvers[s]);
      res.records.push_back({sweep, name, "rmse", std::sqrt(sq / static_cast<double>(n_t * n_ue)), stddev(per_trial_rms)});
      // Root of the mean CRB, so peb^2 >= mean trace bound record by record.
      res.records.push_back({sweep, name, "peb", std::sqrt(crb / static_cast<double>(n_t)), stddev(pebs)});
      res.records.push_back({sweep, name, "trace_bound", mean(tbs), stddev(tbs)});
      res.records.push_back({sweep, name, "objective", mean(objs), stddev(objs)});
    }
  }
  sort_records(res.records);
  res.timing_s = timing.totals();
  return res;
}

ExperimentResult run_fig3(const ScenarioConfig& cfg) {
  ExperimentResult res;
  res.experiment = "fig3";
  res.config = cfg.source;
  res.seed = cfg.master_seed;

  const double lambda = cfg.radio.wavelength();
  const double d_rf = cfg.panel.d_rf_wavelengths * lambda;
  const double width = (cfg.panel.n_rf - 1) * d_rf;
  const int n_d = static_cast<int>(cfg.fig3.diagonals_m.size());
  const double p_mw = dbm_to_mw(cfg.fig3.p_max_dbm);
  const int n_ue = static_cast<int>(cfg.ues.size());

  struct Point {
    double diagonal = 0.0;
    double hbf_diagonal = 0.0;
    int n_e_dma = 0, n_e_hbf = 0;
    std::vector<double> peb_dma, peb_hbf, tb_dma, tb_hbf, obj_dma, obj_hbf;
    std::vector<bool> ran;
  };
  std::vector<Point> points(static_cast<std::size_t>(n_d));
  TimingSink timing;

  for (double d : cfg.fig3.diagonals_m) {
    if (!(d > width)) {
      throw ConfigError("fig3 diagonal " + std::to_string(d) + " m does not exceed the panel width " +
                        std::to_string(width) + " m");
    }
  }

  parallel_for(n_d, cfg.threads, [&](int k) {
    Point& pt = points[static_cast<std::size_t>(k)];
    const double d = cfg.fig3.diagonals_m[static_cast<std::size_t>(k)];
    // Heights snap to whole wavelengths so both spacings fit exactly.
    const double wavelengths = std::max(1.0, std::round(std::sqrt(d * d - width * width) / lambda));
    pt.n_e_dma = static_cast<int>(std::lround(wavelengths / cfg.panel.d_e_wavelengths)) + 1;
    pt.n_e_hbf = static_cast<int>(std::lround(wavelengths / cfg.fig3.hbf_d_e_wavelengths)) + 1;

    const DmaGeometry dma_geom =
        DmaGeometry::uniform(cfg.panel.n_rf, pt.n_e_dma, d_rf, cfg.panel.d_e_wavelengths * lambda, cfg.panel.alpha_wg,
                             cfg.panel.beta_wg_per_k0 * cfg.radio.wavenumber());
    const DmaGeometry hbf_geom =
        DmaGeometry::uniform(cfg.panel.n_rf, pt.n_e_hbf, d_rf, cfg.fig3.hbf_d_e_wavelengths * lambda, 0.0, 0.0);
    pt.diagonal = dma_geom.diagonal();
    pt.hbf_diagonal = hbf_geom.diagonal();

    const ArrayModel dma = ArrayModel::make(cfg.radio, dma_geom);
    const ArrayModel hbf = ArrayModel::make(cfg.radio, hbf_geom);
    const VectorCodebook dma_cb = build_codebook(dma_geom, cfg.radio, cfg.codebook_focal_points(), cfg.codebook.bits);
    const VectorCodebook hbf_cb = dft_codebook(pt.n_e_hbf);
    const std::vector<NearFieldChannel> dma_ch = channels_with_derivatives(dma, cfg.ues);
    const std::vector<NearFieldChannel> hbf_ch = channels_with_derivatives(hbf, cfg.ues);
    const PilotBlock pilots = make_pilots(n_ue, cfg.pilot_length, p_mw, cfg.pilot_mode,
                                          derive_seed(cfg.master_seed, {kFig3, 0}));
    SolverSpec hbf_spec = cfg.solver;
    hbf_spec.lift = LiftMode::kNone;

    for (Solver s : cfg.fig3.solvers) {
      const bool ok = exhaustive_feasible(s, cfg.solver, cfg.panel.n_rf, dma_cb.size()) &&
                      exhaustive_feasible(s, cfg.solver, cfg.panel.n_rf, hbf_cb.size());
      pt.ran.push_back(ok);
      if (!ok) {
        pt.peb_dma.push_back(0.0);
        pt.peb_hbf.push_back(0.0);
        pt.tb_dma.push_back(0.0);
        pt.tb_hbf.push_back(0.0);
        pt.obj_dma.push_back(0.0);
        pt.obj_hbf.push_back(0.0);
        continue;
      }
      const std::uint64_t seed = derive_seed(cfg.master_seed, {kFig3, static_cast<std::uint64_t>(k), kDesign});
      const auto t0 = Clock::now();
      const BeamformerSolution a = design_beamformer(s, cfg.solver, dma_ch, dma.prop, dma_cb, seed);
      const BeamformerSolution b = design_beamformer(s, hbf_spec, hbf_ch, hbf.prop, hbf_cb, seed);
      timing.add(solver_name(s), seconds_since(t0));
      FimResult fa = fim_matrix(dma_ch, a.beamformer, dma.prop, pilots, cfg.radio.noise_power_mw);
      FimResult fb = fim_matrix(hbf_ch, b.beamformer, hbf.prop, pilots, cfg.radio.noise_power_mw);
      pt.peb_dma.push_back(peb(fa));
      pt.peb_hbf.push_back(peb(fb));
      pt.tb_dma.push_back(fa.trace_bound);
      pt.tb_hbf.push_back(fb.trace_bound);
      pt.obj_dma.push_back(a.objective);
      pt.obj_hbf.push_back(b.objective);
    }
  });

  for (const Point& pt : points) {
    if (std::abs(pt.diagonal - pt.hbf_diagonal) > 1e-9 * pt.diagonal) {
      res.notices.push_back("fig3: DMA and HBF diagonals differ at " + std::to_string(pt.diagonal) + " m");
    }
    res.records.push_back({pt.diagonal, "panel", "n_e_dma", static_cast<double>(pt.n_e_dma), 0.0});
    res.records.push_back({pt.diagonal, "panel", "n_e_hbf", static_cast<double>(pt.n_e_hbf), 0.0});
    for (std::size_t s = 0; s < cfg.fig3.solvers.size(); ++s) {
      if (!pt.ran[s]) {
        res.notices.push_back("exhaustive skipped at diagonal " + std::to_string(pt.diagonal) + " m");
        continue;
      }
      const std::string name = solver_name(cfg.fig3.solvers[s]);
      res.records.push_back({pt.diagonal, name, "peb_dma", pt.peb_dma[s], 0.0});
      res.records.push_back({pt.diagonal, name, "peb_hbf", pt.peb_hbf[s], 0.0});
      res.records.push_back({pt.diagonal, name, "trace_bound_dma", pt.tb_dma[s], 0.0});
      res.records.push_back({pt.diagonal, name, "trace_bound_hbf", pt.tb_hbf[s], 0.0});
      res.records.push_back({pt.diagonal, name, "objective_dma", pt.obj_dma[s], 0.0});
      res.records.push_back({pt.diagonal, name, "objective_hbf", pt.obj_hbf[s], 0.0});
    }
  }
  sort_records(res.records);
  res.timing_s = timing.totals();
  return res;
}

std::pair<int, int> nearest_cell(const EstimationGrid& map, const UePosition& ue) {
  auto nearest = [](const std::vector<double>& axis, double v) {
    int best = 0;
    for (std::size_t k = 1; k < axis.size(); ++k) {
      if (std::abs(axis[k] - v) < std::abs(axis[static_cast<std::size_t>(best)] - v)) best = static_cast<int>(k);
    }
    return best;
  };
  return {nearest(map.ranges, ue.r), nearest(map.azimuths, ue.phi)};
}

bool has_local_minimum_near(const Eigen::MatrixXd& surface, int row, int col, int radius) {
  const int rows = static_cast<int>(surface.rows());
  const int cols = static_cast<int>(surface.cols());
  for (int a = std::max(0, row - radius); a <= std::min(rows - 1, row + radius); ++a) {
    for (int b = std::max(0, col - radius); b <= std::min(cols - 1, col + radius); ++b) {
      bool minimum = true;
      for (int da = -1; da <= 1 && minimum; ++da) {
        for (int db = -1; db <= 1; ++db) {
          const int x = a + da, y = b + db;
          if ((da == 0 && db == 0) || x < 0 || y < 0 || x >= rows || y >= cols) continue;
          if (surface(x, y) < surface(a, b)) {
            minimum = false;
            break;
          }
        }
      }
      if (minimum) return true;
    }
  }
  return false;
}

ExperimentResult run_fig4(const ScenarioConfig& cfg) {
  ExperimentResult res;
  res.experiment = "fig4";
  res.config = cfg.source;
  res.seed = cfg.master_seed;

  const ArrayModel model = cfg.array_model();
  const VectorCodebook cb = build_codebook(model.geom, model.radio, cfg.codebook_focal_points(), cfg.codebook.bits);
  const GridDictionary dict = GridDictionary::build(model, cfg.grid);
  const std::vector<NearFieldChannel> truth = channels_with_derivatives(model, cfg.ues);
  const ObjectiveMatrix q_true = objective_matrix(truth, model.prop);
  const int n_ue = static_cast<int>(cfg.ues.size());
  const double p_mw = dbm_to_mw(cfg.fig4.p_max_dbm);
  const PilotBlock pilots =
      make_pilots(n_ue, cfg.pilot_length, p_mw, cfg.pilot_mode, derive_seed(cfg.master_seed, {kFig4, 0}));

  std::vector<Solver> solvers;
  for (Solver s : cfg.fig4.solvers) {
    if (exhaustive_feasible(s, cfg.solver, model.geom.n_rf, cb.size())) {
      solvers.push_back(s);
    } else {
      res.notices.push_back("exhaustive skipped: N_RF * N_W exceeds solver.work_cap");
    }
  }
  const int n_seeds = cfg.fig4.seeds;
  std::vector<MapPayload> maps(static_cast<std::size_t>(n_seeds) * solvers.size());
  TimingSink timing;

  parallel_for(n_seeds, cfg.threads, [&](int si) {
    const std::uint64_t s = static_cast<std::uint64_t>(si);
    const std::vector<UePosition> coarse =
        coarse_estimate(model, truth, cb, q_true, pilots, dict, cfg.mle,
                        derive_seed(cfg.master_seed, {kFig4, s, kCoarseBeamformer}),
                        derive_seed(cfg.master_seed, {kFig4, s, kCoarseNoise}));
    const std::vector<NearFieldChannel> estimated = channels_with_derivatives(model, coarse);
    for (std::size_t k = 0; k < solvers.size(); ++k) {
      const auto t0 = Clock::now();
      const BeamformerSolution sol = design_beamformer(solvers[k], cfg.solver, estimated, model.prop, cb,
                                                       derive_seed(cfg.master_seed, {kFig4, s, kDesign}));
      timing.add(solver_name(solvers[k]), seconds_since(t0));
      MapPayload& m = maps[static_cast<std::size_t>(si) * solvers.size() + k];
      m.solver = solver_name(solvers[k]);
      m.seed_index = si;
      m.map = cfg.fig4.map;
      m.errors = error_map(model, sol.beamformer, cfg.fig4.map, dict, cfg.mle,
                           {cfg.fig4.repeats, p_mw, cfg.pilot_length},
                           derive_seed(cfg.master_seed, {kFig4, s, kMapNoise}));
    }
  });

  for (const MapPayload& m : maps) {
    int hits = 0;
    for (const UePosition& ue : cfg.ues) {
      const auto [row, col] = nearest_cell(m.map, ue);
      if (has_local_minimum_near(m.errors, row, col)) ++hits;
    }
    const Eigen::Map<const Eigen::VectorXd> flat(m.errors.data(), m.errors.size());
    const double mean_err = flat.mean();
    const double sd = m.errors.size() > 1
                          ? std::sqrt((flat.array() - mean_err).square().sum() / static_cast<double>(flat.size() - 1))
                          : 0.0;
    res.records.push_back({static_cast<double>(m.seed_index), m.solver, "mean_error", mean_err, sd});
    res.records.push_back({static_cast<double>(m.seed_index), m.solver, "minima_hits", static_cast<double>(hits), 0.0});
  }
  sort_records(res.records);
  res.maps = std::move(maps);
  res.timing_s = timing.totals();
  return res;
}

namespace {

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace

std::string records_csv(const ExperimentResult& result) {
  std::string out = "sweep,solver,metric,value,std,seed\n";
  const std::string seed = std::to_string(result.seed);
  for (const Record& r : result.records) {
    out += number(r.sweep) + "," + r.solver + "," + r.metric + "," + number(r.value) + "," + number(r.std) + "," +
           seed + "\n";
  }
  return out;
}

std::string maps_csv(const ExperimentResult& result) {
  std::string out = "solver,seed,r,phi_deg,error\n";
  for (const MapPayload& m : result.maps) {
    for (std::size_t ir = 0; ir < m.map.ranges.size(); ++ir) {
      for (std::size_t ip = 0; ip < m.map.azimuths.size(); ++ip) {
        out += m.solver + "," + std::to_string(m.seed_index) + "," + number(m.map.ranges[ir]) + "," +
               number(rad_to_deg(m.map.azimuths[ip])) + "," +
               number(m.errors(static_cast<Eigen::Index>(ir), static_cast<Eigen::Index>(ip))) + "\n";
      }
    }
  }
  return out;
}

json result_json(const ExperimentResult& result, bool with_records) {
  json doc;
  doc["experiment"] = result.experiment;
  doc["version"] = kVersion;
  doc["seed"] = result.seed;
  doc["config"] = result.config;
  doc["config_hash"] = hex64(fnv1a(result.config.dump()));
  doc["csv_hash"] = hex64(fnv1a(records_csv(result)));
  if (!result.maps.empty()) doc["map_csv_hash"] = hex64(fnv1a(maps_csv(result)));
  json ues = json::array();
  if (result.config.contains("ues")) ues = result.config["ues"];
  doc["ues"] = ues;
  doc["notices"] = result.notices;
  doc["timing_s"] = result.timing_s;
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  doc["created_utc"] = stamp;
  if (with_records) {
    json recs = json::array();
    for (const Record& r : result.records) {
      recs.push_back({{"sweep", r.sweep}, {"solver", r.solver}, {"metric", r.metric}, {"value", r.value}, {"std", r.std}});
    }
    doc["records"] = recs;
  }
  return doc;
}

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  throw ConfigError("unknown format '" + name + "' (expected csv or json)");
}

std::vector<std::string> emit(const ExperimentResult& result, OutputFormat format, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  std::vector<std::string> paths;
  if (format == OutputFormat::kCsv) {
    const std::string csv = (base / (result.experiment + ".csv")).string();
    write_file(csv, records_csv(result));
    paths.push_back(csv);
    if (!result.maps.empty()) {
      const std::string map = (base / (result.experiment + "_map.csv")).string();
      write_file(map, maps_csv(result));
      paths.push_back(map);
    }
  }
  const std::string side = (base / (result.experiment + ".json")).string();
  write_file(side, result_json(result, format == OutputFormat::kJson).dump(2) + "\n");
  paths.push_back(side);
  return paths;
}

}  // namespace dmaloc

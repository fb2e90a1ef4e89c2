#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dmaloc/config.hpp"
#include "dmaloc/errors.hpp"
#include "dmaloc/harness.hpp"
#include "dmaloc/units.hpp"

namespace {

using namespace dmaloc;
using nlohmann::json;

json small_fig2() {
  json doc = preset(Scale::kDesk);
  apply_override(doc, "panel.n_e=16");
  apply_override(doc, "trials=3");
  apply_override(doc, "fig2.powers_dbm=[0,20]");
  apply_override(doc, R"(fig2.solvers=["projection","random"])");
  apply_override(doc, "grid.r_step=0.5");
  apply_override(doc, "grid.phi_step_deg=2");
  return doc;
}

std::string read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Config, PresetParses) {
  const ScenarioConfig desk = parse_config(preset(Scale::kDesk));
  EXPECT_EQ(desk.panel.n_e, 32);
  EXPECT_EQ(desk.trials, 50);
  EXPECT_EQ(desk.ues.size(), 3u);
  EXPECT_NEAR(mw_to_dbm(desk.radio.noise_power_mw), -122.239, 1e-3);
  const ScenarioConfig full = parse_config(preset(Scale::kFull));
  EXPECT_EQ(full.panel.n_e, 256);
  EXPECT_EQ(full.trials, 300);
  EXPECT_THROW(parse_scale("huge"), ConfigError);
}

TEST(Config, Overrides) {
  json doc = preset(Scale::kDesk);
  apply_override(doc, "panel.n_e=64");
  apply_override(doc, "solver.name=greedy");
  apply_override(doc, "fig2.powers_dbm=[1,2]");
  const ScenarioConfig cfg = parse_config(doc);
  EXPECT_EQ(cfg.panel.n_e, 64);
  EXPECT_EQ(cfg.solver.solver, Solver::kGreedy);
  EXPECT_EQ(cfg.fig2.powers_dbm, (std::vector<double>{1, 2}));
  EXPECT_THROW(apply_override(doc, "panel.n_x=3"), ConfigError);
  EXPECT_THROW(apply_override(doc, "no_equals_sign"), ConfigError);
  json bad = preset(Scale::kDesk);
  apply_override(bad, "panel.n_e=0");
  EXPECT_THROW(parse_config(bad), ConfigError);
  json bad_solver = preset(Scale::kDesk);
  apply_override(bad_solver, "solver.name=annealing");
  EXPECT_THROW(parse_config(bad_solver), ConfigError);
}

TEST(Config, MergeKeepsUntouchedKeys) {
  json doc = preset(Scale::kDesk);
  merge_config(doc, json{{"panel", {{"n_rf", 2}}}});
  EXPECT_EQ(doc["panel"]["n_rf"], 2);
  EXPECT_EQ(doc["panel"]["n_e"], 32);
}

TEST(Config, Fnv1a) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Harness, ParallelForCoversEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Harness, ParallelForRethrowsLowestIndex) {
  try {
    parallel_for(50, 3, [](int i) {
      if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}

TEST(Harness, LocalMinimumDetection) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Constant(5, 5, 3.0);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) s(r, c) = 10.0 - r - c;
  }
  // Monotone surface: only the far corner is a minimum.
  EXPECT_FALSE(has_local_minimum_near(s, 1, 1));
  EXPECT_TRUE(has_local_minimum_near(s, 3, 3));
  s(1, 1) = -1.0;
  EXPECT_TRUE(has_local_minimum_near(s, 1, 1));
  EXPECT_TRUE(has_local_minimum_near(s, 2, 2));
}

TEST(Harness, NearestCell) {
  const EstimationGrid g = EstimationGrid::uniform(1.0, 12.0, 1.0, deg_to_rad(5), deg_to_rad(90), deg_to_rad(5), {0.5});
  const auto [r, c] = nearest_cell(g, {3.1, 0.5, deg_to_rad(20.4)});
  EXPECT_EQ(r, 2);
  EXPECT_EQ(c, 3);
}

TEST(Harness, CsvHeaderAndEmptyResult) {
  ExperimentResult empty;
  empty.experiment = "fig2";
  EXPECT_EQ(records_csv(empty), "sweep,solver,metric,value,std,seed\n");
  const std::string dir = (std::filesystem::temp_directory_path() / "dmaloc_empty_emit").string();
  std::filesystem::remove_all(dir);
  const std::vector<std::string> paths = emit(empty, OutputFormat::kCsv, dir);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(read(paths[0]), "sweep,solver,metric,value,std,seed\n");
  EXPECT_THROW(parse_format("xml"), ConfigError);
}

TEST(Harness, Fig2DeterministicAcrossThreads) {
  json doc = small_fig2();
  const ExperimentResult a = run_fig2(parse_config(doc));
  apply_override(doc, "threads=2");
  const ExperimentResult b = run_fig2(parse_config(doc));
  EXPECT_EQ(records_csv(a), records_csv(b));
  EXPECT_FALSE(a.records.empty());
  for (const Record& r : a.records) {
    if (r.metric == "peb") {
      EXPECT_GE(r.value * r.value, a.find(r.sweep, r.solver, "trace_bound").value * (1 - 1e-12));
    }
  }
}

TEST(Harness, Fig2PebFollowsSquareRootLaw) {
  const ExperimentResult a = run_fig2(parse_config(small_fig2()));
  const double lo = a.find(0.0, "projection", "peb").value;
  const double hi = a.find(20.0, "projection", "peb").value;
  EXPECT_NEAR(lo / hi, 10.0, 1e-9 * 10.0);
}

TEST(Harness, EmittedConfigReproducesHashes) {
  const ExperimentResult a = run_fig2(parse_config(small_fig2()));
  const json side = result_json(a, false);
  const ExperimentResult b = run_fig2(parse_config(json::parse(side["config"].dump())));
  const json again = result_json(b, false);
  EXPECT_EQ(side["csv_hash"], again["csv_hash"]);
  EXPECT_EQ(side["config_hash"], again["config_hash"]);
}

TEST(Harness, RecordsSortedAndHeaderFixed) {
  const ExperimentResult a = run_fig2(parse_config(small_fig2()));
  const std::string csv = records_csv(a);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sweep,solver,metric,value,std,seed");
  for (std::size_t k = 1; k < a.records.size(); ++k) EXPECT_LE(a.records[k - 1].sweep, a.records[k].sweep);
}

TEST(Harness, Fig4MapShape) {
  json doc = preset(Scale::kDesk);
  apply_override(doc, "panel.n_e=16");
  apply_override(doc, "fig4.seeds=1");
  apply_override(doc, R"(fig4.solvers=["projection"])");
  apply_override(doc, "fig4.map.r_step=4");
  apply_override(doc, "fig4.map.phi_step_deg=40");
  apply_override(doc, "grid.r_step=0.5");
  apply_override(doc, "grid.phi_step_deg=2");
  const ExperimentResult r = run_fig4(parse_config(doc));
  ASSERT_EQ(r.maps.size(), 1u);
  EXPECT_EQ(r.maps[0].errors.rows(), static_cast<Eigen::Index>(r.maps[0].map.ranges.size()));
  EXPECT_EQ(r.maps[0].errors.cols(), static_cast<Eigen::Index>(r.maps[0].map.azimuths.size()));
  EXPECT_GE(r.maps[0].errors.minCoeff(), 0.0);
  const std::string csv = maps_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "solver,seed,r,phi_deg,error");
}

}  // namespace

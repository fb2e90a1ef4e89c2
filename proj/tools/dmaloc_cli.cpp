// Command-line front end: figure experiments, bounds, beamformer design and
// codebook export.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dmaloc/config.hpp"
#include "dmaloc/errors.hpp"
#include "dmaloc/harness.hpp"
#include "dmaloc/kernels.hpp"
#include "dmaloc/units.hpp"

namespace {

using nlohmann::json;
using namespace dmaloc;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::string scale = "desk";
  std::string solver;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON config file merged over the preset");
  cmd->add_option("--set", o.overrides, "Override a config key, e.g. --set panel.n_e=64 (repeatable)");
  cmd->add_option("--out", o.out_dir, "Output directory (default: results for figures, stdout otherwise)");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--scale", o.scale, "Preset scale")->check(CLI::IsMember({"desk", "full"}));
  cmd->add_option("--solver", o.solver, "Solver: projection, greedy, exhaustive, assignment, random, snr_max");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
}

ScenarioConfig resolve(const CommonOptions& o, const std::string& command) {
  json doc = preset(parse_scale(o.scale));
  if (!o.config_path.empty()) merge_config(doc, load_config_file(o.config_path));
  for (const std::string& kv : o.overrides) apply_override(doc, kv);
  if (o.seed) doc["seed"] = *o.seed;
  if (o.threads) doc["threads"] = *o.threads;
  if (!o.solver.empty()) {
    parse_solver(o.solver);
    if (command == "fig2" || command == "fig3" || command == "fig4") {
      doc[command]["solvers"] = json::array({o.solver});
    } else {
      doc["solver"]["name"] = o.solver;
    }
  }
  return parse_config(doc);
}

void write_output(const CommonOptions& o, const std::string& name, const std::string& content) {
  if (o.out_dir.empty()) {
    std::cout << content;
    return;
  }
  std::filesystem::create_directories(o.out_dir);
  const std::string path = (std::filesystem::path(o.out_dir) / name).string();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  std::cerr << "wrote " << path << "\n";
}

void run_figure(const CommonOptions& o, const std::string& command) {
  const ScenarioConfig cfg = resolve(o, command);
  ExperimentResult res;
  if (command == "fig2") {
    res = run_fig2(cfg);
  } else if (command == "fig3") {
    res = run_fig3(cfg);
  } else {
    res = run_fig4(cfg);
  }
  for (const std::string& n : res.notices) std::cerr << "notice: " << n << "\n";
  const std::string dir = o.out_dir.empty() ? "results" : o.out_dir;
  for (const std::string& p : emit(res, parse_format(o.format), dir)) std::cerr << "wrote " << p << "\n";
}

struct Designed {
  ScenarioConfig cfg;
  ArrayModel model;
  VectorCodebook cb;
  std::vector<NearFieldChannel> channels;
  BeamformerSolution sol;
};

Designed design(const CommonOptions& o, const std::string& command) {
  ScenarioConfig cfg = resolve(o, command);
  ArrayModel model = cfg.array_model();
  VectorCodebook cb = build_codebook(model.geom, model.radio, cfg.codebook_focal_points(), cfg.codebook.bits);
  std::vector<NearFieldChannel> ch = channels_with_derivatives(model, cfg.ues);
  BeamformerSolution sol = design_beamformer(cfg.solver.solver, cfg.solver, ch, model.prop, cb, cfg.master_seed);
  return {std::move(cfg), std::move(model), std::move(cb), std::move(ch), std::move(sol)};
}

void run_peb(const CommonOptions& o) {
  const Designed d = design(o, "peb");
  const PilotBlock pilots = make_pilots(static_cast<int>(d.cfg.ues.size()), d.cfg.pilot_length,
                                        dbm_to_mw(d.cfg.p_max_dbm), d.cfg.pilot_mode, d.cfg.master_seed);
  FimResult f = fim_matrix(d.channels, d.sol.beamformer, d.model.prop, pilots, d.cfg.radio.noise_power_mw);
  peb(f);
  const double cart = cartesian_peb(f, d.cfg.ues);
  if (o.format == "json") {
    json doc = {{"solver", solver_name(d.sol.solver)},
                {"p_max_dbm", d.cfg.p_max_dbm},
                {"noise_dbm", mw_to_dbm(d.cfg.radio.noise_power_mw)},
                {"peb", f.peb},
                {"crb", f.crb},
                {"trace_bound", f.trace_bound},
                {"cartesian_peb_m", cart},
                {"condition", f.condition},
                {"objective", d.sol.objective},
                {"per_param_crb", std::vector<double>(f.per_param_crb.data(),
                                                      f.per_param_crb.data() + f.per_param_crb.size())}};
    write_output(o, "peb.json", doc.dump(2) + "\n");
  } else {
    std::string csv = "sweep,solver,metric,value,std,seed\n";
    const std::string name = solver_name(d.sol.solver);
    auto fmt = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return std::string(buf);
    };
    auto row = [&](const char* metric, double v) {
      csv += fmt(d.cfg.p_max_dbm) + "," + name + "," + metric + "," + fmt(v) + ",0," +
             std::to_string(d.cfg.master_seed) + "\n";
    };
    row("peb", f.peb);
    row("trace_bound", f.trace_bound);
    row("cartesian_peb", cart);
    row("objective", d.sol.objective);
    write_output(o, "peb.csv", csv);
  }
}

void run_design(const CommonOptions& o) {
  const Designed d = design(o, "design");
  json doc = {{"solver", solver_name(d.sol.solver)},
              {"objective", d.sol.objective},
              {"codewords", d.sol.codewords},
              {"block_quotients", d.sol.block_quotients},
              {"beamformer", beamformer_to_json(d.sol.beamformer)}};
  write_output(o, "design.json", doc.dump(2) + "\n");
}

void run_codebook(const CommonOptions& o) {
  const ScenarioConfig cfg = resolve(o, "codebook");
  const VectorCodebook cb =
      build_codebook(cfg.geometry(), cfg.radio, cfg.codebook_focal_points(), cfg.codebook.bits);
  write_output(o, "codebook.json", codebook_to_json(cb).dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DMA near-field localization simulator"};
  app.require_subcommand(1);
  bool show_isa = false;
  app.add_flag("--isa", show_isa, "Print the selected SIMD kernel set to stderr");

  CommonOptions opts;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"fig2", "RMSE and PEB versus transmit power"},
      {"fig3", "PEB versus panel diagonal, DMA against HBF"},
      {"fig4", "Area-wide MLE error maps"},
      {"peb", "Position error bound of one designed beamformer"},
      {"design", "Design a beamformer and print it as JSON"},
      {"codebook", "Build the focusing codebook and print it as JSON"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (show_isa) std::cerr << "kernels: " << kernels::isa_name(kernels::active_isa()) << "\n";

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "fig2" || command == "fig3" || command == "fig4") {
      run_figure(opts, command);
    } else if (command == "peb") {
      run_peb(opts);
    } else if (command == "design") {
      run_design(opts);
    } else {
      run_codebook(opts);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const WorkCapExceeded& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "vmb/driver.hpp"
#include "vmb/io.hpp"

using namespace vmb;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kLedgerFail = 1, kInstability = 2, kConfigError = 3 };

void apply_thread_override() {
  const char* env = std::getenv("VMB_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("VMB_THREADS must be a positive integer");
#ifdef _OPENMP
  omp_set_num_threads(int(n));
#endif
}

int cmd_run(const std::string& path, const std::string& restart, bool quiet) {
  RunConfig cfg = load_config(path);
  RunOptions opts;
  opts.restart_snapshot = restart;
  opts.quiet = quiet;
  RunResult res = run_simulation(cfg, opts);
  json summary = {{"exit_code", res.exit_code},
                  {"message", res.message},
                  {"steps", cfg.steps},
                  {"t_final", res.final_state.t},
                  {"min_F", res.min_F},
                  {"min_delta_hat", res.min_delta_hat},
                  {"max_field_ratio", res.max_field_ratio},
                  {"max_gauss_residual", res.max_gauss},
                  {"richardson_order", res.richardson.order},
                  {"tol_ledger", res.ledger.tol_ledger},
                  {"ledger_integral_pass", res.ledger.pass_integral},
                  {"ledger_differential_pass", res.ledger.pass_differential},
                  {"worst_integral_margin", res.ledger.worst_integral_margin},
                  {"worst_differential_margin", res.ledger.worst_differential_margin},
                  {"E0", res.ledger.E0},
                  {"csv", cfg.csv_path}};
  std::cout << summary.dump(2) << "\n";
  return res.exit_code;
}

int cmd_check_collision(const std::string& path) {
  RunConfig cfg = load_config(path);
  Simulation sim(cfg);
  json r = collision_check_report(sim);
  std::cout << r.dump(2) << "\n";
  return r["pass"].get<bool>() ? kPass : kLedgerFail;
}

int cmd_check_coercivity(const std::string& path) {
  RunConfig cfg = load_config(path);
  RunOptions opts;
  opts.write_files = false;
  opts.quiet = true;
  RunResult res = run_simulation(cfg, opts);
  if (res.exit_code == kInstability) {
    std::cout << json{{"error", res.message}}.dump(2) << "\n";
    return kInstability;
  }
  Simulation sim(cfg);
  RayleighEstimate re = rayleigh_coercivity(sim.ws, 200, cfg.seed);
  json rows = json::array();
  bool smallness_ok = true;
  int inconclusive = 0;
  for (const auto& row : res.rows) {
    const auto& c = row.report.coercivity;
    if (row.report.smallness > cfg.M0) smallness_ok = false;
    if (c.inconclusive) {
      ++inconclusive;
      continue;
    }
    rows.push_back({{"t", row.report.t}, {"best_ratio", c.best_ratio}, {"best_C0", c.best_C0}, {"ratios", c.ratios}});
  }
  const bool pass = res.min_delta_hat > 0 && inconclusive < int(res.rows.size());
  json r = {{"delta_hat", res.min_delta_hat},
            {"C0_scan", cfg.C0_scan},
            {"rayleigh_delta_min", re.delta_min},
            {"rayleigh_delta_max", re.delta_max},
            {"M0", cfg.M0},
            {"smallness_within_M0", smallness_ok},
            {"max_field_ratio", res.max_field_ratio},
            {"inconclusive_reports", inconclusive},
            {"series", rows},
            {"pass", pass}};
  std::cout << r.dump(2) << "\n";
  return pass ? kPass : kLedgerFail;
}

int cmd_decompose(const std::string& snapshot) {
  Snapshot snap = read_snapshot(snapshot);
  RunConfig cfg = parse_config(snap.header.at("config"));
  Simulation sim(cfg);
  if (snap.nv != cfg.nv || snap.state.f.cols() != sim.sg.nx)
    throw ConfigError("snapshot data does not match its embedded config");
  std::cout << decompose_report(sim, snap.state).dump(2) << "\n";
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-species Vlasov-Maxwell-Boltzmann solver near a global Maxwellian (1D3V)"};
  app.require_subcommand(1);

  std::string config, snapshot, restart;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "advance a configured simulation and check the energy ledger");
  run->add_option("config", config, "JSON run configuration")->required();
  run->add_option("--restart", restart, "resume from a snapshot (base path or .json header)");
  run->add_flag("-q,--quiet", quiet, "suppress progress output");
  auto* cc = app.add_subcommand("check-collision", "collision operator invariant suite, JSON report");
  cc->add_option("config", config, "JSON run configuration")->required();
  auto* co = app.add_subcommand("check-coercivity", "coercivity estimate over a run, JSON report");
  co->add_option("config", config, "JSON run configuration")->required();
  auto* de = app.add_subcommand("decompose", "macroscopic fields and residuals of a snapshot, JSON report");
  de->add_option("snapshot", snapshot, "snapshot base path or .json header")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    apply_thread_override();
    if (*run) return cmd_run(config, restart, quiet);
    if (*cc) return cmd_check_collision(config);
    if (*co) return cmd_check_coercivity(config);
    if (*de) return cmd_decompose(snapshot);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InstabilityError& e) {
    std::cerr << "instability: " << e.what() << "\n";
    return kInstability;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kPass;
}

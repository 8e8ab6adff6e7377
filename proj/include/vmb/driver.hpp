#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "vmb/diagnostics.hpp"

namespace vmb {

enum class Scheme { Strang, Lie };

struct InitialData {
  double amplitude = 1e-3;
  std::vector<int> modes{1};
  double asymmetry = 0.5;     // (1 ± asymmetry) split of the density perturbation
  double drift = 0.5;         // v1 sqrt(mu) component
  double temperature = 0.25;  // (|v|^2 - 3) sqrt(mu) component
  double shear = 0.0;         // v1 v2 sqrt(mu) component
  double em_seed = 0.0;       // transverse E2 = B3 seed, relative to amplitude
};

struct RunConfig {
  double vmax = 8.0;
  int nv = 17;
  int nx = 32;
  double length = 6.283185307179586;
  SpatialMode mode = SpatialMode::Periodic1D;
  int sphere_order = 14;
  PhysicsToggles toggles;
  InitialData init;
  double dt = 0.02;
  int steps = 500;
  Scheme scheme = Scheme::Strang;
  bool edge_damping = false;
  int N = 2;
  int report_interval = 1;
  double M0 = 1.0;
  std::vector<double> C0_scan{0.1, 1.0, 10.0};
  int richardson_steps = 8;
  std::string csv_path = "run.csv";
  std::string snapshot_path = "final";  // writes <path>.json and <path>.bin
  int snapshot_interval = 0;            // 0: final snapshot only
  unsigned seed = 1;
  nlohmann::json source;                // the parsed document, echoed into snapshots
};

// throws ConfigError on missing/invalid keys or a violated step-size bound
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Owns grids, collision tables and the model; not movable because the model points into it.
struct Simulation {
  RunConfig cfg;
  VelocityGrid grid;
  SphereQuadrature sphere;
  SpatialGrid sg;
  CollisionWorkspace ws;
  Model model;

  explicit Simulation(const RunConfig& cfg);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;
};

KineticState initial_state(const Simulation& sim);

class Stepper {
 public:
  Stepper(const Simulation& sim, double dt, Scheme scheme, bool edge_damping);
  void step(KineticState& s) const;

  void transport(KineticState& s, int which) const;  // which: 0 half step, 1 full step
  void fields_and_force(KineticState& s, double tau) const;
  void collide(KineticState& s, double tau) const;

  double dt() const { return dt_; }

 private:
  const Simulation* sim_;
  double dt_;
  Scheme scheme_;
  bool edge_damping_;
  Vec nu_;
  // per v1 index: translation and integrated translation for half and full steps
  std::vector<Mat> shift_[2], flux_[2];
};

struct InstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool finite_state(const KineticState& s);

struct RichardsonEstimate {
  double order = 0;            // log2 of successive state-difference ratio
  double ledger_error = 0;     // extrapolated error of E + ∫D at dt after n steps
  double tol_ledger = 0;       // relative slack for the run
  double tol_step = 0;         // per-step slack of the differential check
  int steps = 0;
  std::vector<double> state_diff;  // ||u_dt - u_dt/2||, ||u_dt/2 - u_dt/4||
};

// n steps at dt, dt/2, dt/4 from s0 (edge damping off)
RichardsonEstimate richardson(const Simulation& sim, const KineticState& s0, int n, int total_steps);

struct RunRow {
  int step = 0;
  EnergyReport report;
  double ledger_lhs = 0, ledger_margin = 0;
  double leapfrog_energy = 0;
};

struct RunResult {
  int exit_code = 0;
  std::vector<RunRow> rows;
  std::vector<LedgerSample> history;
  LedgerReport ledger;
  RichardsonEstimate richardson;
  double min_F = 0;
  double min_delta_hat = 0;
  double max_field_ratio = 0;
  double max_gauss = 0;
  KineticState final_state;
  std::string message;
};

struct RunOptions {
  std::string restart_snapshot;  // resume from this snapshot if non-empty
  bool write_files = true;
  bool quiet = false;
};

RunResult run_simulation(const RunConfig& cfg, const RunOptions& opts = {});

// Standalone invariant suite of the collision operator on the config's velocity grid.
// Each entry carries the measured value, its threshold and a pass flag; "pass" is the conjunction.
nlohmann::json collision_check_report(const Simulation& sim);

// Macroscopic fields and residuals of a state, as written by `decompose`.
nlohmann::json decompose_report(const Simulation& sim, const KineticState& s);

}  // namespace vmb

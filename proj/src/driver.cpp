#include "vmb/driver.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <set>

#include "vmb/io.hpp"

namespace vmb {

using nlohmann::json;

namespace {

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j[key].is_object()) throw ConfigError(std::string("config: '") + key + "' must be an object");
  return j[key];
}

void reject_unknown(const json& j, const std::string& where, std::set<std::string> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("config: unknown key '" + where + it.key() + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: '" + where + key + "' has the wrong type");
  }
}

void read_bool(const json& j, const char* key, bool& out, const std::string& where) {
  if (!j.contains(key)) return;
  if (!j[key].is_boolean()) throw ConfigError("config: '" + where + key + "' must be true or false");
  out = j[key].get<bool>();
}

}  // namespace

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(j, "", {"grid", "physics", "initial", "integrator", "diagnostics", "output", "seed"});
  RunConfig c;
  c.source = j;

  const json& g = section(j, "grid");
  reject_unknown(g, "grid.", {"vmax", "nv", "nx", "length", "mode", "sphere_order"});
  read(g, "vmax", c.vmax, "grid.");
  read(g, "nv", c.nv, "grid.");
  read(g, "nx", c.nx, "grid.");
  read(g, "length", c.length, "grid.");
  read(g, "sphere_order", c.sphere_order, "grid.");
  if (g.contains("mode")) {
    std::string m;
    read(g, "mode", m, "grid.");
    c.mode = parse_spatial_mode(m);
  }

  const json& p = section(j, "physics");
  reject_unknown(p, "physics.", {"gamma", "force_nonlinear", "fields"});
  read_bool(p, "gamma", c.toggles.gamma, "physics.");
  read_bool(p, "force_nonlinear", c.toggles.force_nonlinear, "physics.");
  read_bool(p, "fields", c.toggles.fields, "physics.");

  const json& in = section(j, "initial");
  reject_unknown(in, "initial.", {"amplitude", "modes", "asymmetry", "drift", "temperature", "shear", "em_seed"});
  read(in, "amplitude", c.init.amplitude, "initial.");
  read(in, "modes", c.init.modes, "initial.");
  read(in, "asymmetry", c.init.asymmetry, "initial.");
  read(in, "drift", c.init.drift, "initial.");
  read(in, "temperature", c.init.temperature, "initial.");
  read(in, "shear", c.init.shear, "initial.");
  read(in, "em_seed", c.init.em_seed, "initial.");

  const json& t = section(j, "integrator");
  reject_unknown(t, "integrator.", {"dt", "steps", "scheme", "edge_damping"});
  read(t, "dt", c.dt, "integrator.");
  read(t, "steps", c.steps, "integrator.");
  read_bool(t, "edge_damping", c.edge_damping, "integrator.");
  if (t.contains("scheme")) {
    std::string s;
    read(t, "scheme", s, "integrator.");
    if (s == "strang") c.scheme = Scheme::Strang;
    else if (s == "lie") c.scheme = Scheme::Lie;
    else throw ConfigError("config: integrator.scheme must be 'strang' or 'lie'");
  }

  const json& d = section(j, "diagnostics");
  reject_unknown(d, "diagnostics.", {"N", "report_interval", "M0", "C0_scan", "richardson_steps"});
  read(d, "N", c.N, "diagnostics.");
  read(d, "report_interval", c.report_interval, "diagnostics.");
  read(d, "M0", c.M0, "diagnostics.");
  read(d, "C0_scan", c.C0_scan, "diagnostics.");
  read(d, "richardson_steps", c.richardson_steps, "diagnostics.");

  const json& o = section(j, "output");
  reject_unknown(o, "output.", {"csv", "snapshot", "snapshot_interval"});
  read(o, "csv", c.csv_path, "output.");
  read(o, "snapshot", c.snapshot_path, "output.");
  read(o, "snapshot_interval", c.snapshot_interval, "output.");
  read(j, "seed", c.seed, "");

  if (!(c.vmax > 0)) throw ConfigError("config: grid.vmax must be positive");
  if (c.nv < 3 || c.nv % 2 == 0) throw ConfigError("config: grid.nv must be odd and >= 3");
  if (c.sphere_order != 6 && c.sphere_order != 14 && c.sphere_order != 26)
    throw ConfigError("config: grid.sphere_order must be 6, 14 or 26");
  if (c.mode == SpatialMode::Homogeneous0D) c.nx = 1;
  if (c.nx < 1 || (c.mode == SpatialMode::Periodic1D && c.nx < 4))
    throw ConfigError("config: grid.nx must be >= 4 in periodic-1D mode");
  if (!(c.length > 0)) throw ConfigError("config: grid.length must be positive");
  if (!(c.dt > 0)) throw ConfigError("config: integrator.dt must be positive");
  if (c.steps < 0) throw ConfigError("config: integrator.steps must be >= 0");
  if (c.N < 1 || c.N > 4) throw ConfigError("config: diagnostics.N must be in 1..4");
  if (c.report_interval < 1) throw ConfigError("config: diagnostics.report_interval must be >= 1");
  if (c.richardson_steps < 0) throw ConfigError("config: diagnostics.richardson_steps must be >= 0");
  if (c.C0_scan.empty()) throw ConfigError("config: diagnostics.C0_scan must not be empty");
  if (!(c.init.amplitude >= 0)) throw ConfigError("config: initial.amplitude must be >= 0");
  for (int m : c.init.modes)
    if (m < 0 || (c.mode == SpatialMode::Periodic1D && 2 * m >= c.nx))
      throw ConfigError("config: initial.modes must lie in [0, nx/2)");
  if (c.mode == SpatialMode::Periodic1D) {
    const double dx = c.length / c.nx;
    if (c.dt > dx / c.vmax * (1 + 1e-12))
      throw ConfigError("config: dt exceeds the transport bound dx/vmax");
    if (c.toggles.fields && c.dt > dx * (1 + 1e-12))
      throw ConfigError("config: dt exceeds the Maxwell bound dx");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  return parse_config(j);
}

Simulation::Simulation(const RunConfig& c)
    : cfg(c),
      grid(build_velocity_grid(c.vmax, c.nv)),
      sphere(build_sphere_quadrature(c.sphere_order)),
      sg(build_spatial_grid(c.mode, c.length, c.nx)),
      ws(build_collision_workspace(grid, sphere)),
      model(make_model(grid, sg, ws, c.toggles)) {}

KineticState initial_state(const Simulation& sim) {
  const RunConfig& c = sim.cfg;
  const VelocityGrid& g = sim.grid;
  const Index n = g.size(), nx = sim.sg.nx;
  const Vec& s = sim.ws.sqrt_mu;
  const Nodes& v = g.nodes;
  const Vec r2 = v.rowwise().squaredNorm();
  Vec common = c.init.drift * v.col(0).cwiseProduct(s) + c.init.temperature * (r2.array() - 3.0).matrix().cwiseProduct(s) +
               c.init.shear * v.col(0).cwiseProduct(v.col(1)).cwiseProduct(s);
  Vec fp = (1 + c.init.asymmetry) * s + common;
  Vec fm = (1 - c.init.asymmetry) * s + common;

  Vec profile = Vec::Zero(nx);
  for (int m : c.init.modes)
    profile.array() += (2 * std::numbers::pi * m / sim.sg.length * sim.sg.x.array()).cos();
  profile *= c.init.amplitude;

  KineticState st;
  st.t = 0;
  st.f.resize(2 * n, nx);
  for (Index j = 0; j < nx; ++j) st.f.col(j) << profile[j] * fp, profile[j] * fm;
  st.em = EMField::zero(int(nx));
  if (c.toggles.fields) {
    ChargeCurrent cc = compute_charge_current(st.f, sim.ws.basis);
    if (sim.sg.mode == SpatialMode::Periodic1D) {
      st.em.E.col(0) = solve_gauss(cc.rho, sim.sg);
      const double seed = c.init.em_seed * c.init.amplitude;
      for (Index j = 0; j < nx; ++j) {
        const double w = seed * std::cos(2 * std::numbers::pi * sim.sg.x[j] / sim.sg.length);
        st.em.E(j, 1) = w;
        st.em.B(j, 2) = w;
      }
    }
  }
  return st;
}

Stepper::Stepper(const Simulation& sim, double dt, Scheme scheme, bool edge_damping)
    : sim_(&sim), dt_(dt), scheme_(scheme), edge_damping_(edge_damping), nu_(nu_stacked(sim.ws)) {
  const VelocityGrid& g = sim.grid;
  for (int w = 0; w < 2; ++w) {
    const double tau = w == 0 ? 0.5 * dt : dt;
    for (int i = 0; i < g.nv; ++i) {
      const double v1 = (i - g.m) * g.h;
      shift_[w].push_back(translation_matrix(sim.sg, v1 * tau));
      flux_[w].push_back(integrated_translation_matrix(sim.sg, v1, tau));
    }
  }
}

void Stepper::transport(KineticState& s, int which) const {
  const VelocityGrid& g = sim_->grid;
  const Index n = g.size(), nx = s.f.cols(), block = Index(g.nv) * g.nv;
  const Vec& sq = sim_->ws.sqrt_mu;
  std::vector<Vec> dE(g.nv, Vec::Zero(nx));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < g.nv; ++i) {
    const Index off = Index(i) * block;
    const double v1 = (i - g.m) * g.h;
    if (sim_->cfg.toggles.fields) {
      Vec w = sq.segment(off, block) * (v1 * g.cell());
      Vec j1 = (s.f.middleRows(off, block) - s.f.middleRows(n + off, block)).transpose() * w;
      dE[i] = flux_[which][i] * j1;
    }
    const Mat& T = shift_[which][i];
    s.f.middleRows(off, block) = s.f.middleRows(off, block) * T.transpose();
    s.f.middleRows(n + off, block) = s.f.middleRows(n + off, block) * T.transpose();
  }
  if (sim_->cfg.toggles.fields)
    for (int i = 0; i < g.nv; ++i) s.em.E.col(0) -= dE[i];
}

void Stepper::fields_and_force(KineticState& s, double tau) const {
  const Model& model = sim_->model;
  if (!model.toggles.fields) return;
  auto kick = [&](double h) {
    if (model.toggles.force_nonlinear) {
      auto F = [&](const Mat& f) {
        return Mat(source_term(s.em.E, model) + force_nonlinear(s.em.E, s.em.B, f, model));
      };
      Mat mid = s.f + 0.5 * h * F(s.f);
      s.f += h * F(mid);
    } else {
      s.f += h * source_term(s.em.E, model);
    }
  };
  kick(0.5 * tau);
  Field3 J = current(s.f, sim_->grid, sim_->ws.sqrt_mu);
  s.em = maxwell_step(s.em, J, tau, sim_->sg, false);
  kick(0.5 * tau);
}

void Stepper::collide(KineticState& s, double tau) const {
  const Model& model = sim_->model;
  auto N = [&](const Mat& f) {
    Mat r = nu_.asDiagonal() * f - collide_L(f, model);
    if (model.toggles.gamma) r += collide_Gamma(f, f, model);
    return r;
  };
  const Vec e = (-tau * nu_).array().exp().matrix();
  const Mat f0 = s.f;
  const Mat N0 = N(f0);
  const Mat f1 = e.asDiagonal() * (f0 + tau * N0);
  const Mat N1 = N(f1);
  Mat fn = e.asDiagonal() * (f0 + 0.5 * tau * N0) + 0.5 * tau * N1;
  fn += apply_P(Mat(f0 - fn), sim_->ws.basis);
  s.f = std::move(fn);
}

void Stepper::step(KineticState& s) const {
  if (scheme_ == Scheme::Strang) {
    transport(s, 0);
    fields_and_force(s, 0.5 * dt_);
    collide(s, dt_);
    fields_and_force(s, 0.5 * dt_);
    transport(s, 0);
  } else {
    transport(s, 1);
    fields_and_force(s, dt_);
    collide(s, dt_);
  }
  if (edge_damping_) damp_velocity_edges(s.f, sim_->model);
  s.t += dt_;
  if (!finite_state(s)) throw InstabilityError("non-finite value in the state at t = " + std::to_string(s.t));
}

bool finite_state(const KineticState& s) {
  return s.f.allFinite() && s.em.E.allFinite() && s.em.B.allFinite();
}

namespace {

double state_distance(const KineticState& a, const KineticState& b, const Model& model) {
  EMField d{a.em.E - b.em.E, a.em.B - b.em.B};
  return std::sqrt(norm2(Mat(a.f - b.f), model) + field_energy(d, *model.sg));
}

LedgerSample sample(const KineticState& s, const Model& model, int N) {
  DerivativeStack st = build_derivative_stack(s, model, N);
  LedgerTerms lt = ledger_terms(st, model);
  return {s.t, lt.energy, lt.dissipation};
}

}  // namespace

RichardsonEstimate richardson(const Simulation& sim, const KineticState& s0, int n, int total_steps) {
  RichardsonEstimate r;
  r.steps = n;
  if (n <= 0) return r;
  std::vector<KineticState> finals;
  std::vector<double> q;
  double E0 = 0;
  for (int k = 0; k < 3; ++k) {
    const int refine = 1 << k;
    Stepper stepper(sim, sim.cfg.dt / refine, sim.cfg.scheme, false);
    KineticState s = s0;
    LedgerSample prev = sample(s, sim.model, sim.cfg.N);
    E0 = prev.E;
    double integral = 0;
    for (int i = 0; i < n * refine; ++i) {
      stepper.step(s);
      LedgerSample cur = sample(s, sim.model, sim.cfg.N);
      integral += 0.5 * (cur.t - prev.t) * (cur.D + prev.D);
      prev = cur;
    }
    q.push_back(prev.E + integral);
    finals.push_back(std::move(s));
  }
  const double d0 = state_distance(finals[0], finals[1], sim.model);
  const double d1 = state_distance(finals[1], finals[2], sim.model);
  r.state_diff = {d0, d1};
  r.order = d1 > 0 && d0 > 0 ? std::log2(d0 / d1) : 0.0;
  const double p = (r.order > 0.5 && r.order < 4.0) ? r.order : 2.0;
  const double q0 = std::abs(q[0] - q[1]), q1 = std::abs(q[1] - q[2]);
  // extrapolated error of the dt run, bounded below by the next-level difference
  r.ledger_error = std::max(q0 * std::pow(2.0, p) / (std::pow(2.0, p) - 1.0), q1);
  const double local = r.ledger_error / n;
  r.tol_ledger = E0 > 0 ? 10.0 * local * total_steps / E0 : 0.0;
  r.tol_step = 10.0 * local / sim.cfg.dt;
  return r;
}

namespace {

const std::vector<std::string> kCsvHeader = {
    "step", "t", "E_N", "D_N", "G", "dGdt", "E_ledger", "D_ledger", "ledger_lhs", "ledger_margin",
    "min_F", "gauss_residual", "divB_residual", "delta_hat", "smallness", "field_ratio", "leapfrog_energy"};

json richardson_json(const RichardsonEstimate& r) {
  return {{"order", r.order}, {"ledger_error", r.ledger_error}, {"tol_ledger", r.tol_ledger},
          {"tol_step", r.tol_step}, {"steps", r.steps}, {"state_diff", r.state_diff}};
}

RichardsonEstimate richardson_from_json(const json& j) {
  RichardsonEstimate r;
  r.order = j.at("order");
  r.ledger_error = j.at("ledger_error");
  r.tol_ledger = j.at("tol_ledger");
  r.tol_step = j.at("tol_step");
  r.steps = j.at("steps");
  r.state_diff = j.at("state_diff").get<std::vector<double>>();
  return r;
}

}  // namespace

RunResult run_simulation(const RunConfig& cfg, const RunOptions& opts) {
  RunResult res;
  Simulation sim(cfg);
  const Model& model = sim.model;

  KineticState s;
  int step0 = 0;
  if (!opts.restart_snapshot.empty()) {
    Snapshot snap = read_snapshot(opts.restart_snapshot);
    if (snap.nv != cfg.nv || snap.state.f.cols() != sim.sg.nx)
      throw ConfigError("restart: snapshot grid does not match the config");
    s = std::move(snap.state);
    step0 = snap.step;
    const json& led = snap.header.at("ledger");
    for (const auto& row : led.at("history")) res.history.push_back({row[0], row[1], row[2]});
    res.richardson = richardson_from_json(led.at("richardson"));
    res.min_F = led.at("min_F");
  } else {
    s = initial_state(sim);
    res.min_F = min_F(s.f, model);
    if (cfg.richardson_steps > 0 && cfg.init.amplitude > 0) {
      res.richardson = richardson(sim, s, cfg.richardson_steps, cfg.steps);
      if (!opts.quiet)
        std::cerr << "richardson: order " << res.richardson.order << ", tol_ledger " << res.richardson.tol_ledger
                  << "\n";
    }
  }

  CsvWriter csv;
  if (opts.write_files) csv = CsvWriter(cfg.csv_path, kCsvHeader);
  Stepper stepper(sim, cfg.dt, cfg.scheme, cfg.edge_damping);

  double integral = 0;
  for (std::size_t k = 1; k < res.history.size(); ++k)
    integral += 0.5 * (res.history[k].t - res.history[k - 1].t) * (res.history[k].D + res.history[k - 1].D);
  res.min_delta_hat = std::numeric_limits<double>::infinity();

  auto ledger_json = [&] {
    json hist = json::array();
    for (const auto& h : res.history) hist.push_back({h.t, h.E, h.D});
    return json{{"history", hist}, {"richardson", richardson_json(res.richardson)}, {"min_F", res.min_F}};
  };
  auto snapshot = [&](const std::string& base, int step) {
    if (!opts.write_files) return;
    write_snapshot(base, s, step, cfg.nv, {{"config", cfg.source}, {"ledger", ledger_json()}});
  };

  auto record = [&](int step, bool full) {
    LedgerSample ls;
    EnergyReport rep;
    if (full) {
      rep = make_report(s, model, cfg.N, cfg.C0_scan);
      ls = {s.t, rep.E_led, rep.D_led};
    } else {
      ls = sample(s, model, cfg.N);
    }
    if (res.history.empty() || step > step0 || opts.restart_snapshot.empty()) {
      if (!res.history.empty() && s.t > res.history.back().t)
        integral += 0.5 * (s.t - res.history.back().t) * (ls.D + res.history.back().D);
      if (res.history.empty() || s.t > res.history.back().t) res.history.push_back(ls);
    }
    res.min_F = std::min(res.min_F, min_F(s.f, model));
    if (!full) return;
    RunRow row;
    row.step = step;
    row.report = rep;
    row.ledger_lhs = ls.E + integral;
    const double E0 = res.history.front().E;
    row.ledger_margin = E0 * (1 + res.richardson.tol_ledger) - row.ledger_lhs;
    row.leapfrog_energy = leapfrog_energy(s.em, cfg.dt, sim.sg);
    if (!rep.coercivity.inconclusive) res.min_delta_hat = std::min(res.min_delta_hat, rep.coercivity.best_ratio);
    res.max_field_ratio = std::max(res.max_field_ratio, rep.field_ratio);
    res.max_gauss = std::max(res.max_gauss, rep.gauss);
    if (csv.is_open())
      csv.row({double(step), s.t, rep.E_N, rep.D_N, rep.G, rep.dGdt, rep.E_led, rep.D_led, row.ledger_lhs,
               row.ledger_margin, rep.min_F, rep.gauss, rep.div_b,
               rep.coercivity.inconclusive ? std::nan("") : rep.coercivity.best_ratio, rep.smallness,
               rep.field_ratio, row.leapfrog_energy});
    res.rows.push_back(std::move(row));
  };

  record(step0, true);
  const int last = step0 + cfg.steps;
  try {
    for (int step = step0 + 1; step <= last; ++step) {
      stepper.step(s);
      record(step, step % cfg.report_interval == 0 || step == last);
      if (cfg.snapshot_interval > 0 && step % cfg.snapshot_interval == 0 && step != last)
        snapshot(cfg.snapshot_path + "_" + std::to_string(step), step);
    }
  } catch (const InstabilityError& e) {
    snapshot(cfg.snapshot_path + "_abort", -1);
    res.exit_code = 2;
    res.message = e.what();
    res.final_state = s;
    return res;
  }
  snapshot(cfg.snapshot_path, last);

  res.ledger = energy_ledger(res.history, res.richardson.tol_ledger, res.richardson.tol_step);
  if (!std::isfinite(res.min_delta_hat)) res.min_delta_hat = 0;
  const bool positivity = res.min_F >= -1e-10;
  res.exit_code = res.ledger.pass_integral && res.ledger.pass_differential && positivity ? 0 : 1;
  if (res.exit_code != 0)
    res.message = std::string("ledger") + (res.ledger.pass_integral ? "" : " integral-check-failed") +
                  (res.ledger.pass_differential ? "" : " differential-check-failed") +
                  (positivity ? "" : " min_F-below-threshold");
  res.final_state = std::move(s);
  return res;
}

}  // namespace vmb

namespace vmb {

namespace {

Vec random_sample(std::mt19937_64& rng, const CollisionWorkspace& ws) {
  std::normal_distribution<double> nd;
  const Vec s2 = stack(ws.sqrt_mu, ws.sqrt_mu).cwiseSqrt();
  Vec g(2 * ws.n());
  for (Index i = 0; i < g.size(); ++i) g[i] = nd(rng);
  return g.cwiseProduct(s2);
}

json check(double value, double threshold, bool pass) {
  return {{"value", value}, {"threshold", threshold}, {"pass", pass}};
}

}  // namespace

json collision_check_report(const Simulation& sim) {
  const CollisionWorkspace& ws = sim.ws;
  const VelocityGrid& g = sim.grid;
  std::mt19937_64 rng(sim.cfg.seed);
  json r;

  {
    std::normal_distribution<double> nd;
    double worst = 0;
    for (int k = 0; k < 10000; ++k) {
      Eigen::Vector3d v(nd(rng), nd(rng), nd(rng)), u(nd(rng), nd(rng), nd(rng)), w(nd(rng), nd(rng), nd(rng));
      v *= 3;
      u *= 3;
      w.normalize();
      auto [vp, up] = post_collision(v, u, w);
      const double p = (v + u).norm() + 1e-300, e = v.squaredNorm() + u.squaredNorm();
      worst = std::max({worst, ((vp + up) - (v + u)).norm() / std::max(p, std::sqrt(e)),
                        std::abs(vp.squaredNorm() + up.squaredNorm() - e) / e});
    }
    r["kinematics_relative_error"] = check(worst, 1e-13, worst <= 1e-13);
  }
  {
    const double mmax = ws.mu.cwiseAbs().maxCoeff();
    const double q = eval_Q(ws.mu, ws.mu, ws).cwiseAbs().maxCoeff() / mmax;
    const double qraw = eval_Q_raw(ws.mu, ws.mu, ws).cwiseAbs().maxCoeff() / mmax;
    r["equilibrium_Q_mu_mu"] = check(q, 1e-3, q <= 1e-3);
    r["equilibrium_Q_mu_mu"]["raw"] = qraw;
  }
  const Vec nu2 = nu_stacked(ws);
  auto nu_norm2 = [&](const Vec& x) { return x.cwiseProduct(nu2).dot(x) * g.cell(); };
  {
    double sym = 0, neg = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 100; ++k) {
      Vec a = random_sample(rng, ws), b = random_sample(rng, ws);
      Vec La = apply_L(a, ws), Lb = apply_L(b, ws);
      sym = std::max(sym, std::abs(La.dot(b) - a.dot(Lb)) / (La.norm() * b.norm()));
      neg = std::min(neg, inner(La, a, g) / nu_norm2(a));
    }
    r["L_symmetry_defect"] = check(sym, 1e-8, sym <= 1e-8);
    r["L_nonnegativity_min"] = check(neg, -1e-8, neg >= -1e-8);
  }
  {
    double res = 0;
    for (int k = 0; k < 6; ++k) {
      Vec e = ws.basis.e.col(k);
      res = std::max(res, apply_L(e, ws).norm() / e.norm());
    }
    r["null_residual"] = check(res, 5e-3, res <= 5e-3);
    r["null_residual"]["raw"] = ws.null_residual_raw;
  }
  {
    const double nu0 = collision_frequency(Eigen::Vector3d::Zero(), ws);
    const double exact = 8 * std::sqrt(2 * std::numbers::pi);
    const double rel = std::abs(nu0 / exact - 1);
    r["nu0_relative_error"] = check(rel, 5e-3, rel <= 5e-3);
    r["nu0_relative_error"]["nu0"] = nu0;
    const Vec speed = g.nodes.rowwise().norm();
    const Vec ratio = ws.nu.array() / (1.0 + speed.array());
    r["nu_bounds"] = {{"c1", ratio.minCoeff()}, {"c2", ratio.maxCoeff()}, {"pass", ratio.minCoeff() > 0}};
  }
  {
    RayleighEstimate re = rayleigh_coercivity(ws, 200, sim.cfg.seed);
    r["rayleigh_delta_hat"] = check(re.delta_min, 0.0, re.delta_min > 0);
    r["rayleigh_delta_hat"]["max"] = re.delta_max;
    r["rayleigh_delta_hat"]["samples"] = re.samples;
  }
  {
    double worst = 0;
    for (int k = 0; k < 50; ++k) {
      Vec a = random_sample(rng, ws), b = random_sample(rng, ws);
      Vec G = apply_Gamma(a, b, ws);
      const double scale = std::sqrt(inner(a, a, g) * inner(b, b, g));
      for (int c = 0; c < 6; ++c) worst = std::max(worst, std::abs(inner(G, ws.basis.e.col(c), g)) / scale);
    }
    r["gamma_range"] = check(worst, 1e-6, worst <= 1e-6);
  }
  bool pass = true;
  for (auto& [k, v] : r.items()) pass = pass && v.at("pass").get<bool>();
  r["pass"] = pass;
  r["grid"] = {{"nv", g.nv}, {"vmax", g.vmax}, {"sphere_order", sim.sphere.order}};
  return r;
}

json decompose_report(const Simulation& sim, const KineticState& s) {
  const Model& model = sim.model;
  MacroFields m = MacroFields::from_matrix(macro_coefficients(s.f, sim.ws.basis));
  auto vec = [](const Vec& x) { return std::vector<double>(x.data(), x.data() + x.size()); };
  json r;
  r["t"] = s.t;
  r["x"] = vec(sim.sg.x);
  r["macro"] = {{"a_plus", vec(m.a_plus)}, {"a_minus", vec(m.a_minus)}, {"b1", vec(m.b1)},
                {"b2", vec(m.b2)},         {"b3", vec(m.b3)},           {"c", vec(m.c)}};
  Mat micro = micro_part(s.f, sim.ws.basis);
  r["micro_norm"] = std::sqrt(norm2(micro, model));
  r["macro_norm"] = std::sqrt(norm2(Mat(s.f - micro), model));
  ResidualReport rr = macro_residuals(s, model);
  static const char* names[] = {"c_1",  "c_2",  "c_3",  "cdot_1", "cdot_2", "cdot_3", "b_12", "b_13", "b_23",
                                "a+_1", "a+_2", "a+_3", "a-_1",   "a-_2",   "a-_3",   "adot+", "adot-"};
  json res = json::object();
  for (int k = 0; k < 17; ++k) res[names[k]] = {{"max_residual", rr.max_residual[k]}, {"max_lhs", rr.max_lhs[k]}};
  r["residuals"] = res;
  r["summed_b"] = {rr.summed_b[0], rr.summed_b[1], rr.summed_b[2]};
  r["G"] = compute_G(m, sim.sg);
  return r;
}

}  // namespace vmb

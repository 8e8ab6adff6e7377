#include "vmb/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vmb {

namespace {

double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Mat dx_pow(const Mat& f, const Model& model, int p) {
  Mat r = f;
  for (int i = 0; i < p; ++i) r = r * model.sg->deriv.transpose();
  return r;
}

Field3 dx_pow(const Field3& F, const Model& model, int p) {
  Field3 r = F;
  for (int i = 0; i < p; ++i) r = model.sg->deriv * r;
  return r;
}

Mat dv_pow(const Mat& f, const Model& model, const Eigen::Vector3i& beta) {
  Mat r = f;
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < beta[a]; ++i) r = velocity_derivative(r, a, model);
  return r;
}

std::vector<Eigen::Vector3i> betas_up_to(int order) {
  std::vector<Eigen::Vector3i> out;
  for (int s = 0; s <= order; ++s)
    for (int a = s; a >= 0; --a)
      for (int b = s - a; b >= 0; --b) out.emplace_back(a, b, s - a - b);
  return out;
}

EMField field_rhs(const EMField& em, const Mat& f, const Model& model) {
  const Index nx = em.E.rows();
  if (!model.toggles.fields) return EMField::zero(int(nx));
  EMField d;
  d.E = curl_1d(em.B, *model.sg) - current(f, *model.grid, model.ws->sqrt_mu);
  d.B = -curl_1d(em.E, *model.sg);
  return d;
}

}  // namespace

const StackEntry& DerivativeStack::entry(int at, int ax, const Eigen::Vector3i& beta) const {
  for (const auto& e : f_entries)
    if (e.at == at && e.ax == ax && e.beta == beta) return e;
  throw std::out_of_range("derivative stack: entry not present");
}

Mat DerivativeStack::L_of(const StackEntry& e, const Model& model) const {
  if (e.beta.sum() != 0) throw std::invalid_argument("L_of: velocity-differentiated entry");
  return dx_pow(Lft[e.at], model, e.ax);
}

Mat temporal_rhs(const std::vector<Mat>& ft, const std::vector<EMField>& emt, int m, const Model& model) {
  return temporal_rhs(ft, emt, collide_L(ft[m], model), m, model);
}

Mat temporal_rhs(const std::vector<Mat>& ft, const std::vector<EMField>& emt, const Mat& Lfm, int m,
                 const Model& model) {
  Mat r = transport_term(ft[m], model) - Lfm;
  if (model.toggles.fields) {
    r += source_term(emt[m].E, model);
    if (model.toggles.force_nonlinear)
      for (int j = 0; j <= m; ++j)
        r += binom(m, j) * force_nonlinear(emt[j].E, emt[j].B, ft[m - j], model);
  }
  if (model.toggles.gamma)
    for (int j = 0; j <= m; ++j) r += binom(m, j) * collide_Gamma(ft[j], ft[m - j], model);
  return r;
}

DerivativeStack build_derivative_stack(const KineticState& s, const Model& model, int N) {
  if (N < 1) throw std::invalid_argument("derivative stack: N must be >= 1");
  if (N > 4) throw std::invalid_argument("derivative stack: N > 4 is not supported");
  DerivativeStack st;
  st.N = N;
  st.ft.push_back(s.f);
  st.emt.push_back(model.toggles.fields ? s.em : EMField::zero(int(s.f.cols())));
  for (int m = 0; m < N; ++m) {
    st.Lft.push_back(collide_L(st.ft[m], model));
    st.ft.push_back(temporal_rhs(st.ft, st.emt, st.Lft[m], m, model));
    st.emt.push_back(field_rhs(st.emt[m], st.ft[m], model));
  }
  st.Lft.push_back(collide_L(st.ft[N], model));
  const bool spatial = model.sg->mode == SpatialMode::Periodic1D;
  const NullBasis& basis = model.ws->basis;
  for (int at = 0; at <= N; ++at)
    for (int ax = 0; ax + at <= N; ++ax) {
      if (ax > 0 && !spatial) continue;
      Mat base = dx_pow(st.ft[at], model, ax);
      Mat mic = micro_part(base, basis);
      for (const auto& beta : betas_up_to(N - at - ax)) {
        StackEntry e;
        e.at = at;
        e.ax = ax;
        e.beta = beta;
        e.value = beta.sum() == 0 ? base : dv_pow(base, model, beta);
        e.micro = beta.sum() == 0 ? mic : dv_pow(mic, model, beta);
        st.f_entries.push_back(std::move(e));
      }
      FieldEntry fe;
      fe.at = at;
      fe.ax = ax;
      fe.em = {dx_pow(st.emt[at].E, model, ax), dx_pow(st.emt[at].B, model, ax)};
      st.em_entries.push_back(std::move(fe));
    }
  return st;
}

double norm2(const Mat& f, const Model& model) {
  return f.squaredNorm() * model.grid->cell() * model.sg->dx();
}

double norm2_nu(const Mat& f, const Model& model) {
  const Vec nu2 = nu_stacked(*model.ws);
  return (nu2.asDiagonal() * f.cwiseAbs2()).sum() * model.grid->cell() * model.sg->dx();
}

double norm2(const EMField& em, const SpatialGrid& sg) { return field_energy(em, sg); }

double inner(const Mat& f, const Mat& g, const Model& model) {
  return f.cwiseProduct(g).sum() * model.grid->cell() * model.sg->dx();
}

std::vector<BreakdownEntry> energy_breakdown(const DerivativeStack& st, const Model& model) {
  std::vector<BreakdownEntry> out;
  for (const auto& e : st.f_entries) {
    BreakdownEntry b;
    b.at = e.at;
    b.ax = e.ax;
    b.beta = e.beta;
    b.energy = norm2(e.value, model);
    if (e.beta.sum() == 0 && e.alpha() > 0) b.diss_full = norm2_nu(e.value, model);
    b.diss_micro = norm2_nu(e.micro, model);
    out.push_back(b);
  }
  return out;
}

double field_energy_stack(const DerivativeStack& st, const Model& model) {
  double s = 0;
  for (const auto& fe : st.em_entries) s += norm2(fe.em, *model.sg);
  return s;
}

double reduced_energy(const DerivativeStack& st, const Model& model, int m) {
  double s = field_energy_stack(st, model);
  for (const auto& e : st.f_entries)
    if (e.beta.sum() <= m) s += norm2(e.value, model);
  return s;
}

double reduced_dissipation(const DerivativeStack& st, const Model& model, int m) {
  double s = st.emt[0].E.squaredNorm() * model.sg->dx();
  for (const auto& e : st.f_entries) {
    if (e.beta.sum() == 0 && e.alpha() > 0) s += norm2_nu(e.value, model);
    if (e.beta.sum() <= m) s += norm2_nu(e.micro, model);
  }
  return s;
}

double instant_energy(const DerivativeStack& st, const Model& model) {
  return reduced_energy(st, model, st.N);
}

double dissipation_rate(const DerivativeStack& st, const Model& model) {
  return reduced_dissipation(st, model, st.N);
}

double compute_G(const MacroFields& macro, const SpatialGrid& sg) {
  if (sg.mode == SpatialMode::Homogeneous0D) return 0.0;
  Vec db = sg.deriv * macro.b1;
  return integrate_x(db.cwiseProduct(macro.a_plus + macro.a_minus), sg);
}

double compute_dGdt(const MacroFields& m, const MacroFields& mt, const SpatialGrid& sg) {
  if (sg.mode == SpatialMode::Homogeneous0D) return 0.0;
  Vec a = m.a_plus + m.a_minus, at = mt.a_plus + mt.a_minus;
  return integrate_x((sg.deriv * mt.b1).cwiseProduct(a) + (sg.deriv * m.b1).cwiseProduct(at), sg);
}

Mat macro_expansion_basis(const Model& model) {
  const VelocityGrid& g = *model.grid;
  const Index n = g.size();
  const Vec& s = model.ws->sqrt_mu;
  const Nodes& v = g.nodes;
  const Vec r2 = v.rowwise().squaredNorm();
  Mat B = Mat::Zero(2 * n, 17);
  auto both = [&](int c, const Vec& x) { B.col(c) << x, x; };
  for (int i = 0; i < 3; ++i) both(i, v.col(i).cwiseProduct(r2).cwiseProduct(s));
  for (int i = 0; i < 3; ++i) both(3 + i, v.col(i).cwiseAbs2().cwiseProduct(s));
  both(6, v.col(0).cwiseProduct(v.col(1)).cwiseProduct(s));
  both(7, v.col(0).cwiseProduct(v.col(2)).cwiseProduct(s));
  both(8, v.col(1).cwiseProduct(v.col(2)).cwiseProduct(s));
  for (int i = 0; i < 3; ++i) {
    B.col(9 + i).head(n) = v.col(i).cwiseProduct(s);
    B.col(12 + i).tail(n) = v.col(i).cwiseProduct(s);
  }
  B.col(15).head(n) = s;
  B.col(16).tail(n) = s;
  return B;
}

ResidualReport macro_residuals(const KineticState& s, const Model& model) {
  const NullBasis& basis = model.ws->basis;
  const SpatialGrid& sg = *model.sg;
  const Index nx = s.f.cols();
  KineticState st = s;
  if (!model.toggles.fields) st.em = EMField::zero(int(nx));
  const Mat ft = vlasov_rhs(st, model);
  const Mat C = macro_coefficients(st.f, basis);
  const Mat Ct = macro_coefficients(ft, basis);
  const Mat Cx = sg.mode == SpatialMode::Periodic1D ? Mat(C * sg.deriv.transpose()) : Mat::Zero(6, nx);
  const Field3& E = st.em.E;

  ResidualReport r;
  r.lhs = Mat::Zero(17, nx);
  // C rows: a+, a-, b1, b2, b3, c
  r.lhs.row(0) = Cx.row(5);
  r.lhs.row(3) = Ct.row(5) + Cx.row(2);
  r.lhs.row(4) = Ct.row(5);
  r.lhs.row(5) = Ct.row(5);
  r.lhs.row(6) = Cx.row(3);
  r.lhs.row(7) = Cx.row(4);
  for (int i = 0; i < 3; ++i) {
    r.lhs.row(9 + i) = Ct.row(2 + i) - E.col(i).transpose();
    r.lhs.row(12 + i) = Ct.row(2 + i) + E.col(i).transpose();
  }
  r.lhs.row(9) += Cx.row(0);
  r.lhs.row(12) += Cx.row(1);
  r.lhs.row(15) = Ct.row(0);
  r.lhs.row(16) = Ct.row(1);

  const Mat micro = micro_part(st.f, basis);
  Mat rhs = -micro_part(ft, basis) + transport_term(micro, model) - collide_L(micro, model);
  if (model.toggles.fields && model.toggles.force_nonlinear) rhs += force_nonlinear(E, st.em.B, st.f, model);
  if (model.toggles.gamma) rhs += collide_Gamma(st.f, st.f, model);

  const Mat B = macro_expansion_basis(model);
  const double h3 = model.grid->cell();
  Eigen::LDLT<Mat> gram(B.transpose() * B * h3);
  r.rhs = gram.solve(B.transpose() * rhs * h3);

  const Mat res = r.lhs - r.rhs;
  for (int k = 0; k < 17; ++k) {
    r.max_residual[k] = res.row(k).cwiseAbs().maxCoeff();
    r.max_lhs[k] = r.lhs.row(k).cwiseAbs().maxCoeff();
  }
  for (int i = 0; i < 3; ++i) r.summed_b[i] = (res.row(9 + i) + res.row(12 + i)).cwiseAbs().maxCoeff();
  r.max_c = r.max_residual.segment<3>(0).maxCoeff();
  r.max_cdot = r.max_residual.segment<3>(3).maxCoeff();
  r.max_bij = r.max_residual.segment<3>(6).maxCoeff();
  r.max_ai = r.max_residual.segment<6>(9).maxCoeff();
  r.max_adot = r.max_residual.segment<2>(15).maxCoeff();
  return r;
}

CoercivityEstimate estimate_coercivity(const DerivativeStack& st, const Model& model,
                                       const std::vector<double>& C0_scan) {
  CoercivityEstimate ce;
  const NullBasis& basis = model.ws->basis;
  for (const auto& e : st.f_entries) {
    if (e.beta.sum() != 0) continue;
    ce.numerator_L += inner(st.L_of(e, model), e.value, model);
    if (e.alpha() == 0)
      ce.denominator += norm2_nu(e.micro, model);
    else
      ce.denominator += norm2_nu(e.value, model);
  }
  MacroFields m = MacroFields::from_matrix(macro_coefficients(st.ft[0], basis));
  MacroFields mt = MacroFields::from_matrix(macro_coefficients(st.ft[1], basis));
  ce.dGdt = compute_dGdt(m, mt, *model.sg);
  if (ce.denominator < 1e-14) {
    ce.inconclusive = true;
    return ce;
  }
  ce.best_ratio = -std::numeric_limits<double>::infinity();
  for (double c0 : C0_scan) {
    double r = (ce.numerator_L + c0 * ce.dGdt) / ce.denominator;
    ce.ratios.push_back(r);
    if (r > ce.best_ratio) {
      ce.best_ratio = r;
      ce.best_C0 = c0;
    }
  }
  return ce;
}

EnergyReport make_report(const KineticState& s, const Model& model, int N, const std::vector<double>& C0_scan) {
  EnergyReport r;
  r.t = s.t;
  DerivativeStack st = build_derivative_stack(s, model, N);
  r.breakdown = energy_breakdown(st, model);
  r.E_N = instant_energy(st, model);
  r.D_N = dissipation_rate(st, model);
  for (int m = 0; m <= N; ++m) {
    r.E_m.push_back(reduced_energy(st, model, m));
    r.D_m.push_back(reduced_dissipation(st, model, m));
  }
  const NullBasis& basis = model.ws->basis;
  MacroFields macro = MacroFields::from_matrix(macro_coefficients(s.f, basis));
  r.G = compute_G(macro, *model.sg);
  r.coercivity = estimate_coercivity(st, model, C0_scan);
  r.E_led = reduced_energy(st, model, 0);
  r.D_led = 2.0 * r.coercivity.numerator_L;
  r.dGdt = r.coercivity.dGdt;
  r.min_F = min_F(s.f, model);
  ChargeCurrent cc = compute_charge_current(s.f, basis);
  ConstraintReport cr = check_constraints(st.emt[0], cc.rho, *model.sg);
  r.gauss = model.toggles.fields ? cr.gauss : 0.0;
  r.div_b = cr.div_b;

  double e_num = 0, f_den = 0;
  for (const auto& e : st.f_entries) {
    if (e.beta.sum() != 0) continue;
    r.smallness += norm2(e.value, model);
    if (e.alpha() == 0) f_den += std::sqrt(norm2(e.micro, model));
    else f_den += std::sqrt(norm2(e.value, model));
  }
  for (const auto& fe : st.em_entries) {
    r.smallness += norm2(fe.em, *model.sg);
    if (fe.at + fe.ax <= N - 1) e_num += std::sqrt(fe.em.E.squaredNorm() * model.sg->dx());
  }
  r.field_ratio = f_den > 0 ? e_num / f_den : 0.0;
  return r;
}

LedgerTerms ledger_terms(const DerivativeStack& st, const Model& model) {
  LedgerTerms lt;
  lt.energy = reduced_energy(st, model, 0);
  for (const auto& e : st.f_entries)
    if (e.beta.sum() == 0) lt.dissipation += 2.0 * inner(st.L_of(e, model), e.value, model);
  return lt;
}

LedgerReport energy_ledger(const std::vector<LedgerSample>& history, double tol_ledger, double tol_step) {
  LedgerReport r;
  r.tol_ledger = tol_ledger;
  if (history.empty()) return r;
  r.E0 = history.front().E;
  const double bound = r.E0 * (1.0 + tol_ledger);
  double integral = 0;
  r.worst_integral_margin = std::numeric_limits<double>::infinity();
  r.worst_differential_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < history.size(); ++k) {
    if (k > 0) {
      const LedgerSample &a = history[k - 1], &b = history[k];
      const double dt = b.t - a.t;
      integral += 0.5 * dt * (a.D + b.D);
      const double lhs = (b.E - a.E) / dt + 0.5 * (a.D + b.D);
      const double margin = std::sqrt(std::max(a.E, 0.0)) * a.D + tol_step - lhs;
      r.differential_margin.push_back(margin);
      r.worst_differential_margin = std::min(r.worst_differential_margin, margin);
      if (!(margin >= 0)) r.pass_differential = false;
    }
    const double lhs = history[k].E + integral;
    r.integral_lhs.push_back(lhs);
    r.integral_margin.push_back(bound - lhs);
    r.worst_integral_margin = std::min(r.worst_integral_margin, bound - lhs);
    if (!(bound - lhs >= 0)) r.pass_integral = false;
  }
  if (r.differential_margin.empty()) r.worst_differential_margin = 0;
  return r;
}

}  // namespace vmb

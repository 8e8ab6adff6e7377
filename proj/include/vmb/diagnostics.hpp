#pragma once

#include <array>
#include <optional>
#include <vector>

#include "vmb/transport.hpp"

namespace vmb {

struct StackEntry {
  int at = 0, ax = 0;          // temporal and spatial orders
  Eigen::Vector3i beta = Eigen::Vector3i::Zero();
  Mat value;                   // ∂^α_β f
  Mat micro;                   // ∂_β (I-P) ∂^α f
  int alpha() const { return at + ax; }
  int order() const { return at + ax + beta.sum(); }
};

struct FieldEntry {
  int at = 0, ax = 0;
  EMField em;
};

struct DerivativeStack {
  int N = 0;
  std::vector<Mat> ft;         // ∂_t^m f, m = 0..N
  std::vector<EMField> emt;    // ∂_t^m (E, B)
  std::vector<Mat> Lft;        // L ∂_t^m f, m = 0..N
  std::vector<StackEntry> f_entries;
  std::vector<FieldEntry> em_entries;

  const StackEntry& entry(int at, int ax, const Eigen::Vector3i& beta = Eigen::Vector3i::Zero()) const;
  // L ∂^α f for a β = 0 entry, using that L commutes with ∂_x
  Mat L_of(const StackEntry& e, const Model& model) const;
};

DerivativeStack build_derivative_stack(const KineticState& s, const Model& model, int N);

// one step of the temporal recursion: ∂_t^{m+1} from stored lower orders
Mat temporal_rhs(const std::vector<Mat>& ft, const std::vector<EMField>& emt, int m, const Model& model);
Mat temporal_rhs(const std::vector<Mat>& ft, const std::vector<EMField>& emt, const Mat& Lfm, int m,
                 const Model& model);

double norm2(const Mat& f, const Model& model);                 // Σ_x Σ_v |f|^2 dx h^3
double norm2_nu(const Mat& f, const Model& model);              // ν-weighted
double norm2(const EMField& em, const SpatialGrid& sg);
double inner(const Mat& f, const Mat& g, const Model& model);

struct BreakdownEntry {
  int at = 0, ax = 0;
  Eigen::Vector3i beta = Eigen::Vector3i::Zero();
  double energy = 0;      // ||∂^α_β f||^2
  double diss_full = 0;   // ||∂^α f||_ν^2, β = 0 and |α| > 0 only
  double diss_micro = 0;  // ||∂_β (I-P) ∂^α f||_ν^2
};

double instant_energy(const DerivativeStack& st, const Model& model);
double dissipation_rate(const DerivativeStack& st, const Model& model);
std::vector<BreakdownEntry> energy_breakdown(const DerivativeStack& st, const Model& model);
double field_energy_stack(const DerivativeStack& st, const Model& model);
// reduced functionals restricted to |β| <= m
double reduced_energy(const DerivativeStack& st, const Model& model, int m);
double reduced_dissipation(const DerivativeStack& st, const Model& model, int m);

double compute_G(const MacroFields& macro, const SpatialGrid& sg);
// dG/dt with ∂_t of the coefficients read from P ∂_t f
double compute_dGdt(const MacroFields& macro, const MacroFields& macro_t, const SpatialGrid& sg);

// Residuals of the macroscopic equations: rows are grouped as
// c (3), cdot (3), bij (3), ai+ (3), ai- (3), adot (2).
struct ResidualReport {
  Eigen::Matrix<double, 17, 1> max_residual = Eigen::Matrix<double, 17, 1>::Zero();
  Eigen::Matrix<double, 17, 1> max_lhs = Eigen::Matrix<double, 17, 1>::Zero();
  Eigen::Vector3d summed_b = Eigen::Vector3d::Zero();  // 2∂t b_i + ∂^i a+ + ∂^i a- - Σ± (l+h)
  double max_c = 0, max_cdot = 0, max_bij = 0, max_ai = 0, max_adot = 0;
  Mat lhs, rhs;  // 17 x Nx coefficient fields
};

// expansion basis of the macroscopic equations, 2N x 17
Mat macro_expansion_basis(const Model& model);
ResidualReport macro_residuals(const KineticState& s, const Model& model);

struct CoercivityEstimate {
  bool inconclusive = false;
  double numerator_L = 0;   // Σ_α <L ∂^α f, ∂^α f>
  double dGdt = 0;
  double denominator = 0;   // ||(I-P)f||_ν^2 + Σ_{0<|α|} ||∂^α f||_ν^2
  double best_ratio = 0;
  double best_C0 = 0;
  std::vector<double> ratios;  // per C0
};

CoercivityEstimate estimate_coercivity(const DerivativeStack& st, const Model& model,
                                       const std::vector<double>& C0_scan);

struct EnergyReport {
  double t = 0;
  double E_N = 0, D_N = 0, G = 0, dGdt = 0;
  double min_F = 0;
  double gauss = 0, div_b = 0;
  double smallness = 0;      // Σ_α ||∂^α f||^2 + ||∂^α (E,B)||^2
  double field_ratio = 0;
  double E_led = 0, D_led = 0;
  CoercivityEstimate coercivity;
  std::vector<double> E_m, D_m;
  std::vector<BreakdownEntry> breakdown;
};

EnergyReport make_report(const KineticState& s, const Model& model, int N, const std::vector<double>& C0_scan);

// Ledger pair on the |β| = 0 slice: E = Σ_α ||∂^α f||^2 + ||∂^α (E,B)||^2,
// D = 2 Σ_α <L ∂^α f, ∂^α f>.
struct LedgerTerms {
  double energy = 0;
  double dissipation = 0;
};
LedgerTerms ledger_terms(const DerivativeStack& st, const Model& model);

struct LedgerSample {
  double t = 0;
  double E = 0;
  double D = 0;
};

struct LedgerReport {
  bool pass_integral = true;      // E(t) + ∫D <= E(0)(1 + tol)
  bool pass_differential = true;  // [E(t+dt) - E(t)]/dt + D <= sqrt(E) D + tol per step
  double tol_ledger = 0;
  double E0 = 0;
  double worst_integral_margin = 0;      // min over t of E(0)(1+tol) - E(t) - ∫D
  double worst_differential_margin = 0;  // min over steps
  std::vector<double> integral_lhs;      // E(t) + ∫_0^t D, trapezoidal
  std::vector<double> integral_margin;
  std::vector<double> differential_margin;
};

// tol_step is the per-step slack of the differential check, in rate units
LedgerReport energy_ledger(const std::vector<LedgerSample>& history, double tol_ledger, double tol_step);

}  // namespace vmb

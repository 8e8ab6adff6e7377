#include "vmb/fields.hpp"

namespace vmb {

Field3 current(const Mat& f, const VelocityGrid& grid, const Vec& sqrt_mu) {
  const Index n = grid.size();
  Field3 J(f.cols(), 3);
  for (int i = 0; i < 3; ++i) {
    Vec w = grid.nodes.col(i).cwiseProduct(sqrt_mu) * grid.cell();
    J.col(i) = (f.topRows(n) - f.bottomRows(n)).transpose() * w;
  }
  return J;
}

ChargeCurrent compute_charge_current(const Mat& f, const NullBasis& basis) {
  const VelocityGrid& grid = *basis.grid;
  const Index n = grid.size();
  Vec s = basis.e.col(0).head(n);
  ChargeCurrent cc;
  cc.rho = (f.topRows(n) - f.bottomRows(n)).transpose() * s * grid.cell();
  cc.J = current(f, grid, s);
  cc.J_micro = current(micro_part(f, basis), grid, s);
  return cc;
}

Field3 curl_1d(const Field3& F, const SpatialGrid& sg) {
  Field3 C = Field3::Zero(F.rows(), 3);
  C.col(1) = -(sg.deriv * F.col(2));
  C.col(2) = sg.deriv * F.col(1);
  return C;
}

EMField maxwell_step(const EMField& field, const Field3& J, double dt, const SpatialGrid& sg,
                     bool longitudinal) {
  if (dt > sg.dx() * (1 + 1e-12))
    throw std::invalid_argument("maxwell_step: dt exceeds the CFL limit dx");
  EMField out = field;
  out.B -= 0.5 * dt * curl_1d(out.E, sg);
  Field3 dE = dt * (curl_1d(out.B, sg) - J);
  if (!longitudinal) dE.col(0).setZero();
  out.E += dE;
  out.B -= 0.5 * dt * curl_1d(out.E, sg);
  return out;
}

double field_energy(const EMField& field, const SpatialGrid& sg) {
  return (field.E.squaredNorm() + field.B.squaredNorm()) * sg.dx();
}

double leapfrog_energy(const EMField& field, double dt, const SpatialGrid& sg) {
  return field_energy(field, sg) - 0.25 * dt * dt * curl_1d(field.E, sg).squaredNorm() * sg.dx();
}

ConstraintReport check_constraints(const EMField& field, const Vec& rho, const SpatialGrid& sg) {
  ConstraintReport r;
  r.gauss = (sg.deriv * field.E.col(0) - rho).cwiseAbs().maxCoeff();
  r.div_b = (sg.deriv * field.B.col(0)).cwiseAbs().maxCoeff();
  return r;
}

Vec solve_gauss(const Vec& rho, const SpatialGrid& sg) {
  if (sg.nx == 1) return Vec::Zero(1);
  if (std::abs(rho.mean()) > 1e-12 * std::max(1.0, rho.cwiseAbs().maxCoeff()))
    throw ConfigError("Gauss law: charge density must have zero mean on a periodic domain");
  Mat inv = spectral_operator(sg, [](double k) {
    return k == 0.0 ? std::complex<double>(0.0) : std::complex<double>(0.0, -1.0 / k);
  });
  return inv * rho;
}

}  // namespace vmb

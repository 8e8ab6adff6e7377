#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vmb/fields.hpp"

using namespace vmb;
constexpr double pi = std::numbers::pi;

namespace {

struct Fixture {
  VelocityGrid g = build_velocity_grid(8.0, 17);
  NullBasis basis = build_null_basis(g);
  Vec s = sqrt_maxwellian_table(g);
  SpatialGrid sg = build_spatial_grid(SpatialMode::Periodic1D, 2 * pi, 8);
};

}  // namespace

TEST_CASE("charge and current moments") {
  Fixture F;
  const Index n = F.g.size(), nx = F.sg.nx;
  Mat f(2 * n, nx);
  for (Index j = 0; j < nx; ++j) f.col(j) = stack(F.s, F.s) * std::cos(F.sg.x[j]);
  ChargeCurrent a = compute_charge_current(f, F.basis);
  CHECK(a.rho.cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.J.cwiseAbs().maxCoeff() == 0.0);

  Vec ax = (F.sg.x.array().sin() + 0.5).matrix();
  for (Index j = 0; j < nx; ++j) f.col(j) = stack(F.s, Vec::Zero(n)) * ax[j];
  ChargeCurrent b = compute_charge_current(f, F.basis);
  CHECK((b.rho - ax).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(b.J.cwiseAbs().maxCoeff() <= 1e-15);

  Vec v1s = F.g.nodes.col(0).cwiseProduct(F.s);
  for (Index j = 0; j < nx; ++j) f.col(j) = stack(v1s, -v1s);
  ChargeCurrent c = compute_charge_current(f, F.basis);
  for (Index j = 0; j < nx; ++j) {
    CHECK(std::abs(c.J(j, 0) - 2.0) <= 1e-5);
    CHECK(std::abs(c.J(j, 1)) <= 1e-15);
    CHECK(std::abs(c.J(j, 2)) <= 1e-15);
  }
  // opposite drifts are not a shared momentum, so the whole current is microscopic
  CHECK((c.J_micro - c.J).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("curl in one dimension") {
  SpatialGrid sg = build_spatial_grid(SpatialMode::Periodic1D, 2 * pi, 16);
  Field3 F = Field3::Zero(16, 3);
  F.col(0) = sg.x.array().cos();
  F.col(1) = sg.x.array().sin();
  F.col(2) = (2 * sg.x.array()).cos();
  Field3 C = curl_1d(F, sg);
  CHECK(C.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK((C.col(1) - 2 * (2 * sg.x.array()).sin().matrix()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((C.col(2) - sg.x.array().cos().matrix()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("vacuum plane wave returns after one period") {
  const int nx = 64;
  SpatialGrid sg = build_spatial_grid(SpatialMode::Periodic1D, 2 * pi, nx);
  const double dt = sg.dx() / 2;
  const int steps = int(std::lround(2 * pi / dt));
  CHECK(std::abs(steps * dt - 2 * pi) < 1e-12);
  EMField f0 = EMField::zero(nx);
  f0.E.col(1) = sg.x.array().cos();
  f0.B.col(2) = sg.x.array().cos();
  EMField f = f0;
  const Field3 J = Field3::Zero(nx, 3);
  const double inv0 = leapfrog_energy(f, dt, sg);
  double worst_constraint = 0, worst_invariant = 0;
  for (int k = 0; k < steps; ++k) {
    f = maxwell_step(f, J, dt, sg);
    ConstraintReport cr = check_constraints(f, Vec::Zero(nx), sg);
    worst_constraint = std::max({worst_constraint, cr.gauss, cr.div_b});
    worst_invariant = std::max(worst_invariant, std::abs(leapfrog_energy(f, dt, sg) - inv0) / inv0);
  }
  const double err = std::max((f.E - f0.E).cwiseAbs().maxCoeff(), (f.B - f0.B).cwiseAbs().maxCoeff());
  CHECK(err <= 1e-3);
  // second-order phase error (k dt)^2 / 24 per unit phase, over 2π of phase
  CHECK(err == doctest::Approx(2 * pi * dt * dt / 24).epsilon(0.05));
  CHECK(worst_constraint <= 1e-12);
  CHECK(worst_invariant <= 1e-13);
}

TEST_CASE("zero fields stay zero, CFL violation is rejected") {
  SpatialGrid sg = build_spatial_grid(SpatialMode::Periodic1D, 2 * pi, 16);
  EMField z = EMField::zero(16);
  EMField out = maxwell_step(z, Field3::Zero(16, 3), 0.1, sg);
  CHECK(out.E.cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.B.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(maxwell_step(z, Field3::Zero(16, 3), 1.5 * sg.dx(), sg), std::invalid_argument);
}

TEST_CASE("longitudinal field follows -J, transverse update optional") {
  SpatialGrid sg = build_spatial_grid(SpatialMode::Periodic1D, 2 * pi, 16);
  EMField z = EMField::zero(16);
  Field3 J = Field3::Zero(16, 3);
  J.col(0).setConstant(2.0);
  EMField a = maxwell_step(z, J, 0.1, sg, true);
  CHECK((a.E.col(0).array() + 0.2).abs().maxCoeff() <= 1e-15);
  EMField b = maxwell_step(z, J, 0.1, sg, false);
  CHECK(b.E.col(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Gauss solve") {
  SpatialGrid sg = build_spatial_grid(SpatialMode::Periodic1D, 2 * pi, 32);
  Vec rho = (2 * sg.x.array()).cos();
  Vec E1 = solve_gauss(rho, sg);
  CHECK((E1 - 0.5 * (2 * sg.x.array()).sin().matrix()).cwiseAbs().maxCoeff() <= 1e-12);
  EMField f = EMField::zero(32);
  f.E.col(0) = E1;
  CHECK(check_constraints(f, rho, sg).gauss <= 1e-12);
  CHECK_THROWS_AS(solve_gauss(Vec::Ones(32), sg), ConfigError);
}

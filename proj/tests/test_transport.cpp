#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vmb/transport.hpp"

using namespace vmb;
constexpr double pi = std::numbers::pi;

namespace {

struct Fixture {
  VelocityGrid g = build_velocity_grid(8.0, 17);
  SphereQuadrature sq = build_sphere_quadrature(14);
  CollisionWorkspace ws = build_collision_workspace(g, sq);
  SpatialGrid sg = build_spatial_grid(SpatialMode::Periodic1D, 2 * pi, 8);
  Model model = make_model(g, sg, ws);
  Index n = g.size();
};

Fixture& fx() {
  static Fixture f;
  return f;
}

Mat random_state(std::mt19937_64& rng, const Fixture& F, Index nx) {
  std::normal_distribution<double> nd;
  Mat f(2 * F.n, nx);
  const Vec w = stack(F.ws.sqrt_mu, F.ws.sqrt_mu).cwiseSqrt();
  for (Index j = 0; j < nx; ++j) {
    for (Index i = 0; i < 2 * F.n; ++i) f(i, j) = nd(rng);
    f.col(j) = f.col(j).cwiseProduct(w);
  }
  return f;
}

}  // namespace

TEST_CASE("transport term") {
  auto& F = fx();
  const Index nx = F.sg.nx;
  Vec prof = stack(F.ws.sqrt_mu, 0.5 * F.ws.sqrt_mu);
  Mat f(2 * F.n, nx);
  for (Index j = 0; j < nx; ++j) f.col(j) = prof;
  CHECK(transport_term(f, F.model).cwiseAbs().maxCoeff() <= 1e-15);

  for (Index j = 0; j < nx; ++j) f.col(j) = prof * std::sin(2 * F.sg.x[j]);
  Mat t = transport_term(f, F.model);
  Mat expect(2 * F.n, nx);
  for (Index j = 0; j < nx; ++j) expect.col(j) = -F.model.v1_stacked.cwiseProduct(prof) * 2 * std::cos(2 * F.sg.x[j]);
  CHECK((t - expect).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("force term") {
  auto& F = fx();
  const Index nx = F.sg.nx;
  KineticState s{Mat::Zero(2 * F.n, nx), EMField::zero(int(nx)), 0};
  CHECK(force_term(s, F.model).cwiseAbs().maxCoeff() == 0.0);
  s.em.E.col(0).setConstant(0.7);
  Mat r = force_term(s, F.model);
  Vec v1s = F.g.nodes.col(0).cwiseProduct(F.ws.sqrt_mu) * 0.7;
  for (Index j = 0; j < nx; ++j) CHECK((r.col(j) - stack(v1s, -v1s)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("equilibrium is a fixed point of the full right-hand side") {
  auto& F = fx();
  KineticState s{Mat::Zero(2 * F.n, F.sg.nx), EMField::zero(F.sg.nx), 0};
  CHECK(vlasov_rhs(s, F.model).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("null vector: right-hand side reduces to Gamma and is microscopic") {
  auto& F = fx();
  Mat f(2 * F.n, F.sg.nx);
  for (Index j = 0; j < F.sg.nx; ++j) f.col(j) = 1e-3 * F.ws.basis.e.col(5);
  KineticState s{f, EMField::zero(F.sg.nx), 0};
  Mat r = vlasov_rhs(s, F.model);
  Mat gam = collide_Gamma(f, f, F.model);
  Mat lin = collide_L(f, F.model);
  CHECK((r - gam + lin).cwiseAbs().maxCoeff() <= 1e-18);
  CHECK(lin.cwiseAbs().maxCoeff() <= 5e-3 * 1e-3 * F.ws.basis.e.col(5).cwiseAbs().maxCoeff());
  Mat m = macro_coefficients(r, F.ws.basis);
  CHECK(m.cwiseAbs().maxCoeff() <= 1e-6 * 1e-6);
}

TEST_CASE("velocity derivative accuracy") {
  auto& F = fx();
  Vec u = F.ws.sqrt_mu;
  for (int axis = 0; axis < 3; ++axis) {
    Vec d = F.model.dv.apply(u, axis);
    Vec exact = -0.5 * F.g.nodes.col(axis).cwiseProduct(u);
    CHECK((d - exact).cwiseAbs().maxCoeff() <= 6e-2 * exact.cwiseAbs().maxCoeff());
  }
  // exact on cubic polynomials including the closures
  Vec p = F.g.nodes.col(1).array().pow(3) - 2 * F.g.nodes.col(1).array();
  Vec dp = 3 * F.g.nodes.col(1).array().square() - 2;
  CHECK((F.model.dv.apply(p, 1) - dp).cwiseAbs().maxCoeff() <= 1e-10 * dp.cwiseAbs().maxCoeff());

  VelocityGrid fine = build_velocity_grid(8.0, 33);
  VelocityDerivative dv(fine);
  Vec uf = sqrt_maxwellian_table(fine);
  Vec ef = -0.5 * fine.nodes.col(2).cwiseProduct(uf);
  VelocityDerivative dc(F.g);
  Vec ec = -0.5 * F.g.nodes.col(2).cwiseProduct(F.ws.sqrt_mu);
  const double err_c = (dc.apply(F.ws.sqrt_mu, 2) - ec).cwiseAbs().maxCoeff();
  const double err_f = (dv.apply(uf, 2) - ef).cwiseAbs().maxCoeff();
  CHECK(std::log2(err_c / err_f) >= 3.5);
}

TEST_CASE("transport and Lorentz force are skew-adjoint") {
  auto& F = fx();
  std::mt19937_64 rng(3);
  const Index nx = F.sg.nx;
  Mat f = random_state(rng, F, nx), g = random_state(rng, F, nx);
  auto ip = [&](const Mat& a, const Mat& b) { return a.cwiseProduct(b).sum(); };
  CHECK(std::abs(ip(transport_term(f, F.model), g) + ip(f, transport_term(g, F.model))) <=
        1e-12 * std::abs(ip(transport_term(f, F.model), transport_term(f, F.model))));

  // (v x B).grad_v part only, on smooth data so the truncated cube boundary is invisible
  Field3 E = Field3::Zero(nx, 3), B = Field3::Zero(nx, 3);
  B.col(0).setConstant(0.3);
  B.col(2).setConstant(-0.2);
  Mat fs(2 * F.n, nx), gs(2 * F.n, nx);
  const Vec& s = F.ws.sqrt_mu;
  const Vec v2 = F.g.nodes.col(1), v3 = F.g.nodes.col(2);
  for (Index j = 0; j < nx; ++j) {
    fs.col(j) = stack(Vec(s.cwiseProduct(v2)), Vec(s.cwiseProduct(v3).cwiseProduct(v2)));
    gs.col(j) = stack(Vec(s.cwiseProduct(v3)), Vec(s.cwiseProduct(v2).cwiseAbs2()));
  }
  Mat Ff = force_nonlinear(E, B, fs, F.model), Fg = force_nonlinear(E, B, gs, F.model);
  CHECK(std::abs(ip(Ff, gs) + ip(fs, Fg)) <= 1e-6 * std::sqrt(ip(Ff, Ff) * ip(gs, gs)));
}

TEST_CASE("linearised dynamics dissipate the L2 norm") {
  auto& F = fx();
  std::mt19937_64 rng(9);
  Mat f = random_state(rng, F, F.sg.nx);
  PhysicsToggles lin{false, false, false};
  Model m = make_model(F.g, F.sg, F.ws, lin);
  KineticState s{f, EMField::zero(F.sg.nx), 0};
  const double rate = 2 * vlasov_rhs(s, m).cwiseProduct(f).sum() * F.g.cell() * F.sg.dx();
  CHECK(rate <= 1e-8);
}

TEST_CASE("edge damping zeroes the outer two shells") {
  auto& F = fx();
  Mat f = Mat::Ones(2 * F.n, 2);
  damp_velocity_edges(f, F.model);
  for (Index i = 0; i < F.n; ++i) {
    const int k = F.g.lattice.row(i).cwiseAbs().maxCoeff();
    const double expect = k >= F.g.m - 1 ? 0.0 : 1.0;
    CHECK(f(i, 0) == expect);
    CHECK(f(F.n + i, 1) == expect);
  }
}

TEST_CASE("0D mode has no transport") {
  auto& F = fx();
  SpatialGrid z = build_spatial_grid(SpatialMode::Homogeneous0D, 1.0, 1);
  Model m = make_model(F.g, z, F.ws);
  Mat f = Mat::Ones(2 * F.n, 1);
  CHECK(transport_term(f, m).cwiseAbs().maxCoeff() == 0.0);
}

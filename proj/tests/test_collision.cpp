#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vmb/collision.hpp"

using namespace vmb;
constexpr double pi = std::numbers::pi;

namespace {

struct Fixture {
  VelocityGrid g = build_velocity_grid(8.0, 17);
  SphereQuadrature sq = build_sphere_quadrature(14);
  CollisionWorkspace ws = build_collision_workspace(g, sq);
  std::mt19937_64 rng{2024};

  Vec random_pair() {
    std::normal_distribution<double> nd;
    Vec x(2 * g.size());
    for (Index i = 0; i < x.size(); ++i) x[i] = nd(rng);
    return x.cwiseProduct(stack(ws.sqrt_mu, ws.sqrt_mu).cwiseSqrt());
  }
  Vec bump(const Eigen::Vector3d& centre, double temperature) const {
    Vec x(g.size());
    for (Index i = 0; i < x.size(); ++i)
      x[i] = std::exp(-(g.nodes.row(i).transpose() - centre).squaredNorm() / (2 * temperature));
    return x / integrate_v(x, g);
  }
  Vec random_nonneg() {
    std::uniform_real_distribution<double> ud(0.5, 1.5);
    Vec x(g.size());
    for (Index i = 0; i < x.size(); ++i) x[i] = ud(rng) * ws.mu[i];
    return x;
  }
  double moment_scale(const Vec& q) const {
    return (q.cwiseAbs().array() * (1.0 + g.nodes.rowwise().squaredNorm().array())).sum() * g.cell();
  }
};

Fixture& fx() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("post-collision velocities") {
  using V = Eigen::Vector3d;
  auto [vp, up] = post_collision<double>(V(1, 0, 0), V(-1, 0, 0), V(1, 0, 0));
  CHECK((vp - V(-1, 0, 0)).norm() == 0.0);
  CHECK((up - V(1, 0, 0)).norm() == 0.0);

  auto [vg, ug] = post_collision<double>(V(1, 2, 0), V(1, -1, 0), V(1, 0, 0));
  CHECK(vg == V(1, 2, 0));
  CHECK(ug == V(1, -1, 0));

  V v(0.3, -1.2, 2.0), u(1.1, 0.4, -0.5), w(0, 0, 1);
  auto [a, b] = post_collision(v, u, w);
  CHECK(((a + b) - (v + u)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(std::abs(a.squaredNorm() + b.squaredNorm() - v.squaredNorm() - u.squaredNorm()) <= 1e-15 * 8);

  CHECK_THROWS_AS(post_collision<double>(v, u, V(1, 1, 0)), std::invalid_argument);
}

TEST_CASE("kinematic conservation over random triples") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  double worst = 0;
  for (int k = 0; k < 10000; ++k) {
    Eigen::Vector3d v(nd(rng), nd(rng), nd(rng)), u(nd(rng), nd(rng), nd(rng)), w(nd(rng), nd(rng), nd(rng));
    w.normalize();
    auto [vp, up] = post_collision(v, u, w);
    const double e = v.squaredNorm() + u.squaredNorm();
    worst = std::max({worst, ((vp + up) - (v + u)).norm() / std::sqrt(e),
                      std::abs(vp.squaredNorm() + up.squaredNorm() - e) / e});
  }
  CHECK(worst <= 1e-13);
}

TEST_CASE("Q(mu, mu) vanishes and Q is bilinear") {
  auto& F = fx();
  const double mmax = F.ws.mu.maxCoeff();
  CHECK(eval_Q(F.ws.mu, F.ws.mu, F.ws).cwiseAbs().maxCoeff() <= 1e-3 * mmax);
  Vec a = F.random_nonneg(), b = F.random_nonneg();
  Vec q1 = eval_Q_raw(2.5 * a, b, F.ws), q2 = eval_Q_raw(a, b, F.ws);
  CHECK((q1 - 2.5 * q2).cwiseAbs().maxCoeff() <= 1e-12 * q1.cwiseAbs().maxCoeff());
}

TEST_CASE("corrected Q conserves mass, momentum and energy") {
  auto& F = fx();
  for (int k = 0; k < 3; ++k) {
    Vec a = F.random_nonneg(), b = F.random_nonneg();
    Vec raw = eval_Q_raw(a, b, F.ws), q = eval_Q(a, b, F.ws);
    auto m = collision_moments(q, F.ws);
    CHECK(m.cwiseAbs().maxCoeff() <= 1e-12 * F.moment_scale(raw));
  }
  // for a smooth non-Maxwellian bump the uncorrected moments are already at roundoff
  Vec a = F.bump({0.7, -0.2, 0.1}, 0.8) + F.bump({-1.0, 0.5, 0.0}, 0.5);
  Vec raw = eval_Q_raw(a, a, F.ws);
  CHECK(collision_moments(raw, F.ws).cwiseAbs().maxCoeff() <= 1e-12 * F.moment_scale(raw));
  CHECK(collision_moments(eval_Q(a, a, F.ws), F.ws).cwiseAbs().maxCoeff() <= 1e-12 * F.moment_scale(raw));
  // the symmetrised cross term conserves as well
  Vec b = F.bump({-0.3, 0.4, 0.0}, 1.3);
  Vec sym = eval_Q_raw(a, b, F.ws) + eval_Q_raw(b, a, F.ws);
  CHECK(collision_moments(sym, F.ws).cwiseAbs().maxCoeff() <= 1e-10 * F.moment_scale(sym));
}

TEST_CASE("conservation correction") {
  auto& F = fx();
  Vec q = eval_Q(F.random_nonneg(), F.random_nonneg(), F.ws);
  CorrectionResult same = conservation_correction(q, F.ws);
  CHECK((same.q - q).cwiseAbs().maxCoeff() <= 1e-14 * q.cwiseAbs().maxCoeff() + 1e-300);

  CorrectionResult one = conservation_correction(Vec::Ones(F.g.size()), F.ws);
  CHECK(std::abs(integrate_v(one.q, F.g)) <= 1e-12 * F.g.weights.sum());

  Vec raw = eval_Q_raw(F.ws.mu, F.ws.mu, F.ws);
  CorrectionResult c = conservation_correction(raw, F.ws);
  CHECK(collision_moments(c.q, F.ws).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(c.magnitude <= 1e-12);
}

TEST_CASE("collision frequency") {
  auto& F = fx();
  // the reference velocity grid is (8, 33); at Nv = 17 the kink of |u| at the origin costs 0.9%
  {
    VelocityGrid g33 = build_velocity_grid(8.0, 33);
    CollisionWorkspace w33 = build_collision_workspace(g33, F.sq);
    CHECK(collision_frequency(Eigen::Vector3d::Zero(), w33) == doctest::Approx(8 * std::sqrt(2 * pi)).epsilon(5e-3));
  }
  CHECK(collision_frequency(Eigen::Vector3d::Zero(), F.ws) == doctest::Approx(8 * std::sqrt(2 * pi)).epsilon(1e-2));
  const double nu20 = collision_frequency(Eigen::Vector3d(20, 0, 0), F.ws);
  CHECK(nu20 / (4 * pi * (20 + 1.0 / 20)) == doctest::Approx(1.0).epsilon(5e-3));
  // 4π times the Gaussian average of |v - u|, in closed form
  auto exact = [](double r) {
    return 4 * pi * ((r + 1 / r) * std::erf(r / std::sqrt(2.0)) + std::sqrt(2 / pi) * std::exp(-r * r / 2));
  };
  for (double r : {0.5, 1.0, 2.0, 4.0}) {
    CHECK(collision_frequency(Eigen::Vector3d(r, 0, 0), F.ws) == doctest::Approx(exact(r)).epsilon(5e-3));
  }
  for (Index i = 0; i < F.g.size(); i += 97) {
    Eigen::Vector3i k = F.g.lattice.row(i);
    const double nu = F.ws.nu[i];
    CHECK(std::abs(F.ws.nu[F.g.index(-k[0], -k[1], -k[2])] - nu) <= 1e-10 * nu);
    CHECK(std::abs(F.ws.nu[F.g.index(k[2], k[0], k[1])] - nu) <= 1e-10 * nu);
    CHECK(nu > 0);
  }
}

TEST_CASE("linearised operator: null space, symmetry, nonnegativity") {
  auto& F = fx();
  const Index n = F.g.size();
  Vec nu2 = nu_stacked(F.ws);
  for (int k = 0; k < 6; ++k) {
    Vec e = F.ws.basis.e.col(k);
    CHECK(apply_L(e, F.ws).norm() <= 5e-3 * e.norm());
    CHECK((apply_K(e, F.ws) - nu2.cwiseProduct(e)).norm() <= 5e-3 * e.norm());
  }
  CHECK(F.ws.null_residual_raw <= 5e-3);
  for (int k = 0; k < 20; ++k) {
    Vec a = F.random_pair(), b = F.random_pair();
    Vec La = apply_L(a, F.ws), Lb = apply_L(b, F.ws);
    CHECK(std::abs(La.dot(b) - a.dot(Lb)) <= 1e-8 * La.norm() * b.norm());
    CHECK(La.dot(a) >= -1e-8 * a.cwiseProduct(nu2).dot(a));
    CHECK((nu2.cwiseProduct(a) - apply_K(a, F.ws) - La).cwiseAbs().maxCoeff() <= 1e-12 * La.cwiseAbs().maxCoeff());
  }
  (void)n;
}

TEST_CASE("K is bounded on random data") {
  auto& F = fx();
  std::normal_distribution<double> nd;
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    Vec g(2 * F.g.size());
    for (Index i = 0; i < g.size(); ++i) g[i] = nd(F.rng);
    g.normalize();
    worst = std::max(worst, apply_K(g, F.ws).norm());
  }
  CHECK(worst <= 30.0);

  // the operator norm itself is larger: K equals nu on the null space
  Vec x = F.random_pair();
  x.normalize();
  double lambda = 0;
  for (int it = 0; it < 100; ++it) {
    Vec y = apply_K(x, F.ws);
    lambda = y.norm();
    x = y / lambda;
  }
  CHECK(lambda == doctest::Approx(44.16).epsilon(1e-2));
}

TEST_CASE("Gamma: bilinearity and microscopic range") {
  auto& F = fx();
  const Index n = F.g.size();
  Vec h = F.random_pair();
  CHECK(apply_Gamma(Vec::Zero(2 * n), h, F.ws).cwiseAbs().maxCoeff() == 0.0);
  for (int k = 0; k < 5; ++k) {
    Vec a = F.random_pair(), b = F.random_pair(), r = F.random_pair();
    Vec G = apply_Gamma(a, b, F.ws);
    const double scale = std::sqrt(inner(a, a, F.g) * inner(b, b, F.g));
    CHECK(std::abs(inner(G, r, F.g) - inner(G, micro_part(r, F.ws.basis), F.g)) <= 1e-6 * scale * std::sqrt(inner(r, r, F.g)));
    for (int c = 0; c < 6; ++c) CHECK(std::abs(inner(G, Vec(F.ws.basis.e.col(c)), F.g)) <= 1e-6 * scale);
  }
  Vec s2 = stack(F.ws.sqrt_mu, F.ws.sqrt_mu);
  Vec G = apply_Gamma(s2, h, F.ws);
  for (int c = 0; c < 6; ++c)
    CHECK(std::abs(inner(G, Vec(F.ws.basis.e.col(c)), F.g)) <= 1e-6 * std::sqrt(inner(s2, s2, F.g) * inner(h, h, F.g)));
}

TEST_CASE("regrouped Gamma agrees with the direct quadrature") {
  auto& F = fx();
  const Index n = F.g.size();
  Vec a = F.random_pair().head(n), b = F.random_pair().head(n);
  Vec direct = eval_Q_raw(a.cwiseProduct(F.ws.sqrt_mu), b.cwiseProduct(F.ws.sqrt_mu), F.ws);
  Vec regrouped = gamma_tilde(a, b, F.ws).cwiseProduct(F.ws.sqrt_mu);
  CHECK((direct - regrouped).cwiseAbs().maxCoeff() <= 1e-10 * direct.cwiseAbs().maxCoeff());
}

TEST_CASE("Rayleigh coercivity is positive") {
  auto& F = fx();
  RayleighEstimate r = rayleigh_coercivity(F.ws, 200, 5);
  CHECK(r.samples == 200);
  CHECK(r.delta_min > 0);
  CHECK(r.delta_max >= r.delta_min);
}

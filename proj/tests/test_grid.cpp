#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vmb/grid.hpp"
#include "vmb/maxwellian.hpp"

using namespace vmb;
constexpr double pi = std::numbers::pi;

TEST_CASE("coarse cube has uniform weights") {
  VelocityGrid g = build_velocity_grid(6.0, 3);
  CHECK(g.size() == 27);
  for (Index i = 0; i < g.size(); ++i) CHECK(g.weights[i] == 64.0);
  CHECK(integrate_v(Vec::Ones(27), g) == 1728.0);
  bool has_origin = false;
  for (Index i = 0; i < g.size(); ++i) has_origin |= g.nodes.row(i).isZero(0.0);
  CHECK(has_origin);
}

TEST_CASE("grid construction rejects even or tiny Nv") {
  CHECK_THROWS_AS(build_velocity_grid(8.0, 16), ConfigError);
  CHECK_THROWS_AS(build_velocity_grid(8.0, 1), ConfigError);
  CHECK_THROWS_AS(build_velocity_grid(-1.0, 17), ConfigError);
}

TEST_CASE("index layout is v3 fastest") {
  VelocityGrid g = build_velocity_grid(8.0, 5);
  CHECK(g.index(-2, -2, -2) == 0);
  CHECK(g.index(-2, -2, -1) == 1);
  CHECK(g.index(-2, -1, -2) == 5);
  CHECK(g.index(-1, -2, -2) == 25);
  CHECK(g.lattice.row(g.index(1, -2, 0)) == Eigen::RowVector3i(1, -2, 0));
}

TEST_CASE("Maxwellian normalisation and odd moments") {
  VelocityGrid g = build_velocity_grid(8.0, 33);
  Vec mu = maxwellian_table(g);
  CHECK(std::abs(integrate_v(mu, g) - 1.0) < 1e-6);
  CHECK(std::abs(integrate_v(g.nodes.col(0).cwiseProduct(mu), g)) <= 1e-15);
}

TEST_CASE("integrate_v length mismatch") {
  VelocityGrid g = build_velocity_grid(6.0, 3);
  CHECK_THROWS_AS(integrate_v(Vec::Ones(5), g), std::invalid_argument);
}

TEST_CASE("Lebedev rules") {
  for (int order : {6, 14, 26}) {
    SphereQuadrature q = build_sphere_quadrature(order);
    CHECK(q.size() == order);
    CHECK(std::abs(q.weights.sum() - 4 * pi) < 1e-12);
    CHECK(std::abs(q.weights.dot(q.directions.col(0).cwiseAbs2()) - 4 * pi / 3) < 1e-12);
    for (Index i = 0; i < q.size(); ++i) {
      CHECK(std::abs(q.directions.row(i).norm() - 1.0) < 1e-15);
      Eigen::Vector3d n = q.lattice_dirs.row(i).cast<double>();
      CHECK((n.normalized() - q.directions.row(i).transpose()).norm() < 1e-15);
    }
    if (q.degree >= 4) {
      CHECK(std::abs(q.weights.dot(q.directions.col(0).array().pow(4).matrix()) - 4 * pi / 5) < 1e-12);
      Vec x2y2 = q.directions.col(0).cwiseAbs2().cwiseProduct(q.directions.col(1).cwiseAbs2());
      CHECK(std::abs(q.weights.dot(x2y2) - 4 * pi / 15) < 1e-12);
    }
  }
  CHECK_THROWS_AS(build_sphere_quadrature(7), ConfigError);
}

TEST_CASE("spatial grid and spectral derivative") {
  SpatialGrid sg = build_spatial_grid(SpatialMode::Periodic1D, 2 * pi, 16);
  CHECK(sg.x.size() == 16);
  Vec s = sg.x.array().sin(), c = sg.x.array().cos();
  CHECK((sg.deriv * s - c).cwiseAbs().maxCoeff() < 1e-12);
  Vec s3 = (3 * sg.x.array()).sin();
  CHECK((sg.deriv * s3 - 3 * (3 * sg.x.array()).cos().matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((sg.deriv * Vec::Ones(16)).cwiseAbs().maxCoeff() < 1e-14);

  SpatialGrid z = build_spatial_grid(SpatialMode::Homogeneous0D, 1.0, 7);
  CHECK(z.nx == 1);
  CHECK(parse_spatial_mode("periodic-1D") == SpatialMode::Periodic1D);
  CHECK(parse_spatial_mode("homogeneous-0D") == SpatialMode::Homogeneous0D);
  CHECK_THROWS_AS(parse_spatial_mode("2D"), ConfigError);
}

TEST_CASE("translation operators are exact per mode") {
  SpatialGrid sg = build_spatial_grid(SpatialMode::Periodic1D, 2 * pi, 32);
  const double a = 0.37;
  Mat T = translation_matrix(sg, a);
  Vec f = (2 * sg.x.array()).cos() + 0.5 * (5 * sg.x.array()).sin();
  Vec g = (2 * (sg.x.array() - a)).cos() + 0.5 * (5 * (sg.x.array() - a)).sin();
  CHECK((T * f - g).cwiseAbs().maxCoeff() < 1e-12);

  // ∫_0^τ f(x - v s) ds for f = cos(kx)
  const double v = 1.3, tau = 0.2;
  Mat I = integrated_translation_matrix(sg, v, tau);
  Vec c = (2 * sg.x.array()).cos();
  Vec exact = ((2 * sg.x.array()).sin() - (2 * (sg.x.array() - v * tau)).sin()) / (2 * v);
  CHECK((I * c - exact).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((I * Vec::Ones(32) - tau * Vec::Ones(32)).cwiseAbs().maxCoeff() < 1e-12);
  Mat I0 = integrated_translation_matrix(sg, 0.0, tau);
  CHECK((I0 * c - tau * c).cwiseAbs().maxCoeff() < 1e-12);
}

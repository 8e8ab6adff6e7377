#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

namespace vmb {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Nodes = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using LatticeNodes = Eigen::Matrix<int, Eigen::Dynamic, 3>;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Uniform cell-centred lattice on [-Vmax, Vmax]^3, v3 fastest.
struct VelocityGrid {
  double vmax = 0;
  int nv = 0;
  int m = 0;      // half width in lattice units, k in [-m, m]
  double h = 0;   // spacing
  Nodes nodes;
  LatticeNodes lattice;
  Vec weights;

  Index size() const { return nodes.rows(); }
  Index index(int k1, int k2, int k3) const {
    return (Index(k1 + m) * nv + (k2 + m)) * nv + (k3 + m);
  }
  bool contains(int k1, int k2, int k3) const {
    return std::abs(k1) <= m && std::abs(k2) <= m && std::abs(k3) <= m;
  }
  double cell() const { return h * h * h; }
};

VelocityGrid build_velocity_grid(double vmax, int nv);

double integrate_v(const Vec& values, const VelocityGrid& grid);

// Lebedev rules; every direction is parallel to a short integer vector,
// which the collision model relies on.
struct SphereQuadrature {
  int order = 0;
  int degree = 0;
  Nodes directions;
  LatticeNodes lattice_dirs;
  Vec weights;
  Index size() const { return directions.rows(); }
};

SphereQuadrature build_sphere_quadrature(int order);

enum class SpatialMode { Homogeneous0D, Periodic1D };

SpatialMode parse_spatial_mode(const std::string& s);
std::string to_string(SpatialMode m);

struct SpatialGrid {
  SpatialMode mode = SpatialMode::Periodic1D;
  double length = 1;
  int nx = 1;
  Vec x;
  Vec wavenumbers;  // signed, Nyquist set to 0
  Mat deriv;        // real spectral derivative, acts on column vectors of point values

  double dx() const { return length / nx; }
};

SpatialGrid build_spatial_grid(SpatialMode mode, double length, int nx);

// Real circulant matrix F^{-1} diag(symbol(k)) F. The symbol must satisfy
// symbol(-k) = conj(symbol(k)); the Nyquist mode is dropped.
Mat spectral_operator(const SpatialGrid& sg,
                      const std::function<std::complex<double>(double)>& symbol);

Mat translation_matrix(const SpatialGrid& sg, double shift);
Mat integrated_translation_matrix(const SpatialGrid& sg, double speed, double tau);

// sum over x with the trapezoid (uniform) weight
inline double integrate_x(const Vec& values, const SpatialGrid& sg) {
  return values.sum() * sg.dx();
}

}  // namespace vmb

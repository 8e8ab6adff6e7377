#include "vmb/grid.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace vmb {

VelocityGrid build_velocity_grid(double vmax, int nv) {
  if (!(vmax > 0)) throw ConfigError("velocity grid: Vmax must be positive");
  if (nv < 3 || nv % 2 == 0) throw ConfigError("velocity grid: Nv must be odd and >= 3");
  VelocityGrid g;
  g.vmax = vmax;
  g.nv = nv;
  g.m = (nv - 1) / 2;
  g.h = 2.0 * vmax / nv;
  const Index n = Index(nv) * nv * nv;
  g.nodes.resize(n, 3);
  g.lattice.resize(n, 3);
  g.weights = Vec::Constant(n, g.cell());
  for (int a = -g.m; a <= g.m; ++a)
    for (int b = -g.m; b <= g.m; ++b)
      for (int c = -g.m; c <= g.m; ++c) {
        Index i = g.index(a, b, c);
        g.lattice.row(i) << a, b, c;
        g.nodes.row(i) << a * g.h, b * g.h, c * g.h;
      }
  return g;
}

double integrate_v(const Vec& values, const VelocityGrid& grid) {
  if (values.size() != grid.size())
    throw std::invalid_argument("integrate_v: length mismatch");
  return grid.weights.dot(values);
}

SphereQuadrature build_sphere_quadrature(int order) {
  struct Orbit { std::vector<Eigen::Vector3i> dirs; double w; };
  std::vector<Orbit> orbits;
  auto axes = [] {
    std::vector<Eigen::Vector3i> d;
    for (int i = 0; i < 3; ++i)
      for (int s : {1, -1}) {
        Eigen::Vector3i e = Eigen::Vector3i::Zero();
        e[i] = s;
        d.push_back(e);
      }
    return d;
  };
  auto faces = [] {
    std::vector<Eigen::Vector3i> d;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        for (int s : {1, -1})
          for (int t : {1, -1}) {
            Eigen::Vector3i e = Eigen::Vector3i::Zero();
            e[i] = s;
            e[j] = t;
            d.push_back(e);
          }
    return d;
  };
  auto corners = [] {
    std::vector<Eigen::Vector3i> d;
    for (int s : {1, -1})
      for (int t : {1, -1})
        for (int u : {1, -1}) d.emplace_back(s, t, u);
    return d;
  };
  int degree = 0;
  switch (order) {
    case 6:
      orbits = {{axes(), 1.0 / 6.0}};
      degree = 3;
      break;
    case 14:
      orbits = {{axes(), 1.0 / 15.0}, {corners(), 3.0 / 40.0}};
      degree = 5;
      break;
    case 26:
      orbits = {{axes(), 1.0 / 21.0}, {faces(), 4.0 / 105.0}, {corners(), 9.0 / 280.0}};
      degree = 7;
      break;
    default:
      throw ConfigError("sphere quadrature: supported orders are 6, 14, 26");
  }
  SphereQuadrature q;
  q.order = order;
  q.degree = degree;
  q.directions.resize(order, 3);
  q.lattice_dirs.resize(order, 3);
  q.weights.resize(order);
  Index r = 0;
  for (const auto& o : orbits)
    for (const auto& d : o.dirs) {
      q.lattice_dirs.row(r) = d.transpose();
      q.directions.row(r) = d.cast<double>().normalized().transpose();
      q.weights[r] = 4.0 * std::numbers::pi * o.w;
      ++r;
    }
  return q;
}

SpatialMode parse_spatial_mode(const std::string& s) {
  if (s == "periodic-1D") return SpatialMode::Periodic1D;
  if (s == "homogeneous-0D") return SpatialMode::Homogeneous0D;
  throw ConfigError("unknown spatial mode '" + s + "'");
}

std::string to_string(SpatialMode m) {
  return m == SpatialMode::Periodic1D ? "periodic-1D" : "homogeneous-0D";
}

SpatialGrid build_spatial_grid(SpatialMode mode, double length, int nx) {
  if (mode == SpatialMode::Homogeneous0D) nx = 1;
  if (nx < 1) throw ConfigError("spatial grid: Nx must be >= 1");
  if (!(length > 0)) throw ConfigError("spatial grid: length must be positive");
  SpatialGrid sg;
  sg.mode = mode;
  sg.length = length;
  sg.nx = nx;
  sg.x = Vec::LinSpaced(nx, 0.0, length - length / nx);
  sg.wavenumbers.resize(nx);
  for (int j = 0; j < nx; ++j) {
    int q = j <= nx / 2 ? j : j - nx;
    if (nx % 2 == 0 && j == nx / 2) q = 0;
    sg.wavenumbers[j] = 2.0 * std::numbers::pi * q / length;
  }
  sg.deriv = spectral_operator(sg, [](double k) { return std::complex<double>(0.0, k); });
  return sg;
}

Mat spectral_operator(const SpatialGrid& sg,
                      const std::function<std::complex<double>(double)>& symbol) {
  const int n = sg.nx;
  Mat op = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    if (n % 2 == 0 && j == n / 2) continue;
    int q = j <= n / 2 ? j : j - n;
    double k = 2.0 * std::numbers::pi * q / sg.length;
    std::complex<double> s = symbol(k);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double phase = 2.0 * std::numbers::pi * q * double(a - b) / n;
        op(a, b) += (s * std::polar(1.0, phase)).real() / n;
      }
  }
  return op;
}

Mat translation_matrix(const SpatialGrid& sg, double shift) {
  return spectral_operator(sg, [shift](double k) { return std::polar(1.0, -k * shift); });
}

// time integral over [0, tau] of the translation by speed*s
Mat integrated_translation_matrix(const SpatialGrid& sg, double speed, double tau) {
  return spectral_operator(sg, [speed, tau](double k) {
    double a = k * speed;
    if (std::abs(a * tau) < 1e-8)
      return std::complex<double>(tau, -0.5 * a * tau * tau);
    return (1.0 - std::polar(1.0, -a * tau)) / std::complex<double>(0.0, a);
  });
}

}  // namespace vmb

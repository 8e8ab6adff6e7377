#pragma once

#include <utility>
#include <vector>

#include "vmb/grid.hpp"
#include "vmb/maxwellian.hpp"

namespace vmb {

template <class Scalar>
std::pair<Eigen::Matrix<Scalar, 3, 1>, Eigen::Matrix<Scalar, 3, 1>> post_collision(
    const Eigen::Matrix<Scalar, 3, 1>& v, const Eigen::Matrix<Scalar, 3, 1>& u,
    const Eigen::Matrix<Scalar, 3, 1>& omega) {
  using std::abs;
  if (abs(omega.squaredNorm() - Scalar(1)) > Scalar(1e-12))
    throw std::invalid_argument("post_collision: omega must be a unit vector");
  Scalar t = (v - u).dot(omega);
  return {v - t * omega, u + t * omega};
}

// Per-direction tables of the lattice collision model. A direction n is an
// integer vector; (v, u) collide along n only when (v-u).n is a multiple of
// |n|^2, so v', u' are lattice nodes again. v' runs over the line v + Z n and
// u' over the plane {p : p.n = v.n}.
struct CollisionDirection {
  Eigen::Vector3i n;
  int nn = 0;          // |n|^2
  double rn = 0;       // |n|
  double weight = 0;   // (w(n) + w(-n)) |n|^2 h^4
  Eigen::VectorXi sigma;  // k.n per node
  int smin = 0, ns = 0;
  std::vector<int> line_start, line_nodes;
  Vec line_weight;   // exp(-s^2/4), s = sigma h/|n|
  Vec perp_weight;   // exp(-|v_perp|^2/4)
  Vec plane_gauss;   // exp(-s^2/4) per sigma in [smin, smin+ns)
  // linearised operator tables (Maxwellian sampled on an extended box)
  Vec A_plane, A_loss, B_line;
};

struct CollisionWorkspace {
  const VelocityGrid* grid = nullptr;
  const SphereQuadrature* sphere = nullptr;
  NullBasis basis;
  int m_ext = 0;
  Vec mu, sqrt_mu, nu;   // tables on the grid
  Vec nu_model;          // diagonal loss rate of the lattice model
  std::vector<CollisionDirection> dirs;
  Eigen::Matrix<double, 5, 5> moment_gram;  // sum psi_j psi_k mu h^3
  Eigen::LDLT<Eigen::Matrix<double, 5, 5>> moment_ldlt;
  double null_residual_raw = 0;  // max ||L_raw e_n|| / ||e_n|| before projection

  Index n() const { return grid->size(); }
};

// ext_radius: speed up to which mu is sampled analytically for L
CollisionWorkspace build_collision_workspace(const VelocityGrid& grid, const SphereQuadrature& sphere,
                                             double ext_radius = 13.5);

// Bilinear Q on the lattice, zero outside the cube.
Vec eval_Q_raw(const Vec& gA, const Vec& gB, const CollisionWorkspace& ws);
Vec eval_Q(const Vec& gA, const Vec& gB, const CollisionWorkspace& ws);

struct CorrectionResult {
  Vec q;
  double magnitude = 0;  // ||correction|| in the discrete L2 norm
};
CorrectionResult conservation_correction(const Vec& Qraw, const CollisionWorkspace& ws);
Eigen::Matrix<double, 5, 1> collision_moments(const Vec& q, const CollisionWorkspace& ws);

double collision_frequency(const Eigen::Vector3d& v, const CollisionWorkspace& ws);

// mu^{-1/2} Q(sqrt(mu) a, sqrt(mu) b), regrouped so no mu^{-1/2} factor is formed
Vec gamma_tilde(const Vec& a, const Vec& b, const CollisionWorkspace& ws);

Vec apply_L_raw(const Vec& g, const CollisionWorkspace& ws);
Vec apply_L(const Vec& g, const CollisionWorkspace& ws);
Vec apply_K(const Vec& g, const CollisionWorkspace& ws);
Vec apply_Gamma_raw(const Vec& g, const Vec& h, const CollisionWorkspace& ws);
Vec apply_Gamma(const Vec& g, const Vec& h, const CollisionWorkspace& ws);

// stacked nu on both species
Vec nu_stacked(const CollisionWorkspace& ws);

// dense matrices for small-grid oracles only
Mat assemble_L_dense(const CollisionWorkspace& ws);

struct RayleighEstimate {
  double delta_min = 0;
  double delta_max = 0;
  int samples = 0;
};
RayleighEstimate rayleigh_coercivity(const CollisionWorkspace& ws, int samples, unsigned seed);

}  // namespace vmb

#pragma once

#include "vmb/collision.hpp"
#include "vmb/fields.hpp"

namespace vmb {

struct PhysicsToggles {
  bool gamma = true;
  bool force_nonlinear = true;
  bool fields = true;
};

// 4th-order central differences, one-sided 5-point closures at the faces
struct VelocityDerivative {
  int nv = 0;
  Mat D;
  explicit VelocityDerivative(const VelocityGrid& g);
  VelocityDerivative() = default;
  Vec apply(const Vec& u, int axis) const;  // u: one species, length nv^3
};

struct Model {
  const VelocityGrid* grid = nullptr;
  const SpatialGrid* sg = nullptr;
  const CollisionWorkspace* ws = nullptr;
  PhysicsToggles toggles;
  VelocityDerivative dv;
  Vec v1_stacked;   // v1 on both species
  Vec source_plus;  // sqrt(mu) on the grid

  Index n() const { return grid->size(); }
};

Model make_model(const VelocityGrid& grid, const SpatialGrid& sg, const CollisionWorkspace& ws,
                 PhysicsToggles toggles = {});

Mat transport_term(const Mat& f, const Model& model);

// {E.v} sqrt(mu) q1
Mat source_term(const Field3& E, const Model& model);
// -q(E + v x B).grad_v f + (q/2){E.v} f
Mat force_nonlinear(const Field3& E, const Field3& B, const Mat& f, const Model& model);
Mat force_term(const KineticState& s, const Model& model);

Mat collide_L(const Mat& f, const Model& model);
Mat collide_Gamma(const Mat& g, const Mat& h, const Model& model);

Mat vlasov_rhs(const KineticState& s, const Model& model);

// grad_v along one axis for every column and both species
Mat velocity_derivative(const Mat& f, int axis, const Model& model);

// min over nodes of mu + sqrt(mu) f
double min_F(const Mat& f, const Model& model);

// zero f on the outermost two velocity shells
void damp_velocity_edges(Mat& f, const Model& model);

}  // namespace vmb

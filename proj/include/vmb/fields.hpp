#pragma once

#include "vmb/grid.hpp"
#include "vmb/maxwellian.hpp"

namespace vmb {

using Field3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct EMField {
  Field3 E, B;  // Nx x 3
  static EMField zero(int nx) { return {Field3::Zero(nx, 3), Field3::Zero(nx, 3)}; }
};

// f is 2N x Nx: column j holds [f+; f-] at x_j
struct KineticState {
  Mat f;
  EMField em;
  double t = 0;
};

struct ChargeCurrent {
  Vec rho;
  Field3 J;
  Field3 J_micro;  // the same moment of (I-P)f
};

ChargeCurrent compute_charge_current(const Mat& f, const NullBasis& basis);
Field3 current(const Mat& f, const VelocityGrid& grid, const Vec& sqrt_mu);

// (0, -dB3/dx, dB2/dx) for ∂t E, and its negative pattern for ∂t B
Field3 curl_1d(const Field3& F, const SpatialGrid& sg);

// Leapfrog: half kick of B, full update of E, half kick of B.
// With longitudinal = false the E1 column is left to the caller.
EMField maxwell_step(const EMField& field, const Field3& J, double dt, const SpatialGrid& sg,
                     bool longitudinal = true);

// quadratic invariant conserved exactly by maxwell_step in vacuum
double leapfrog_energy(const EMField& field, double dt, const SpatialGrid& sg);
double field_energy(const EMField& field, const SpatialGrid& sg);

struct ConstraintReport {
  double gauss = 0;  // max |dE1/dx - rho|
  double div_b = 0;  // max |dB1/dx|
};

ConstraintReport check_constraints(const EMField& field, const Vec& rho, const SpatialGrid& sg);

// zero-mean periodic solve of dE1/dx = rho
Vec solve_gauss(const Vec& rho, const SpatialGrid& sg);

}  // namespace vmb

#pragma once

#include <cmath>
#include <numbers>

#include "vmb/grid.hpp"

namespace vmb {

template <class Scalar>
Scalar maxwellian(const Eigen::Matrix<Scalar, 3, 1>& v) {
  using std::exp;
  const Scalar norm = Scalar(1) / (Scalar(2 * std::numbers::pi) * std::sqrt(Scalar(2 * std::numbers::pi)));
  return norm * exp(-v.squaredNorm() / Scalar(2));
}

Vec maxwellian_table(const VelocityGrid& g);
Vec sqrt_maxwellian_table(const VelocityGrid& g);

// Two-species functions at one spatial point are stacked: [plus; minus],
// each block of length grid.size().
inline auto plus(Vec& g, Index n) { return g.head(n); }
inline auto minus(Vec& g, Index n) { return g.tail(n); }
inline auto plus(const Vec& g, Index n) { return g.head(n); }
inline auto minus(const Vec& g, Index n) { return g.tail(n); }

Vec stack(const Vec& p, const Vec& m);

// discrete L2 pairing over both species
double inner(const Vec& g, const Vec& h, const VelocityGrid& grid);

struct NullBasis {
  const VelocityGrid* grid = nullptr;
  Mat e;        // 2N x 6: [sqrt mu,0], [0,sqrt mu], [v_i sqrt mu]x2, [|v|^2 sqrt mu]x2
  Mat gram;     // 6 x 6
  Eigen::LLT<Mat> llt;

  Index n() const { return grid->size(); }
};

NullBasis build_null_basis(const VelocityGrid& grid);

// Coefficients are ordered (a+, a-, b1, b2, b3, c).
struct MacroCoeffs {
  double a_plus = 0, a_minus = 0, c = 0;
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  Eigen::Matrix<double, 6, 1> vector() const;
};

MacroCoeffs macro_from_vector(const Eigen::Matrix<double, 6, 1>& c);

struct Projection {
  Vec Pg;
  MacroCoeffs coeffs;
};

Projection project_P(const Vec& g, const NullBasis& basis);
Vec apply_P(const Vec& g, const NullBasis& basis);
Vec micro_part(const Vec& g, const NullBasis& basis);

// column-wise versions for a whole spatial slab (2N x Nx)
Mat macro_coefficients(const Mat& f, const NullBasis& basis);  // 6 x Nx
Mat apply_P(const Mat& f, const NullBasis& basis);
Mat micro_part(const Mat& f, const NullBasis& basis);

Vec reconstruct(const MacroCoeffs& c, const NullBasis& basis);

// Rows a+, a-, b1, b2, b3, c over the spatial grid.
struct MacroFields {
  Vec a_plus, a_minus, b1, b2, b3, c;
  static MacroFields from_matrix(const Mat& coeffs);
  Mat matrix() const;
};

}  // namespace vmb

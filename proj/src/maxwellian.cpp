#include "vmb/maxwellian.hpp"

namespace vmb {

Vec maxwellian_table(const VelocityGrid& g) {
  Vec mu(g.size());
  for (Index i = 0; i < g.size(); ++i) mu[i] = maxwellian<double>(g.nodes.row(i).transpose());
  return mu;
}

Vec sqrt_maxwellian_table(const VelocityGrid& g) { return maxwellian_table(g).cwiseSqrt(); }

Vec stack(const Vec& p, const Vec& m) {
  Vec g(p.size() + m.size());
  g << p, m;
  return g;
}

double inner(const Vec& g, const Vec& h, const VelocityGrid& grid) {
  return g.dot(h) * grid.cell();
}

NullBasis build_null_basis(const VelocityGrid& grid) {
  NullBasis nb;
  nb.grid = &grid;
  const Index n = grid.size();
  const Vec s = sqrt_maxwellian_table(grid);
  nb.e = Mat::Zero(2 * n, 6);
  nb.e.col(0).head(n) = s;
  nb.e.col(1).tail(n) = s;
  for (int i = 0; i < 3; ++i) {
    Vec vs = grid.nodes.col(i).cwiseProduct(s);
    nb.e.col(2 + i) << vs, vs;
  }
  Vec es = grid.nodes.rowwise().squaredNorm().cwiseProduct(s);
  nb.e.col(5) << es, es;
  nb.gram = nb.e.transpose() * nb.e * grid.cell();
  nb.llt.compute(nb.gram);
  Eigen::SelfAdjointEigenSolver<Mat> es6(nb.gram);
  if (nb.llt.info() != Eigen::Success || es6.eigenvalues().minCoeff() <= 1e-12 * es6.eigenvalues().maxCoeff())
    throw std::runtime_error("null basis: Gram matrix is numerically singular");
  return nb;
}

Eigen::Matrix<double, 6, 1> MacroCoeffs::vector() const {
  Eigen::Matrix<double, 6, 1> v;
  v << a_plus, a_minus, b, c;
  return v;
}

MacroCoeffs macro_from_vector(const Eigen::Matrix<double, 6, 1>& c) {
  MacroCoeffs m;
  m.a_plus = c[0];
  m.a_minus = c[1];
  m.b = c.segment<3>(2);
  m.c = c[5];
  return m;
}

Projection project_P(const Vec& g, const NullBasis& basis) {
  Eigen::Matrix<double, 6, 1> c = basis.llt.solve(basis.e.transpose() * g * basis.grid->cell());
  return {basis.e * c, macro_from_vector(c)};
}

Vec apply_P(const Vec& g, const NullBasis& basis) { return project_P(g, basis).Pg; }

Vec micro_part(const Vec& g, const NullBasis& basis) { return g - apply_P(g, basis); }

Mat macro_coefficients(const Mat& f, const NullBasis& basis) {
  return basis.llt.solve(basis.e.transpose() * f * basis.grid->cell());
}

Mat apply_P(const Mat& f, const NullBasis& basis) { return basis.e * macro_coefficients(f, basis); }

Mat micro_part(const Mat& f, const NullBasis& basis) { return f - apply_P(f, basis); }

Vec reconstruct(const MacroCoeffs& c, const NullBasis& basis) { return basis.e * c.vector(); }

MacroFields MacroFields::from_matrix(const Mat& c) {
  MacroFields m;
  m.a_plus = c.row(0).transpose();
  m.a_minus = c.row(1).transpose();
  m.b1 = c.row(2).transpose();
  m.b2 = c.row(3).transpose();
  m.b3 = c.row(4).transpose();
  m.c = c.row(5).transpose();
  return m;
}

Mat MacroFields::matrix() const {
  Mat c(6, a_plus.size());
  c.row(0) = a_plus.transpose();
  c.row(1) = a_minus.transpose();
  c.row(2) = b1.transpose();
  c.row(3) = b2.transpose();
  c.row(4) = b3.transpose();
  c.row(5) = this->c.transpose();
  return c;
}

}  // namespace vmb

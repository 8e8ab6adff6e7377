#include "vmb/transport.hpp"

namespace vmb {

VelocityDerivative::VelocityDerivative(const VelocityGrid& g) : nv(g.nv), D(Mat::Zero(g.nv, g.nv)) {
  const double h = g.h;
  if (nv < 5) {
    for (int i = 1; i + 1 < nv; ++i) {
      D(i, i - 1) = -0.5 / h;
      D(i, i + 1) = 0.5 / h;
    }
    D.row(0).head(3) << -1.5 / h, 2.0 / h, -0.5 / h;
    D.row(nv - 1).tail(3) << 0.5 / h, -2.0 / h, 1.5 / h;
    return;
  }
  const double c = 1.0 / (12.0 * h);
  for (int i = 2; i + 2 < nv; ++i) {
    D(i, i - 2) = c;
    D(i, i - 1) = -8 * c;
    D(i, i + 1) = 8 * c;
    D(i, i + 2) = -c;
  }
  D.row(0).head(5) << -25 * c, 48 * c, -36 * c, 16 * c, -3 * c;
  D.row(1).head(5) << -3 * c, -10 * c, 18 * c, -6 * c, c;
  D.row(nv - 2).tail(5) << -c, 6 * c, -18 * c, 10 * c, 3 * c;
  D.row(nv - 1).tail(5) << 3 * c, -16 * c, 36 * c, -48 * c, 25 * c;
}

Vec VelocityDerivative::apply(const Vec& u, int axis) const {
  const Index n1 = nv, n2 = Index(nv) * nv;
  Vec out(u.size());
  if (axis == 2) {
    Eigen::Map<const Mat> U(u.data(), n1, n2);
    Eigen::Map<Mat>(out.data(), n1, n2).noalias() = D * U;
  } else if (axis == 0) {
    Eigen::Map<const Mat> U(u.data(), n2, n1);
    Eigen::Map<Mat>(out.data(), n2, n1).noalias() = U * D.transpose();
  } else {
    for (Index i = 0; i < n1; ++i) {
      Eigen::Map<const Mat> U(u.data() + i * n2, n1, n1);
      Eigen::Map<Mat>(out.data() + i * n2, n1, n1).noalias() = U * D.transpose();
    }
  }
  return out;
}

Model make_model(const VelocityGrid& grid, const SpatialGrid& sg, const CollisionWorkspace& ws,
                 PhysicsToggles toggles) {
  Model m;
  m.grid = &grid;
  m.sg = &sg;
  m.ws = &ws;
  m.toggles = toggles;
  m.dv = VelocityDerivative(grid);
  m.v1_stacked = stack(grid.nodes.col(0), grid.nodes.col(0));
  m.source_plus = ws.sqrt_mu;
  return m;
}

Mat transport_term(const Mat& f, const Model& model) {
  if (model.sg->mode == SpatialMode::Homogeneous0D) return Mat::Zero(f.rows(), f.cols());
  return -(model.v1_stacked.asDiagonal() * (f * model.sg->deriv.transpose()));
}

Mat source_term(const Field3& E, const Model& model) {
  const Index n = model.n();
  const Nodes& v = model.grid->nodes;
  Mat s(2 * n, E.rows());
  for (Index j = 0; j < E.rows(); ++j) {
    Vec ev = (v * E.row(j).transpose()).cwiseProduct(model.source_plus);
    s.col(j) << ev, -ev;
  }
  return s;
}

Mat velocity_derivative(const Mat& f, int axis, const Model& model) {
  const Index n = model.n();
  Mat out(f.rows(), f.cols());
  for (Index j = 0; j < f.cols(); ++j) {
    out.col(j).head(n) = model.dv.apply(f.col(j).head(n), axis);
    out.col(j).tail(n) = model.dv.apply(f.col(j).tail(n), axis);
  }
  return out;
}

Mat force_nonlinear(const Field3& E, const Field3& B, const Mat& f, const Model& model) {
  const Index n = model.n();
  const Nodes& v = model.grid->nodes;
  Mat out = Mat::Zero(f.rows(), f.cols());
  if (E.isZero(0.0) && B.isZero(0.0)) return out;
  const Mat d0 = velocity_derivative(f, 0, model);
  const Mat d1 = velocity_derivative(f, 1, model);
  const Mat d2 = velocity_derivative(f, 2, model);
  for (Index j = 0; j < f.cols(); ++j) {
    const Eigen::RowVector3d e = E.row(j), b = B.row(j);
    Vec F0 = (v.col(1) * b[2] - v.col(2) * b[1]).array() + e[0];
    Vec F1 = (v.col(2) * b[0] - v.col(0) * b[2]).array() + e[1];
    Vec F2 = (v.col(0) * b[1] - v.col(1) * b[0]).array() + e[2];
    Vec ev = v * e.transpose();
    for (int s = 0; s < 2; ++s) {
      const double q = s == 0 ? 1.0 : -1.0;
      auto seg = [&](const Mat& M) { return M.col(j).segment(s * n, n); };
      out.col(j).segment(s * n, n) =
          -q * (F0.cwiseProduct(seg(d0)) + F1.cwiseProduct(seg(d1)) + F2.cwiseProduct(seg(d2))) +
          0.5 * q * ev.cwiseProduct(seg(f));
    }
  }
  return out;
}

Mat force_term(const KineticState& s, const Model& model) {
  if (!model.toggles.fields) return Mat::Zero(s.f.rows(), s.f.cols());
  Mat out = source_term(s.em.E, model);
  if (model.toggles.force_nonlinear) out += force_nonlinear(s.em.E, s.em.B, s.f, model);
  return out;
}

Mat collide_L(const Mat& f, const Model& model) {
  Mat out(f.rows(), f.cols());
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < f.cols(); ++j) out.col(j) = apply_L(f.col(j), *model.ws);
  return out;
}

Mat collide_Gamma(const Mat& g, const Mat& h, const Model& model) {
  Mat out(g.rows(), g.cols());
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < g.cols(); ++j) out.col(j) = apply_Gamma(g.col(j), h.col(j), *model.ws);
  return out;
}

Mat vlasov_rhs(const KineticState& s, const Model& model) {
  Mat r = transport_term(s.f, model) + force_term(s, model) - collide_L(s.f, model);
  if (model.toggles.gamma) r += collide_Gamma(s.f, s.f, model);
  return r;
}

double min_F(const Mat& f, const Model& model) {
  const Index n = model.n();
  const Vec& mu = model.ws->mu;
  const Vec& s = model.ws->sqrt_mu;
  double m = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < f.cols(); ++j) {
    m = std::min(m, (mu + s.cwiseProduct(f.col(j).head(n))).minCoeff());
    m = std::min(m, (mu + s.cwiseProduct(f.col(j).tail(n))).minCoeff());
  }
  return m;
}

void damp_velocity_edges(Mat& f, const Model& model) {
  const VelocityGrid& g = *model.grid;
  const Index n = g.size();
  for (Index i = 0; i < n; ++i)
    if (g.lattice.row(i).cwiseAbs().maxCoeff() >= g.m - 1) {
      f.row(i).setZero();
      f.row(n + i).setZero();
    }
}

}  // namespace vmb

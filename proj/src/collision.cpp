#include "vmb/collision.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace vmb {

namespace {

const double kC0 = std::pow(2.0 * std::numbers::pi, -0.75);

struct BoxGeometry {
  int M = 0, width = 0;
  Eigen::VectorXi sigma;
  int smin = 0, ns = 0;
  std::vector<int> line_start, line_nodes;
  Vec line_weight, perp_weight, sqrt_mu;

  Index index(int a, int b, int c) const { return (Index(a + M) * width + (b + M)) * width + (c + M); }
  bool contains(int a, int b, int c) const { return std::abs(a) <= M && std::abs(b) <= M && std::abs(c) <= M; }
};

BoxGeometry build_geometry(int M, const Eigen::Vector3i& n, double h) {
  BoxGeometry g;
  g.M = M;
  g.width = 2 * M + 1;
  const Index size = Index(g.width) * g.width * g.width;
  const double nn = n.squaredNorm(), rn = std::sqrt(nn);
  g.sigma.resize(size);
  g.line_weight.resize(size);
  g.perp_weight.resize(size);
  g.sqrt_mu.resize(size);
  for (int a = -M; a <= M; ++a)
    for (int b = -M; b <= M; ++b)
      for (int c = -M; c <= M; ++c) {
        Index i = g.index(a, b, c);
        int s = a * n[0] + b * n[1] + c * n[2];
        double along = s * h / rn;
        double r2 = h * h * double(a * a + b * b + c * c);
        g.sigma[i] = s;
        g.line_weight[i] = std::exp(-0.25 * along * along);
        g.perp_weight[i] = std::exp(-0.25 * std::max(0.0, r2 - along * along));
        g.sqrt_mu[i] = kC0 * std::exp(-0.25 * r2);
      }
  g.smin = -M * n.cwiseAbs().sum();
  g.ns = 2 * M * n.cwiseAbs().sum() + 1;
  g.line_start.push_back(0);
  for (int a = -M; a <= M; ++a)
    for (int b = -M; b <= M; ++b)
      for (int c = -M; c <= M; ++c) {
        if (g.contains(a - n[0], b - n[1], c - n[2])) continue;
        int x = a, y = b, z = c;
        while (g.contains(x, y, z)) {
          g.line_nodes.push_back(int(g.index(x, y, z)));
          x += n[0];
          y += n[1];
          z += n[2];
        }
        g.line_start.push_back(int(g.line_nodes.size()));
      }
  return g;
}

// y_t = sum_s |t - s| x_s for one sequence, accumulated without cancellation
template <class Get, class Put>
void abs_conv(int len, Get get, Put put) {
  double run = 0, acc = 0;
  std::vector<double> left(len);
  for (int t = 0; t < len; ++t) {
    left[t] = acc;
    run += get(t);
    acc += run;
  }
  run = 0;
  acc = 0;
  for (int t = len - 1; t >= 0; --t) {
    put(t, left[t] + acc);
    run += get(t);
    acc += run;
  }
}

Vec line_conv(const std::vector<int>& start, const std::vector<int>& nodes, const Vec& x, double rn) {
  Vec y(x.size());
  for (size_t l = 0; l + 1 < start.size(); ++l) {
    const int* idx = nodes.data() + start[l];
    int len = start[l + 1] - start[l];
    abs_conv(len, [&](int t) { return x[idx[t]]; }, [&](int t, double v) { y[idx[t]] = rn * v; });
  }
  return y;
}

// per residue class of sigma mod nn
Vec residue_conv(const Vec& X, int nn, double rn) {
  const int ns = int(X.size());
  Vec Y(ns);
  for (int r = 0; r < nn && r < ns; ++r) {
    int len = (ns - 1 - r) / nn + 1;
    abs_conv(len, [&](int t) { return X[r + t * nn]; }, [&](int t, double v) { Y[r + t * nn] = rn * v; });
  }
  return Y;
}

Vec plane_sum(const Eigen::VectorXi& sigma, int smin, int ns, const Vec& x) {
  Vec s = Vec::Zero(ns);
  for (Index i = 0; i < x.size(); ++i) s[sigma[i] - smin] += x[i];
  return s;
}

}  // namespace

CollisionWorkspace build_collision_workspace(const VelocityGrid& grid, const SphereQuadrature& sphere,
                                             double ext_radius) {
  CollisionWorkspace ws;
  ws.grid = &grid;
  ws.sphere = &sphere;
  ws.basis = build_null_basis(grid);
  ws.mu = maxwellian_table(grid);
  ws.sqrt_mu = ws.mu.cwiseSqrt();
  const Index N = grid.size();
  const double h = grid.h;
  ws.m_ext = std::max(grid.m, int(std::ceil(ext_radius / h)));

  // group +omega / -omega
  std::vector<bool> used(sphere.size(), false);
  for (Index i = 0; i < sphere.size(); ++i) {
    if (used[i]) continue;
    Eigen::Vector3i n = sphere.lattice_dirs.row(i).transpose();
    double w = sphere.weights[i];
    used[i] = true;
    for (Index j = i + 1; j < sphere.size(); ++j)
      if (!used[j] && Eigen::Vector3i(sphere.lattice_dirs.row(j).transpose()) == -n) {
        w += sphere.weights[j];
        used[j] = true;
      }
    CollisionDirection d;
    d.n = n;
    d.nn = n.squaredNorm();
    d.rn = std::sqrt(double(d.nn));
    d.weight = w * d.nn * h * h * h * h;
    ws.dirs.push_back(d);
  }

  ws.nu_model = Vec::Zero(N);
  for (auto& d : ws.dirs) {
    BoxGeometry C = build_geometry(grid.m, d.n, h);
    d.sigma = C.sigma;
    d.smin = C.smin;
    d.ns = C.ns;
    d.line_start = C.line_start;
    d.line_nodes = C.line_nodes;
    d.line_weight = C.line_weight;
    d.perp_weight = C.perp_weight;
    d.plane_gauss.resize(d.ns);
    for (int s = 0; s < d.ns; ++s) {
      double along = (s + d.smin) * h / d.rn;
      d.plane_gauss[s] = std::exp(-0.25 * along * along);
    }

    BoxGeometry E = build_geometry(ws.m_ext, d.n, h);
    Vec PE = plane_sum(E.sigma, E.smin, E.ns, E.perp_weight.cwiseProduct(E.sqrt_mu));
    Vec ME = plane_sum(E.sigma, E.smin, E.ns, E.sqrt_mu.cwiseProduct(E.sqrt_mu));
    Vec lossE = residue_conv(ME, d.nn, d.rn);
    Vec lineE = line_conv(E.line_start, E.line_nodes, E.line_weight.cwiseProduct(E.sqrt_mu), d.rn);
    d.A_plane.resize(N);
    d.A_loss.resize(N);
    d.B_line.resize(N);
    for (Index i = 0; i < N; ++i) {
      const auto k = grid.lattice.row(i);
      int se = d.sigma[i] - E.smin;
      d.A_plane[i] = kC0 * PE[se];
      d.A_loss[i] = lossE[se];
      d.B_line[i] = kC0 * lineE[E.index(k[0], k[1], k[2])];
    }
    ws.nu_model += 2.0 * d.weight * d.A_loss;
  }

  ws.nu.resize(N);
  const Nodes& v = grid.nodes;
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < N; ++i) {
    double s = 0;
    for (Index j = 0; j < N; ++j) s += (v.row(i) - v.row(j)).norm() * ws.mu[j];
    ws.nu[i] = 4.0 * std::numbers::pi * s * grid.cell();
  }

  Eigen::Matrix<double, Eigen::Dynamic, 5> psi(N, 5);
  psi.col(0).setOnes();
  psi.middleCols<3>(1) = grid.nodes;
  psi.col(4) = grid.nodes.rowwise().squaredNorm();
  ws.moment_gram = psi.transpose() * ws.mu.asDiagonal() * psi * grid.cell();
  ws.moment_ldlt.compute(ws.moment_gram);

  for (int k = 0; k < 6; ++k) {
    Vec e = ws.basis.e.col(k);
    ws.null_residual_raw = std::max(ws.null_residual_raw, apply_L_raw(e, ws).norm() / e.norm());
  }
  return ws;
}

Vec eval_Q_raw(const Vec& gA, const Vec& gB, const CollisionWorkspace& ws) {
  const Index N = ws.n();
  if (gA.size() != N || gB.size() != N) throw std::invalid_argument("eval_Q: grid mismatch");
  Vec out = Vec::Zero(N);
  for (const auto& d : ws.dirs) {
    Vec lc = line_conv(d.line_start, d.line_nodes, gA, d.rn);
    Vec S = plane_sum(d.sigma, d.smin, d.ns, gB);
    Vec loss = residue_conv(S, d.nn, d.rn);
    for (Index i = 0; i < N; ++i) {
      int s = d.sigma[i] - d.smin;
      out[i] += d.weight * (lc[i] * S[s] - gA[i] * loss[s]);
    }
  }
  return out;
}

Eigen::Matrix<double, 5, 1> collision_moments(const Vec& q, const CollisionWorkspace& ws) {
  const auto& g = *ws.grid;
  Eigen::Matrix<double, 5, 1> m;
  m[0] = q.sum();
  for (int i = 0; i < 3; ++i) m[1 + i] = g.nodes.col(i).dot(q);
  m[4] = g.nodes.rowwise().squaredNorm().dot(q);
  return m * g.cell();
}

CorrectionResult conservation_correction(const Vec& Qraw, const CollisionWorkspace& ws) {
  const auto& g = *ws.grid;
  Eigen::Matrix<double, 5, 1> c = ws.moment_ldlt.solve(collision_moments(Qraw, ws));
  Vec corr = ws.mu.cwiseProduct(Vec::Constant(g.size(), c[0]) + g.nodes * c.segment<3>(1) +
                                c[4] * g.nodes.rowwise().squaredNorm());
  CorrectionResult r;
  r.q = Qraw - corr;
  r.magnitude = std::sqrt(corr.squaredNorm() * g.cell());
  return r;
}

Vec eval_Q(const Vec& gA, const Vec& gB, const CollisionWorkspace& ws) {
  return conservation_correction(eval_Q_raw(gA, gB, ws), ws).q;
}

double collision_frequency(const Eigen::Vector3d& v, const CollisionWorkspace& ws) {
  const auto& g = *ws.grid;
  double s = 0;
  for (Index j = 0; j < g.size(); ++j) s += (v - g.nodes.row(j).transpose()).norm() * ws.mu[j];
  return 4.0 * std::numbers::pi * s * g.cell();
}

Vec gamma_tilde(const Vec& a, const Vec& b, const CollisionWorkspace& ws) {
  const Index N = ws.n();
  Vec out = Vec::Zero(N);
  for (const auto& d : ws.dirs) {
    Vec lc = line_conv(d.line_start, d.line_nodes, d.line_weight.cwiseProduct(a), d.rn);
    Vec P = plane_sum(d.sigma, d.smin, d.ns, d.perp_weight.cwiseProduct(b));
    Vec loss = residue_conv(kC0 * d.plane_gauss.cwiseProduct(P), d.nn, d.rn);
    for (Index i = 0; i < N; ++i) {
      int s = d.sigma[i] - d.smin;
      out[i] += d.weight * (kC0 * lc[i] * P[s] - a[i] * loss[s]);
    }
  }
  return out;
}

Vec apply_L_raw(const Vec& g, const CollisionWorkspace& ws) {
  const Index N = ws.n();
  if (g.size() != 2 * N) throw std::invalid_argument("apply_L: grid mismatch");
  Vec Ap = Vec::Zero(N), Am = Vec::Zero(N), B = Vec::Zero(N);
  Vec G = g.head(N) + g.tail(N);
  for (const auto& d : ws.dirs) {
    Vec lp = line_conv(d.line_start, d.line_nodes, d.line_weight.cwiseProduct(g.head(N)), d.rn);
    Vec lm = line_conv(d.line_start, d.line_nodes, d.line_weight.cwiseProduct(g.tail(N)), d.rn);
    Vec P = plane_sum(d.sigma, d.smin, d.ns, d.perp_weight.cwiseProduct(G));
    Vec loss = residue_conv(kC0 * d.plane_gauss.cwiseProduct(P), d.nn, d.rn);
    for (Index i = 0; i < N; ++i) {
      int s = d.sigma[i] - d.smin;
      Ap[i] += d.weight * (d.A_plane[i] * lp[i] - g[i] * d.A_loss[i]);
      Am[i] += d.weight * (d.A_plane[i] * lm[i] - g[N + i] * d.A_loss[i]);
      B[i] += d.weight * (d.B_line[i] * P[s] - ws.sqrt_mu[i] * loss[s]);
    }
  }
  Vec out(2 * N);
  out << -2.0 * Ap - B, -2.0 * Am - B;
  return out;
}

Vec apply_L(const Vec& g, const CollisionWorkspace& ws) {
  return micro_part(apply_L_raw(micro_part(g, ws.basis), ws), ws.basis);
}

Vec nu_stacked(const CollisionWorkspace& ws) { return stack(ws.nu, ws.nu); }

Vec apply_K(const Vec& g, const CollisionWorkspace& ws) {
  return nu_stacked(ws).cwiseProduct(g) - apply_L(g, ws);
}

Vec apply_Gamma_raw(const Vec& g, const Vec& h, const CollisionWorkspace& ws) {
  const Index N = ws.n();
  if (g.size() != 2 * N || h.size() != 2 * N) throw std::invalid_argument("apply_Gamma: grid mismatch");
  Vec H = h.head(N) + h.tail(N);
  if (g.isZero(0.0) || H.isZero(0.0)) return Vec::Zero(2 * N);
  return stack(gamma_tilde(g.head(N), H, ws), gamma_tilde(g.tail(N), H, ws));
}

Vec apply_Gamma(const Vec& g, const Vec& h, const CollisionWorkspace& ws) {
  return micro_part(apply_Gamma_raw(g, h, ws), ws.basis);
}

Mat assemble_L_dense(const CollisionWorkspace& ws) {
  const Index n2 = 2 * ws.n();
  Mat L(n2, n2);
  for (Index j = 0; j < n2; ++j) L.col(j) = apply_L(Vec::Unit(n2, j), ws);
  return L;
}

RayleighEstimate rayleigh_coercivity(const CollisionWorkspace& ws, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const Index n2 = 2 * ws.n();
  const Vec nu2 = nu_stacked(ws);
  const Vec s2 = stack(ws.sqrt_mu, ws.sqrt_mu);
  RayleighEstimate r;
  r.delta_min = std::numeric_limits<double>::infinity();
  r.delta_max = 0;
  for (int k = 0; k < samples; ++k) {
    // smooth, decaying random microscopic-dominant samples
    Vec g(n2);
    for (Index i = 0; i < n2; ++i) g[i] = nd(rng);
    g = g.cwiseProduct(s2.cwiseSqrt());
    Vec w = micro_part(g, ws.basis);
    double den = w.cwiseProduct(nu2).dot(w);
    if (den <= 0) continue;
    double q = apply_L(g, ws).dot(g) / den;
    r.delta_min = std::min(r.delta_min, q);
    r.delta_max = std::max(r.delta_max, q);
    ++r.samples;
  }
  return r;
}

}  // namespace vmb

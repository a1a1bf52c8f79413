#include "biorth/curvature.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace biorth {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Metric evaluations for one FD level, memoized on integer stencil offsets.
struct StencilCache {
  const MetricField& field;
  VectorXd t0;
  double h;
  std::map<std::vector<int>, MatrixXd> cache;

  const MatrixXd& at(const std::vector<int>& off) {
    auto it = cache.find(off);
    if (it != cache.end()) return it->second;
    VectorXd t = t0;
    for (int a = 0; a < field.dim; ++a) t[a] += h * off[a];
    return cache.emplace(off, field.g(t)).first->second;
  }
};

/// dGamma and Gamma at t0 for one step size h; returns R_{ijkl} (unsymmetrized).
std::vector<double> riemann_level(const MetricField& field, const VectorXd& t0, double h) {
  const int n = field.dim;
  StencilCache sc{field, t0, h, {}};
  std::vector<int> off(n, 0);

  auto dmetric = [&](const std::vector<int>& base) {
    // dg[a](i,j) = d g_ij / d t_a at base, central.
    std::vector<MatrixXd> dg(n);
    for (int a = 0; a < n; ++a) {
      std::vector<int> p = base, m = base;
      p[a] += 1;
      m[a] -= 1;
      dg[a] = (sc.at(p) - sc.at(m)) / (2 * h);
    }
    return dg;
  };

  auto christoffel2 = [&](const std::vector<int>& base) {
    const MatrixXd g = sc.at(base);
    const MatrixXd ginv = g.inverse();
    const auto dg = dmetric(base);
    std::vector<MatrixXd> gam(n, MatrixXd::Zero(n, n));  // gam[k](i,j) = Gamma^k_ij
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        VectorXd first(n);
        for (int l = 0; l < n; ++l) first[l] = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        const VectorXd second = ginv * first;
        for (int k = 0; k < n; ++k) {
          gam[k](i, j) = second[k];
          gam[k](j, i) = second[k];
        }
      }
    return gam;
  };

  const auto gam0 = christoffel2(off);
  // dGamma[a][k](i,j) = d Gamma^k_ij / d t_a, central.
  std::vector<std::vector<MatrixXd>> dgam(n);
  for (int a = 0; a < n; ++a) {
    std::vector<int> p = off, m = off;
    p[a] += 1;
    m[a] -= 1;
    const auto gp = christoffel2(p);
    const auto gm = christoffel2(m);
    dgam[a].resize(n);
    for (int k = 0; k < n; ++k) dgam[a][k] = (gp[k] - gm[k]) / (2 * h);
  }

  const MatrixXd g = sc.at(off);
  std::vector<double> r(static_cast<size_t>(n) * n * n * n, 0.0);
  auto idx = [n](int i, int j, int k, int l) {
    return ((static_cast<size_t>(i) * n + j) * n + k) * n + l;
  };
  // R(e_i, e_j) e_k = (d_i Gamma^m_jk - d_j Gamma^m_ik
  //                    + Gamma^m_ip Gamma^p_jk - Gamma^m_jp Gamma^p_ik) e_m.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        VectorXd up(n);
        for (int m = 0; m < n; ++m) {
          double v = dgam[i][m](j, k) - dgam[j][m](i, k);
          for (int p = 0; p < n; ++p)
            v += gam0[m](i, p) * gam0[p](j, k) - gam0[m](j, p) * gam0[p](i, k);
          up[m] = v;
        }
        const VectorXd low = g * up;  // R_{ijkl} = g_{lm} R^m_{ijk}
        for (int l = 0; l < n; ++l) r[idx(i, j, k, l)] = low[l];
      }
  return r;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

double RiemannTensor::quad(const VectorXd& u, const VectorXd& v) const {
  const int n = dim;
  double s = 0;
  for (int i = 0; i < n; ++i) {
    if (u[i] == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (v[j] == 0.0) continue;
      for (int k = 0; k < n; ++k) {
        if (v[k] == 0.0) continue;
        double inner = 0;
        for (int l = 0; l < n; ++l) inner += at(i, j, k, l) * u[l];
        s += u[i] * v[j] * v[k] * inner;
      }
    }
  }
  return s;
}

RiemannTensor riemann_fd(const MetricField& field, const VectorXd& t, double converge_tol) {
  if (t.size() != field.dim) throw DomainError("riemann_fd: parameter dimension mismatch");
  const double h = field.fd_step;
  if (t.lpNorm<Eigen::Infinity>() + 2 * h > field.chart_radius)
    throw DomainError("riemann_fd: stencil leaves the chart validity box");

  const auto e1 = riemann_level(field, t, h);
  const auto e2 = riemann_level(field, t, h / 2);
  const auto e3 = riemann_level(field, t, h / 4);

  const size_t sz = e1.size();
  std::vector<double> f1(sz), f2(sz), out(sz);
  for (size_t i = 0; i < sz; ++i) {
    f1[i] = (4 * e2[i] - e1[i]) / 3;
    f2[i] = (4 * e3[i] - e2[i]) / 3;
    out[i] = (16 * f2[i] - f1[i]) / 15;
  }
  const double rich = max_abs_diff(f1, f2);
  if (!(rich <= converge_tol)) {
    std::ostringstream os;
    os << "riemann_fd: step-halving did not converge (residual " << rich << " > "
       << converge_tol << " at base step " << h << ")";
    throw OracleFailure(os.str());
  }

  RiemannTensor rt;
  rt.dim = field.dim;
  rt.t = t;
  rt.g = field.g(t);
  const int n = field.dim;
  auto idx = [n](int i, int j, int k, int l) {
    return ((static_cast<size_t>(i) * n + j) * n + k) * n + l;
  };
  // Pre-symmetrization residual: pair antisymmetries and block symmetry.
  double presym = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          presym = std::max(presym, std::abs(out[idx(i, j, k, l)] + out[idx(j, i, k, l)]));
          presym = std::max(presym, std::abs(out[idx(i, j, k, l)] + out[idx(i, j, l, k)]));
          presym = std::max(presym, std::abs(out[idx(i, j, k, l)] - out[idx(k, l, i, j)]));
        }
  rt.presym_residual = presym;
  rt.richardson_residual = rich;

  rt.r.assign(sz, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          rt.r[idx(i, j, k, l)] =
              (out[idx(i, j, k, l)] - out[idx(j, i, k, l)] - out[idx(i, j, l, k)] +
               out[idx(j, i, l, k)] + out[idx(k, l, i, j)] - out[idx(l, k, i, j)] -
               out[idx(k, l, j, i)] + out[idx(l, k, j, i)]) /
              8.0;
  return rt;
}

RiemannTensor riemann_fd_quick(const MetricField& field, const VectorXd& t) {
  if (t.size() != field.dim) throw DomainError("riemann_fd_quick: parameter dimension mismatch");
  const double h = field.fd_step;
  if (t.lpNorm<Eigen::Infinity>() + 2 * h > field.chart_radius)
    throw DomainError("riemann_fd_quick: stencil leaves the chart validity box");
  const auto raw = riemann_level(field, t, h);
  RiemannTensor rt;
  rt.dim = field.dim;
  rt.t = t;
  rt.g = field.g(t);
  const int n = field.dim;
  auto idx = [n](int i, int j, int k, int l) {
    return ((static_cast<size_t>(i) * n + j) * n + k) * n + l;
  };
  rt.r.assign(raw.size(), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          rt.r[idx(i, j, k, l)] =
              (raw[idx(i, j, k, l)] - raw[idx(j, i, k, l)] - raw[idx(i, j, l, k)] +
               raw[idx(j, i, l, k)] + raw[idx(k, l, i, j)] - raw[idx(l, k, i, j)] -
               raw[idx(k, l, j, i)] + raw[idx(l, k, j, i)]) /
              8.0;
  return rt;
}

double sec_from_riemann(const RiemannTensor& rt, const VectorXd& u, const VectorXd& v) {
  const double uu = u.dot(rt.g * u);
  const double vv = v.dot(rt.g * v);
  const double uv = u.dot(rt.g * v);
  const double gram = uu * vv - uv * uv;
  if (gram < default_tolerances().degenerate_gram)
    throw DegeneratePlaneError("sec_from_riemann: degenerate plane");
  // sec = g(R(u,v)v, u) / gram = R_{ijkl} u^i v^j v^k u^l / gram.
  return rt.quad(u, v) / gram;
}

double ricci_from_riemann(const RiemannTensor& rt, const VectorXd& u) {
  if (u.norm() == 0.0) throw DegeneratePlaneError("ricci: zero direction");
  // Trace over a g-orthonormal frame: Ric(u,u) = sum_j g(R(b_j, u) u, b_j).
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(rt.g);
  const MatrixXd frame =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();
  double s = 0;
  for (int j = 0; j < rt.dim; ++j) s += rt.quad(frame.col(j), u);
  return s;
}

double ricci_fd(const MetricField& field, const VectorXd& t, const VectorXd& u) {
  return ricci_from_riemann(riemann_fd(field, t), u);
}

std::vector<MatrixXd> christoffel_fd(const MetricField& field, const VectorXd& t) {
  const int n = field.dim;
  const double h = field.fd_step;
  const MatrixXd g = field.g(t);
  const MatrixXd ginv = g.inverse();
  std::vector<MatrixXd> dg(n);
  for (int a = 0; a < n; ++a) {
    VectorXd tp = t, tm = t;
    tp[a] += h;
    tm[a] -= h;
    dg[a] = (field.g(tp) - field.g(tm)) / (2 * h);
  }
  std::vector<MatrixXd> gam(n, MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      VectorXd first(n);
      for (int l = 0; l < n; ++l) first[l] = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
      const VectorXd second = ginv * first;
      for (int k = 0; k < n; ++k) {
        gam[k](i, j) = second[k];
        gam[k](j, i) = second[k];
      }
    }
  return gam;
}

VectorXd shoot_geodesic(const MetricField& field, const VectorXd& t0, const VectorXd& v0,
                        double len, int steps) {
  const int n = field.dim;
  VectorXd x = t0, v = v0;
  const double dt = len / steps;
  auto acc = [&](const VectorXd& pos, const VectorXd& vel) {
    const auto gam = christoffel_fd(field, pos);
    VectorXd a(n);
    for (int k = 0; k < n; ++k) a[k] = -vel.dot(gam[k] * vel);
    return a;
  };
  for (int s = 0; s < steps; ++s) {
    const VectorXd k1x = v, k1v = acc(x, v);
    const VectorXd k2x = v + 0.5 * dt * k1v, k2v = acc(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v);
    const VectorXd k3x = v + 0.5 * dt * k2v, k3v = acc(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v);
    const VectorXd k4x = v + dt * k3v, k4v = acc(x + dt * k3x, v + dt * k3v);
    x += dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
    v += dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
  return x;
}

std::vector<std::pair<VectorXd, VectorXd>> curvature_eigenplane_seeds(const RiemannTensor& rt,
                                                                      int count) {
  const int n = rt.dim;
  // g-orthonormal frame and the tensor rotated into it.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(rt.g);
  const MatrixXd frame =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();
  std::vector<double> rf(rt.r.size(), 0.0);
  auto idx = [n](int i, int j, int k, int l) {
    return ((static_cast<size_t>(i) * n + j) * n + k) * n + l;
  };
  {
    // Rotate the tensor into the frame one slot at a time.
    std::vector<double> cur = rt.r, tmp(rt.r.size());
    for (int slot = 0; slot < 4; ++slot) {
      std::fill(tmp.begin(), tmp.end(), 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
              double s = 0;
              for (int mm = 0; mm < n; ++mm) {
                const size_t src = slot == 0   ? idx(mm, j, k, l)
                                   : slot == 1 ? idx(i, mm, k, l)
                                   : slot == 2 ? idx(i, j, mm, l)
                                               : idx(i, j, k, mm);
                const int rot = slot == 0 ? i : slot == 1 ? j : slot == 2 ? k : l;
                s += cur[src] * frame(mm, rot);
              }
              tmp[idx(i, j, k, l)] = s;
            }
      cur.swap(tmp);
    }
    rf = cur;
  }

  // Pair basis of 2-forms.
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  const int m = int(pairs.size());
  MatrixXd op(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      const auto [a, b] = pairs[size_t(r)];
      const auto [cc, d] = pairs[size_t(c)];
      op(r, c) = rf[idx(a, b, d, cc)];
    }
  op = 0.5 * (op + op.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eo(op);

  std::vector<std::pair<VectorXd, VectorXd>> seeds;
  auto push_from = [&](int col) {
    const VectorXd w = eo.eigenvectors().col(col);
    MatrixXd skew = MatrixXd::Zero(n, n);
    for (int r = 0; r < m; ++r) {
      const auto [a, b] = pairs[size_t(r)];
      skew(a, b) = w[r];
      skew(b, a) = -w[r];
    }
    Eigen::JacobiSVD<MatrixXd> svd(skew, Eigen::ComputeFullU);
    const VectorXd u = frame * svd.matrixU().col(0);
    const VectorXd v = frame * svd.matrixU().col(1);
    seeds.emplace_back(u, v);
  };
  for (int k = 0; k < count && k < m; ++k) push_from(k);          // bottom
  for (int k = 0; k < count && m - 1 - k >= 0; ++k) push_from(m - 1 - k);  // top (sign safety)
  return seeds;
}

double bianchi_residual(const RiemannTensor& rt) {
  const int n = rt.dim;
  double worst = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          worst = std::max(worst,
                           std::abs(rt.at(i, j, k, l) + rt.at(j, k, i, l) + rt.at(k, i, j, l)));
  return worst;
}

// ---------------------------------------------------------------------------

double sec_biinvariant(const AlgVec& x, const AlgVec& y) {
  require_same_tag(x, y, "sec_biinvariant");
  const double xx = inner_g0(x, x), yy = inner_g0(y, y), xy = inner_g0(x, y);
  const double gram = xx * yy - xy * xy;
  if (gram < default_tolerances().degenerate_gram)
    throw DegeneratePlaneError("sec_biinvariant: dependent inputs");
  const AlgVec b = bracket(x, y);
  return 0.25 * inner_g0(b, b) / gram;
}

LeftInvariantEngine::LeftInvariantEngine(Alg tag, MetricEndo phi)
    : tag_(tag), phi_(std::move(phi)) {
  if (phi_.tag != tag_) throw TagMismatchError("LeftInvariantEngine: endomorphism tag differs");
  phi_.validate();
  const int n = alg_dim(tag_);
  // g(x,y) = x^T Phi y in the g0-orthonormal basis; frame = Phi^{-1/2}.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(phi_.m);
  frame_ = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
  frame_inv_ = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
               es.eigenvectors().transpose();

  brk_.assign(n, MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // [b_i, b_j] in frame coefficients.
      AlgVec bi{tag_, frame_.col(i)}, bj{tag_, frame_.col(j)};
      const AlgVec br = bracket(bi, bj);
      const VectorXd coeff = frame_inv_ * br.c;
      for (int k = 0; k < n; ++k) brk_[i](j, k) = coeff[k];
    }

  // Koszul in the g-orthonormal frame:
  // 2 g(nabla_{b_i} b_j, b_k) = c_ijk - c_jki + c_kij with c_ijk = g([b_i,b_j], b_k).
  // Frame coefficients are g-orthonormal, so c_ijk = brk_[i](j,k).
  gamma_.assign(n, MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        gamma_[i](j, k) = 0.5 * (brk_[i](j, k) - brk_[j](k, i) + brk_[k](i, j));
}

VectorXd LeftInvariantEngine::frame_bracket(const VectorXd& xi, const VectorXd& eta) const {
  const int n = xi.size();
  VectorXd out = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (xi[i] == 0.0) continue;
    out += xi[i] * (brk_[i].transpose() * eta);
  }
  return out;
}

VectorXd LeftInvariantEngine::nabla(const VectorXd& xi, const VectorXd& eta) const {
  const int n = xi.size();
  VectorXd out = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (xi[i] == 0.0) continue;
    out += xi[i] * (gamma_[i].transpose() * eta);
  }
  return out;
}

double LeftInvariantEngine::sec(const AlgVec& x, const AlgVec& y) const {
  if (x.tag != tag_ || y.tag != tag_)
    throw TagMismatchError("LeftInvariantEngine::sec: algebra tag mismatch");
  const VectorXd xf = frame_inv_ * x.c;
  const VectorXd yf = frame_inv_ * y.c;
  const double gram = xf.squaredNorm() * yf.squaredNorm() - std::pow(xf.dot(yf), 2);
  if (gram < default_tolerances().degenerate_gram)
    throw DegeneratePlaneError("sec_left_invariant: degenerate plane");
  // R(X,Y)Y = nabla_X nabla_Y Y - nabla_Y nabla_X Y - nabla_[X,Y] Y.
  const VectorXd ryy = nabla(yf, yf);
  const VectorXd rxy = nabla(xf, yf);
  const VectorXd brxy = frame_bracket(xf, yf);
  const VectorXd rterm = nabla(xf, ryy) - nabla(yf, rxy) - nabla(brxy, yf);
  return rterm.dot(xf) / gram;
}

double sec_left_invariant(const AlgVec& x, const AlgVec& y, const MetricEndo& phi) {
  // One engine per (tag, Phi matrix) — cheap enough to rebuild for ad-hoc
  // calls; hot paths hold a LeftInvariantEngine instance.
  LeftInvariantEngine eng(x.tag, phi);
  return eng.sec(x, y);
}

// ---------------------------------------------------------------------------

MetricField euclidean_field(int dim) {
  MetricField f;
  f.dim = dim;
  f.chart_radius = 10.0;
  f.g = [dim](const VectorXd&) { return MatrixXd::Identity(dim, dim); };
  return f;
}

MetricField round_sphere_field(int dim) {
  MetricField f;
  f.dim = dim;
  f.chart_radius = 1.2;
  f.g = [dim](const VectorXd& t) {
    const double r2 = t.squaredNorm();
    MatrixXd g = MatrixXd::Identity(dim, dim);
    if (r2 < 1e-28) return g;
    const double r = std::sqrt(r2);
    const double s = std::sin(r) / r;
    const MatrixXd radial = (t * t.transpose()) / r2;
    g = s * s * (MatrixXd::Identity(dim, dim) - radial) + radial;
    return g;
  };
  return f;
}

MetricField group_chart_field(Alg tag, const MetricEndo& phi, double radius) {
  const int n = alg_dim(tag);
  MetricField f;
  f.dim = n;
  f.chart_radius = radius;
  f.g = [tag, phi, n](const VectorXd& t) {
    AlgVec u{tag, t};
    MatrixXd zeta(n, n);
    for (int a = 0; a < n; ++a) zeta.col(a) = dexp_left(u, AlgVec::basis(tag, a)).c;
    return MatrixXd(zeta.transpose() * phi.m * zeta);
  };
  return f;
}

}  // namespace biorth

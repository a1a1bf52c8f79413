#include "biorth/wilking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "biorth/detrand.hpp"
#include "biorth/scan.hpp"

namespace biorth::wilking {

using Eigen::Matrix;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Points and the group action

double S2xS3Point::invariant_residual() const {
  double r = std::abs(p.norm() - 1.0);
  r = std::max(r, std::abs(v.norm() - 1.0));
  r = std::max(r, std::abs(inner(p, v)));  // Re(conj(p) v) = 0
  return r;
}

void S2xS3Point::validate(double tol) const {
  if (invariant_residual() > tol)
    throw DomainError("S2xS3Point: orthogonal-unit-quaternion invariant violated");
}

Matrix<double, 8, 1> S2xS3Point::ambient() const {
  Matrix<double, 8, 1> a;
  a << p.w, p.x, p.y, p.z, v.w, v.x, v.y, v.z;
  return a;
}

S2xS3Point S2xS3Point::from_ambient(const Matrix<double, 8, 1>& a) {
  return {Quat{a[0], a[1], a[2], a[3]}, Quat{a[4], a[5], a[6], a[7]}};
}

S2xS3Point act(const Quat& q1, const Quat& q2, const S2xS3Point& x) {
  if (std::abs(q1.norm() - 1.0) > 1e-9 || std::abs(q2.norm() - 1.0) > 1e-9)
    throw DomainError("act: non-unit quaternions");
  return {q1 * x.p * q2.conj(), q1 * x.v * q2.conj()};
}

S2xS3Point act(const GroupElem& g, const S2xS3Point& x) {
  if (g.tag != Group::Sp1xSp1) throw TagMismatchError("act: Sp1xSp1 element required");
  return act(g.q[0], g.q[1], x);
}

GroupElem transport_to(const S2xS3Point& x) {
  x.validate(1e-9);
  // Solve (q1, q2) * (1, i) = x: q1 = p q2 and q2 i conj(q2) = conj(p) v.
  const Quat w = x.p.conj() * x.v;  // unit imaginary
  Quat q2;
  const Quat cand = Quat::one() - w * Quat::i();
  if (cand.norm() > 1e-6) {
    q2 = cand.normalized();
  } else {
    q2 = Quat::j();  // w = -i: rotate about j
  }
  const Quat q1 = x.p * q2;
  return GroupElem::sp1_pair(q1, q2);
}

S2xS3Point coset_to_point(const DoubleCosetRep& rep) {
  return act(group_mul(group_inverse(rep.a), rep.b), S2xS3Point::base());
}

// ---------------------------------------------------------------------------
// Vertical space and pushforwards

namespace {

/// 3x3 rotation matrix of v -> q v conj(q) on Im(H).
Eigen::Matrix3d rotation_of(const Quat& q) {
  Eigen::Matrix3d r;
  const Quat qi = q * Quat::i() * q.conj();
  const Quat qj = q * Quat::j() * q.conj();
  const Quat qk = q * Quat::k() * q.conj();
  r.col(0) = qi.imag();
  r.col(1) = qj.imag();
  r.col(2) = qk.imag();
  return r;
}

/// Block-diagonal Ad matrix of a Sp(1) x Sp(1) element on sp(1) + sp(1).
Matrix<double, 6, 6> ad_block(const GroupElem& g) {
  Matrix<double, 6, 6> m = Matrix<double, 6, 6>::Zero();
  m.block<3, 3>(0, 0) = rotation_of(g.q[0]);
  m.block<3, 3>(3, 3) = rotation_of(g.q[1]);
  return m;
}

const Matrix<double, 12, 12>& metric_m12() {
  static const Matrix<double, 12, 12> m = [] {
    Matrix<double, 12, 12> out = Matrix<double, 12, 12>::Zero();
    const MetricEndo phi = wilking_phi();
    out.block<6, 6>(0, 0) = phi.m;
    out.block<6, 6>(6, 6) = phi.m;
    return out;
  }();
  return m;
}

Matrix<double, 6, 1> isotropy_generator() {
  // h = (i, i)/sqrt(2), the Lie algebra of the isotropy circle of (1, i).
  Matrix<double, 6, 1> h = Matrix<double, 6, 1>::Zero();
  h[0] = h[3] = 1.0 / std::sqrt(2.0);
  return h;
}

}  // namespace

Matrix<double, 12, 7> vertical_space(const DoubleCosetRep& rep) {
  Matrix<double, 12, 7> v = Matrix<double, 12, 7>::Zero();
  const Matrix<double, 6, 6> ada = ad_block(group_inverse(rep.a));
  const Matrix<double, 6, 6> adb = ad_block(group_inverse(rep.b));
  for (int i = 0; i < 6; ++i) {
    v.block<6, 1>(0, i) = ada.col(i);
    v.block<6, 1>(6, i) = adb.col(i);
  }
  v.block<6, 1>(6, 6) = isotropy_generator();
  Eigen::JacobiSVD<MatrixXd> svd(v);
  if (svd.singularValues()[6] < 1e-8)
    throw SolverFailure("vertical_space: rank-deficient lift (degenerate vertical basis)");
  return v;
}

Matrix<double, 8, 1> dpi_fd(const DoubleCosetRep& rep, const VectorXd& xi12, double step) {
  if (xi12.size() != 12) throw DomainError("dpi_fd: 12-dimensional tangent required");
  const AlgVec x1{Alg::sp1_plus_sp1, xi12.segment<6>(0)};
  const AlgVec x2{Alg::sp1_plus_sp1, xi12.segment<6>(6)};
  auto at = [&](double s) {
    DoubleCosetRep r;
    r.a = group_mul(rep.a, exp_elem(x1, s));
    r.b = group_mul(rep.b, exp_elem(x2, s));
    return coset_to_point(r).ambient();
  };
  return (at(step) - at(-step)) / (2 * step);
}

// ---------------------------------------------------------------------------
// Chart

WilkingChart::WilkingChart(const S2xS3Point& center, const GroupElem& lift_left)
    : center_(center), a0_(lift_left) {
  center_.validate(1e-9);
  if (lift_left.tag != Group::Sp1xSp1)
    throw TagMismatchError("WilkingChart: Sp1xSp1 lift required");
  b0_ = group_mul(lift_left, transport_to(center));
  // g0-orthonormal complement of the isotropy algebra h = span{(i,i)}:
  // (i,-i)/sqrt2, (j,0), (k,0), (0,j), (0,k).
  complement_ = Matrix<double, 6, 5>::Zero();
  const double s = 1.0 / std::sqrt(2.0);
  complement_(0, 0) = s;
  complement_(3, 0) = -s;
  complement_(1, 1) = 1;
  complement_(2, 2) = 1;
  complement_(4, 3) = 1;
  complement_(5, 4) = 1;
}

S2xS3Point WilkingChart::embed(const VectorXd& t) const {
  const AlgVec u{Alg::sp1_plus_sp1, complement_ * t};
  DoubleCosetRep rep{a0_, group_mul(b0_, exp_elem(u))};
  return coset_to_point(rep);
}

DoubleCosetRep WilkingChart::rep_at(const VectorXd& t) const {
  const AlgVec u{Alg::sp1_plus_sp1, complement_ * t};
  return {a0_, group_mul(b0_, exp_elem(u))};
}

MatrixXd WilkingChart::metric(const VectorXd& t) const {
  if (t.size() != 5) throw DomainError("WilkingChart::metric: 5 parameters required");
  const AlgVec u{Alg::sp1_plus_sp1, complement_ * t};

  // Left-trivialized coordinate fields of the section (second slot only).
  Matrix<double, 12, 5> z = Matrix<double, 12, 5>::Zero();
  for (int a = 0; a < 5; ++a) {
    const AlgVec ea{Alg::sp1_plus_sp1, complement_.col(a)};
    z.block<6, 1>(6, a) = dexp_left(u, ea).c;
  }

  const DoubleCosetRep rep{a0_, group_mul(b0_, exp_elem(u))};
  const Matrix<double, 12, 7> v = vertical_space(rep);

  const Matrix<double, 12, 12>& m = metric_m12();
  const Matrix<double, 12, 7> mv = m * v;
  const Matrix<double, 7, 7> s = v.transpose() * mv;
  const Eigen::LLT<Matrix<double, 7, 7>> llt(s);
  if (llt.info() != Eigen::Success)
    throw SolverFailure("WilkingChart::metric: vertical Gram solve failed");

  Matrix<double, 12, 5> h;
  for (int a = 0; a < 5; ++a) {
    const Matrix<double, 7, 1> coef = llt.solve(mv.transpose() * z.col(a));
    h.col(a) = z.col(a) - v * coef;
  }
  Matrix<double, 5, 5> g = h.transpose() * (m * h);
  g = 0.5 * (g + g.transpose());
  return g;
}

VectorXd WilkingChart::horizontal_lift(const VectorXd& t, const VectorXd& w) const {
  const AlgVec u{Alg::sp1_plus_sp1, complement_ * t};
  Matrix<double, 12, 1> z = Matrix<double, 12, 1>::Zero();
  for (int a = 0; a < 5; ++a) {
    const AlgVec ea{Alg::sp1_plus_sp1, complement_.col(a)};
    z.segment<6>(6) += w[a] * dexp_left(u, ea).c;
  }
  const DoubleCosetRep rep{a0_, group_mul(b0_, exp_elem(u))};
  const Matrix<double, 12, 7> v = vertical_space(rep);
  const Matrix<double, 12, 12>& m = metric_m12();
  const Matrix<double, 12, 7> mv = m * v;
  const Eigen::LLT<Matrix<double, 7, 7>> llt(v.transpose() * mv);
  return z - v * llt.solve(mv.transpose() * z);
}

MetricField WilkingChart::field(double fd_step, double radius) const {
  MetricField f;
  f.dim = 5;
  f.fd_step = fd_step;
  f.chart_radius = radius;
  const WilkingChart chart = *this;  // value capture keeps the closure self-contained
  f.g = [chart](const VectorXd& t) { return chart.metric(t); };
  return f;
}

Matrix<double, 8, 5> WilkingChart::ambient_jacobian(const VectorXd& t, double step) const {
  Matrix<double, 8, 5> j;
  for (int a = 0; a < 5; ++a) {
    VectorXd tp = t, tm = t;
    tp[a] += step;
    tm[a] -= step;
    j.col(a) = (embed(tp).ambient() - embed(tm).ambient()) / (2 * step);
  }
  return j;
}

VectorXd WilkingChart::coords_of_ambient(const Matrix<double, 8, 1>& w) const {
  if (!jac0_) jac0_ = ambient_jacobian(VectorXd::Zero(5));
  const Matrix<double, 8, 5>& j = *jac0_;
  return (j.transpose() * j).ldlt().solve(j.transpose() * w);
}

VectorXd WilkingChart::invert(const S2xS3Point& y, double tol, int max_iter) const {
  VectorXd t = VectorXd::Zero(5);
  const Matrix<double, 8, 1> target = y.ambient();
  double best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const Matrix<double, 8, 1> r = embed(t).ambient() - target;
    const double rn = r.norm();
    if (rn < tol) return t;
    if (rn > 4.0 || !(rn < best * 1.5))
      throw SolverFailure("WilkingChart::invert: Gauss-Newton diverged (point outside chart?)");
    best = std::min(best, rn);
    const Matrix<double, 8, 5> j = ambient_jacobian(t);
    const VectorXd dt = (j.transpose() * j).ldlt().solve(j.transpose() * r);
    t -= dt;
    if (dt.norm() < 1e-15) return t;
  }
  const double rn = (embed(t).ambient() - target).norm();
  if (rn < 1e-9) return t;
  std::ostringstream os;
  os << "WilkingChart::invert: no convergence, residual " << rn;
  throw SolverFailure(os.str());
}

double sec_gW(const S2xS3Point& x, const VectorXd& u, const VectorXd& v) {
  const WilkingChart chart(x);
  const RiemannTensor rt = riemann_fd(chart.field(), VectorXd::Zero(5));
  return sec_from_riemann(rt, u, v);
}

// ---------------------------------------------------------------------------
// Flat locus

MinPlaneResult min_plane_sec(const RiemannTensor& rt, const FlatScanConfig& cfg,
                             bool with_second) {
  const MatrixXd gram = rt.g;
  const auto lattice = plane_lattice(5, gram, cfg.plane_grid, cfg.seed);
  auto sec = [&](const TwoPlane& p) { return rt.quad(p.u, p.v); };  // orthonormal pairs

  const auto grid_seeds = scan::k_smallest(
      std::int64_t(lattice.size()), [&](std::int64_t i) { return sec(lattice[size_t(i)]); },
      cfg.plane_refine, scan::Exec::serial);

  // Refinement seeds: best lattice cells plus the curvature-operator
  // eigenplanes (the latter are essentially exact at flat planes).
  std::vector<TwoPlane> starts;
  for (const auto& s : grid_seeds) starts.push_back(lattice[size_t(s.index)]);
  for (const auto& [u, v] : curvature_eigenplane_seeds(rt, 2)) {
    try {
      starts.push_back(make_plane(u, v, gram));
    } catch (const DegeneratePlaneError&) {
    }
  }

  MinPlaneResult res;
  double best = std::numeric_limits<double>::infinity();
  TwoPlane best_plane = starts.front();
  for (const auto& p0 : starts) {
    if (sec(p0) < best) {
      best = sec(p0);
      best_plane = p0;
    }
    auto fn = [&](const VectorXd& a) {
      try {
        const TwoPlane p = make_plane(p0.u + a.segment<5>(0), p0.v + a.segment<5>(5), gram);
        return sec(p);
      } catch (const DegeneratePlaneError&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    const auto nm = nelder_mead(fn, VectorXd::Zero(10), 0.08, cfg.refine_iters, 1e-15);
    if (nm.value < best) {
      best = nm.value;
      best_plane = make_plane(p0.u + nm.x.segment<5>(0), p0.v + nm.x.segment<5>(5), gram);
    }
  }
  res.value = best;
  res.plane = best_plane;

  if (with_second) res.second_value = family_walk_sec(rt, best_plane, cfg);
  return res;
}

double family_walk_sec(const RiemannTensor& rt, const TwoPlane& plane,
                       const FlatScanConfig& cfg) {
  // Continue the (near-)flat family through the plane: walk the Grassmannian
  // along the null direction of the plane Hessian of sec and take the minimum
  // over the annulus [family_delta, family_delta_hi]. On the S^1-family
  // spheres this is ~0; at isolated flats (the orthogonal crossing pairs and
  // the generic hypersurface points) the walked curve climbs at least
  // quartically, keeping the marker strictly positive.
  const MatrixXd gram = rt.g;
  auto sec = [&](const TwoPlane& p) { return rt.quad(p.u, p.v); };
  const MatrixXd comp = complement_basis(plane, gram);
  auto plane_at = [&](const VectorXd& a) {
    VectorXd du = VectorXd::Zero(5), dv = VectorXd::Zero(5);
    for (int k = 0; k < 3; ++k) {
      du += a[k] * comp.col(k);
      dv += a[3 + k] * comp.col(k);
    }
    return make_plane(plane.u + du, plane.v + dv, gram);
  };
  const double h = 1e-3;
  MatrixXd hess(6, 6);
  const double f0 = sec(plane);
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j) {
      VectorXd a = VectorXd::Zero(6);
      double val = 0;
      if (i == j) {
        a[i] = h;
        const double fp = sec(plane_at(a));
        a[i] = -h;
        const double fm = sec(plane_at(a));
        val = (fp - 2 * f0 + fm) / (h * h);
      } else {
        a[i] = h;
        a[j] = h;
        const double fpp = sec(plane_at(a));
        a[j] = -h;
        const double fpm = sec(plane_at(a));
        a[i] = -h;
        const double fmm = sec(plane_at(a));
        a[j] = h;
        const double fmp = sec(plane_at(a));
        val = (fpp - fpm - fmp + fmm) / (4 * h * h);
      }
      hess(i, j) = hess(j, i) = val;
    }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(hess);
  const VectorXd dir = es.eigenvectors().col(0);

  double second = std::numeric_limits<double>::infinity();
  double best_s = 0;
  for (int k = -28; k <= 28; ++k) {
    if (k == 0) continue;
    const double s = 0.05 * k;
    TwoPlane p;
    try {
      p = plane_at(s * dir);
    } catch (const DegeneratePlaneError&) {
      continue;
    }
    const double d = plane_distance(p, plane, gram);
    if (d < cfg.family_delta || d > cfg.family_delta_hi) continue;
    const double v = sec(p);
    if (v < second) {
      second = v;
      best_s = s;
    }
  }
  if (!std::isfinite(second)) return 1.0;  // curve never entered the annulus
  // 1-D polish over the walk parameter.
  auto walk_val = [&](const VectorXd& sv) {
    try {
      const TwoPlane p = plane_at(sv[0] * dir);
      const double d = plane_distance(p, plane, gram);
      if (d < cfg.family_delta || d > cfg.family_delta_hi)
        return std::numeric_limits<double>::infinity();
      return sec(p);
    } catch (const DegeneratePlaneError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  VectorXd s0(1);
  s0[0] = best_s;
  const auto nm = nelder_mead(walk_val, s0, 0.02, 60, 1e-15);
  return std::min(second, nm.value);
}

int plane_hessian_null(const RiemannTensor& rt, const TwoPlane& plane) {
  // Null count of the plane Hessian of sec at a flat plane: the dimension
  // marker of a flat family through it.
  const MatrixXd gram = rt.g;
  auto sec = [&](const TwoPlane& p) { return rt.quad(p.u, p.v); };
  const MatrixXd comp = complement_basis(plane, gram);
  auto plane_at = [&](const VectorXd& a) {
    VectorXd du = VectorXd::Zero(5), dv = VectorXd::Zero(5);
    for (int k = 0; k < 3; ++k) {
      du += a[k] * comp.col(k);
      dv += a[3 + k] * comp.col(k);
    }
    return make_plane(plane.u + du, plane.v + dv, gram);
  };
  const double h = 1e-3;
  Eigen::MatrixXd hess(6, 6);
  const double f0 = sec(plane);
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j) {
      VectorXd a = VectorXd::Zero(6);
      double val = 0;
      if (i == j) {
        a[i] = h;
        const double fp = sec(plane_at(a));
        a[i] = -h;
        const double fm = sec(plane_at(a));
        val = (fp - 2 * f0 + fm) / (h * h);
      } else {
        a[i] = h;
        a[j] = h;
        const double fpp = sec(plane_at(a));
        a[j] = -h;
        const double fpm = sec(plane_at(a));
        a[i] = -h;
        const double fmm = sec(plane_at(a));
        a[j] = h;
        const double fmp = sec(plane_at(a));
        val = (fpp - fpm - fmp + fmm) / (4 * h * h);
      }
      hess(i, j) = hess(j, i) = val;
    }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(hess);
  const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-6);
  int null_count = 0;
  for (int i = 0; i < 6; ++i)
    if (es.eigenvalues()[i] < 1e-2 * scale) ++null_count;
  return null_count;
}

std::vector<S2xS3Point> sample_points(int count, std::uint64_t seed) {
  DetRand rng(seed);
  std::vector<S2xS3Point> out;
  out.reserve(count);
  while (int(out.size()) < count) {
    Quat q1{rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian()};
    Quat q2{rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian()};
    if (q1.norm() < 0.1 || q2.norm() < 0.1) continue;
    out.push_back(act(q1.normalized(), q2.normalized(), S2xS3Point::base()));
  }
  return out;
}

namespace {

struct DescentResult {
  S2xS3Point x;
  double msec = 0, second = 0;
  bool sphere_candidate = false;
  bool flat = false;
};

double flat_objective(const RiemannTensor& rt, const FlatScanConfig& cfg, double* msec_out,
                      double* second_out) {
  const MinPlaneResult mp = min_plane_sec(rt, cfg, true);
  if (msec_out) *msec_out = mp.value;
  if (second_out) *second_out = mp.second_value;
  return std::max(mp.value, 0.0) + std::max(mp.second_value, 0.0);
}

DescentResult descend_to_sphere(const S2xS3Point& start, const FlatScanConfig& cfg) {
  const FlatScanConfig scan = cfg.scan_mode();
  const double inf = std::numeric_limits<double>::infinity();
  S2xS3Point cur = start;

  // Stage 1: reach the flat locus (minimize min-plane sec alone).
  for (int round = 0; round < 3; ++round) {
    const WilkingChart chart(cur);
    const MetricField f = chart.field();
    auto obj = [&](const VectorXd& t) {
      if (t.lpNorm<Eigen::Infinity>() > 0.3) return inf;
      return min_plane_sec(riemann_fd_quick(f, t), scan, false).value;
    };
    const auto nm = nelder_mead(obj, VectorXd::Zero(5), 0.15, 60, 1e-10);
    cur = chart.embed(nm.x);
    if (nm.value < 0.5 * cfg.flat_tol) break;
  }

  // Stage 2: march along the flat locus towards the spheres. The second-plane
  // value is not monotone along the locus (there is a hump between the
  // crossing region and the spheres), so each round probes long-range steps
  // in all signed chart directions before a local correction back onto the
  // locus.
  auto stage2 = [&](const MetricField& f, const VectorXd& t) {
    double ms = 0, sc = 0;
    flat_objective(riemann_fd_quick(f, t), scan, &ms, &sc);
    return std::max(sc, 0.0) + 100.0 * std::max(ms, 0.0);
  };
  const bool trace = std::getenv("BIORTH_TRACE_DESCENT") != nullptr;
  for (int round = 0; round < cfg.descent_rounds; ++round) {
    const WilkingChart chart(cur);
    const MetricField wide = chart.field(1e-3, 0.85);
    double base = stage2(wide, VectorXd::Zero(5));
    if (trace)
      std::fprintf(stderr, "march r%d: rp=%+.3f rv=%+.3f base=%.3e\n", round, cur.p.w, cur.v.w,
                   base);
    if (base < 0.5 * cfg.flat_tol) break;

    // Tangent directions of the locus: null space of the point Hessian of
    // min-plane sec (one transverse direction, four flat ones).
    auto msec_at = [&](const VectorXd& t) {
      return min_plane_sec(riemann_fd_quick(wide, t), scan, false).value;
    };
    const double hh = 0.02;
    MatrixXd hess(5, 5);
    const double f0 = msec_at(VectorXd::Zero(5));
    for (int i = 0; i < 5; ++i)
      for (int j = i; j < 5; ++j) {
        double val = 0;
        if (i == j) {
          val = (msec_at(hh * VectorXd::Unit(5, i)) - 2 * f0 +
                 msec_at(-hh * VectorXd::Unit(5, i))) /
                (hh * hh);
        } else {
          const VectorXd ei = VectorXd::Unit(5, i), ej = VectorXd::Unit(5, j);
          val = (msec_at(hh * (ei + ej)) - msec_at(hh * (ei - ej)) -
                 msec_at(hh * (ej - ei)) + msec_at(-hh * (ei + ej))) /
                (4 * hh * hh);
        }
        hess(i, j) = hess(j, i) = val;
      }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(hess);

    double best = base;
    VectorXd best_t = VectorXd::Zero(5);
    for (int k = 0; k < 4; ++k) {  // four smallest-eigenvalue directions
      const VectorXd dir = es.eigenvectors().col(k);
      for (double step : {0.25, -0.25, 0.5, -0.5, 0.75, -0.75}) {
        const VectorXd t = step * dir;
        const double val = stage2(wide, t);
        if (val < best) {
          best = val;
          best_t = t;
        }
      }
    }
    if (best_t.norm() == 0.0) {
      // No long-range probe improved: polish in place and stop marching.
      auto obj = [&](const VectorXd& t) {
        if (t.lpNorm<Eigen::Infinity>() > 0.35) return inf;
        return stage2(wide, t);
      };
      const auto nm = nelder_mead(obj, VectorXd::Zero(5), 0.12, 80, 1e-12);
      cur = chart.embed(nm.x);
      break;
    }
    // Correct the step back onto the locus around the probe target.
    auto obj = [&](const VectorXd& t) {
      if ((t - best_t).lpNorm<Eigen::Infinity>() > 0.12) return inf;
      return stage2(wide, t);
    };
    const auto nm = nelder_mead(obj, best_t, 0.05, 50, 1e-12);
    cur = chart.embed(nm.value < best ? nm.x : best_t);
  }
  // Endgame: polish both flatness markers with the full-budget plane search
  // (the scan-mode search carries too much jitter for the last two decades).
  for (int round = 0; round < 2; ++round) {
    const WilkingChart chart(cur);
    const MetricField f = chart.field();
    auto obj = [&](const VectorXd& t) {
      if (t.lpNorm<Eigen::Infinity>() > 0.3) return inf;
      return flat_objective(riemann_fd_quick(f, t), cfg, nullptr, nullptr);
    };
    const auto nm = nelder_mead(obj, VectorXd::Zero(5), round == 0 ? 0.12 : 0.03, 90, 1e-13);
    cur = chart.embed(nm.x);
    if (nm.value < 0.25 * cfg.flat_tol) break;
  }

  // Final validated evaluation at the converged point.
  const WilkingChart chart(cur);
  const RiemannTensor rt = riemann_fd(chart.field(), VectorXd::Zero(5));
  DescentResult r;
  r.x = cur;
  flat_objective(rt, cfg, &r.msec, &r.second);
  r.flat = r.msec <= cfg.flat_tol;
  r.sphere_candidate = r.flat && r.second <= cfg.flat_tol;
  return r;
}

double ambient_dist(const S2xS3Point& a, const S2xS3Point& b) {
  return (a.ambient() - b.ambient()).norm();
}

}  // namespace

std::vector<int> FlatLocusAtlas::cluster_sizes() const {
  std::map<int, int> count;
  for (const auto& p : points)
    if (p.cluster >= 0) ++count[p.cluster];
  std::vector<int> sizes;
  for (const auto& [id, n] : count) sizes.push_back(n);
  std::sort(sizes.rbegin(), sizes.rend());
  return sizes;
}

FlatLocusAtlas find_flat_locus(const FlatScanConfig& cfg) {
  FlatLocusAtlas atlas;
  atlas.config = cfg;
  atlas.sec_floor = std::numeric_limits<double>::infinity();

  // Phase 0: cheap global pre-scan. The curvature-operator eigenplanes give a
  // near-exact flatness proxy and a family proxy without any refinement, so a
  // large sample can be scored and only the most sphere-like points descend.
  const int presample = cfg.descent_seeds * 50;
  const auto pool = sample_points(presample, cfg.seed);
  std::vector<double> score(pool.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
  for (std::int64_t i = 0; i < std::int64_t(pool.size()); ++i) {
    const WilkingChart chart(pool[size_t(i)]);
    const RiemannTensor rt = riemann_fd_quick(chart.field(), Eigen::VectorXd::Zero(5));
    const auto cands = curvature_eigenplane_seeds(rt, 4);
    double best = std::numeric_limits<double>::infinity();
    TwoPlane bp;
    for (const auto& [u, v] : cands) {
      try {
        const TwoPlane p = make_plane(u, v, rt.g);
        const double s = rt.quad(p.u, p.v);
        if (s < best) {
          best = s;
          bp = p;
        }
      } catch (const DegeneratePlaneError&) {
      }
    }
    double second = std::numeric_limits<double>::infinity();
    for (const auto& [u, v] : cands) {
      try {
        const TwoPlane p = make_plane(u, v, rt.g);
        const double d = plane_distance(p, bp, rt.g);
        if (d >= cfg.family_delta && d <= cfg.family_delta_hi)
          second = std::min(second, rt.quad(p.u, p.v));
      } catch (const DegeneratePlaneError&) {
      }
    }
    if (!std::isfinite(second)) second = 1.0;
    score[size_t(i)] = std::max(best, 0.0) + std::max(second, 0.0);
  }
  const auto chosen = scan::k_smallest(
      std::int64_t(pool.size()), [&](std::int64_t i) { return score[size_t(i)]; },
      cfg.descent_seeds, scan::Exec::serial);

  // Phase 1: Nelder-Mead descents from the pre-scan winners.
  std::vector<S2xS3Point> seeds;
  for (const auto& c : chosen) seeds.push_back(pool[size_t(c.index)]);
  std::vector<DescentResult> descents(seeds.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (std::int64_t i = 0; i < std::int64_t(seeds.size()); ++i)
    descents[size_t(i)] = descend_to_sphere(seeds[size_t(i)], cfg);

  std::vector<S2xS3Point> cloud;  // sphere points
  auto try_accept = [&](const S2xS3Point& x) {
    for (const auto& c : cloud)
      if (ambient_dist(c, x) < 0.55 * cfg.bfs_spacing) return false;
    cloud.push_back(x);
    return true;
  };

  for (const auto& d : descents) {
    atlas.sec_floor = std::min(atlas.sec_floor, d.msec);
    if (d.sphere_candidate)
      try_accept(d.x);
    else if (d.flat)
      atlas.z_points.push_back(d.x);
  }

  // Phase 2: densify each sphere component by tangent-step BFS with local
  // correction solves (restricted Nelder-Mead around each proposal).
  // Acceptance here uses quick-engine values at half tolerance; phase 3
  // revalidates everything with the full oracle. Components are grown with
  // separate budgets so an early-seeded sphere cannot starve the others.
  const FlatScanConfig scan = cfg.scan_mode();
  {
    // Group the phase-1 candidates into provisional components.
    std::vector<int> group(cloud.size(), -1);
    int ngroups = 0;
    for (size_t i = 0; i < cloud.size(); ++i) {
      if (group[i] >= 0) continue;
      group[i] = ngroups++;
      for (size_t j = i + 1; j < cloud.size(); ++j)
        if (group[j] < 0 && ambient_dist(cloud[i], cloud[j]) < 1.0) group[j] = group[i];
    }
    std::vector<int> budget(ngroups, cfg.bfs_max_points);
    std::vector<int> cloud_group(group);
    for (int g = 0; g < ngroups; ++g) {
      int members = 0;
      for (int gi : cloud_group)
        if (gi == g) ++members;
      budget[size_t(g)] -= members;
    }

    size_t frontier_begin = 0;
    while (frontier_begin < cloud.size()) {
      const size_t frontier_end = cloud.size();
      struct Job {
        size_t src;
        VectorXd dir;
        S2xS3Point target;
      };
      std::vector<Job> jobs;
      for (size_t i = frontier_begin; i < frontier_end; ++i) {
        if (budget[size_t(cloud_group[i])] <= 0) continue;
        // Tangent estimate from nearby cloud points when available; otherwise
        // probe all five chart directions.
        std::vector<VectorXd> dirs;
        const WilkingChart chart(cloud[i]);
        std::vector<VectorXd> near;
        for (size_t j = 0; j < cloud.size(); ++j)
          if (j != i && ambient_dist(cloud[j], cloud[i]) < 2.5 * cfg.bfs_spacing)
            near.push_back(chart.coords_of_ambient(cloud[j].ambient() - cloud[i].ambient()));
        if (near.size() >= 3) {
          MatrixXd nm(5, near.size());
          for (size_t j = 0; j < near.size(); ++j) nm.col(j) = near[j].normalized();
          Eigen::JacobiSVD<MatrixXd> svd(nm, Eigen::ComputeFullU);
          for (int k = 0; k < 2; ++k) {
            dirs.push_back(svd.matrixU().col(k));
            dirs.push_back(-svd.matrixU().col(k));
          }
          // Diagonal fills to avoid axis-locked growth.
          dirs.push_back((svd.matrixU().col(0) + svd.matrixU().col(1)).normalized());
          dirs.push_back((svd.matrixU().col(0) - svd.matrixU().col(1)).normalized());
        } else {
          for (int k = 0; k < 5; ++k) {
            dirs.push_back(VectorXd::Unit(5, k));
            dirs.push_back(-VectorXd::Unit(5, k));
          }
        }
        for (const auto& d : dirs) {
          // Cheap pre-filter: skip proposals whose raw target is already
          // covered, before paying for a correction solve.
          const S2xS3Point target = chart.embed(cfg.bfs_spacing * d);
          bool covered = false;
          for (const auto& c : cloud)
            if (ambient_dist(c, target) < 0.55 * cfg.bfs_spacing) {
              covered = true;
              break;
            }
          if (!covered) jobs.push_back({i, d, target});
        }
      }
      if (jobs.empty()) break;

      struct Proposal {
        S2xS3Point x;
        bool ok = false;
      };
      std::vector<Proposal> props(jobs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
      for (std::int64_t j = 0; j < std::int64_t(jobs.size()); ++j) {
        const WilkingChart chart(cloud[jobs[size_t(j)].src]);
        const VectorXd t0 = cfg.bfs_spacing * jobs[size_t(j)].dir;
        const MetricField f = chart.field(1e-3, 0.4 + cfg.bfs_spacing);
        auto obj = [&](const VectorXd& t) {
          if ((t - t0).lpNorm<Eigen::Infinity>() > 0.6 * cfg.bfs_spacing)
            return std::numeric_limits<double>::infinity();
          return flat_objective(riemann_fd_quick(f, t), scan, nullptr, nullptr);
        };
        const auto nm = nelder_mead(obj, t0, 0.25 * cfg.bfs_spacing, 40, 1e-12);
        Proposal p;
        p.x = chart.embed(nm.x);
        double ms = 0, sc = 0;
        flat_objective(riemann_fd_quick(WilkingChart(p.x).field(), VectorXd::Zero(5)), scan,
                       &ms, &sc);
        p.ok = ms <= 0.5 * cfg.flat_tol && sc <= 0.5 * cfg.flat_tol;
        props[size_t(j)] = p;
      }
      for (size_t j = 0; j < props.size(); ++j) {
        const int g = cloud_group[jobs[j].src];
        if (budget[size_t(g)] <= 0) continue;
        if (props[j].ok && try_accept(props[j].x)) {
          cloud_group.push_back(g);
          --budget[size_t(g)];
        }
      }
      frontier_begin = frontier_end;
    }
  }

  // Phase 3: revalidate with the full Richardson oracle and drop failures.
  {
    std::vector<char> keep(cloud.size(), 0);
    std::vector<double> v_msec(cloud.size(), 0), v_second(cloud.size(), 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (std::int64_t i = 0; i < std::int64_t(cloud.size()); ++i) {
      const WilkingChart chart(cloud[size_t(i)]);
      const RiemannTensor rt = riemann_fd(chart.field(), VectorXd::Zero(5));
      double ms = 0, sc = 0;
      flat_objective(rt, cfg, &ms, &sc);
      v_msec[size_t(i)] = ms;
      v_second[size_t(i)] = sc;
      keep[size_t(i)] = ms <= cfg.flat_tol && sc <= cfg.flat_tol;
    }
    std::vector<S2xS3Point> kept;
    std::vector<double> kept_msec, kept_second;
    for (size_t i = 0; i < cloud.size(); ++i)
      if (keep[i]) {
        kept.push_back(cloud[i]);
        kept_msec.push_back(v_msec[i]);
        kept_second.push_back(v_second[i]);
      }
    cloud.swap(kept);
    atlas.points.resize(cloud.size());
    for (size_t i = 0; i < cloud.size(); ++i) {
      atlas.points[i].x = cloud[i];
      atlas.points[i].min_sec = kept_msec[i];
      atlas.points[i].second_sec = kept_second[i];
    }
  }

  // Phase 4: cluster by ambient linking distance (union-find).
  std::vector<int> parent(cloud.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (size_t i = 0; i < cloud.size(); ++i)
    for (size_t j = i + 1; j < cloud.size(); ++j)
      if (ambient_dist(cloud[i], cloud[j]) < cfg.cluster_link) parent[find(int(i))] = find(int(j));

  std::map<int, int> root_to_id;
  std::map<int, int> root_count;
  for (size_t i = 0; i < cloud.size(); ++i) ++root_count[find(int(i))];
  for (const auto& [root, n] : root_count)
    if (n >= cfg.min_cluster) root_to_id.emplace(root, int(root_to_id.size()));
  atlas.cluster_count = int(root_to_id.size());
  atlas.verified_four = atlas.cluster_count == 4;

  // Phase 5: plane-Hessian family marker and tangent frames from neighbor PCA.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (std::int64_t ii = 0; ii < std::int64_t(cloud.size()); ++ii) {
    const size_t i = size_t(ii);
    AtlasPoint& ap = atlas.points[i];
    const WilkingChart chart(cloud[i]);
    const RiemannTensor rt = riemann_fd(chart.field(), VectorXd::Zero(5));
    const MinPlaneResult mp = min_plane_sec(rt, cfg, false);
    ap.hessian_null = plane_hessian_null(rt, mp.plane);
    std::vector<Matrix<double, 8, 1>> near;
    for (size_t j = 0; j < cloud.size(); ++j)
      if (j != i && ambient_dist(cloud[j], cloud[i]) < 2.5 * cfg.bfs_spacing)
        near.push_back(cloud[j].ambient() - cloud[i].ambient());
    if (near.size() >= 2) {
      MatrixXd nm(8, near.size());
      for (size_t j = 0; j < near.size(); ++j) nm.col(j) = near[j];
      Eigen::JacobiSVD<MatrixXd> svd(nm, Eigen::ComputeFullU);
      ap.tangent.col(0) = svd.matrixU().col(0);
      ap.tangent.col(1) = svd.matrixU().col(1);
    } else {
      ap.tangent.setZero();
    }
  }
  for (size_t i = 0; i < cloud.size(); ++i) {
    const int root = find(int(i));
    atlas.points[i].cluster = root_to_id.count(root) ? root_to_id.at(root) : -1;
  }
  return atlas;
}

// ---------------------------------------------------------------------------
// Atlas serialization

std::string FlatLocusAtlas::to_json() const {
  json j;
  j["schema_version"] = 1;
  j["config"] = {{"descent_seeds", config.descent_seeds},
                 {"descent_rounds", config.descent_rounds},
                 {"plane_grid", config.plane_grid},
                 {"plane_refine", config.plane_refine},
                 {"flat_tol", config.flat_tol},
                 {"family_delta", config.family_delta},
                 {"bfs_spacing", config.bfs_spacing},
                 {"bfs_max_points", config.bfs_max_points},
                 {"cluster_link", config.cluster_link},
                 {"min_cluster", config.min_cluster},
                 {"seed", config.seed}};
  j["cluster_count"] = cluster_count;
  j["verified_four"] = verified_four;
  j["sec_floor"] = sec_floor;
  j["points"] = json::array();
  for (const auto& p : points) {
    json q;
    const auto a = p.x.ambient();
    q["x"] = std::vector<double>(a.data(), a.data() + 8);
    q["min_sec"] = p.min_sec;
    q["second_sec"] = p.second_sec;
    q["hessian_null"] = p.hessian_null;
    q["cluster"] = p.cluster;
    std::vector<double> tang(16);
    Eigen::Map<Matrix<double, 8, 2>>(tang.data()) = p.tangent;
    q["tangent"] = tang;
    j["points"].push_back(std::move(q));
  }
  j["z_points"] = json::array();
  for (const auto& z : z_points) {
    const auto a = z.ambient();
    j["z_points"].push_back(std::vector<double>(a.data(), a.data() + 8));
  }
  return j.dump(1);
}

FlatLocusAtlas FlatLocusAtlas::from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("schema_version").get<int>() != 1)
    throw ConfigError("FlatLocusAtlas: unsupported schema version");
  FlatLocusAtlas atlas;
  const auto& c = j.at("config");
  atlas.config.descent_seeds = c.at("descent_seeds").get<int>();
  atlas.config.descent_rounds = c.at("descent_rounds").get<int>();
  atlas.config.plane_grid = c.at("plane_grid").get<int>();
  atlas.config.plane_refine = c.at("plane_refine").get<int>();
  atlas.config.flat_tol = c.at("flat_tol").get<double>();
  atlas.config.family_delta = c.at("family_delta").get<double>();
  atlas.config.bfs_spacing = c.at("bfs_spacing").get<double>();
  atlas.config.bfs_max_points = c.at("bfs_max_points").get<int>();
  atlas.config.cluster_link = c.at("cluster_link").get<double>();
  atlas.config.min_cluster = c.at("min_cluster").get<int>();
  atlas.config.seed = c.at("seed").get<std::uint64_t>();
  atlas.cluster_count = j.at("cluster_count").get<int>();
  atlas.verified_four = j.at("verified_four").get<bool>();
  atlas.sec_floor = j.at("sec_floor").get<double>();
  for (const auto& q : j.at("points")) {
    AtlasPoint p;
    const auto xv = q.at("x").get<std::vector<double>>();
    Matrix<double, 8, 1> a;
    for (int i = 0; i < 8; ++i) a[i] = xv[size_t(i)];
    p.x = S2xS3Point::from_ambient(a);
    p.min_sec = q.at("min_sec").get<double>();
    p.second_sec = q.at("second_sec").get<double>();
    p.hessian_null = q.at("hessian_null").get<int>();
    p.cluster = q.at("cluster").get<int>();
    const auto tv = q.at("tangent").get<std::vector<double>>();
    p.tangent = Eigen::Map<const Matrix<double, 8, 2>>(tv.data());
    atlas.points.push_back(std::move(p));
  }
  for (const auto& zv : j.at("z_points")) {
    const auto xv = zv.get<std::vector<double>>();
    Matrix<double, 8, 1> a;
    for (int i = 0; i < 8; ++i) a[i] = xv[size_t(i)];
    atlas.z_points.push_back(S2xS3Point::from_ambient(a));
  }
  return atlas;
}

void FlatLocusAtlas::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("FlatLocusAtlas::save: cannot open " + path);
  out << to_json() << "\n";
}

FlatLocusAtlas FlatLocusAtlas::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("FlatLocusAtlas::load: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace biorth::wilking

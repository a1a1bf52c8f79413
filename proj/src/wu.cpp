#include "biorth/wu.hpp"

#include <cmath>
#include <deque>
#include <sstream>
#include <vector>

#include "biorth/detrand.hpp"
#include "biorth/scan.hpp"

namespace biorth::wu {

using Eigen::MatrixXd;
using Eigen::VectorXd;

HorizontalPlane make_horizontal_plane(const AlgVec& x, const AlgVec& y, double tol) {
  if (x.tag != Alg::su3 || y.tag != Alg::su3)
    throw TagMismatchError("make_horizontal_plane: su3 vectors required");
  for (const AlgVec* v : {&x, &y}) {
    const auto [vert, hor] = cartan_split(*v);
    if (vert.c.cwiseAbs().maxCoeff() > tol)
      throw DomainError("make_horizontal_plane: non-horizontal input");
    (void)hor;
  }
  if (std::abs(inner_g0(x, x) - 1) > tol || std::abs(inner_g0(y, y) - 1) > tol ||
      std::abs(inner_g0(x, y)) > tol)
    throw DomainError("make_horizontal_plane: pair is not orthonormal");
  return {x, y};
}

double sec_wu_raw(const AlgVec& x, const AlgVec& y) {
  const double xx = inner_g0(x, x), yy = inner_g0(y, y), xy = inner_g0(x, y);
  const double gram = xx * yy - xy * xy;
  if (gram < default_tolerances().degenerate_gram)
    throw DegeneratePlaneError("sec_wu: degenerate plane");
  const AlgVec b = bracket(x, y);
  return inner_g0(b, b) / gram;
}

double sec_wu(const HorizontalPlane& p) { return sec_wu_raw(p.x, p.y); }

AlgVec horizontal_from_coeffs(const VectorXd& c5) {
  if (c5.size() != 5) throw DomainError("horizontal_from_coeffs: need 5 coefficients");
  AlgVec v = AlgVec::zero(Alg::su3);
  const auto& idx = so3_perp_indices();
  for (int i = 0; i < 5; ++i) v.c[idx[i]] = c5[i];
  return v;
}

VectorXd coeffs_from_horizontal(const AlgVec& x) {
  if (x.tag != Alg::su3) throw TagMismatchError("coeffs_from_horizontal: su3 required");
  VectorXd c(5);
  const auto& idx = so3_perp_indices();
  for (int i = 0; i < 5; ++i) c[i] = x.c[idx[i]];
  return c;
}

HorizontalPlane flat_plane_from_euler(double x, double y, double z) {
  const GroupElem r = euler_rotation(x, y, z);
  const AlgVec l3 = AlgVec::basis(Alg::su3, 2), l8 = AlgVec::basis(Alg::su3, 7);
  return {adjoint(r, l3), adjoint(r, l8)};
}

double TraceResidual::mismatch() const {
  return std::max(std::max(std::abs(e11 - d11), std::abs(e18 - d18)),
                  std::max(std::abs(e81 - d81), std::abs(e88 - d88)));
}

double TraceResidual::max_abs() const {
  return std::max(std::max(std::abs(e11), std::abs(e18)),
                  std::max(std::abs(e81), std::abs(e88)));
}

void trace_closed(double x, double y, double z, double out[4]) {
  const double c2x = std::cos(2 * x), s2x = std::sin(2 * x);
  const double c2y = std::cos(2 * y), cy = std::cos(y), sy = std::sin(y);
  const double c2z = std::cos(2 * z), s2z = std::sin(2 * z);
  const double s3 = std::sqrt(3.0);
  out[0] = 0.25 * c2x * (3 + c2y) * c2z - s2x * cy * s2z;  // e11
  out[1] = -0.5 * s3 * c2x * sy * sy;                      // e18
  out[2] = -0.5 * s3 * c2z * sy * sy;                      // e81
  out[3] = 0.25 * (1 + 3 * c2y);                           // e88
}

TraceResidual trace_system(double x, double y, double z, double tol) {
  TraceResidual t;
  t.x = x;
  t.y = y;
  t.z = z;
  double cf[4];
  trace_closed(x, y, z, cf);
  t.e11 = cf[0];
  t.e18 = cf[1];
  t.e81 = cf[2];
  t.e88 = cf[3];

  // Direct route: e_ab = <-i la, Ad_R(-i lb)> with R = euler_rotation(x,y,z).
  const GroupElem r = euler_rotation(x, y, z);
  const AlgVec l3 = AlgVec::basis(Alg::su3, 2), l8 = AlgVec::basis(Alg::su3, 7);
  const AlgVec a3 = adjoint(r, l3), a8 = adjoint(r, l8);
  t.d11 = inner_g0(l3, a3);
  t.d18 = inner_g0(l3, a8);
  t.d81 = inner_g0(l8, a3);
  t.d88 = inner_g0(l8, a8);

  if (t.mismatch() > tol) {
    std::ostringstream os;
    os << "trace_system: closed forms disagree with direct traces by " << t.mismatch()
       << " at (" << x << ", " << y << ", " << z << ")";
    throw SolverFailure(os.str());
  }
  return t;
}

void trace_closed_interval(const Interval& x, const Interval& y, const Interval& z,
                           Interval out[4]) {
  const Interval c2x = interval_cos(2.0 * x), s2x = interval_sin(2.0 * x);
  const Interval c2y = interval_cos(2.0 * y);
  const Interval cy = interval_cos(y);
  const Interval sy2 = sqr(interval_sin(y));
  const Interval c2z = interval_cos(2.0 * z), s2z = interval_sin(2.0 * z);
  const Interval three(3.0, 3.0);
  const Interval s3half(std::nextafter(-0.5 * std::sqrt(3.0), -1.0),
                        std::nextafter(-0.5 * std::sqrt(3.0), 0.0));
  out[0] = 0.25 * (c2x * (three + c2y) * c2z) - s2x * cy * s2z;
  out[1] = s3half * (c2x * sy2);
  out[2] = s3half * (c2z * sy2);
  out[3] = 0.25 * (Interval(1, 1) + 3.0 * c2y);
}

// ---------------------------------------------------------------------------

MetricField wu_quotient_field(double radius) {
  MetricField f;
  f.dim = 5;
  f.chart_radius = radius;
  f.g = [](const VectorXd& t) {
    const AlgVec u = horizontal_from_coeffs(t);
    MatrixXd zeta(5, 5);
    for (int a = 0; a < 5; ++a) {
      const AlgVec fa = horizontal_from_coeffs(VectorXd::Unit(5, a));
      const AlgVec z = dexp_left(u, fa);
      // Horizontal part only: the vertical space is the constant so(3) span
      // in left trivialization of the right quotient.
      zeta.col(a) = coeffs_from_horizontal(z);
    }
    return MatrixXd(zeta.transpose() * zeta);
  };
  return f;
}

double fit_sec_constant(int samples, std::uint64_t seed) {
  const MetricField f = wu_quotient_field();
  const RiemannTensor rt = riemann_fd(f, VectorXd::Zero(5));
  DetRand rng(seed);
  double num = 0, den = 0;
  int used = 0;
  while (used < samples) {
    const VectorXd uc = rng.gaussian_vector(5), vc = rng.gaussian_vector(5);
    const AlgVec x = horizontal_from_coeffs(uc), y = horizontal_from_coeffs(vc);
    const double alg = sec_wu_raw(x, y);
    if (alg < 1e-3) continue;  // fit on clearly non-flat planes
    const double fd = sec_from_riemann(rt, uc, vc);
    num += fd * alg;
    den += alg * alg;
    ++used;
  }
  return num / den;
}

// ---------------------------------------------------------------------------

namespace {

struct Box {
  double lo[3], hi[3];
  int depth = 0;
};

double box_lower_bound(const Box& b) {
  Interval out[4];
  trace_closed_interval({b.lo[0], b.hi[0]}, {b.lo[1], b.hi[1]}, {b.lo[2], b.hi[2]}, out);
  double f = 0;
  for (int i = 0; i < 4; ++i) f = std::max(f, out[i].abs_lower());
  return f;
}

}  // namespace

InfeasibilityCert infeasibility_certificate(const InfeasibilityConfig& cfg) {
  InfeasibilityCert cert;
  cert.method = cfg.method;
  cert.target = cfg.target;
  {
    double cf[4];
    trace_closed(0, 0, 0, cf);
    cert.origin_residual = std::max(std::max(std::abs(cf[0]), std::abs(cf[1])),
                                    std::max(std::abs(cf[2]), std::abs(cf[3])));
  }

  if (cfg.method == "grid-lipschitz") {
    // |grad e11|_1 <= 4 + 1.5 + 4 = 9.5 bounds every component (the others are
    // smaller), so F = max |e| is 9.5-Lipschitz in the max norm.
    const double lip = 9.5;
    const long n = cfg.grid_n;
    if (n < 2) throw ConfigError("infeasibility_certificate: grid_n must be >= 2");
    const double h = 2 * M_PI / double(n);
    const auto val = [&](std::int64_t i) {
      const long ix = long(i % n), iy = long((i / n) % n), iz = long(i / (n * n));
      double cf[4];
      trace_closed((ix + 0.5) * h, (iy + 0.5) * h, (iz + 0.5) * h, cf);
      return std::max(std::max(std::abs(cf[0]), std::abs(cf[1])),
                      std::max(std::abs(cf[2]), std::abs(cf[3])));
    };
    const auto worst = scan::arg_min(n * n * n, val);
    cert.boxes = n * n * n;
    cert.lipschitz = lip;
    cert.bound = worst.value - lip * (h / 2);
    cert.certified = cert.bound > 0 && cert.bound >= cfg.target;
    return cert;
  }
  if (cfg.method != "interval")
    throw ConfigError("infeasibility_certificate: unknown method " + cfg.method);

  // Breadth-first interval branch and bound over [0, 2pi]^3: a box is retired
  // once its certified lower bound reaches the target, else split along its
  // widest axis. The certified global bound is the min over retired boxes.
  std::vector<Box> frontier{Box{{0, 0, 0}, {2 * M_PI, 2 * M_PI, 2 * M_PI}, 0}};
  double certified_min = std::numeric_limits<double>::infinity();
  std::int64_t processed = 0;
  int depth_reached = 0;
  bool budget_hit = false;

  while (!frontier.empty()) {
    const std::int64_t m = std::int64_t(frontier.size());
    if (processed + m > cfg.max_boxes) {
      budget_hit = true;
      break;
    }
    processed += m;
    std::vector<double> bounds(static_cast<size_t>(m));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64)
#endif
    for (std::int64_t i = 0; i < m; ++i) bounds[size_t(i)] = box_lower_bound(frontier[size_t(i)]);

    std::vector<Box> next;
    for (std::int64_t i = 0; i < m; ++i) {
      const Box& b = frontier[size_t(i)];
      depth_reached = std::max(depth_reached, b.depth);
      if (bounds[size_t(i)] >= cfg.target) {
        certified_min = std::min(certified_min, bounds[size_t(i)]);
        continue;
      }
      if (b.depth >= cfg.max_depth) {
        budget_hit = true;
        certified_min = std::min(certified_min, bounds[size_t(i)]);
        continue;
      }
      int axis = 0;
      double w = 0;
      for (int a = 0; a < 3; ++a)
        if (b.hi[a] - b.lo[a] > w) {
          w = b.hi[a] - b.lo[a];
          axis = a;
        }
      Box left = b, right = b;
      left.depth = right.depth = b.depth + 1;
      const double mid = 0.5 * (b.lo[axis] + b.hi[axis]);
      left.hi[axis] = mid;
      right.lo[axis] = mid;
      next.push_back(left);
      next.push_back(right);
    }
    frontier.swap(next);
  }

  cert.boxes = processed;
  cert.depth_reached = depth_reached;
  if (budget_hit || !frontier.empty()) {
    // Explicit failure with the best bound established so far.
    double best = certified_min;
    for (const Box& b : frontier) best = std::min(best, box_lower_bound(b));
    cert.bound = std::isfinite(best) ? std::min(best, cfg.target) : 0.0;
    cert.certified = false;
    return cert;
  }
  cert.bound = certified_min;
  cert.certified = true;
  return cert;
}

// ---------------------------------------------------------------------------

namespace {

SecFn wu_sec_fn() {
  return [](const TwoPlane& p) {
    return sec_wu_raw(horizontal_from_coeffs(p.u), horizontal_from_coeffs(p.v));
  };
}

TwoPlane plane_from_euler_coeffs(double x, double y, double z, const MatrixXd& gram) {
  const HorizontalPlane hp = flat_plane_from_euler(x, y, z);
  return make_plane(coeffs_from_horizontal(hp.x), coeffs_from_horizontal(hp.y), gram);
}

}  // namespace

double distance_to_flat_orbit(const TwoPlane& sigma, int euler_grid) {
  const MatrixXd gram = MatrixXd::Identity(5, 5);
  const int n = std::max(euler_grid, 2);
  const double step = 2 * M_PI / n;
  auto dist_at = [&](const VectorXd& ang) {
    return plane_distance(sigma, plane_from_euler_coeffs(ang[0], ang[1], ang[2], gram), gram);
  };
  const auto seed = scan::arg_min(std::int64_t(n) * n * n, [&](std::int64_t i) {
    VectorXd ang(3);
    ang << (i % n) * step, ((i / n) % n) * step, (i / (std::int64_t(n) * n)) * step;
    return dist_at(ang);
  });
  VectorXd ang0(3);
  ang0 << (seed.index % n) * step, ((seed.index / n) % n) * step,
      (seed.index / (std::int64_t(n) * n)) * step;
  const auto nm = nelder_mead(dist_at, ang0, 0.5 * step, 500, 1e-14);
  return std::min(seed.value, nm.value);
}

BiorthScanResult biorth_wu_at_base(const WuScanConfig& cfg) {
  const MatrixXd gram = MatrixXd::Identity(5, 5);
  const SecFn sec = wu_sec_fn();
  PlaneScanConfig pcfg;
  pcfg.family_grid = cfg.complement_grid;
  pcfg.refine_seeds = cfg.refine_seeds;

  // Candidate sigmas: deterministic lattice + the flat Euler family (where the
  // minimum of plain sec lives, hence a natural place to probe biorth).
  std::vector<TwoPlane> sigmas = plane_lattice(5, gram, cfg.plane_grid, cfg.seed);
  const int ne = std::max(cfg.euler_grid, 2);
  const double estep = 2 * M_PI / ne;
  for (int ix = 0; ix < ne; ++ix)
    for (int iy = 0; iy < ne; ++iy)
      for (int iz = 0; iz < ne; ++iz)
        sigmas.push_back(plane_from_euler_coeffs(ix * estep, iy * estep, iz * estep, gram));

  BiorthScanResult res;

  // Plain sectional minimum with refinement.
  const auto plain_seeds = scan::k_smallest(
      std::int64_t(sigmas.size()),
      [&](std::int64_t i) { return sec(sigmas[size_t(i)]); }, cfg.refine_seeds);
  double plain_best = plain_seeds.front().value;
  TwoPlane plain_arg = sigmas[size_t(plain_seeds.front().index)];
  for (const auto& s : plain_seeds) {
    const TwoPlane p0 = sigmas[size_t(s.index)];
    auto fn = [&](const VectorXd& a) {
      try {
        return sec(make_plane(p0.u + a.segment(0, 5), p0.v + a.segment(5, 5), gram));
      } catch (const DegeneratePlaneError&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    const auto nm = nelder_mead(fn, VectorXd::Zero(10), 0.05, 800, 1e-16);
    if (nm.value < plain_best) {
      plain_best = nm.value;
      plain_arg = make_plane(p0.u + nm.x.segment(0, 5), p0.v + nm.x.segment(5, 5), gram);
    }
  }
  res.min_plain_sec = plain_best;
  res.argmin_plain = plain_arg;
  res.flat_orbit_distance = distance_to_flat_orbit(plain_arg);

  // Biorthogonal minimum over the candidate set, then refine around the best.
  const auto bio_seeds = scan::k_smallest(
      std::int64_t(sigmas.size()),
      [&](std::int64_t i) {
        PlaneScanConfig quick = pcfg;
        quick.refine_seeds = 2;
        quick.nm_max_iter = 60;
        return biorthogonal_curvature(sigmas[size_t(i)], gram, sec, quick).value;
      },
      cfg.refine_seeds);

  double bio_best = std::numeric_limits<double>::infinity();
  TwoPlane bio_arg = sigmas[size_t(bio_seeds.front().index)];
  bool converged = true;
  for (const auto& s : bio_seeds) {
    const TwoPlane p0 = sigmas[size_t(s.index)];
    auto fn = [&](const VectorXd& a) {
      try {
        const TwoPlane p = make_plane(p0.u + a.segment(0, 5), p0.v + a.segment(5, 5), gram);
        PlaneScanConfig quick = pcfg;
        quick.refine_seeds = 2;
        quick.nm_max_iter = 60;
        return biorthogonal_curvature(p, gram, sec, quick).value;
      } catch (const DegeneratePlaneError&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    // The objective carries tiny jitter from the inner grid+refine minimum, so
    // the outer simplex settles to ~1e-8 rather than machine tolerance.
    const auto nm = nelder_mead(fn, VectorXd::Zero(10), 0.05, 600, 1e-8);
    converged = converged && nm.converged;
    if (nm.value < bio_best) {
      bio_best = nm.value;
      bio_arg = make_plane(p0.u + nm.x.segment(0, 5), p0.v + nm.x.segment(5, 5), gram);
    }
  }
  const auto final_bio = biorthogonal_curvature(bio_arg, gram, sec, pcfg);
  res.min_biorth = std::min(bio_best, final_bio.value);
  res.argmin_sigma = bio_arg;
  res.argmin_sigma_perp = final_bio.argmin;
  res.converged = converged && final_bio.converged;
  return res;
}

}  // namespace biorth::wu

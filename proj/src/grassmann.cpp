#include "biorth/grassmann.hpp"

#include <algorithm>
#include <cmath>

#include "biorth/detrand.hpp"
#include "biorth/scan.hpp"

namespace biorth {

using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

TwoPlane make_plane(const VectorXd& u, const VectorXd& v, const MatrixXd& gram) {
  const double uu = u.dot(gram * u);
  if (uu < default_tolerances().degenerate_gram)
    throw DegeneratePlaneError("make_plane: first vector has zero norm");
  VectorXd a = u / std::sqrt(uu);
  VectorXd w = v - (a.dot(gram * v)) * a;
  const double ww = w.dot(gram * w);
  if (ww < default_tolerances().degenerate_gram)
    throw DegeneratePlaneError("make_plane: spanning pair is numerically dependent");
  return {a, w / std::sqrt(ww)};
}

double plane_orthonormality_residual(const TwoPlane& p, const MatrixXd& gram) {
  double r = std::abs(p.u.dot(gram * p.u) - 1.0);
  r = std::max(r, std::abs(p.v.dot(gram * p.v) - 1.0));
  r = std::max(r, std::abs(p.u.dot(gram * p.v)));
  return r;
}

double plane_distance(const TwoPlane& a, const TwoPlane& b, const MatrixXd& gram) {
  if (a.u.size() != b.u.size()) throw DomainError("plane_distance: different base dimensions");
  Eigen::Matrix2d m;
  m(0, 0) = a.u.dot(gram * b.u);
  m(0, 1) = a.u.dot(gram * b.v);
  m(1, 0) = a.v.dot(gram * b.u);
  m(1, 1) = a.v.dot(gram * b.v);
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
  double d2 = 0;
  for (int i = 0; i < 2; ++i) {
    const double s = std::clamp(svd.singularValues()[i], -1.0, 1.0);
    const double th = std::acos(s);
    d2 += th * th;
  }
  return std::sqrt(d2);
}

MatrixXd complement_basis(const TwoPlane& p, const MatrixXd& gram) {
  const int n = int(p.u.size());
  // Gram-Schmidt the coordinate directions against {u, v} in the gram metric.
  MatrixXd out(n, n - 2);
  int col = 0;
  std::vector<VectorXd> onb{p.u, p.v};
  for (int k = 0; k < n && col < n - 2; ++k) {
    VectorXd w = VectorXd::Zero(n);
    w[k] = 1.0;
    for (const auto& b : onb) w -= (b.dot(gram * w)) * b;
    const double ww = w.dot(gram * w);
    if (ww < 1e-8) continue;  // direction already spanned
    w /= std::sqrt(ww);
    onb.push_back(w);
    out.col(col++) = w;
  }
  if (col != n - 2) throw SolverFailure("complement_basis: rank deficiency");
  return out;
}

TwoPlane complement_plane(const TwoPlane& p, const MatrixXd& gram, const Vector3d& normal) {
  if (p.u.size() != 5)
    throw DomainError("complement_plane: 5-dimensional tangent space required");
  const MatrixXd c = complement_basis(p, gram);
  Vector3d w = normal;
  const double wn = w.norm();
  if (wn < 1e-14) throw DomainError("complement_plane: zero normal direction");
  w /= wn;
  // Any orthonormal completion of w inside R^3.
  int k = 0;
  w.cwiseAbs().minCoeff(&k);
  Vector3d a1 = w.cross(Vector3d::Unit(k)).normalized();
  Vector3d a2 = w.cross(a1);
  return {c * a1, c * a2};
}

std::vector<Vector3d> fibonacci_hemisphere(int count) {
  // Fibonacci lattice on the upper hemisphere; the family is an RP^2, so the
  // hemisphere covers it (boundary identified up to sign).
  std::vector<Vector3d> out;
  out.reserve(count);
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  for (int i = 0; i < count; ++i) {
    const double z = (i + 0.5) / count;  // (0,1): open at the equator midpoint
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * M_PI * std::fmod(i / golden, 1.0);
    out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return out;
}

NelderMeadResult nelder_mead(const std::function<double(const VectorXd&)>& f,
                             const VectorXd& x0, double scale, int max_iter, double tol) {
  const int n = int(x0.size());
  std::vector<std::pair<double, VectorXd>> simplex;
  simplex.reserve(n + 1);
  simplex.emplace_back(f(x0), x0);
  for (int i = 0; i < n; ++i) {
    VectorXd x = x0;
    x[i] += scale;
    simplex.emplace_back(f(x), x);
  }
  auto order = [&] {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
  };
  order();
  int it = 0;
  for (; it < max_iter; ++it) {
    if (std::abs(simplex.back().first - simplex.front().first) <=
        tol * (1.0 + std::abs(simplex.front().first)))
      break;
    VectorXd centroid = VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += simplex[i].second;
    centroid /= n;
    const auto& worst = simplex.back();
    const VectorXd xr = centroid + (centroid - worst.second);
    const double fr = f(xr);
    if (fr < simplex.front().first) {
      const VectorXd xe = centroid + 2.0 * (centroid - worst.second);
      const double fe = f(xe);
      simplex.back() = fe < fr ? std::make_pair(fe, xe) : std::make_pair(fr, xr);
    } else if (fr < simplex[n - 1].first) {
      simplex.back() = {fr, xr};
    } else {
      const VectorXd xc = centroid + 0.5 * (worst.second - centroid);
      const double fc = f(xc);
      if (fc < worst.first) {
        simplex.back() = {fc, xc};
      } else {
        for (int i = 1; i <= n; ++i) {
          simplex[i].second = simplex[0].second + 0.5 * (simplex[i].second - simplex[0].second);
          simplex[i].first = f(simplex[i].second);
        }
      }
    }
    order();
  }
  return {simplex.front().second, simplex.front().first, it < max_iter, it};
}

PlaneMinResult min_sec_over_complement(const TwoPlane& sigma, const MatrixXd& gram,
                                       const SecFn& sec, const PlaneScanConfig& cfg) {
  const auto dirs = fibonacci_hemisphere(cfg.family_grid);
  auto eval_dir = [&](const Vector3d& w) { return sec(complement_plane(sigma, gram, w)); };
  const auto seeds = scan::k_smallest(
      int64_t(dirs.size()), [&](std::int64_t i) { return eval_dir(dirs[size_t(i)]); },
      cfg.refine_seeds);

  PlaneMinResult res;
  res.coarse_value = seeds.front().value;
  res.grid_index = seeds.front().index;
  double best = seeds.front().value;
  Vector3d best_w = dirs[size_t(seeds.front().index)];
  bool all_conv = true;
  for (const auto& s : seeds) {
    const Vector3d w0 = dirs[size_t(s.index)];
    // Local chart of the hemisphere around w0.
    int k = 0;
    w0.cwiseAbs().minCoeff(&k);
    const Vector3d t1 = w0.cross(Vector3d::Unit(k)).normalized();
    const Vector3d t2 = w0.cross(t1);
    auto fn = [&](const VectorXd& a) {
      const Vector3d w = (w0 + a[0] * t1 + a[1] * t2).normalized();
      return eval_dir(w);
    };
    const auto nm = nelder_mead(fn, VectorXd::Zero(2), 0.15, cfg.nm_max_iter, cfg.nm_tol);
    all_conv = all_conv && nm.converged;
    if (nm.value < best) {
      best = nm.value;
      best_w = (w0 + nm.x[0] * t1 + nm.x[1] * t2).normalized();
    }
  }
  res.value = best;
  res.argmin = complement_plane(sigma, gram, best_w);
  res.converged = all_conv && best <= res.coarse_value + 1e-12;
  return res;
}

PlaneMinResult biorthogonal_curvature(const TwoPlane& sigma, const MatrixXd& gram,
                                      const SecFn& sec, const PlaneScanConfig& cfg) {
  const double base = sec(sigma);
  PlaneMinResult res = min_sec_over_complement(sigma, gram, sec, cfg);
  res.value = 0.5 * (base + res.value);
  res.coarse_value = 0.5 * (base + res.coarse_value);
  return res;
}

std::vector<TwoPlane> plane_lattice(int n, const MatrixXd& gram, int count, std::uint64_t seed) {
  DetRand rng(seed);
  std::vector<TwoPlane> out;
  out.reserve(count);
  while (int(out.size()) < count) {
    const VectorXd u = rng.gaussian_vector(n);
    const VectorXd v = rng.gaussian_vector(n);
    try {
      out.push_back(make_plane(u, v, gram));
    } catch (const DegeneratePlaneError&) {
      // vanishing-probability draw; skip
    }
  }
  return out;
}

PlaneMinResult distance_curvature(const TwoPlane& sigma, double theta, const MatrixXd& gram,
                                  const SecFn& sec, const PlaneScanConfig& cfg) {
  if (theta <= 0) throw DomainError("distance_curvature: theta must be positive");
  const int n = int(sigma.u.size());
  if (theta > grassmann_diameter(n))
    throw DomainError("distance_curvature: theta exceeds the Grassmannian diameter; empty feasible set");

  const double base = sec(sigma);
  const auto lattice = plane_lattice(n, gram, cfg.plane_grid, cfg.lattice_seed);
  const double inf = std::numeric_limits<double>::infinity();
  auto feasible_value = [&](const TwoPlane& p) {
    return plane_distance(sigma, p, gram) >= theta ? sec(p) : inf;
  };
  const auto seeds = scan::k_smallest(
      int64_t(lattice.size()), [&](std::int64_t i) { return feasible_value(lattice[size_t(i)]); },
      cfg.refine_seeds);
  if (seeds.empty() || !std::isfinite(seeds.front().value))
    throw SolverFailure("distance_curvature: no feasible lattice plane; refine the grid");

  PlaneMinResult res;
  res.coarse_value = 0.5 * (base + seeds.front().value);
  res.grid_index = seeds.front().index;
  double best = seeds.front().value;
  TwoPlane best_plane = lattice[size_t(seeds.front().index)];
  bool all_conv = true;
  for (const auto& s : seeds) {
    if (!std::isfinite(s.value)) break;  // seeds sorted; rest infeasible
    const TwoPlane p0 = lattice[size_t(s.index)];
    // Refine over perturbations of the spanning pair, projected back to the
    // Grassmannian; infeasible proposals are rejected by the objective.
    auto fn = [&](const VectorXd& a) {
      VectorXd du = a.segment(0, n), dv = a.segment(n, n);
      try {
        const TwoPlane p = make_plane(p0.u + du, p0.v + dv, gram);
        return feasible_value(p);
      } catch (const DegeneratePlaneError&) {
        return inf;
      }
    };
    const auto nm = nelder_mead(fn, VectorXd::Zero(2 * n), 0.1, cfg.nm_max_iter, cfg.nm_tol);
    all_conv = all_conv && nm.converged;
    if (nm.value < best) {
      best = nm.value;
      best_plane = make_plane(p0.u + nm.x.segment(0, n), p0.v + nm.x.segment(n, n), gram);
    }
  }
  res.value = 0.5 * (base + best);
  res.argmin = best_plane;
  res.converged = all_conv;
  return res;
}

}  // namespace biorth

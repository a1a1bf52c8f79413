#include <doctest.h>

#include <cmath>

#include "biorth/detrand.hpp"
#include "biorth/grassmann.hpp"

using namespace biorth;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_spd(int n, DetRand& rng) {
  MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) a.col(i) = rng.gaussian_vector(n);
  return a * a.transpose() + 0.5 * MatrixXd::Identity(n, n);
}

VectorXd unit(int n, int k) {
  VectorXd v = VectorXd::Zero(n);
  v[k] = 1;
  return v;
}

}  // namespace

TEST_CASE("plane_distance: coincident, fully orthogonal, and half-orthogonal planes") {
  const MatrixXd g = MatrixXd::Identity(5, 5);
  const TwoPlane s12 = make_plane(unit(5, 0), unit(5, 1), g);
  const TwoPlane s34 = make_plane(unit(5, 2), unit(5, 3), g);
  const TwoPlane s13 = make_plane(unit(5, 0), unit(5, 2), g);
  CHECK(plane_distance(s12, s12, g) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(plane_distance(s12, s34, g) == doctest::Approx(std::sqrt(2.0) * M_PI / 2).epsilon(1e-12));
  CHECK(plane_distance(s12, s13, g) == doctest::Approx(M_PI / 2).epsilon(1e-12));
}

TEST_CASE("plane_distance: symmetric, reframing-invariant, triangle inequality") {
  DetRand rng(211);
  const MatrixXd g = random_spd(5, rng);
  for (int n = 0; n < 100; ++n) {
    const TwoPlane a = make_plane(rng.gaussian_vector(5), rng.gaussian_vector(5), g);
    const TwoPlane b = make_plane(rng.gaussian_vector(5), rng.gaussian_vector(5), g);
    const TwoPlane c = make_plane(rng.gaussian_vector(5), rng.gaussian_vector(5), g);
    const double dab = plane_distance(a, b, g);
    CHECK(dab == doctest::Approx(plane_distance(b, a, g)).epsilon(1e-10));
    // Re-frame a by a random rotation of its spanning pair.
    const double th = rng.uniform(0, 2 * M_PI);
    const TwoPlane a2 = make_plane(std::cos(th) * a.u + std::sin(th) * a.v,
                                   -std::sin(th) * a.u + std::cos(th) * a.v, g);
    CHECK(plane_distance(a2, b, g) == doctest::Approx(dab).epsilon(1e-9));
    CHECK(plane_distance(a, c, g) <= dab + plane_distance(b, c, g) + 1e-10);
  }
}

TEST_CASE("make_plane: degenerate pairs are rejected") {
  const MatrixXd g = MatrixXd::Identity(5, 5);
  CHECK_THROWS_AS(make_plane(unit(5, 0), unit(5, 0) * 3.0, g), DegeneratePlaneError);
}

TEST_CASE("complement family: membership, invariants, and 100-point coverage") {
  DetRand rng(223);
  const MatrixXd g = MatrixXd::Identity(5, 5);
  const TwoPlane sigma = make_plane(unit(5, 0), unit(5, 1), g);

  const auto dirs = fibonacci_hemisphere(100);
  for (const auto& w : dirs) {
    const TwoPlane p = complement_plane(sigma, g, w);
    CHECK(plane_orthonormality_residual(p, g) < 1e-10);
    // Projection residual onto span{e3,e4,e5}: first two coordinates vanish.
    CHECK(std::abs(p.u[0]) + std::abs(p.u[1]) < 1e-10);
    CHECK(std::abs(p.v[0]) + std::abs(p.v[1]) < 1e-10);
  }

  // Coverage of the RP^2 family: dense oracle of 10^4 planes, max-min distance.
  std::vector<TwoPlane> sample;
  for (const auto& w : dirs) sample.push_back(complement_plane(sigma, g, w));
  const auto dense = fibonacci_hemisphere(10000);
  double worst = 0;
  for (const auto& w : dense) {
    const TwoPlane q = complement_plane(sigma, g, w);
    double best = 1e9;
    for (const auto& p : sample) best = std::min(best, plane_distance(p, q, g));
    worst = std::max(worst, best);
  }
  CHECK(worst <= 0.35);
}

TEST_CASE("biorthogonal_curvature: constant-curvature functional gives 1 everywhere") {
  // sec == 1 realized by the bi-invariant formula on orthonormal pairs of the
  // unit-quaternion group, extended trivially to the 5-dim family.
  DetRand rng(227);
  const MatrixXd g = MatrixXd::Identity(5, 5);
  const SecFn one = [](const TwoPlane&) { return 1.0; };
  PlaneScanConfig cfg;
  cfg.family_grid = 64;
  for (int n = 0; n < 5; ++n) {
    const TwoPlane sigma = make_plane(rng.gaussian_vector(5), rng.gaussian_vector(5), g);
    const auto r = biorthogonal_curvature(sigma, g, one, cfg);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.converged);
  }
}

TEST_CASE("biorthogonal_curvature: bounded above by any feasible complement plane") {
  DetRand rng(229);
  const MatrixXd g = MatrixXd::Identity(5, 5);
  // A nontrivial smooth functional of the plane (not of its frame): built
  // from the orthogonal projector u u^T + v v^T.
  const SecFn sec = [](const TwoPlane& p) {
    const MatrixXd proj = p.u * p.u.transpose() + p.v * p.v.transpose();
    return 1.0 + 0.5 * proj(2, 2) + 0.3 * proj(4, 3) - 0.2 * proj(0, 1);
  };
  const TwoPlane sigma = make_plane(unit(5, 0), unit(5, 1), g);
  const auto r = biorthogonal_curvature(sigma, g, sec);
  for (const auto& w : fibonacci_hemisphere(37)) {
    const TwoPlane sp = complement_plane(sigma, g, w);
    CHECK(r.value <= 0.5 * (sec(sigma) + sec(sp)) + 1e-10);
  }
  // Invariance under re-framing of sigma.
  const TwoPlane sigma2 = make_plane(0.6 * sigma.u + 0.8 * sigma.v,
                                     -0.8 * sigma.u + 0.6 * sigma.v, g);
  const auto r2 = biorthogonal_curvature(sigma2, g, sec);
  CHECK(r2.value == doctest::Approx(r.value).epsilon(1e-8));
}

TEST_CASE("distance_curvature: monotone in theta, constant field, diameter error") {
  DetRand rng(233);
  const MatrixXd g = MatrixXd::Identity(5, 5);
  const SecFn one = [](const TwoPlane&) { return 1.0; };
  const TwoPlane sigma = make_plane(unit(5, 0), unit(5, 1), g);
  PlaneScanConfig cfg;
  cfg.plane_grid = 512;

  const auto r1 = distance_curvature(sigma, 0.3, g, one, cfg);
  CHECK(r1.value == doctest::Approx(1.0).epsilon(1e-12));

  const SecFn varying = [&](const TwoPlane& p) {
    return 1.0 + plane_distance(sigma, p, g);  // favors staying close
  };
  const double v_small = distance_curvature(sigma, 0.2, g, varying, cfg).value;
  const double v_large = distance_curvature(sigma, 0.8, g, varying, cfg).value;
  CHECK(v_small <= v_large + 1e-9);

  CHECK_THROWS_AS(distance_curvature(sigma, 10.0, g, one, cfg), DomainError);
  CHECK_THROWS_AS(distance_curvature(sigma, -1.0, g, one, cfg), DomainError);
}

TEST_CASE("distance_curvature vs biorthogonal: feasible-set containment") {
  // Every complement plane is at distance >= pi/2 from sigma, so the
  // theta = pi/2 distance curvature lower-bounds the biorthogonal value.
  DetRand rng(239);
  const MatrixXd g = MatrixXd::Identity(5, 5);
  const SecFn sec = [](const TwoPlane& p) {
    return 1.0 + 0.4 * p.u[0] * p.u[0] - 0.1 * p.v[2] * p.u[3];
  };
  const TwoPlane sigma = make_plane(unit(5, 0), unit(5, 1), g);
  PlaneScanConfig cfg;
  cfg.plane_grid = 2048;
  const auto bio = biorthogonal_curvature(sigma, g, sec, cfg);
  const auto dist = distance_curvature(sigma, M_PI / 2 - 1e-9, g, sec, cfg);
  CHECK(dist.value <= bio.value + 1e-6);
}

TEST_CASE("plane_lattice: deterministic given the seed") {
  const MatrixXd g = MatrixXd::Identity(5, 5);
  const auto a = plane_lattice(5, g, 50, 99);
  const auto b = plane_lattice(5, g, 50, 99);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].u - b[i].u).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a[i].v - b[i].v).cwiseAbs().maxCoeff() == 0.0);
  }
  for (const auto& p : a) CHECK(plane_orthonormality_residual(p, g) < 1e-10);
}

TEST_CASE("nelder_mead: quadratic bowl converges") {
  auto f = [](const VectorXd& x) { return (x - VectorXd::Constant(3, 1.0)).squaredNorm(); };
  const auto r = nelder_mead(f, VectorXd::Zero(3), 0.5, 400, 1e-14);
  CHECK(r.converged);
  CHECK((r.x - VectorXd::Constant(3, 1.0)).norm() < 1e-5);
}

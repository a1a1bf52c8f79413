#include <doctest.h>

#include <cmath>

#include "biorth/curvature.hpp"
#include "biorth/detrand.hpp"

using namespace biorth;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

AlgVec random_vec(Alg tag, DetRand& rng) {
  return {tag, rng.gaussian_vector(alg_dim(tag))};
}

}  // namespace

TEST_CASE("sec_biinvariant: commuting Gell-Mann diagonal pair is flat") {
  const AlgVec l3 = AlgVec::basis(Alg::su3, 2), l8 = AlgVec::basis(Alg::su3, 7);
  CHECK(sec_biinvariant(l3, l8) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("sec_biinvariant: unit quaternion group has curvature 1") {
  const AlgVec i = AlgVec::basis(Alg::sp1, 0), j = AlgVec::basis(Alg::sp1, 1);
  CHECK(sec_biinvariant(i, j) == doctest::Approx(1.0).epsilon(1e-14));
  // Scale invariance: sec depends on the plane only.
  CHECK(sec_biinvariant(i * 2.0, j) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(sec_biinvariant(i, i * 3.0), DegeneratePlaneError);
}

TEST_CASE("sec_biinvariant: nonnegative, zero exactly on commuting planes") {
  DetRand rng(101);
  for (int n = 0; n < 500; ++n) {
    const AlgVec x = random_vec(Alg::su3, rng), y = random_vec(Alg::su3, rng);
    const double s = sec_biinvariant(x, y);
    CHECK(s >= 0.0);
    const AlgVec b = bracket(x, y);
    const double bn = std::sqrt(inner_g0(b, b));
    if (s <= 1e-8) CHECK(bn <= 1e-3);
    if (bn <= 1e-6) CHECK(s <= 1e-8);
  }
}

TEST_CASE("sec_left_invariant: Phi = Id reduces to the bi-invariant formula") {
  DetRand rng(103);
  const LeftInvariantEngine eng(Alg::sp1_plus_sp1, MetricEndo::identity(Alg::sp1_plus_sp1));
  double worst = 0;
  for (int n = 0; n < 1000; ++n) {
    const AlgVec x = random_vec(Alg::sp1_plus_sp1, rng), y = random_vec(Alg::sp1_plus_sp1, rng);
    worst = std::max(worst, std::abs(eng.sec(x, y) - sec_biinvariant(x, y)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("sec_left_invariant: invariant under change of plane basis") {
  DetRand rng(107);
  const LeftInvariantEngine eng(Alg::sp1_plus_sp1, wilking_phi());
  for (int n = 0; n < 200; ++n) {
    const AlgVec x = random_vec(Alg::sp1_plus_sp1, rng), y = random_vec(Alg::sp1_plus_sp1, rng);
    const double a = rng.uniform(0.2, 2.0), b = rng.uniform(-1, 1), c = rng.uniform(0.2, 2.0);
    const AlgVec x2 = x * a, y2 = x * b + y * c;
    CHECK(eng.sec(x, y) == doctest::Approx(eng.sec(x2, y2)).epsilon(1e-9));
  }
}

TEST_CASE("riemann_fd: flat field vanishes") {
  const MetricField f = euclidean_field(4);
  const RiemannTensor rt = riemann_fd(f, VectorXd::Zero(4));
  double worst = 0;
  for (double v : rt.r) worst = std::max(worst, std::abs(v));
  CHECK(worst < 1e-9);
  CHECK(rt.presym_residual < 1e-9);
}

TEST_CASE("riemann_fd: round S^3 in normal coordinates has sec = 1") {
  const MetricField f = round_sphere_field(3);
  DetRand rng(109);
  for (int n = 0; n < 5; ++n) {
    const VectorXd t = 0.3 * rng.gaussian_vector(3).normalized();
    const RiemannTensor rt = riemann_fd(f, t);
    for (int rep = 0; rep < 10; ++rep) {
      const VectorXd u = rng.gaussian_vector(3), v = rng.gaussian_vector(3);
      CHECK(sec_from_riemann(rt, u, v) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("sec_from_riemann: plane swap and flat cases") {
  const MetricField f = euclidean_field(3);
  const RiemannTensor rt = riemann_fd(f, VectorXd::Zero(3));
  DetRand rng(113);
  const VectorXd u = rng.gaussian_vector(3), v = rng.gaussian_vector(3);
  CHECK(sec_from_riemann(rt, u, v) == doctest::Approx(0.0).epsilon(1e-12));
  const MetricField s = round_sphere_field(3);
  const RiemannTensor rts = riemann_fd(s, VectorXd::Zero(3));
  CHECK(sec_from_riemann(rts, u, v) == doctest::Approx(sec_from_riemann(rts, v, u)).epsilon(1e-12));
}

TEST_CASE("group chart of bi-invariant Sp(1) x Sp(1) matches round-sphere components") {
  // First-factor block of the exponential chart equals S^3 normal coordinates.
  const MetricField g6 = group_chart_field(Alg::sp1_plus_sp1, MetricEndo::identity(Alg::sp1_plus_sp1));
  const MetricField s3 = round_sphere_field(3);
  DetRand rng(127);
  for (int n = 0; n < 20; ++n) {
    const Eigen::Vector3d t3 = 0.5 * rng.gaussian_vector(3);
    VectorXd t6 = VectorXd::Zero(6);
    t6.segment(0, 3) = t3;
    const MatrixXd big = g6.g(t6);
    const MatrixXd small = s3.g(t3);
    CHECK((big.block(0, 0, 3, 3) - small).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((big.block(3, 3, 3, 3) - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(big.block(0, 3, 3, 3).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("metric components: positive definite on the Wilking group chart") {
  const MetricField f = group_chart_field(Alg::sp1_plus_sp1, wilking_phi());
  DetRand rng(131);
  for (int n = 0; n < 100; ++n) {
    VectorXd t = 0.4 * rng.gaussian_vector(6).normalized() * rng.uniform(0, 1);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(f.g(t));
    CHECK(es.eigenvalues().minCoeff() > 0);
    CHECK((f.g(t) - f.g(t).transpose()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("cross-engine: Koszul vs finite differences on (G, g_Wilking)") {
  const MetricEndo phi = wilking_phi();
  const LeftInvariantEngine eng(Alg::sp1_plus_sp1, phi);
  const MetricField f = group_chart_field(Alg::sp1_plus_sp1, phi);
  const RiemannTensor rt = riemann_fd(f, VectorXd::Zero(6));
  CHECK(rt.presym_residual < 1e-6);
  CHECK(bianchi_residual(rt) < 1e-6);
  DetRand rng(137);
  double worst = 0;
  for (int n = 0; n < 100; ++n) {
    const VectorXd u = rng.gaussian_vector(6), v = rng.gaussian_vector(6);
    const double alg = eng.sec({Alg::sp1_plus_sp1, u}, {Alg::sp1_plus_sp1, v});
    const double fd = sec_from_riemann(rt, u, v);
    worst = std::max(worst, std::abs(alg - fd));
  }
  CHECK(worst < 2e-4);
}

TEST_CASE("ricci: flat zero, round S^3 equals 2|u|^2, quadratic-form scaling") {
  DetRand rng(139);
  const VectorXd u = rng.gaussian_vector(3);
  CHECK(ricci_fd(euclidean_field(3), VectorXd::Zero(3), u) == doctest::Approx(0.0).epsilon(1e-9));

  const MetricField s = round_sphere_field(3);
  const RiemannTensor rt = riemann_fd(s, VectorXd::Zero(3));
  CHECK(ricci_from_riemann(rt, u) == doctest::Approx(2.0 * u.squaredNorm()).epsilon(1e-5));
  CHECK(ricci_from_riemann(rt, 2.0 * u) ==
        doctest::Approx(4.0 * ricci_from_riemann(rt, u)).epsilon(1e-10));

  // Trace consistency: Ric(u,u) = sum over an orthonormal frame through u/|u|
  // of sec(b_j, u) scaled by |u|^2 (frame vectors orthogonal to u).
  const VectorXd un = u.normalized();
  MatrixXd basis = MatrixXd::Identity(3, 3);
  // Gram-Schmidt a frame with first vector un (metric at 0 is identity).
  std::vector<VectorXd> onb{un};
  for (int k = 0; k < 3 && int(onb.size()) < 3; ++k) {
    VectorXd w = basis.col(k);
    for (const auto& b : onb) w -= b.dot(w) * b;
    if (w.norm() > 1e-8) onb.push_back(w.normalized());
  }
  double trace = 0;
  for (int j = 1; j < 3; ++j) trace += sec_from_riemann(rt, onb[j], un);
  CHECK(ricci_from_riemann(rt, un) == doctest::Approx(trace).epsilon(1e-6));
}

TEST_CASE("riemann_fd: non-smooth field trips the oracle-failure check") {
  MetricField f = euclidean_field(3);
  f.g = [](const VectorXd& t) {
    // Deterministic high-frequency contamination the step-halving check must catch.
    MatrixXd g = MatrixXd::Identity(3, 3);
    const double w = 1e-4 * std::sin(1e5 * (t[0] - 3 * t[2]) + 0.7);
    g(0, 0) += 2 * w;
    g(0, 1) += w;
    g(1, 0) += w;
    return g;
  };
  CHECK_THROWS_AS(riemann_fd(f, VectorXd::Zero(3)), OracleFailure);
}

TEST_CASE("shoot_geodesic: radial lines of normal coordinates are geodesics") {
  const MetricField s = round_sphere_field(3);
  DetRand rng(149);
  const VectorXd v = rng.gaussian_vector(3).normalized();
  const VectorXd end = shoot_geodesic(s, VectorXd::Zero(3), v, 0.7, 64);
  CHECK((end - 0.7 * v).norm() < 1e-6);
}

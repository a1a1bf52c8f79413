#include <doctest.h>

#include <cmath>

#include "biorth/algebra.hpp"
#include "biorth/detrand.hpp"

using namespace biorth;

namespace {

AlgVec random_vec(Alg tag, DetRand& rng) {
  return {tag, rng.gaussian_vector(alg_dim(tag))};
}

GroupElem random_group(Group g, DetRand& rng) {
  switch (g) {
    case Group::Sp1xSp1: return exp_elem(random_vec(Alg::sp1_plus_sp1, rng));
    case Group::DoubleSp1xSp1: return exp_elem(random_vec(Alg::double_sp1_plus_sp1, rng));
    case Group::SU3: return exp_elem(random_vec(Alg::su3, rng));
    case Group::SO3_in_SU3:
      return euler_rotation(rng.uniform(0, 2 * M_PI), rng.uniform(0, 2 * M_PI),
                            rng.uniform(0, 2 * M_PI));
  }
  return GroupElem::identity(g);
}

}  // namespace

TEST_CASE("bracket: quaternion identity [i,j] = 2k") {
  AlgVec x = AlgVec::basis(Alg::sp1, 0), y = AlgVec::basis(Alg::sp1, 1);
  const AlgVec b = bracket(x, y);
  CHECK(b.c[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(b.c[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(b.c[2] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("bracket: su3 matches the dense matrix commutator") {
  // [-i l2, -i l5] against the 3x3 commutator computed directly.
  const AlgVec x = AlgVec::basis(Alg::su3, 1), y = AlgVec::basis(Alg::su3, 4);
  const AlgVec via_table = bracket(x, y);
  const Eigen::Matrix3cd a = su3_matrix(x), b = su3_matrix(y);
  const AlgVec via_dense = su3_from_matrix(a * b - b * a);
  CHECK((via_table.c - via_dense.c).cwiseAbs().maxCoeff() < 1e-12);

  DetRand rng(11);
  double worst = 0;
  for (int n = 0; n < 1000; ++n) {
    const AlgVec u = random_vec(Alg::su3, rng), v = random_vec(Alg::su3, rng);
    const AlgVec t = bracket(u, v);
    const Eigen::Matrix3cd mu = su3_matrix(u), mv = su3_matrix(v);
    const AlgVec d = su3_from_matrix(mu * mv - mv * mu);
    worst = std::max(worst, (t.c - d.c).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("bracket: antisymmetry [X,X] = 0 and tag mismatch") {
  DetRand rng(7);
  const AlgVec x = random_vec(Alg::sp1_plus_sp1, rng);
  CHECK(bracket(x, x).c.cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(bracket(x, random_vec(Alg::su3, rng)), TagMismatchError);
}

TEST_CASE("bracket: quaternionic tables match dense commutators") {
  DetRand rng(13);
  for (Alg tag : {Alg::sp1, Alg::sp1_plus_sp1, Alg::double_sp1_plus_sp1}) {
    double worst = 0;
    for (int n = 0; n < 1000; ++n) {
      const AlgVec u = random_vec(tag, rng), v = random_vec(tag, rng);
      const AlgVec t = bracket(u, v);
      auto fu = quat_factors(u), fv = quat_factors(v);
      std::vector<Quat> br(fu.size());
      for (size_t i = 0; i < fu.size(); ++i) br[i] = fu[i] * fv[i] - fv[i] * fu[i];
      const AlgVec d = alg_from_quats(tag, br);
      worst = std::max(worst, (t.c - d.c).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("structure tables: Jacobi identity and antisymmetry") {
  for (Alg tag : {Alg::sp1, Alg::sp1_plus_sp1, Alg::double_sp1_plus_sp1, Alg::su3}) {
    const StructureTable& t = structure_table(tag);
    CHECK(t.jacobi_residual() < 1e-12);
    CHECK(t.antisymmetry_residual() < 1e-12);
  }
}

TEST_CASE("inner_g0: Gell-Mann basis is orthonormal") {
  const AlgVec l3 = AlgVec::basis(Alg::su3, 2), l8 = AlgVec::basis(Alg::su3, 7);
  CHECK(inner_g0(l3, l3) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(inner_g0(l3, l8) == doctest::Approx(0.0).epsilon(1e-14));
  // And against the trace form directly: <X,Y> = -Tr(XY)/2.
  DetRand rng(3);
  for (int n = 0; n < 200; ++n) {
    const AlgVec x = random_vec(Alg::su3, rng), y = random_vec(Alg::su3, rng);
    const double tr = -0.5 * (su3_matrix(x) * su3_matrix(y)).trace().real();
    CHECK(inner_g0(x, y) == doctest::Approx(tr).epsilon(1e-12));
  }
  CHECK(inner_g0(AlgVec::basis(Alg::sp1_plus_sp1, 0), AlgVec::basis(Alg::sp1_plus_sp1, 1)) == 0.0);
}

TEST_CASE("inner_gphi: identity endomorphism reduces to inner_g0") {
  const MetricEndo id = MetricEndo::identity(Alg::sp1_plus_sp1);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      const AlgVec x = AlgVec::basis(Alg::sp1_plus_sp1, a);
      const AlgVec y = AlgVec::basis(Alg::sp1_plus_sp1, b);
      CHECK(inner_gphi(x, y, id) == doctest::Approx(inner_g0(x, y)).epsilon(1e-14));
    }
}

TEST_CASE("inner_gphi: Wilking Phi halves diagonal norms, fixes anti-diagonal") {
  const MetricEndo phi = wilking_phi();
  DetRand rng(5);
  for (int n = 0; n < 100; ++n) {
    const Eigen::Vector3d x = rng.gaussian_vector(3);
    Eigen::VectorXd diag(6), anti(6);
    diag << x, x;
    anti << x, -x;
    const AlgVec d{Alg::sp1_plus_sp1, diag}, a{Alg::sp1_plus_sp1, anti};
    CHECK(inner_gphi(d, d, phi) == doctest::Approx(0.5 * inner_g0(d, d)).epsilon(1e-12));
    CHECK(inner_gphi(a, a, phi) == doctest::Approx(inner_g0(a, a)).epsilon(1e-12));
  }
}

TEST_CASE("wilking phi: g0-symmetric positive definite with spectrum {1,1,1,1/2,1/2,1/2}") {
  const MetricEndo phi = wilking_phi();
  phi.validate();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(phi.m);
  const Eigen::VectorXd ev = es.eigenvalues();
  for (int i = 0; i < 3; ++i) CHECK(ev[i] == doctest::Approx(0.5).epsilon(1e-14));
  for (int i = 3; i < 6; ++i) CHECK(ev[i] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("proj_diagonal: fixed, annihilated, and solved cases") {
  DetRand rng(17);
  const Eigen::Vector3d x = rng.gaussian_vector(3);
  Eigen::VectorXd diag(6), anti(6), half(6);
  diag << x, x;
  anti << x, -x;
  half << x, Eigen::Vector3d::Zero();
  const AlgVec pd = proj_diagonal({Alg::sp1_plus_sp1, diag});
  CHECK((pd.c - diag).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(proj_diagonal({Alg::sp1_plus_sp1, anti}).c.cwiseAbs().maxCoeff() < 1e-14);
  // (X, 0) -> (X/2, X/2): the unique g0-orthogonal projection onto the diagonal.
  Eigen::VectorXd expect(6);
  expect << 0.5 * x, 0.5 * x;
  CHECK((proj_diagonal({Alg::sp1_plus_sp1, half}).c - expect).cwiseAbs().maxCoeff() < 1e-14);
  // Idempotent + g0-symmetric on random input.
  const AlgVec r = random_vec(Alg::sp1_plus_sp1, rng), s = random_vec(Alg::sp1_plus_sp1, rng);
  CHECK((proj_diagonal(proj_diagonal(r)).c - proj_diagonal(r).c).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(inner_g0(proj_diagonal(r), s) == doctest::Approx(inner_g0(r, proj_diagonal(s))).epsilon(1e-12));
  CHECK_THROWS_AS(proj_diagonal(random_vec(Alg::su3, rng)), TagMismatchError);
}

TEST_CASE("adjoint: identity and Ad-invariance of inner_g0") {
  DetRand rng(23);
  for (Group g : {Group::Sp1xSp1, Group::DoubleSp1xSp1, Group::SU3}) {
    const Alg tag = g == Group::Sp1xSp1 ? Alg::sp1_plus_sp1
                    : g == Group::DoubleSp1xSp1 ? Alg::double_sp1_plus_sp1
                                                : Alg::su3;
    const AlgVec x = random_vec(tag, rng);
    CHECK((adjoint(GroupElem::identity(g), x).c - x.c).cwiseAbs().maxCoeff() < 1e-14);
  }
  double worst = 0;
  for (int n = 0; n < 1000; ++n) {
    const Group g = n % 2 ? Group::Sp1xSp1 : Group::SU3;
    const Alg tag = n % 2 ? Alg::sp1_plus_sp1 : Alg::su3;
    const GroupElem u = random_group(g, rng);
    const AlgVec x = random_vec(tag, rng), y = random_vec(tag, rng);
    worst = std::max(worst, std::abs(inner_g0(adjoint(u, x), adjoint(u, y)) - inner_g0(x, y)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("adjoint: euler_rotation(0,0,0) fixes lambda_8") {
  const GroupElem r = euler_rotation(0, 0, 0);
  const AlgVec l8 = AlgVec::basis(Alg::su3, 7);
  const AlgVec ad = adjoint(r, l8);
  CHECK((ad.c - l8.c).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(inner_g0(ad, l8) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("exp_elem: identity at t = 0 and Euler's identity on sp(1)") {
  DetRand rng(29);
  const AlgVec x = random_vec(Alg::sp1_plus_sp1, rng);
  const GroupElem e = exp_elem(x, 0.0);
  CHECK((e.q[0] - Quat::one()).norm() < 1e-15);
  CHECK((e.q[1] - Quat::one()).norm() < 1e-15);

  // exp(pi i) = -1 embedded as the first factor of Sp(1) x Sp(1).
  Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
  c[0] = M_PI;
  const GroupElem m1 = exp_elem({Alg::sp1_plus_sp1, c});
  CHECK((m1.q[0] - (-Quat::one())).norm() < 1e-14);
  CHECK((m1.q[1] - Quat::one()).norm() < 1e-15);
}

TEST_CASE("exp_elem: exp(-i lambda_2 x) is the closed-form SO(3) block") {
  DetRand rng(31);
  for (int n = 0; n < 50; ++n) {
    const double x = rng.uniform(-3, 3);
    AlgVec v = AlgVec::zero(Alg::su3);
    v.c[1] = 1.0;  // -i lambda_2 direction
    const GroupElem g = exp_elem(v, x);
    Eigen::Matrix3d expect = Eigen::Matrix3d::Identity();
    expect(0, 0) = std::cos(x);
    expect(0, 1) = -std::sin(x);
    expect(1, 0) = std::sin(x);
    expect(1, 1) = std::cos(x);
    CHECK((g.u - expect.cast<std::complex<double>>()).cwiseAbs().maxCoeff() < 1e-12);
    g.validate(1e-12);
  }
}

TEST_CASE("dexp_left: matches finite differences of the exponential") {
  DetRand rng(37);
  for (int n = 0; n < 20; ++n) {
    const AlgVec x = random_vec(Alg::su3, rng) * 0.3;
    const AlgVec v = random_vec(Alg::su3, rng);
    const AlgVec dl = dexp_left(x, v);
    const double h = 1e-6;
    const Eigen::Matrix3cd ep = exp_elem(x + v * h).u;
    const Eigen::Matrix3cd em = exp_elem(x - v * h).u;
    const Eigen::Matrix3cd lhs = exp_elem(x).u.adjoint() * ((ep - em) / (2 * h));
    CHECK((su3_from_matrix(lhs).c - dl.c).cwiseAbs().maxCoeff() < 1e-8);
  }
  for (int n = 0; n < 20; ++n) {
    const AlgVec x = random_vec(Alg::sp1_plus_sp1, rng) * 0.3;
    const AlgVec v = random_vec(Alg::sp1_plus_sp1, rng);
    const AlgVec dl = dexp_left(x, v);
    const double h = 1e-6;
    const GroupElem gp = exp_elem(x + v * h), gm = exp_elem(x - v * h), g0 = exp_elem(x);
    std::vector<Quat> lhs(2);
    for (int i = 0; i < 2; ++i) lhs[i] = g0.q[i].conj() * ((gp.q[i] - gm.q[i]) * (1.0 / (2 * h)));
    const AlgVec l = alg_from_quats(Alg::sp1_plus_sp1, lhs);
    CHECK((l.c - dl.c).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("cartan_split: eq-(6)/(7) membership and recomposition") {
  const AlgVec l2 = AlgVec::basis(Alg::su3, 1);
  auto [v2, h2] = cartan_split(l2);
  CHECK((v2.c - l2.c).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(h2.c.cwiseAbs().maxCoeff() < 1e-15);

  const AlgVec l8 = AlgVec::basis(Alg::su3, 7);
  auto [v8, h8] = cartan_split(l8);
  CHECK(v8.c.cwiseAbs().maxCoeff() < 1e-15);
  CHECK((h8.c - l8.c).cwiseAbs().maxCoeff() < 1e-15);

  DetRand rng(41);
  Eigen::MatrixXd horiz(8, 200);
  for (int n = 0; n < 200; ++n) {
    const AlgVec x = random_vec(Alg::su3, rng);
    auto [v, h] = cartan_split(x);
    CHECK(((v.c + h.c) - x.c).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(inner_g0(v, h)) < 1e-12);
    horiz.col(n) = h.c;
  }
  // The horizontal parts span a 5-dimensional space.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(horiz);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-9 * svd.singularValues()[0]) ++rank;
  CHECK(rank == 5);
}

TEST_CASE("euler_rotation: identity, SO(3) closure, one-factor composition") {
  const GroupElem e = euler_rotation(0, 0, 0);
  CHECK((e.u - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);

  DetRand rng(43);
  for (int n = 0; n < 100; ++n) {
    const GroupElem r = euler_rotation(rng.uniform(0, 2 * M_PI), rng.uniform(0, 2 * M_PI),
                                       rng.uniform(0, 2 * M_PI));
    CHECK(r.invariant_residual() < 1e-12);
  }

  AlgVec v = AlgVec::zero(Alg::su3);
  v.c[1] = 1.0;
  const GroupElem direct = exp_elem(v, M_PI);
  const GroupElem viaEuler = euler_rotation(M_PI, 0, 0);
  CHECK((direct.u - viaEuler.u).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("group elements: invariant residuals and validate") {
  DetRand rng(47);
  for (int n = 0; n < 50; ++n) {
    random_group(Group::Sp1xSp1, rng).validate();
    random_group(Group::SU3, rng).validate(1e-11);
    random_group(Group::SO3_in_SU3, rng).validate(1e-11);
  }
  GroupElem bad = GroupElem::identity(Group::Sp1xSp1);
  bad.q[0] = Quat{2, 0, 0, 0};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("gellmann data file: traceless self-adjoint, Tr(la lb) = 2 delta") {
  for (int a = 1; a <= 8; ++a) {
    const Eigen::Matrix3cd& m = gellmann(a);
    CHECK(std::abs(m.trace()) < 1e-15);
    CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    for (int b = 1; b <= 8; ++b) {
      const double tr = (m * gellmann(b)).trace().real();
      CHECK(tr == doctest::Approx(a == b ? 2.0 : 0.0).epsilon(1e-13));
    }
  }
}

#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "biorth/errors.hpp"
#include "biorth/quaternion.hpp"
#include "biorth/tolerances.hpp"

namespace biorth {

/// The four Lie algebras the artifact works with. Coefficients always refer
/// to the fixed orthonormal basis of the reference inner product:
///   sp1:                  {i, j, k} of Im(H)
///   sp1_plus_sp1:         {(i,0),(j,0),(k,0),(0,i),(0,j),(0,k)}
///   double_sp1_plus_sp1:  two copies of the above (Lie algebra of G x G)
///   su3:                  {-i lambda_1, ..., -i lambda_8}, <X,Y> = -Tr(XY)/2
enum class Alg { sp1, sp1_plus_sp1, double_sp1_plus_sp1, su3 };

inline int alg_dim(Alg a) {
  switch (a) {
    case Alg::sp1: return 3;
    case Alg::sp1_plus_sp1: return 6;
    case Alg::double_sp1_plus_sp1: return 12;
    case Alg::su3: return 8;
  }
  return 0;
}

inline const char* alg_name(Alg a) {
  switch (a) {
    case Alg::sp1: return "sp1";
    case Alg::sp1_plus_sp1: return "sp1_plus_sp1";
    case Alg::double_sp1_plus_sp1: return "double_sp1_plus_sp1";
    case Alg::su3: return "su3";
  }
  return "?";
}

/// Element of one of the fixed algebras as a coefficient vector.
struct AlgVec {
  Alg tag = Alg::sp1;
  Eigen::VectorXd c;

  AlgVec() = default;
  AlgVec(Alg t, Eigen::VectorXd coeffs) : tag(t), c(std::move(coeffs)) {
    if (c.size() != alg_dim(tag))
      throw TagMismatchError("AlgVec: coefficient length does not match algebra dimension");
  }

  static AlgVec zero(Alg t) { return {t, Eigen::VectorXd::Zero(alg_dim(t))}; }
  static AlgVec basis(Alg t, int k) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(alg_dim(t));
    c[k] = 1.0;
    return {t, c};
  }

  AlgVec operator+(const AlgVec& o) const { return {tag, c + o.c}; }
  AlgVec operator-(const AlgVec& o) const { return {tag, c - o.c}; }
  AlgVec operator*(double s) const { return {tag, c * s}; }
};

inline void require_same_tag(const AlgVec& a, const AlgVec& b, const char* op) {
  if (a.tag != b.tag)
    throw TagMismatchError(std::string(op) + ": algebra tags differ (" + alg_name(a.tag) +
                           " vs " + alg_name(b.tag) + ")");
}

/// Structure constants c[i](j,k) with [e_i, e_j] = sum_k c[i](j,k) e_k,
/// generated at startup from dense quaternion/matrix commutators.
struct StructureTable {
  Alg tag;
  std::vector<Eigen::MatrixXd> c;

  double jacobi_residual() const;
  double antisymmetry_residual() const;
};

/// Cached table per algebra; built on first use.
const StructureTable& structure_table(Alg tag);

/// g0-symmetric positive definite endomorphism defining a left-invariant
/// metric g(X,Y) = g0(Phi X, Y); stored as its matrix in the reference basis.
struct MetricEndo {
  Alg tag;
  Eigen::MatrixXd m;

  static MetricEndo identity(Alg t) {
    return {t, Eigen::MatrixXd::Identity(alg_dim(t), alg_dim(t))};
  }
  /// Checks symmetry and positive definiteness; throws ConfigError otherwise.
  void validate(double tol = 1e-10) const;
};

/// Wilking's Phi = Id - P/2 on sp(1)+sp(1), P the g0-orthogonal projection
/// onto the diagonal subalgebra. Spectrum {1,1,1,1/2,1/2,1/2}.
MetricEndo wilking_phi();

/// Block-diagonal Phi + Phi on the doubled algebra (metric of G x G).
MetricEndo direct_sum_phi(const MetricEndo& phi);

enum class Group { Sp1xSp1, DoubleSp1xSp1, SU3, SO3_in_SU3 };

inline const char* group_name(Group g) {
  switch (g) {
    case Group::Sp1xSp1: return "Sp1xSp1";
    case Group::DoubleSp1xSp1: return "DoubleSp1xSp1";
    case Group::SU3: return "SU3";
    case Group::SO3_in_SU3: return "SO3_in_SU3";
  }
  return "?";
}

/// Point of Sp(1)xSp(1), (Sp(1)xSp(1))^2, or SU(3). Quaternionic groups use
/// q[0..n); the unitary groups use u.
struct GroupElem {
  Group tag = Group::Sp1xSp1;
  std::array<Quat, 4> q{Quat::one(), Quat::one(), Quat::one(), Quat::one()};
  Eigen::Matrix3cd u = Eigen::Matrix3cd::Identity();

  static GroupElem identity(Group g) {
    GroupElem e;
    e.tag = g;
    return e;
  }
  static GroupElem sp1_pair(const Quat& a, const Quat& b) {
    GroupElem e;
    e.tag = Group::Sp1xSp1;
    e.q[0] = a;
    e.q[1] = b;
    return e;
  }
  static GroupElem su3(const Eigen::Matrix3cd& m) {
    GroupElem e;
    e.tag = Group::SU3;
    e.u = m;
    return e;
  }

  int quat_count() const {
    return tag == Group::Sp1xSp1 ? 2 : tag == Group::DoubleSp1xSp1 ? 4 : 0;
  }

  /// Residual of the defining invariants (unit norms / unitarity / det 1 /
  /// realness for SO3_in_SU3).
  double invariant_residual() const;
  void validate(double tol = default_tolerances().unit_norm) const;
};

GroupElem group_mul(const GroupElem& a, const GroupElem& b);
GroupElem group_inverse(const GroupElem& a);

// ---------------------------------------------------------------------------
// Dense realizations (used to generate structure constants and as the oracle
// route in tests).

/// su(3) element as an anti-Hermitian traceless 3x3 matrix, sum c_k (-i lambda_k).
Eigen::Matrix3cd su3_matrix(const AlgVec& x);
/// Inverse of su3_matrix via the orthonormality of {-i lambda_k} under eq. (5)-type pairing.
AlgVec su3_from_matrix(const Eigen::Matrix3cd& m);
/// The Gell-Mann matrix lambda_k (1-based k), parsed from the data file.
const Eigen::Matrix3cd& gellmann(int k);
/// Location of the Gell-Mann data file; honors the BIORTH_DATA_DIR env var.
std::string gellmann_path();

/// Quaternionic algebras as tuples of pure-imaginary quaternions.
std::vector<Quat> quat_factors(const AlgVec& x);
AlgVec alg_from_quats(Alg tag, const std::vector<Quat>& f);

// ---------------------------------------------------------------------------
// Operations

/// Reference inner product; the declared bases are orthonormal for it.
double inner_g0(const AlgVec& x, const AlgVec& y);

/// g(X,Y) = g0(Phi X, Y).
double inner_gphi(const AlgVec& x, const AlgVec& y, const MetricEndo& phi);

/// Lie bracket via the structure table.
AlgVec bracket(const AlgVec& x, const AlgVec& y);

/// g0-orthogonal projection onto the diagonal subalgebra of sp(1)+sp(1).
AlgVec proj_diagonal(const AlgVec& x);

/// Ad_u X = u X u^{-1}; compatible group/algebra pairs only.
AlgVec adjoint(const GroupElem& u, const AlgVec& x);

/// exp(tX) in the corresponding group (quaternion exp / unitary eigen-exp).
GroupElem exp_elem(const AlgVec& x, double t = 1.0);

/// Left-trivialized differential of exp: exp(X)^{-1} d/ds exp(X + sV)|_{s=0},
/// evaluated as the series sum_k (-ad_X)^k V / (k+1)!.
AlgVec dexp_left(const AlgVec& x, const AlgVec& v);

/// su(3) = so(3) + so(3)-perp split of eq-(6)/(7) type; returns (vertical,
/// horizontal). so(3) is spanned by the antisymmetric Gell-Mann directions
/// {-i lambda_2, -i lambda_5, -i lambda_7}.
std::pair<AlgVec, AlgVec> cartan_split(const AlgVec& x);

/// Indices (0-based, into the su3 basis) of the so(3) span {2,5,7 -> 1,4,6}
/// and its complement {1,3,4,6,8 -> 0,2,3,5,7}.
const std::array<int, 3>& so3_indices();
const std::array<int, 5>& so3_perp_indices();

/// exp(-i lambda_2 x) exp(-i lambda_5 y) exp(-i lambda_2 z) in SO(3) < SU(3).
GroupElem euler_rotation(double x, double y, double z);

/// Ad matrix of u acting on its algebra, columns = Ad_u(e_k) coefficients.
Eigen::MatrixXd adjoint_matrix(const GroupElem& u, Alg tag);

}  // namespace biorth

#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "biorth/algebra.hpp"
#include "biorth/errors.hpp"
#include "biorth/tolerances.hpp"

namespace biorth {

/// Metric components in a local chart: t in a validity box around 0 maps to a
/// symmetric positive definite dim x dim matrix. The chart itself (section of
/// a quotient, normal coordinates, ...) is owned by whoever builds the field.
struct MetricField {
  int dim = 5;
  double fd_step = 1e-3;
  double chart_radius = 0.4;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> g;

  Eigen::MatrixXd components(const Eigen::VectorXd& t) const {
    if (t.size() != dim) throw DomainError("MetricField: parameter dimension mismatch");
    if (t.lpNorm<Eigen::Infinity>() > chart_radius)
      throw DomainError("MetricField: parameter outside chart validity box");
    return g(t);
  }
};

/// (0,4) curvature tensor at one chart point, R[i][j][k][l] = g(R(ei,ej)ek, el),
/// with algebraic symmetries enforced by post-hoc symmetrization.
struct RiemannTensor {
  int dim = 0;
  Eigen::VectorXd t;
  Eigen::MatrixXd g;           // metric at t
  std::vector<double> r;       // dim^4, row-major
  double presym_residual = 0;  // max antisymmetry violation before projection
  double richardson_residual = 0;

  double at(int i, int j, int k, int l) const {
    return r[((static_cast<size_t>(i) * dim + j) * dim + k) * dim + l];
  }
  /// g(R(u,v)v, u) contracted multilinearly.
  double quad(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
};

/// Full curvature tensor by central finite differences of the Christoffel
/// symbols with Richardson extrapolation (steps h, h/2, h/4). Throws
/// OracleFailure if the step-halving check does not converge.
RiemannTensor riemann_fd(const MetricField& field, const Eigen::VectorXd& t,
                         double converge_tol = default_tolerances().fd_converge);

/// Single-level tensor at the field's base step: no extrapolation and no
/// convergence check. Scan-internal accelerator (roughly 3x cheaper); final
/// atlas/certificate values always come from the validated riemann_fd.
RiemannTensor riemann_fd_quick(const MetricField& field, const Eigen::VectorXd& t);

/// Sectional curvature of span{u, v} from a precomputed tensor.
double sec_from_riemann(const RiemannTensor& rt, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& v);

/// Ric(u,u) as the metric trace of the curvature tensor.
double ricci_from_riemann(const RiemannTensor& rt, const Eigen::VectorXd& u);
double ricci_fd(const MetricField& field, const Eigen::VectorXd& t, const Eigen::VectorXd& u);

/// Christoffel symbols of the second kind at t (dim x dim x dim; Gamma^k_ij =
/// out[k](i,j)) by central differences at the field's base step.
std::vector<Eigen::MatrixXd> christoffel_fd(const MetricField& field, const Eigen::VectorXd& t);

/// Integrate the geodesic ODE t'' = -Gamma(t',t') from (t0, v0) for parameter
/// length `len` with `steps` RK4 steps. Test oracle for distance code.
Eigen::VectorXd shoot_geodesic(const MetricField& field, const Eigen::VectorXd& t0,
                               const Eigen::VectorXd& v0, double len, int steps = 32);

/// First Bianchi residual max |R(i,j,k,l) + R(j,k,i,l) + R(k,i,j,l)|.
double bianchi_residual(const RiemannTensor& rt);

/// Candidate minimizing planes from the curvature operator on 2-forms:
/// extreme eigenforms projected to their dominant decomposable part. Near a
/// flat plane the bottom eigenform is decomposable, making these seeds
/// essentially exact there.
std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> curvature_eigenplane_seeds(
    const RiemannTensor& rt, int count = 3);

// ---------------------------------------------------------------------------
// Algebraic engines on Lie groups (left-invariant metrics at the identity).

/// Bi-invariant sectional curvature |[X,Y]|^2/4 over the Gram determinant.
double sec_biinvariant(const AlgVec& x, const AlgVec& y);

/// Sectional curvature of the left-invariant metric g = g0(Phi ., .) on the
/// plane X ^ Y at the identity, via the Koszul formula in a g-orthonormal
/// frame. Reduces to sec_biinvariant when Phi = Id.
class LeftInvariantEngine {
 public:
  LeftInvariantEngine(Alg tag, MetricEndo phi);

  double sec(const AlgVec& x, const AlgVec& y) const;
  Alg tag() const { return tag_; }
  const MetricEndo& phi() const { return phi_; }

 private:
  Alg tag_;
  MetricEndo phi_;
  Eigen::MatrixXd frame_;      // columns: g-orthonormal basis in reference coords
  Eigen::MatrixXd frame_inv_;  // reference coords -> frame coefficients
  std::vector<Eigen::MatrixXd> gamma_;  // gamma_[i](j,k) = g(nabla_{b_i} b_j, b_k)
  std::vector<Eigen::MatrixXd> brk_;    // bracket table in the frame

  Eigen::VectorXd nabla(const Eigen::VectorXd& xi, const Eigen::VectorXd& eta) const;
  Eigen::VectorXd frame_bracket(const Eigen::VectorXd& xi, const Eigen::VectorXd& eta) const;
};

double sec_left_invariant(const AlgVec& x, const AlgVec& y, const MetricEndo& phi);

// ---------------------------------------------------------------------------
// Reference fields used as oracles in tests and cross-validation.

/// Flat Euclidean field of the given dimension.
MetricField euclidean_field(int dim);

/// Round unit sphere S^n in normal coordinates:
/// g = (sin r / r)^2 (I - tt^T/r^2) + tt^T/r^2.
MetricField round_sphere_field(int dim);

/// Group exponential chart of a left-invariant metric: g_ij(t) =
/// g0(Phi zeta_i, zeta_j) with zeta_i = dexp_left(U(t), e_i), U(t) = sum t_a e_a.
MetricField group_chart_field(Alg tag, const MetricEndo& phi, double radius = 0.8);

}  // namespace biorth

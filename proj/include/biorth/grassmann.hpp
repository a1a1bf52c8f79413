#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "biorth/errors.hpp"
#include "biorth/tolerances.hpp"

namespace biorth {

/// Tangent 2-plane as a spanning pair, orthonormal with respect to the Gram
/// matrix of the declared metric at the base point. The base point and metric
/// are carried by the caller (chart-local representation).
struct TwoPlane {
  Eigen::VectorXd u, v;
};

/// Orthonormalize a spanning pair against the Gram matrix; throws
/// DegeneratePlaneError when the pair is numerically dependent.
TwoPlane make_plane(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                    const Eigen::MatrixXd& gram);

double plane_orthonormality_residual(const TwoPlane& p, const Eigen::MatrixXd& gram);

/// Geodesic Grassmannian distance sqrt(theta_1^2 + theta_2^2) from the
/// principal angles between the spans, computed in the Gram inner product.
double plane_distance(const TwoPlane& a, const TwoPlane& b, const Eigen::MatrixXd& gram);

/// Diameter of Gr_2(R^n) in that metric (both principal angles at pi/2 once
/// n >= 4; for n = 3 only one angle can be nonzero).
inline double grassmann_diameter(int n) {
  return n >= 4 ? M_PI * std::sqrt(0.5) : M_PI / 2;
}

/// Gram-orthonormal basis of the orthogonal complement of the plane (n x (n-2)).
Eigen::MatrixXd complement_basis(const TwoPlane& p, const Eigen::MatrixXd& gram);

/// For a 5-dimensional tangent space: the 2-planes inside the 3-dimensional
/// complement form an RP^2 family indexed by the unit normal direction inside
/// the complement (up to sign). `normal` holds coefficients in the complement
/// basis.
TwoPlane complement_plane(const TwoPlane& p, const Eigen::MatrixXd& gram,
                          const Eigen::Vector3d& normal);

/// Deterministic Fibonacci-hemisphere sample of the complement family.
std::vector<Eigen::Vector3d> fibonacci_hemisphere(int count);

struct PlaneScanConfig {
  int family_grid = 100;   // complement-family resolution
  int plane_grid = 4096;   // full-Grassmannian lattice size (default 64^2)
  int refine_seeds = 5;    // Nelder-Mead starts from the best cells
  int nm_max_iter = 300;
  double nm_tol = 1e-13;
  std::uint64_t lattice_seed = 0x5eedULL;  // deterministic lattice stream
};

using SecFn = std::function<double(const TwoPlane&)>;

struct PlaneMinResult {
  double value = 0;
  TwoPlane argmin;
  std::int64_t grid_index = -1;  // lexicographically smallest achieving cell
  double coarse_value = 0;       // grid minimum before refinement
  bool converged = true;
};

/// min over the complement family of sec(sigma'); deterministic grid +
/// Nelder-Mead refinement on the hemisphere chart.
PlaneMinResult min_sec_over_complement(const TwoPlane& sigma, const Eigen::MatrixXd& gram,
                                       const SecFn& sec, const PlaneScanConfig& cfg = {});

/// Biorthogonal curvature (Eq. 1 style): min over sigma' in sigma-perp of
/// (sec(sigma) + sec(sigma'))/2, reported with the achieving plane.
PlaneMinResult biorthogonal_curvature(const TwoPlane& sigma, const Eigen::MatrixXd& gram,
                                      const SecFn& sec, const PlaneScanConfig& cfg = {});

/// Distance curvature (Eq. 2 style): min over sigma' with
/// dist(sigma, sigma') >= theta at the same point. Throws DomainError when
/// theta exceeds the Grassmannian diameter (empty feasible set).
PlaneMinResult distance_curvature(const TwoPlane& sigma, double theta,
                                  const Eigen::MatrixXd& gram, const SecFn& sec,
                                  const PlaneScanConfig& cfg = {});

/// Deterministic lattice over Gr_2(R^n): pairs of Gaussian vectors from a
/// fixed stream, Gram-orthonormalized (Haar-uniform in the Gram metric).
std::vector<TwoPlane> plane_lattice(int n, const Eigen::MatrixXd& gram, int count,
                                    std::uint64_t seed = 0x5eedULL);

// ---------------------------------------------------------------------------

/// Deterministic Nelder-Mead minimizer for the small refinement problems.
struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0;
  bool converged = false;
  int iterations = 0;
};

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, double scale, int max_iter,
                             double tol);

}  // namespace biorth

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "biorth/algebra.hpp"
#include "biorth/curvature.hpp"
#include "biorth/grassmann.hpp"

namespace biorth::wilking {

/// Point of S^2 x S^3 as a pair of orthogonal unit quaternions.
struct S2xS3Point {
  Quat p, v;

  double invariant_residual() const;
  void validate(double tol = default_tolerances().unit_norm) const;
  Eigen::Matrix<double, 8, 1> ambient() const;
  static S2xS3Point from_ambient(const Eigen::Matrix<double, 8, 1>& a);
  static S2xS3Point base() { return {Quat::one(), Quat::i()}; }
};

/// The group action (q1, q2) * (p, v) = (q1 p conj(q2), q1 v conj(q2)).
S2xS3Point act(const Quat& q1, const Quat& q2, const S2xS3Point& x);
S2xS3Point act(const GroupElem& g, const S2xS3Point& x);

/// Closed-form transitivity solve: a group element carrying the base point
/// (1, i) to x (unique up to the isotropy circle).
GroupElem transport_to(const S2xS3Point& x);

/// Lift (a, b) of a point of the double coset space DG \ (G x G) / {1} x H.
struct DoubleCosetRep {
  GroupElem a = GroupElem::identity(Group::Sp1xSp1);
  GroupElem b = GroupElem::identity(Group::Sp1xSp1);
};

/// The diffeomorphism [(a,b)] -> (a^-1 b) * (1, i); constant on double cosets.
S2xS3Point coset_to_point(const DoubleCosetRep& rep);

/// Basis of the 7-dimensional vertical subspace of T_(a,b)(G x G) in left
/// trivialization: {(Ad_{a^-1}X, Ad_{b^-1}X)} + {(0, h)}. Throws on rank
/// deficiency.
Eigen::Matrix<double, 12, 7> vertical_space(const DoubleCosetRep& rep);

/// Finite-difference pushforward of coset_to_point at rep applied to a
/// left-trivialized tangent pair (xi1, xi2) of G x G.
Eigen::Matrix<double, 8, 1> dpi_fd(const DoubleCosetRep& rep, const Eigen::VectorXd& xi12,
                                   double step = 1e-6);

/// Section chart of (S^2 x S^3, g_W) centered at a point: s(t) = (a0, b0 exp(U(t)))
/// with U(t) = sum t_a E_a over a g0-orthonormal complement of the isotropy
/// algebra. Metric components via horizontal projection in (g + g, Phi + Phi).
class WilkingChart {
 public:
  explicit WilkingChart(const S2xS3Point& center,
                        const GroupElem& lift_left = GroupElem::identity(Group::Sp1xSp1));

  const S2xS3Point& center() const { return center_; }

  /// Embedding of chart coordinates into the manifold.
  S2xS3Point embed(const Eigen::VectorXd& t) const;

  /// Metric components (the g_W horizontal-projection formula).
  Eigen::MatrixXd metric(const Eigen::VectorXd& t) const;

  /// MetricField closure over this chart for the FD curvature engine.
  MetricField field(double fd_step = 1e-3, double radius = 0.4) const;

  /// Gauss-Newton inversion: chart coordinates of a nearby manifold point.
  Eigen::VectorXd invert(const S2xS3Point& y, double tol = 1e-12, int max_iter = 40) const;

  /// Ambient pushforward columns d embed / d t_a at t (FD).
  Eigen::Matrix<double, 8, 5> ambient_jacobian(const Eigen::VectorXd& t,
                                               double step = 1e-6) const;

  /// Chart coordinates of an ambient tangent vector at the center (least squares).
  Eigen::VectorXd coords_of_ambient(const Eigen::Matrix<double, 8, 1>& w) const;

  /// Horizontal lift (12-dim, left-trivialized at (a0, b0 exp U)) of the
  /// chart coordinate vector w at parameter t.
  Eigen::VectorXd horizontal_lift(const Eigen::VectorXd& t, const Eigen::VectorXd& w) const;

  /// The lift pair at parameter t as a double-coset representative.
  DoubleCosetRep rep_at(const Eigen::VectorXd& t) const;

 private:
  S2xS3Point center_;
  GroupElem a0_, b0_;
  Eigen::Matrix<double, 6, 5> complement_;  // E_a columns
  mutable std::optional<Eigen::Matrix<double, 8, 5>> jac0_;
};

/// Sectional curvature of g_W at x for the plane given in the chart
/// coordinates of WilkingChart(x).
double sec_gW(const S2xS3Point& x, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// ---------------------------------------------------------------------------
// Flat locus

struct FlatScanConfig {
  int descent_seeds = 96;      // Nelder-Mead descents hunting sphere points
  int descent_rounds = 10;     // slide-stage chart recenterings per descent
  int plane_grid = 96;         // plane lattice for validated min-sec evaluations
  int plane_refine = 3;
  int scan_plane_grid = 48;    // cheaper lattice inside scan objectives
  int refine_iters = 400;      // Nelder-Mead budget of the plane refinement
  int second_iters = 250;      // and of the second-plane search
  double flat_tol = 1e-5;        // |sec| below this counts as flat
  double family_delta = 0.35;    // annulus of the second-flat-plane probe:
  double family_delta_hi = 1.0;  // a flat family has members in [lo, hi];
                                 // isolated orthogonal flats (the crossing
                                 // locus) sit at the diameter and fall outside
  double bfs_spacing = 0.12;   // target cloud spacing when densifying spheres
  int bfs_max_points = 400;    // per sphere (cloud cap = 4x this)
  double cluster_link = 0.55;  // ambient linking radius for clustering
  int min_cluster = 4;         // smaller clusters are discarded as noise
  std::uint64_t seed = 0x5eedULL;

  FlatScanConfig scan_mode() const {
    FlatScanConfig s = *this;
    s.plane_grid = scan_plane_grid;
    s.plane_refine = 1;
    s.refine_iters = 150;
    s.second_iters = 120;
    return s;
  }
};

struct AtlasPoint {
  S2xS3Point x;
  double min_sec = 0;     // refined minimum of sec over planes at x
  double second_sec = 0;  // minimum over planes family_delta away from the argmin
  int hessian_null = 0;   // near-zero eigenvalues of the plane Hessian at the argmin
  int cluster = -1;
  Eigen::Matrix<double, 8, 2> tangent;  // ambient tangent frame of the sphere
};

struct FlatLocusAtlas {
  std::vector<AtlasPoint> points;      // sphere cloud (S^1-family locus)
  std::vector<S2xS3Point> z_points;    // flat-locus points without the family marker
  int cluster_count = 0;
  bool verified_four = false;          // cluster_count == 4 at this resolution
  double sec_floor = 0;                // most negative sec seen in the scan
  FlatScanConfig config;

  std::vector<int> cluster_sizes() const;
  std::string to_json() const;
  static FlatLocusAtlas from_json(const std::string& text);
  void save(const std::string& path) const;
  static FlatLocusAtlas load(const std::string& path);
};

/// Minimum of sec over tangent planes at a point, from one curvature tensor:
/// deterministic lattice + Nelder-Mead refinement over spanning pairs.
struct MinPlaneResult {
  double value = 0;
  TwoPlane plane;         // chart coordinates
  double second_value = 0;
  int hessian_null = 0;
};
MinPlaneResult min_plane_sec(const RiemannTensor& rt, const FlatScanConfig& cfg,
                             bool with_second = false);

/// Near-zero eigenvalue count of the 6x6 plane Hessian of sec at a flat
/// plane: the local dimension marker of a flat family through it.
int plane_hessian_null(const RiemannTensor& rt, const TwoPlane& plane);

/// Minimum of sec over the continued family curve through a (near-)flat
/// plane, restricted to Grassmann distances [family_delta, family_delta_hi]
/// from it. The S^1-family marker used by the flat-locus scan.
double family_walk_sec(const RiemannTensor& rt, const TwoPlane& plane,
                       const FlatScanConfig& cfg);

/// Scan for the flat locus: descend min-plane sec (plus a second-plane term)
/// to the spheres carrying one-parameter flat families, densify each sphere by
/// tangent-step BFS, cluster, and attach tangent frames.
FlatLocusAtlas find_flat_locus(const FlatScanConfig& cfg = {});

/// Draw a deterministic quasi-uniform sample of points (via the group action).
std::vector<S2xS3Point> sample_points(int count, std::uint64_t seed);

}  // namespace biorth::wilking

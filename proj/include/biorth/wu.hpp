#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "biorth/algebra.hpp"
#include "biorth/curvature.hpp"
#include "biorth/grassmann.hpp"
#include "biorth/interval.hpp"

namespace biorth::wu {

/// Horizontal 2-plane at the identity of SU(3): a g0-orthonormal pair in
/// so(3)-perp. Tangent space of the Wu manifold at the base coset.
struct HorizontalPlane {
  AlgVec x, y;
};

/// Validates horizontality and orthonormality; throws on violation.
HorizontalPlane make_horizontal_plane(const AlgVec& x, const AlgVec& y,
                                      double tol = default_tolerances().unit_norm);

/// Sectional curvature of the symmetric-space metric on the projected plane:
/// |[X,Y]|^2 over the Gram determinant (the proportionality constant is
/// cross-validated against the finite-difference engine; see fit_sec_constant).
double sec_wu(const HorizontalPlane& p);
double sec_wu_raw(const AlgVec& x, const AlgVec& y);

/// Coefficients in the horizontal basis {-i l1, -i l3, -i l4, -i l6, -i l8}
/// <-> su(3) vectors.
AlgVec horizontal_from_coeffs(const Eigen::VectorXd& c5);
Eigen::VectorXd coeffs_from_horizontal(const AlgVec& x);

/// Ad_{euler_rotation(x,y,z)} applied to the reference flat pair
/// (-i lambda_3, -i lambda_8); output commutes and stays horizontal.
HorizontalPlane flat_plane_from_euler(double x, double y, double z);

/// The four inner products <la, Ad_{r^-1 r'} lb> as closed trigonometric
/// forms and as direct matrix traces; the two routes must agree.
struct TraceResidual {
  double x = 0, y = 0, z = 0;
  double e11 = 0, e18 = 0, e81 = 0, e88 = 0;  // closed forms
  double d11 = 0, d18 = 0, d81 = 0, d88 = 0;  // direct matrix evaluation
  double mismatch() const;
  double max_abs() const;
};

/// Evaluates both routes; throws SolverFailure (computation-integrity error)
/// if they disagree beyond tol.
TraceResidual trace_system(double x, double y, double z, double tol = 1e-12);

/// Closed forms alone (hot path for grids; no cross-check).
void trace_closed(double x, double y, double z, double out[4]);

/// Interval enclosures of the four closed forms over a box of Euler angles.
void trace_closed_interval(const Interval& x, const Interval& y, const Interval& z,
                           Interval out[4]);

/// 5-dimensional quotient chart of SU(3)/SO(3) at the base coset; metric from
/// horizontal projections of section pushforwards (identity at t = 0).
MetricField wu_quotient_field(double radius = 0.45);

/// Cross-validate the algebraic curvature constant against the FD engine:
/// returns the least-squares c over sampled non-flat planes of
/// sec_fd = c * sec_algebraic.
double fit_sec_constant(int samples = 100, std::uint64_t seed = 0x5eedULL);

// ---------------------------------------------------------------------------

struct InfeasibilityConfig {
  std::string method = "interval";  // or "grid-lipschitz"
  double target = 0.2;              // bound to certify
  int max_depth = 40;               // interval: max subdivision depth
  std::int64_t max_boxes = 20'000'000;
  long grid_n = 160;                // grid-lipschitz: centers per axis
};

struct InfeasibilityCert {
  std::string method;
  bool certified = false;
  double bound = 0;        // certified lower bound L for max residual
  double target = 0;
  std::int64_t boxes = 0;  // interval boxes processed / grid cells
  int depth_reached = 0;
  double lipschitz = 0;    // grid method only
  /// Residual of the system at the origin (sanity anchor, equals 1 from e88/e11).
  double origin_residual = 0;
};

/// Rigorous positive lower bound for max(|e11|,|e18|,|e81|,|e88|) over
/// [0,2pi]^3, by interval branch-and-bound or a Lipschitz grid. Never returns
/// a silent pass: certified=false carries the best bound found.
InfeasibilityCert infeasibility_certificate(const InfeasibilityConfig& cfg = {});

// ---------------------------------------------------------------------------

struct WuScanConfig {
  int plane_grid = 4096;      // outer sigma lattice over Gr_2
  int complement_grid = 100;  // inner family resolution
  int euler_grid = 12;        // flat-family seeds per Euler axis
  int refine_seeds = 5;
  std::uint64_t seed = 0x5eedULL;
};

struct BiorthScanResult {
  double min_biorth = 0;          // minimum biorthogonal curvature found
  TwoPlane argmin_sigma;          // achieving sigma (coefficients, base coset)
  TwoPlane argmin_sigma_perp;     // achieving complement plane
  double min_plain_sec = 0;       // refined minimum of plain sec over planes
  TwoPlane argmin_plain;          // achieving plane
  double flat_orbit_distance = 0; // Grassmann distance of argmin_plain to the Ad orbit
  bool converged = true;
};

/// Prop.-1.4-style scan at the base coset: minimum biorthogonal curvature over
/// a plane lattice + the flat Euler family, with refinement; plus the plain
/// sectional minimum and its distance to the Ad-orbit of the reference plane.
BiorthScanResult biorth_wu_at_base(const WuScanConfig& cfg = {});

/// Distance from a plane to the flat family {Ad_r (l3 ^ l8)} by Euler-grid
/// seeding + Nelder-Mead.
double distance_to_flat_orbit(const TwoPlane& sigma, int euler_grid = 12);

}  // namespace biorth::wu

#pragma once

namespace biorth {

/// Central numerical tolerance knobs. Property tests and invariant checks all
/// read from one instance so the whole suite can be tightened or loosened in
/// one place.
struct Tolerances {
  double unit_norm = 1e-12;        // group-element / point normalization
  double isometry = 1e-10;         // Ad-invariance, re-framing invariance
  double structure = 1e-12;        // structure constants vs dense commutators
  double jacobi = 1e-12;           // Jacobi identity residual
  double plane_orthonorm = 1e-10;  // TwoPlane orthonormality
  double degenerate_gram = 1e-12;  // below this a plane is ill-posed, not flat
  double fd_converge = 1e-6;       // Richardson step-halving agreement
  double flat_sec = 1e-5;          // |sec| below this counts as a flat plane
  double sec_noise_floor = 5e-5;   // FD noise bound used by nonnegativity scans
};

inline const Tolerances& default_tolerances() {
  static const Tolerances t{};
  return t;
}

}  // namespace biorth

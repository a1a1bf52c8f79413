#pragma once

#include <cmath>
#include <ostream>

#include <Eigen/Dense>

namespace biorth {

/// Hamilton quaternion w + xi + yj + zk with ij = k. Conjugation flips the
/// imaginary part; <x,y> = Re(conj(x) y) is the Euclidean inner product on R^4.
struct Quat {
  double w = 0, x = 0, y = 0, z = 0;

  Quat() = default;
  Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

  static Quat one() { return {1, 0, 0, 0}; }
  static Quat i() { return {0, 1, 0, 0}; }
  static Quat j() { return {0, 0, 1, 0}; }
  static Quat k() { return {0, 0, 0, 1}; }
  static Quat pure(const Eigen::Vector3d& v) { return {0, v[0], v[1], v[2]}; }

  Eigen::Vector3d imag() const { return {x, y, z}; }
  Quat conj() const { return {w, -x, -y, -z}; }
  double norm2() const { return w * w + x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }

  Quat operator+(const Quat& q) const { return {w + q.w, x + q.x, y + q.y, z + q.z}; }
  Quat operator-(const Quat& q) const { return {w - q.w, x - q.x, y - q.y, z - q.z}; }
  Quat operator-() const { return {-w, -x, -y, -z}; }
  Quat operator*(double s) const { return {w * s, x * s, y * s, z * s}; }

  Quat operator*(const Quat& q) const {
    return {w * q.w - x * q.x - y * q.y - z * q.z,
            w * q.x + x * q.w + y * q.z - z * q.y,
            w * q.y - x * q.z + y * q.w + z * q.x,
            w * q.z + x * q.y - y * q.x + z * q.w};
  }

  Quat inverse() const {
    const double n2 = norm2();
    return {w / n2, -x / n2, -y / n2, -z / n2};
  }

  Quat normalized() const {
    const double n = norm();
    return {w / n, x / n, y / n, z / n};
  }
};

inline Quat operator*(double s, const Quat& q) { return q * s; }

inline double inner(const Quat& a, const Quat& b) {
  return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;  // Re(conj(a) b)
}

/// exp of a pure-imaginary quaternion: exp(theta n) = cos theta + sin theta n.
inline Quat quat_exp_pure(const Quat& v) {
  const double th = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  if (th < 1e-300) return {1, v.x, v.y, v.z};
  const double c = std::cos(th), s = std::sin(th) / th;
  return {c, s * v.x, s * v.y, s * v.z};
}

inline std::ostream& operator<<(std::ostream& os, const Quat& q) {
  return os << "(" << q.w << ", " << q.x << ", " << q.y << ", " << q.z << ")";
}

}  // namespace biorth

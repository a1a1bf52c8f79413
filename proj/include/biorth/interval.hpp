#pragma once

#include <algorithm>
#include <cmath>

namespace biorth {

/// Closed interval with outward rounding after every elementary operation.
/// Enough machinery for rigorous enclosures of the trigonometric closed forms
/// certified by the Wu infeasibility pass; not a general-purpose library.
struct Interval {
  double lo = 0, hi = 0;

  Interval() = default;
  Interval(double a, double b) : lo(a), hi(b) {}
  static Interval point(double x) { return {x, x}; }

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return lo <= x && x <= hi; }

  /// Lower bound of |value| over the interval (0 if it straddles zero).
  double abs_lower() const { return lo > 0 ? lo : (hi < 0 ? -hi : 0.0); }
  /// Upper bound of |value|.
  double abs_upper() const { return std::max(std::abs(lo), std::abs(hi)); }
};

namespace detail {
inline double down(double x) { return std::nextafter(x, -INFINITY); }
inline double up(double x) { return std::nextafter(x, INFINITY); }
/// Wider slack for libm calls whose rounding is not provably faithful.
inline double down4(double x) {
  for (int i = 0; i < 4; ++i) x = down(x);
  return x;
}
inline double up4(double x) {
  for (int i = 0; i < 4; ++i) x = up(x);
  return x;
}
}  // namespace detail

inline Interval operator+(const Interval& a, const Interval& b) {
  return {detail::down(a.lo + b.lo), detail::up(a.hi + b.hi)};
}
inline Interval operator-(const Interval& a, const Interval& b) {
  return {detail::down(a.lo - b.hi), detail::up(a.hi - b.lo)};
}
inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

inline Interval operator*(const Interval& a, const Interval& b) {
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return {detail::down(std::min({p1, p2, p3, p4})), detail::up(std::max({p1, p2, p3, p4}))};
}

inline Interval operator*(double s, const Interval& a) { return Interval::point(s) * a; }

inline Interval sqr(const Interval& a) {
  const double l2 = a.lo * a.lo, h2 = a.hi * a.hi;
  if (a.contains(0.0)) return {0.0, detail::up(std::max(l2, h2))};
  return {detail::down(std::min(l2, h2)), detail::up(std::max(l2, h2))};
}

/// Enclosure of sin over [a.lo, a.hi]: endpoint values plus any interior
/// critical points pi/2 + k pi. Candidate extrema are located with a slack so
/// that rounding of k can only add candidates (the hull stays an enclosure).
Interval interval_sin(const Interval& a);
Interval interval_cos(const Interval& a);

}  // namespace biorth

#include "biorth/interval.hpp"

namespace biorth {

namespace {

/// Shared kernel: range of sin over [lo, hi], critical points at pi/2 + k pi.
Interval sin_range(double lo, double hi) {
  if (hi - lo >= 2 * M_PI) return {-1.0, 1.0};
  double mn = std::min(std::sin(lo), std::sin(hi));
  double mx = std::max(std::sin(lo), std::sin(hi));
  // Interior extrema: t = pi/2 + k pi in [lo, hi]; the index window is padded
  // by one so double-rounding of the bounds can only add candidates.
  const long k0 = long(std::floor((lo - M_PI_2) / M_PI)) - 1;
  const long k1 = long(std::ceil((hi - M_PI_2) / M_PI)) + 1;
  for (long k = k0; k <= k1; ++k) {
    const double t = M_PI_2 + double(k) * M_PI;
    if (t > lo && t < hi) {
      if (k % 2 == 0)
        mx = 1.0;
      else
        mn = -1.0;
    }
  }
  return {std::max(-1.0, detail::down4(mn)), std::min(1.0, detail::up4(mx))};
}

}  // namespace

Interval interval_sin(const Interval& a) { return sin_range(a.lo, a.hi); }

Interval interval_cos(const Interval& a) {
  // cos(t) = sin(t + pi/2); shift with outward rounding.
  return sin_range(detail::down(a.lo + M_PI_2), detail::up(a.hi + M_PI_2));
}

}  // namespace biorth

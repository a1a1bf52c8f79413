#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace biorth::scan {

/// Execution policy for the grid kernels. Every parallel kernel has a serial
/// twin with identical semantics; the reductions are order-independent
/// (min with smallest-index tie-break), so both policies produce bit-identical
/// results and the serial path stays in the test suite as the reference.
enum class Exec { serial, openmp };

struct ArgMin {
  double value = std::numeric_limits<double>::infinity();
  std::int64_t index = -1;
};

inline ArgMin merge(const ArgMin& a, const ArgMin& b) {
  if (b.value < a.value) return b;
  if (b.value > a.value) return a;
  // Exact tie: deterministic lexicographic winner.
  return (b.index >= 0 && (a.index < 0 || b.index < a.index)) ? b : a;
}

/// Minimum of f(i) over i in [0, n) with deterministic index tie-break.
ArgMin arg_min(std::int64_t n, const std::function<double(std::int64_t)>& f,
               Exec exec = Exec::openmp);

/// Evaluate f(i) into a dense table (parallel map; output order fixed by index).
std::vector<double> map_table(std::int64_t n, const std::function<double(std::int64_t)>& f,
                              Exec exec = Exec::openmp);

/// Smallest k values of f with their indices, sorted ascending (value, index);
/// deterministic irrespective of thread count. Used to seed refinements.
std::vector<ArgMin> k_smallest(std::int64_t n, const std::function<double(std::int64_t)>& f,
                               int k, Exec exec = Exec::openmp);

/// Number of threads the openmp policy would use right now.
int worker_count();
void set_worker_count(int n);

}  // namespace biorth::scan

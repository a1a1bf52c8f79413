#include "biorth/scan.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace biorth::scan {

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_worker_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

ArgMin arg_min(std::int64_t n, const std::function<double(std::int64_t)>& f, Exec exec) {
  ArgMin best;
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) best = merge(best, ArgMin{f(i), i});
    return best;
  }
#ifdef _OPENMP
#pragma omp parallel
  {
    ArgMin local;
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) local = merge(local, ArgMin{f(i), i});
#pragma omp critical(biorth_argmin)
    best = merge(best, local);
  }
  return best;
#else
  return arg_min(n, f, Exec::serial);
#endif
}

std::vector<double> map_table(std::int64_t n, const std::function<double(std::int64_t)>& f,
                              Exec exec) {
  std::vector<double> out(static_cast<size_t>(n));
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) out[static_cast<size_t>(i)] = f(i);
    return out;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) out[static_cast<size_t>(i)] = f(i);
  return out;
#else
  return map_table(n, f, Exec::serial);
#endif
}

std::vector<ArgMin> k_smallest(std::int64_t n, const std::function<double(std::int64_t)>& f,
                               int k, Exec exec) {
  const std::vector<double> vals = map_table(n, f, exec);
  std::vector<ArgMin> all(vals.size());
  for (std::int64_t i = 0; i < n; ++i) all[static_cast<size_t>(i)] = {vals[static_cast<size_t>(i)], i};
  const auto cmp = [](const ArgMin& a, const ArgMin& b) {
    return a.value != b.value ? a.value < b.value : a.index < b.index;
  };
  const size_t kk = std::min<size_t>(static_cast<size_t>(std::max(k, 0)), all.size());
  std::partial_sort(all.begin(), all.begin() + kk, all.end(), cmp);
  all.resize(kk);
  return all;
}

}  // namespace biorth::scan

#include <doctest.h>

#include <cmath>

#include "biorth/scan.hpp"

using namespace biorth;

TEST_CASE("arg_min: serial and openmp agree bit-for-bit") {
  auto f = [](std::int64_t i) { return std::sin(0.1 * double(i)) + 1e-9 * double(i % 7); };
  const auto s = scan::arg_min(100000, f, scan::Exec::serial);
  const auto p = scan::arg_min(100000, f, scan::Exec::openmp);
  CHECK(s.index == p.index);
  CHECK(s.value == p.value);  // exact, not approximate
}

TEST_CASE("arg_min: exact ties resolve to the smallest index") {
  auto f = [](std::int64_t i) { return (i % 10 == 3) ? -1.0 : 0.0; };
  const auto s = scan::arg_min(1000, f, scan::Exec::serial);
  const auto p = scan::arg_min(1000, f, scan::Exec::openmp);
  CHECK(s.index == 3);
  CHECK(p.index == 3);
}

TEST_CASE("map_table: parallel result identical to serial") {
  auto f = [](std::int64_t i) { return std::cos(double(i) * 0.01); };
  const auto a = scan::map_table(5000, f, scan::Exec::serial);
  const auto b = scan::map_table(5000, f, scan::Exec::openmp);
  CHECK(a == b);
}

TEST_CASE("k_smallest: sorted ascending with deterministic index order") {
  auto f = [](std::int64_t i) { return double((i * 7919) % 101); };
  const auto k = scan::k_smallest(101, f, 5, scan::Exec::openmp);
  REQUIRE(k.size() == 5);
  for (size_t i = 1; i < k.size(); ++i) {
    const bool ordered = k[i - 1].value < k[i].value ||
                         (k[i - 1].value == k[i].value && k[i - 1].index < k[i].index);
    CHECK(ordered);
  }
  const auto ks = scan::k_smallest(101, f, 5, scan::Exec::serial);
  for (size_t i = 0; i < k.size(); ++i) {
    CHECK(k[i].index == ks[i].index);
    CHECK(k[i].value == ks[i].value);
  }
}

TEST_CASE("worker_count: setting a count is honored and reductions stay stable") {
  const int before = scan::worker_count();
  scan::set_worker_count(1);
  auto f = [](std::int64_t i) { return -double(i % 997) / (1.0 + double(i)); };
  const auto one = scan::arg_min(20000, f, scan::Exec::openmp);
  scan::set_worker_count(before);
  const auto many = scan::arg_min(20000, f, scan::Exec::openmp);
  CHECK(one.index == many.index);
  CHECK(one.value == many.value);
}

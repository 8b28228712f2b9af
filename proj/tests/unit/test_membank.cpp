#include <cmath>
#include <deque>
#include <sstream>

#include "doctest.h"
#include "tcl/memory_bank.hpp"
#include "tcl/rng.hpp"
#include "tcl/text.hpp"

using namespace tcl;

namespace {

Tensor unit_keys(Rng& r, std::size_t b, std::size_t d) {
  Tensor t = Tensor::zeros({b, d});
  for (std::size_t i = 0; i < b; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      t.at(i, j) = r.gaussian();
      sq += t.at(i, j) * t.at(i, j);
    }
    const double n = std::sqrt(sq);
    for (std::size_t j = 0; j < d; ++j) t.at(i, j) /= n;
  }
  return t;
}

}  // namespace

TEST_SUITE_BEGIN("membank");

TEST_CASE("eviction keeps the newest entries and the step counter never reuses") {
  Rng r(1);
  MemoryBank bank(8, 4, 3);
  for (int i = 0; i < 8; ++i) bank.enqueue(unit_keys(r, 1, 4), {i % 3});
  CHECK(bank.size() == 8);
  CHECK(bank.entry(0).step == 0);
  bank.enqueue(unit_keys(r, 3, 4), {0, 1, 2});
  CHECK(bank.size() == 8);
  // three oldest evicted; steps now 3..10
  for (std::size_t i = 0; i < 8; ++i) CHECK(bank.entry(i).step == 3 + i);
  CHECK(bank.next_step() == 11);
}

TEST_CASE("validation rejects oversize batches, bad labels, and non-unit keys") {
  Rng r(2);
  MemoryBank bank(4, 4, 3);
  CHECK_THROWS_AS(bank.enqueue(unit_keys(r, 5, 4), {0, 1, 2, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(bank.enqueue(unit_keys(r, 1, 4), {3}), std::invalid_argument);
  CHECK_THROWS_AS(bank.enqueue(unit_keys(r, 1, 4), {-1}), std::invalid_argument);
  Tensor k = unit_keys(r, 1, 4);
  for (auto& v : k.values) v *= 1.5;
  CHECK_THROWS_AS(bank.enqueue(k, {0}), std::invalid_argument);
  CHECK(bank.size() == 0);  // failed enqueues leave no partial state
}

TEST_CASE("select_by_label partitions the bank exactly") {
  Rng r(3);
  MemoryBank bank(16, 4, 4);
  for (int i = 0; i < 20; ++i) bank.enqueue(unit_keys(r, 1, 4), {i % 4});
  for (int c = 0; c < 4; ++c) {
    auto pos = bank.select_by_label(c, true);
    auto neg = bank.select_by_label(c, false);
    CHECK(pos.labels.size() + neg.labels.size() == bank.size());
    for (int l : pos.labels) CHECK(l == c);
    for (int l : neg.labels) CHECK(l != c);
  }
}

TEST_CASE("random enqueue sequences track a deque simulation exactly") {
  Rng r(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t cap = 1 + r.below(12);
    const std::size_t d = 2 + r.below(5);
    const int classes = 2 + static_cast<int>(r.below(4));
    MemoryBank bank(cap, d, classes);
    std::deque<std::pair<std::vector<double>, int>> ref;
    std::uint64_t ref_step = 0;
    const int ops = 1 + static_cast<int>(r.below(20));
    for (int o = 0; o < ops; ++o) {
      const std::size_t b = 1 + r.below(cap);
      Tensor keys = unit_keys(r, b, d);
      std::vector<int> labels(b);
      for (auto& l : labels) l = static_cast<int>(r.below(classes));
      bank.enqueue(keys, labels);
      for (std::size_t i = 0; i < b; ++i) {
        ref.emplace_back(
            std::vector<double>(keys.values.begin() + i * d, keys.values.begin() + (i + 1) * d),
            labels[i]);
        ++ref_step;
        if (ref.size() > cap) ref.pop_front();
      }
      REQUIRE(bank.size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) {
        REQUIRE(bank.entry(i).key == ref[i].first);
        REQUIRE(bank.entry(i).label == ref[i].second);
        REQUIRE(bank.entry(i).step == ref_step - ref.size() + i);
      }
    }
  }
}

TEST_CASE("snapshot is oldest-first and matches entry()") {
  Rng r(5);
  MemoryBank bank(6, 3, 2);
  for (int i = 0; i < 9; ++i) bank.enqueue(unit_keys(r, 1, 3), {i % 2});
  auto v = bank.snapshot();
  REQUIRE(v.keys.rows() == bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) {
    CHECK(v.steps[i] == bank.entry(i).step);
    CHECK(v.labels[i] == bank.entry(i).label);
    for (std::size_t j = 0; j < 3; ++j) CHECK(v.keys.at(i, j) == bank.entry(i).key[j]);
    if (i) CHECK(v.steps[i] == v.steps[i - 1] + 1);
  }
}

TEST_CASE("csv dump has one row per entry and round-trips the keys") {
  Rng r(6);
  MemoryBank bank(5, 3, 2);
  bank.enqueue(unit_keys(r, 4, 3), {0, 1, 0, 1});
  std::ostringstream os;
  dump_memory_csv(os, bank, 7);
  auto lines = split(os.str(), '\n');
  REQUIRE(lines.back().empty());
  lines.pop_back();
  REQUIRE(lines.size() == 1 + bank.size());
  CHECK(lines[0] == "step,domain,label,k_0,k_1,k_2");
  for (std::size_t i = 0; i < bank.size(); ++i) {
    auto cells = split(lines[1 + i], ',');
    REQUIRE(cells.size() == 6);
    CHECK(parse_int(cells[0]) == static_cast<long long>(bank.entry(i).step));
    CHECK(parse_int(cells[1]) == 7);
    CHECK(parse_int(cells[2]) == bank.entry(i).label);
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(parse_double(cells[3 + j]) == bank.entry(i).key[j]);  // exact round-trip
  }
}

TEST_SUITE_END();

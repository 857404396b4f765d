#include <cmath>
#include <cstddef>
#include <set>
#include <vector>

#include "doctest.h"
#include "sttl/linalg.hpp"
#include "sttl/replay.hpp"
#include "sttl/rng.hpp"

using sttl::Matrix;
using sttl::ReplayBuffer;
using sttl::Rng;
using sttl::Transition;

namespace {

// A transition whose every field encodes its identity, so sampled rows can be
// checked for internal consistency.
Transition tagged(double id) {
  Transition tr;
  tr.state = {id, id + 10.0};
  tr.action = {id + 20.0};
  tr.reward = id;
  tr.next_state = {id + 30.0, id + 40.0};
  tr.done = static_cast<long long>(id) % 2 == 1;
  return tr;
}

}  // namespace

TEST_CASE("buffer grows to capacity and then holds steady") {
  ReplayBuffer buf(5, 2, 1);
  CHECK(buf.size() == 0);
  CHECK(buf.capacity() == 5);
  for (int i = 0; i < 9; ++i) {
    buf.add(tagged(static_cast<double>(i)));
    CHECK(buf.size() == static_cast<std::size_t>(std::min(i + 1, 5)));
  }
}

TEST_CASE("overwrite evicts oldest entries first") {
  ReplayBuffer buf(4, 2, 1);
  for (int i = 0; i < 6; ++i) buf.add(tagged(static_cast<double>(i)));
  CHECK(buf.size() == 4);

  // Entries 0 and 1 were overwritten by 4 and 5; 2 and 3 survive.
  Rng rng(17);
  Matrix s, a, s2;
  std::vector<double> r;
  std::vector<char> d;
  std::set<double> seen;
  for (int round = 0; round < 200; ++round) {
    buf.sample(4, rng, s, a, s2, r, d);
    seen.insert(r.begin(), r.end());
  }
  CHECK(seen == std::set<double>{2.0, 3.0, 4.0, 5.0});
}

TEST_CASE("sampled rows keep state, action, reward, and flag aligned") {
  ReplayBuffer buf(16, 2, 1);
  for (int i = 0; i < 16; ++i) buf.add(tagged(static_cast<double>(i)));

  Rng rng(23);
  Matrix s, a, s2;
  std::vector<double> r;
  std::vector<char> d;
  buf.sample(12, rng, s, a, s2, r, d);
  REQUIRE(s.rows == 12);
  REQUIRE(s.cols == 2);
  REQUIRE(a.cols == 1);
  REQUIRE(s2.cols == 2);
  for (int row = 0; row < 12; ++row) {
    const double id = r[static_cast<std::size_t>(row)];
    CHECK(s.at(row, 0) == id);
    CHECK(s.at(row, 1) == id + 10.0);
    CHECK(a.at(row, 0) == id + 20.0);
    CHECK(s2.at(row, 0) == id + 30.0);
    CHECK(s2.at(row, 1) == id + 40.0);
    CHECK((d[static_cast<std::size_t>(row)] != 0) ==
          (static_cast<long long>(id) % 2 == 1));
  }
}

TEST_CASE("sampling is uniform over the stored entries") {
  ReplayBuffer buf(8, 2, 1);
  for (int i = 0; i < 8; ++i) buf.add(tagged(static_cast<double>(i)));

  Rng rng(31);
  Matrix s, a, s2;
  std::vector<double> r;
  std::vector<char> d;
  std::vector<int> counts(8, 0);
  const int draws = 10000;
  for (int round = 0; round < draws; ++round) {
    buf.sample(4, rng, s, a, s2, r, d);
    for (const double id : r) ++counts[static_cast<std::size_t>(id)];
  }
  // 40000 draws over 8 slots: expectation 5000, standard deviation ~66.
  for (const int c : counts) CHECK(std::abs(c - 5000) < 350);
}

// Copyright 2026 the poisonrec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include "doctest.h"
#include "poisonrec/errors.hpp"
#include "poisonrec/ratings.hpp"
#include "support/oracles.hpp"

using namespace poisonrec;

TEST_SUITE("ratings") {

TEST_CASE("stores entries and rejects duplicates") {
  RatingsMatrix m(3, 4);
  m.add(0, 1, 4.0);
  m.add(0, 3, 2.5);
  m.add(2, 1, 5.0);
  CHECK(m.n_entries() == 3);
  CHECK(m.rating(0, 1) == 4.0);
  CHECK(!m.rating(1, 1).has_value());
  CHECK_THROWS_AS(m.add(0, 1, 3.0), DuplicateEntryError);
}

TEST_CASE("rejects out-of-range values and indices") {
  RatingsMatrix m(2, 2);
  CHECK_THROWS_AS(m.add(0, 0, 0.5), InvalidInputError);
  CHECK_THROWS_AS(m.add(0, 0, 5.5), InvalidInputError);
  CHECK_THROWS_AS(m.add(2, 0, 3.0), InvalidInputError);
  CHECK_THROWS_AS(m.add(0, 2, 3.0), InvalidInputError);
}

TEST_CASE("user and item views are exact inverses of the entry set") {
  std::mt19937_64 rng(7);
  auto m = poisonrec::testing::random_ratings(rng, 25, 18, 0.2);

  std::size_t via_users = 0;
  for (int u = 0; u < m.n_users(); ++u) {
    for (const auto& [item, value] : m.items_of(u)) {
      ++via_users;
      const auto& col = m.users_of(item);
      bool found = false;
      for (const auto& [user, v2] : col) {
        if (user == u) {
          found = true;
          CHECK(v2 == value);
        }
      }
      CHECK(found);
    }
  }
  std::size_t via_items = 0;
  for (int j = 0; j < m.n_items(); ++j) via_items += m.users_of(j).size();
  CHECK(via_users == m.n_entries());
  CHECK(via_items == m.n_entries());
}

TEST_CASE("entries come back in (user, item) order") {
  RatingsMatrix m(3, 3);
  m.add(2, 0, 1.0);
  m.add(0, 2, 2.0);
  m.add(0, 1, 3.0);
  const auto e = m.entries();
  REQUIRE(e.size() == 3);
  CHECK(e[0] == RatingEntry{0, 1, 3.0});
  CHECK(e[1] == RatingEntry{0, 2, 2.0});
  CHECK(e[2] == RatingEntry{2, 0, 1.0});
}

TEST_CASE("same_entries compares content") {
  RatingsMatrix a(2, 2), b(2, 2);
  a.add(0, 0, 3.0);
  b.add(0, 0, 3.0);
  CHECK(a.same_entries(b));
  b.add(1, 1, 4.0);
  CHECK(!a.same_entries(b));
}

}  // TEST_SUITE

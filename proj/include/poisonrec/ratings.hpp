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

#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace poisonrec {

struct RatingEntry {
  int user;
  int item;
  double value;

  friend bool operator==(const RatingEntry&, const RatingEntry&) = default;
};

// Sparse user x item ratings with both orientations kept in sync: items_of(i)
// is the set of items rated by user i, users_of(j) the set of users rating
// item j. Ratings live in [1, 5]; duplicate (user, item) pairs are rejected.
class RatingsMatrix {
 public:
  static constexpr double kMinRating = 1.0;
  static constexpr double kMaxRating = 5.0;

  RatingsMatrix(int n_users, int n_items);

  void add(int user, int item, double value);

  int n_users() const { return n_users_; }
  int n_items() const { return n_items_; }
  std::size_t n_entries() const { return n_entries_; }

  // Sorted by item id.
  const std::vector<std::pair<int, double>>& items_of(int user) const;
  // Sorted by user id.
  const std::vector<std::pair<int, double>>& users_of(int item) const;

  std::optional<double> rating(int user, int item) const;

  // All entries in (user asc, item asc) order.
  std::vector<RatingEntry> entries() const;

  // Same dimensions and same entry set.
  bool same_entries(const RatingsMatrix& other) const;

 private:
  int n_users_;
  int n_items_;
  std::size_t n_entries_ = 0;
  std::vector<std::vector<std::pair<int, double>>> by_user_;
  std::vector<std::vector<std::pair<int, double>>> by_item_;
};

}  // namespace poisonrec

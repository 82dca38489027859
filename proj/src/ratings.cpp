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

#include "poisonrec/ratings.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "poisonrec/errors.hpp"

namespace poisonrec {

namespace {

// Insert (key, value) into a vector sorted by key; throws on duplicate key.
void sorted_insert(std::vector<std::pair<int, double>>& vec, int key, double value,
                   const char* what) {
  auto it = std::lower_bound(vec.begin(), vec.end(), key,
                             [](const auto& p, int k) { return p.first < k; });
  if (it != vec.end() && it->first == key) {
    throw DuplicateEntryError(std::string("duplicate rating for ") + what);
  }
  vec.insert(it, {key, value});
}

}  // namespace

RatingsMatrix::RatingsMatrix(int n_users, int n_items)
    : n_users_(n_users), n_items_(n_items) {
  if (n_users < 0 || n_items < 0) {
    throw InvalidInputError("ratings matrix dimensions must be non-negative");
  }
  by_user_.resize(static_cast<std::size_t>(n_users));
  by_item_.resize(static_cast<std::size_t>(n_items));
}

void RatingsMatrix::add(int user, int item, double value) {
  if (user < 0 || user >= n_users_ || item < 0 || item >= n_items_) {
    throw InvalidInputError("rating index (" + std::to_string(user) + ", " +
                            std::to_string(item) + ") out of range");
  }
  if (!std::isfinite(value) || value < kMinRating || value > kMaxRating) {
    throw InvalidInputError("rating value " + std::to_string(value) +
                            " outside [" + std::to_string(kMinRating) + ", " +
                            std::to_string(kMaxRating) + "]");
  }
  const std::string where = "user " + std::to_string(user) + ", item " + std::to_string(item);
  sorted_insert(by_user_[static_cast<std::size_t>(user)], item, value, where.c_str());
  sorted_insert(by_item_[static_cast<std::size_t>(item)], user, value, where.c_str());
  ++n_entries_;
}

const std::vector<std::pair<int, double>>& RatingsMatrix::items_of(int user) const {
  if (user < 0 || user >= n_users_) {
    throw InvalidInputError("user id " + std::to_string(user) + " out of range");
  }
  return by_user_[static_cast<std::size_t>(user)];
}

const std::vector<std::pair<int, double>>& RatingsMatrix::users_of(int item) const {
  if (item < 0 || item >= n_items_) {
    throw InvalidInputError("item id " + std::to_string(item) + " out of range");
  }
  return by_item_[static_cast<std::size_t>(item)];
}

std::optional<double> RatingsMatrix::rating(int user, int item) const {
  const auto& row = items_of(user);
  auto it = std::lower_bound(row.begin(), row.end(), item,
                             [](const auto& p, int k) { return p.first < k; });
  if (it != row.end() && it->first == item) return it->second;
  return std::nullopt;
}

std::vector<RatingEntry> RatingsMatrix::entries() const {
  std::vector<RatingEntry> out;
  out.reserve(n_entries_);
  for (int u = 0; u < n_users_; ++u) {
    for (const auto& [item, value] : by_user_[static_cast<std::size_t>(u)]) {
      out.push_back({u, item, value});
    }
  }
  return out;
}

bool RatingsMatrix::same_entries(const RatingsMatrix& other) const {
  return n_users_ == other.n_users_ && n_items_ == other.n_items_ &&
         n_entries_ == other.n_entries_ && by_user_ == other.by_user_;
}

}  // namespace poisonrec

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

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"
#include "poisonrec/cluster_stats.hpp"
#include "poisonrec/ratings.hpp"

namespace poisonrec {

// Description of one fake-user injection: m fake users who each rate the
// target item at target_rating and every filler item with Gaussian noise
// around the target cluster's mean rating.
struct AttackSpec {
  int target_cluster = 0;
  int target_item = 0;
  int fake_user_count = 1;        // m; every fake rates the target item once
  std::vector<int> filler_items;  // must not contain target_item
  double filler_sigma = 0.1;
  double target_rating = 5.0;
  // Fake filler ratings stay continuous in [1, 5] by default; set this to
  // discretise them to integers instead.
  bool round_filler_ratings = false;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const AttackSpec& spec);
AttackSpec attack_spec_from_json(const nlohmann::json& j);

struct FakeProfileSet {
  // One row per fake user: (item, rating) pairs sorted by item. Every row
  // rates exactly the filler set plus the target item.
  std::vector<std::vector<std::pair<int, double>>> rows;
  AttackSpec provenance;
  // Optional explicit user ids (otherwise inject() appends after true users).
  std::optional<std::vector<int>> user_ids;
};

// Seeded uniform draw from the items whose global empirical mean is at or
// below `threshold`. `global_means` holds per-item means with NaN for
// unrated items.
int select_target_item(const std::vector<double>& global_means, double threshold,
                       std::uint64_t seed);

// Builds the m fake rating rows. Filler ratings are drawn per row from
// Normal(mean_t(j), filler_sigma) and clamped into [1, 5]; sigma = 0 yields
// the cluster mean exactly. Rows use independently derived seeds.
FakeProfileSet build_fake_profiles(const AttackSpec& spec, const ClusterRatingStats& stats);

struct InjectResult {
  RatingsMatrix matrix;
  std::vector<int> fake_ids;
};

// Appends the fake users to the matrix. True entries are copied untouched.
InjectResult inject(const RatingsMatrix& ratings, const FakeProfileSet& fakes);

// Fraction of fake users the post-attack clustering placed in the target.
double fake_entry_rate(const ClusterModel& post_attack, const std::vector<int>& fake_ids,
                       int target);

}  // namespace poisonrec

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
#include <vector>

#include "poisonrec/cluster_stats.hpp"
#include "poisonrec/clustering.hpp"
#include "poisonrec/ratings.hpp"

namespace poisonrec {

struct GeneratedDataset {
  RatingsMatrix ratings;
  // Ground-truth generating cluster per user; users are laid out in
  // contiguous cluster blocks (cluster 0 first).
  std::vector<int> cluster_of_user;
};

// Resamples users from the per-cluster empirical rating distributions: for
// every (cluster g, item j) the fraction of generated cluster-g users rating
// j matches the baseline fraction (rounded half-up), with rating values drawn
// from the (g, j) pmf. The baseline requires at least 250 users per generated
// cluster so the re-factorised cluster centres stay put. The target item can
// be excluded here; its ratings are placed separately with exact counts.
GeneratedDataset generate_users(const ClusterRatingStats& dists, const RatingsMatrix& baseline,
                                const ClusterModel& baseline_clusters,
                                const std::vector<int>& users_per_cluster, std::uint64_t seed,
                                std::optional<int> exclude_item = std::nullopt);

// Gives the target item exactly counts[g] raters in every cluster g, sampled
// uniformly without replacement, with values drawn from the (g, j*) pmf
// (falling back to the cluster-wide marginal when the baseline never saw the
// pair). All other items are untouched.
RatingsMatrix place_target_item(const RatingsMatrix& matrix,
                                const std::vector<int>& cluster_of_user, int target_item,
                                const std::vector<int>& counts, const ClusterRatingStats& dists,
                                std::uint64_t seed);

// Deterministic synthetic baseline with the structure the experiments need:
// k user blocks; a shared block of popular items everyone rates densely; one
// "genre" block per cluster rated high in-cluster and low elsewhere (natural
// distinguishers); a low-global-mean pool of promotion candidates; and a
// mid-rated filler pool. Ratings are integers in 1..5.
struct DemoBaselineConfig {
  int users_per_cluster = 250;
  int n_items = 400;
  int k = 4;
  std::uint64_t seed = 1;
};

struct DemoBaseline {
  RatingsMatrix ratings;
  std::vector<int> block_of_user;  // generating block per user
};

DemoBaseline demo_baseline(const DemoBaselineConfig& config);

}  // namespace poisonrec

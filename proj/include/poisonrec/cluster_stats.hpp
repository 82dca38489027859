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

#include <array>
#include <vector>

#include "poisonrec/clustering.hpp"
#include "poisonrec/ratings.hpp"

namespace poisonrec {

// Empirical rating statistics for one (cluster, item) pair. The pmf buckets
// ratings at the integers 1..5 (non-integer ratings bucket to the nearest);
// mean and variance use the raw values. Variance is the population variance.
struct ItemClusterStats {
  int count = 0;
  double mean = 0.0;
  double variance = 0.0;
  std::array<double, 5> pmf{};

  bool present() const { return count > 0; }
};

class ClusterRatingStats {
 public:
  ClusterRatingStats(int k, int n_items);

  int k() const { return k_; }
  int n_items() const { return n_items_; }

  const ItemClusterStats& at(int cluster, int item) const;

  // Totals over clusters.
  int item_count(int item) const;
  double item_mean(int item) const;  // undefined (NaN) when the item is unrated

  // Marginal rating pmf of one cluster over all items it rated.
  std::array<double, 5> cluster_pmf(int cluster) const;

 private:
  friend ClusterRatingStats cluster_rating_stats(const RatingsMatrix&, const ClusterModel&);
  int k_;
  int n_items_;
  std::vector<ItemClusterStats> cells_;  // k * n_items, cluster-major
};

// Exact per-(cluster, item) mean / variance / count / pmf over the observed
// ratings. Every user must be assigned.
ClusterRatingStats cluster_rating_stats(const RatingsMatrix& ratings,
                                        const ClusterModel& clusters);

// Per-item global means (NaN for unrated items), in item order.
std::vector<double> global_item_means(const ClusterRatingStats& stats);

struct DistinguisherList {
  std::vector<int> items;  // best first
  bool shortage = false;   // fewer eligible items than requested
};

// Items ranked by how sharply the target cluster prefers them:
//   score(j) = (mean_t(j) - max over other clusters of mean_g(j)) - w * var_t(j)
// Items unrated in the target cluster are excluded. When no other cluster
// rated an item the gap is taken against the minimum rating.
DistinguisherList distinguisher_items(const ClusterRatingStats& stats, int target, int count,
                                      double variance_weight = 1.0);

}  // namespace poisonrec

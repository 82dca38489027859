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

#include "poisonrec/cluster_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "poisonrec/errors.hpp"

namespace poisonrec {

namespace {

int pmf_bucket(double value) {
  const int b = static_cast<int>(std::llround(value));
  return std::clamp(b, 1, 5) - 1;
}

}  // namespace

ClusterRatingStats::ClusterRatingStats(int k, int n_items) : k_(k), n_items_(n_items) {
  if (k < 1 || n_items < 0) throw InvalidInputError("cluster stats: bad dimensions");
  cells_.resize(static_cast<std::size_t>(k) * static_cast<std::size_t>(n_items));
}

const ItemClusterStats& ClusterRatingStats::at(int cluster, int item) const {
  if (cluster < 0 || cluster >= k_ || item < 0 || item >= n_items_) {
    throw InvalidInputError("cluster stats: index out of range");
  }
  return cells_[static_cast<std::size_t>(cluster) * static_cast<std::size_t>(n_items_) +
                static_cast<std::size_t>(item)];
}

int ClusterRatingStats::item_count(int item) const {
  int total = 0;
  for (int g = 0; g < k_; ++g) total += at(g, item).count;
  return total;
}

double ClusterRatingStats::item_mean(int item) const {
  double sum = 0.0;
  int count = 0;
  for (int g = 0; g < k_; ++g) {
    const auto& cell = at(g, item);
    sum += cell.mean * cell.count;
    count += cell.count;
  }
  if (count == 0) return std::numeric_limits<double>::quiet_NaN();
  return sum / count;
}

std::array<double, 5> ClusterRatingStats::cluster_pmf(int cluster) const {
  std::array<double, 5> acc{};
  double total = 0.0;
  for (int j = 0; j < n_items_; ++j) {
    const auto& cell = at(cluster, j);
    for (int b = 0; b < 5; ++b) acc[static_cast<std::size_t>(b)] += cell.pmf[static_cast<std::size_t>(b)] * cell.count;
    total += cell.count;
  }
  if (total > 0.0) {
    for (auto& v : acc) v /= total;
  }
  return acc;
}

ClusterRatingStats cluster_rating_stats(const RatingsMatrix& ratings,
                                        const ClusterModel& clusters) {
  if (static_cast<int>(clusters.assignment.size()) != ratings.n_users()) {
    throw InvalidInputError("cluster_rating_stats: every rater must be assigned");
  }
  ClusterRatingStats stats(clusters.k, ratings.n_items());

  struct Acc {
    long count = 0;
    double sum = 0.0;
    double sumsq = 0.0;
    std::array<long, 5> hist{};
  };
  std::vector<Acc> acc(stats.cells_.size());

  for (int u = 0; u < ratings.n_users(); ++u) {
    const int g = clusters.assignment[static_cast<std::size_t>(u)];
    if (g < 0 || g >= clusters.k) {
      throw InvalidInputError("cluster_rating_stats: assignment out of range");
    }
    for (const auto& [item, value] : ratings.items_of(u)) {
      Acc& a = acc[static_cast<std::size_t>(g) * static_cast<std::size_t>(ratings.n_items()) +
                   static_cast<std::size_t>(item)];
      ++a.count;
      a.sum += value;
      a.sumsq += value * value;
      ++a.hist[static_cast<std::size_t>(pmf_bucket(value))];
    }
  }

  for (std::size_t i = 0; i < acc.size(); ++i) {
    const Acc& a = acc[i];
    ItemClusterStats& cell = stats.cells_[i];
    cell.count = static_cast<int>(a.count);
    if (a.count == 0) continue;
    cell.mean = a.sum / static_cast<double>(a.count);
    cell.variance = std::max(0.0, a.sumsq / static_cast<double>(a.count) - cell.mean * cell.mean);
    for (int b = 0; b < 5; ++b) {
      cell.pmf[static_cast<std::size_t>(b)] =
          static_cast<double>(a.hist[static_cast<std::size_t>(b)]) / static_cast<double>(a.count);
    }
  }
  return stats;
}

std::vector<double> global_item_means(const ClusterRatingStats& stats) {
  std::vector<double> means(static_cast<std::size_t>(stats.n_items()));
  for (int j = 0; j < stats.n_items(); ++j) {
    means[static_cast<std::size_t>(j)] = stats.item_mean(j);
  }
  return means;
}

DistinguisherList distinguisher_items(const ClusterRatingStats& stats, int target, int count,
                                      double variance_weight) {
  if (target < 0 || target >= stats.k()) {
    throw InvalidInputError("distinguisher_items: target cluster out of range");
  }
  if (count < 1) throw InvalidInputError("distinguisher_items: count must be >= 1");

  struct Scored {
    int item;
    double score;
  };
  std::vector<Scored> scored;
  for (int j = 0; j < stats.n_items(); ++j) {
    const auto& own = stats.at(target, j);
    if (!own.present()) continue;
    double other_best = RatingsMatrix::kMinRating;
    bool any_other = false;
    for (int g = 0; g < stats.k(); ++g) {
      if (g == target) continue;
      const auto& cell = stats.at(g, j);
      if (!cell.present()) continue;
      other_best = any_other ? std::max(other_best, cell.mean) : cell.mean;
      any_other = true;
    }
    const double gap = own.mean - other_best;
    scored.push_back({j, gap - variance_weight * own.variance});
  }

  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item < b.item;
  });

  DistinguisherList out;
  out.shortage = static_cast<int>(scored.size()) < count;
  const int take = std::min<int>(count, static_cast<int>(scored.size()));
  out.items.reserve(static_cast<std::size_t>(take));
  for (int i = 0; i < take; ++i) out.items.push_back(scored[static_cast<std::size_t>(i)].item);
  return out;
}

}  // namespace poisonrec

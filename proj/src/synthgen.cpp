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

#include "poisonrec/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "poisonrec/errors.hpp"
#include "poisonrec/rng.hpp"

namespace poisonrec {

namespace {

constexpr int kMinUsersPerCluster = 250;

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

double draw_pmf(const std::array<double, 5>& pmf, Rng& rng) {
  const double u = uniform_unit(rng);
  double acc = 0.0;
  for (int b = 0; b < 5; ++b) {
    acc += pmf[static_cast<std::size_t>(b)];
    if (u < acc) return static_cast<double>(b + 1);
  }
  return 5.0;
}

bool pmf_empty(const std::array<double, 5>& pmf) {
  return std::accumulate(pmf.begin(), pmf.end(), 0.0) <= 0.0;
}

// First `count` positions of a seeded partial Fisher-Yates shuffle of 0..n-1,
// returned sorted so downstream inserts stay cheap.
std::vector<int> sample_without_replacement(int population, int count, Rng& rng) {
  std::vector<int> pool(static_cast<std::size_t>(population));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, population - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(count));
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<int> cluster_populations(const ClusterModel& clusters) {
  std::vector<int> pop(static_cast<std::size_t>(clusters.k), 0);
  for (int a : clusters.assignment) {
    if (a < 0 || a >= clusters.k) throw InvalidInputError("assignment out of range");
    ++pop[static_cast<std::size_t>(a)];
  }
  return pop;
}

}  // namespace

GeneratedDataset generate_users(const ClusterRatingStats& dists, const RatingsMatrix& baseline,
                                const ClusterModel& baseline_clusters,
                                const std::vector<int>& users_per_cluster, std::uint64_t seed,
                                std::optional<int> exclude_item) {
  const int k = dists.k();
  if (baseline_clusters.k != k) {
    throw InvalidInputError("generate_users: cluster count mismatch between stats and model");
  }
  if (static_cast<int>(users_per_cluster.size()) != k) {
    throw InvalidInputError("generate_users: users_per_cluster must have one entry per cluster");
  }
  if (dists.n_items() != baseline.n_items()) {
    throw InvalidInputError("generate_users: stats built for a different item set");
  }
  for (int g = 0; g < k; ++g) {
    if (users_per_cluster[static_cast<std::size_t>(g)] < kMinUsersPerCluster) {
      throw InvalidInputError("generate_users: need at least " +
                              std::to_string(kMinUsersPerCluster) + " users per cluster");
    }
  }
  if (exclude_item.has_value() &&
      (*exclude_item < 0 || *exclude_item >= baseline.n_items())) {
    throw InvalidInputError("generate_users: excluded item out of range");
  }

  const std::vector<int> baseline_pop = cluster_populations(baseline_clusters);
  const int n_items = baseline.n_items();

  std::vector<int> offsets(static_cast<std::size_t>(k) + 1, 0);
  for (int g = 0; g < k; ++g) {
    offsets[static_cast<std::size_t>(g) + 1] =
        offsets[static_cast<std::size_t>(g)] + users_per_cluster[static_cast<std::size_t>(g)];
  }
  const int total_users = offsets.back();

  GeneratedDataset out{RatingsMatrix(total_users, n_items), {}};
  out.cluster_of_user.resize(static_cast<std::size_t>(total_users));
  for (int g = 0; g < k; ++g) {
    std::fill(out.cluster_of_user.begin() + offsets[static_cast<std::size_t>(g)],
              out.cluster_of_user.begin() + offsets[static_cast<std::size_t>(g) + 1], g);
  }

  for (int g = 0; g < k; ++g) {
    const int pop = baseline_pop[static_cast<std::size_t>(g)];
    const int gen_pop = users_per_cluster[static_cast<std::size_t>(g)];
    if (pop == 0) continue;
    for (int j = 0; j < n_items; ++j) {
      if (exclude_item.has_value() && j == *exclude_item) continue;
      const auto& cell = dists.at(g, j);
      if (!cell.present()) continue;
      const double proportion = static_cast<double>(cell.count) / static_cast<double>(pop);
      const int raters = std::min(gen_pop, round_half_up(proportion * gen_pop));
      if (raters <= 0) continue;
      Rng rng = make_rng(derive_seed(seed, seed_stream::kGenerateUsers,
                                     static_cast<std::uint64_t>(g) * static_cast<std::uint64_t>(n_items) +
                                         static_cast<std::uint64_t>(j)));
      for (int local : sample_without_replacement(gen_pop, raters, rng)) {
        out.ratings.add(offsets[static_cast<std::size_t>(g)] + local, j, draw_pmf(cell.pmf, rng));
      }
    }
  }
  return out;
}

RatingsMatrix place_target_item(const RatingsMatrix& matrix,
                                const std::vector<int>& cluster_of_user, int target_item,
                                const std::vector<int>& counts, const ClusterRatingStats& dists,
                                std::uint64_t seed) {
  const int k = dists.k();
  if (static_cast<int>(counts.size()) != k) {
    throw InvalidInputError("place_target_item: counts must have one entry per cluster");
  }
  if (static_cast<int>(cluster_of_user.size()) != matrix.n_users()) {
    throw InvalidInputError("place_target_item: assignment size mismatch");
  }
  if (target_item < 0 || target_item >= matrix.n_items()) {
    throw InvalidInputError("place_target_item: target item out of range");
  }
  if (!matrix.users_of(target_item).empty()) {
    throw InvalidInputError("place_target_item: target item already has ratings");
  }

  std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
  for (int u = 0; u < matrix.n_users(); ++u) {
    const int g = cluster_of_user[static_cast<std::size_t>(u)];
    if (g < 0 || g >= k) throw InvalidInputError("place_target_item: assignment out of range");
    members[static_cast<std::size_t>(g)].push_back(u);
  }
  for (int g = 0; g < k; ++g) {
    if (counts[static_cast<std::size_t>(g)] < 0 ||
        counts[static_cast<std::size_t>(g)] >
            static_cast<int>(members[static_cast<std::size_t>(g)].size())) {
      throw InvalidInputError("place_target_item: count for cluster " + std::to_string(g) +
                              " exceeds its population");
    }
  }

  RatingsMatrix out(matrix.n_users(), matrix.n_items());
  for (int u = 0; u < matrix.n_users(); ++u) {
    for (const auto& [item, value] : matrix.items_of(u)) out.add(u, item, value);
  }

  for (int g = 0; g < k; ++g) {
    const int want = counts[static_cast<std::size_t>(g)];
    if (want == 0) continue;
    std::array<double, 5> pmf = dists.at(g, target_item).present()
                                    ? dists.at(g, target_item).pmf
                                    : dists.cluster_pmf(g);
    if (pmf_empty(pmf)) {
      throw MissingStatisticError("place_target_item: cluster " + std::to_string(g) +
                                  " has no rating distribution to draw from");
    }
    Rng rng = make_rng(derive_seed(seed, seed_stream::kPlaceTarget, static_cast<std::uint64_t>(g)));
    const auto& pool = members[static_cast<std::size_t>(g)];
    for (int idx : sample_without_replacement(static_cast<int>(pool.size()), want, rng)) {
      out.add(pool[static_cast<std::size_t>(idx)], target_item, draw_pmf(pmf, rng));
    }
  }
  return out;
}

DemoBaseline demo_baseline(const DemoBaselineConfig& config) {
  if (config.k < 2) throw InvalidInputError("demo_baseline: need at least 2 clusters");
  if (config.users_per_cluster < 50) {
    throw InvalidInputError("demo_baseline: need at least 50 users per cluster");
  }
  if (config.n_items < 12 * config.k) {
    throw InvalidInputError("demo_baseline: too few items for the block layout");
  }

  const int k = config.k;
  const int n_items = config.n_items;
  const int pop = config.users_per_cluster;

  const int n_popular = n_items * 15 / 100;
  const int n_genre = std::max(1, n_items * 30 / 100 / k);
  const int n_low = n_items * 25 / 100;
  const int genre_end = n_popular + k * n_genre;
  const int low_end = genre_end + n_low;
  // Remaining items form the mid-rated pool.

  // Cluster 2 (or the last cluster when k < 3) mildly favours the low-mean
  // pool; that keeps promotion candidates' in-cluster predicted ratings in
  // the low threes, where attack outcomes actually pivot.
  const int favored = std::min(2, k - 1);

  Rng meta = make_rng(derive_seed(config.seed, seed_stream::kDemoData, 0));
  auto unif = [&meta](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(meta);
  };

  // Per (cluster, item) rating mean and rater fraction. Non-candidate items
  // share a narrow band of rater-weighted global means (so none strays into
  // the promotion-candidate pool) while their per-cluster deviations form a
  // graded continuum: every cluster has items it mildly to strongly prefers,
  // the way real catalogues do. Categorical blocks of near-clone favourites
  // would collapse the filler Gram onto a couple of directions and bunch
  // item-vector correlations.
  Eigen::MatrixXd mean(k, n_items);
  Eigen::MatrixXd prob(k, n_items);
  std::normal_distribution<double> taste(0.0, 0.65);
  for (int j = 0; j < n_items; ++j) {
    if (j >= genre_end && j < low_end) {
      for (int g = 0; g < k; ++g) {
        mean(g, j) = (g == favored) ? unif(3.05, 3.35) : unif(1.8, 2.8);
        prob(g, j) = 0.15;
      }
      continue;
    }

    const double global_target = unif(3.3, 3.7);
    const bool is_popular = j < n_popular;
    for (int g = 0; g < k; ++g) {
      mean(g, j) = taste(meta);
      prob(g, j) = is_popular ? unif(0.25, 0.55) : unif(0.04, 0.2);
    }
    // Recenter deviations so the rater-weighted mean hits the target band.
    double wsum = 0.0, psum = 0.0;
    for (int g = 0; g < k; ++g) {
      wsum += prob(g, j) * mean(g, j);
      psum += prob(g, j);
    }
    const double offset = global_target - wsum / psum;
    for (int g = 0; g < k; ++g) {
      mean(g, j) = std::clamp(mean(g, j) + offset, 1.2, 4.9);
    }
  }

  DemoBaseline out{RatingsMatrix(k * pop, n_items), {}};
  out.block_of_user.resize(static_cast<std::size_t>(k) * static_cast<std::size_t>(pop));
  for (int g = 0; g < k; ++g) {
    std::fill(out.block_of_user.begin() + static_cast<std::ptrdiff_t>(g) * pop,
              out.block_of_user.begin() + static_cast<std::ptrdiff_t>(g + 1) * pop, g);
  }

  // Per-user generosity offset, applied to every rating the user gives.
  std::vector<double> user_bias(static_cast<std::size_t>(k) * static_cast<std::size_t>(pop));
  {
    std::normal_distribution<double> bias(0.0, 0.2);
    for (auto& b : user_bias) b = bias(meta);
  }

  for (int g = 0; g < k; ++g) {
    for (int j = 0; j < n_items; ++j) {
      const int raters = round_half_up(prob(g, j) * pop);
      if (raters <= 0) continue;
      Rng rng = make_rng(derive_seed(config.seed, seed_stream::kDemoData,
                                     1 + static_cast<std::uint64_t>(g) * static_cast<std::uint64_t>(n_items) +
                                         static_cast<std::uint64_t>(j)));
      std::normal_distribution<double> noise(mean(g, j), 0.35);
      for (int local : sample_without_replacement(pop, raters, rng)) {
        const int user = g * pop + local;
        const double raw = std::llround(noise(rng) + user_bias[static_cast<std::size_t>(user)]);
        out.ratings.add(user, j,
                        std::clamp(raw, RatingsMatrix::kMinRating, RatingsMatrix::kMaxRating));
      }
    }
  }
  return out;
}

}  // namespace poisonrec

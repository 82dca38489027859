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

#include "poisonrec/attack.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "poisonrec/errors.hpp"
#include "poisonrec/rng.hpp"

namespace poisonrec {

void AttackSpec::validate() const {
  if (fake_user_count < 1) throw InvalidInputError("attack spec: need at least one fake user");
  if (filler_sigma < 0.0) throw InvalidInputError("attack spec: negative filler sigma");
  if (target_rating < RatingsMatrix::kMinRating || target_rating > RatingsMatrix::kMaxRating) {
    throw InvalidInputError("attack spec: target rating outside [1, 5]");
  }
  if (std::find(filler_items.begin(), filler_items.end(), target_item) != filler_items.end()) {
    throw InvalidInputError("attack spec: target item listed among fillers");
  }
}

int select_target_item(const std::vector<double>& global_means, double threshold,
                       std::uint64_t seed) {
  std::vector<int> eligible;
  for (std::size_t j = 0; j < global_means.size(); ++j) {
    const double m = global_means[j];
    if (std::isfinite(m) && m <= threshold) eligible.push_back(static_cast<int>(j));
  }
  if (eligible.empty()) {
    throw NoCandidateError("select_target_item: no item with mean <= " +
                           std::to_string(threshold));
  }
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
  return eligible[pick(rng)];
}

FakeProfileSet build_fake_profiles(const AttackSpec& spec, const ClusterRatingStats& stats) {
  spec.validate();
  if (spec.target_cluster < 0 || spec.target_cluster >= stats.k()) {
    throw InvalidInputError("build_fake_profiles: target cluster out of range");
  }

  std::vector<double> filler_means;
  filler_means.reserve(spec.filler_items.size());
  for (int j : spec.filler_items) {
    const auto& cell = stats.at(spec.target_cluster, j);
    if (!cell.present()) {
      throw MissingStatisticError("build_fake_profiles: filler item " + std::to_string(j) +
                                  " unrated in target cluster");
    }
    filler_means.push_back(cell.mean);
  }

  FakeProfileSet out;
  out.provenance = spec;
  out.rows.resize(static_cast<std::size_t>(spec.fake_user_count));
  for (int r = 0; r < spec.fake_user_count; ++r) {
    Rng rng = make_rng(derive_seed(spec.seed, seed_stream::kAttackRows, static_cast<std::uint64_t>(r)));
    auto& row = out.rows[static_cast<std::size_t>(r)];
    row.reserve(spec.filler_items.size() + 1);
    for (std::size_t f = 0; f < spec.filler_items.size(); ++f) {
      double value = filler_means[f];
      if (spec.filler_sigma > 0.0) {
        value = std::normal_distribution<double>(filler_means[f], spec.filler_sigma)(rng);
      }
      if (spec.round_filler_ratings) value = std::llround(value);
      value = std::clamp(value, RatingsMatrix::kMinRating, RatingsMatrix::kMaxRating);
      row.emplace_back(spec.filler_items[f], value);
    }
    row.emplace_back(spec.target_item, spec.target_rating);
    std::sort(row.begin(), row.end());
  }
  return out;
}

InjectResult inject(const RatingsMatrix& ratings, const FakeProfileSet& fakes) {
  const int m = static_cast<int>(fakes.rows.size());

  std::vector<int> ids;
  if (fakes.user_ids.has_value()) {
    ids = *fakes.user_ids;
    if (static_cast<int>(ids.size()) != m) {
      throw InvalidInputError("inject: explicit id count does not match fake rows");
    }
    for (int id : ids) {
      if (id < ratings.n_users()) {
        throw InvalidInputError("inject: fake user id " + std::to_string(id) +
                                " collides with a true user");
      }
    }
  } else {
    ids.resize(static_cast<std::size_t>(m));
    for (int r = 0; r < m; ++r) ids[static_cast<std::size_t>(r)] = ratings.n_users() + r;
  }
  int max_id = ratings.n_users() - 1;
  for (int id : ids) max_id = std::max(max_id, id);

  RatingsMatrix out(max_id + 1, ratings.n_items());
  for (int u = 0; u < ratings.n_users(); ++u) {
    for (const auto& [item, value] : ratings.items_of(u)) out.add(u, item, value);
  }
  for (int r = 0; r < m; ++r) {
    for (const auto& [item, value] : fakes.rows[static_cast<std::size_t>(r)]) {
      out.add(ids[static_cast<std::size_t>(r)], item, value);
    }
  }
  return {std::move(out), std::move(ids)};
}

double fake_entry_rate(const ClusterModel& post_attack, const std::vector<int>& fake_ids,
                       int target) {
  if (fake_ids.empty()) return 0.0;
  int hits = 0;
  for (int id : fake_ids) {
    if (id < 0 || id >= static_cast<int>(post_attack.assignment.size())) {
      throw InvalidInputError("fake_entry_rate: fake id " + std::to_string(id) +
                              " has no cluster assignment");
    }
    if (post_attack.assignment[static_cast<std::size_t>(id)] == target) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(fake_ids.size());
}

nlohmann::json to_json(const AttackSpec& spec) {
  return nlohmann::json{{"target_cluster", spec.target_cluster},
                        {"target_item", spec.target_item},
                        {"fake_user_count", spec.fake_user_count},
                        {"filler_items", spec.filler_items},
                        {"filler_sigma", spec.filler_sigma},
                        {"target_rating", spec.target_rating},
                        {"round_filler_ratings", spec.round_filler_ratings},
                        {"seed", spec.seed}};
}

AttackSpec attack_spec_from_json(const nlohmann::json& j) {
  AttackSpec spec;
  spec.target_cluster = j.at("target_cluster").get<int>();
  spec.target_item = j.at("target_item").get<int>();
  spec.fake_user_count = j.at("fake_user_count").get<int>();
  spec.filler_items = j.at("filler_items").get<std::vector<int>>();
  spec.filler_sigma = j.at("filler_sigma").get<double>();
  spec.target_rating = j.at("target_rating").get<double>();
  spec.round_filler_ratings = j.value("round_filler_ratings", false);
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.validate();
  return spec;
}

}  // namespace poisonrec

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
#include <string>
#include <vector>

#include "json.hpp"
#include "poisonrec/cluster_stats.hpp"
#include "poisonrec/clustering.hpp"
#include "poisonrec/factorization.hpp"
#include "poisonrec/metrics.hpp"
#include "poisonrec/ratings.hpp"
#include "poisonrec/synthgen.hpp"

namespace poisonrec {

// Which factor matrix is frozen when the fake ratings arrive.
enum class Regime { kFixVUpdateU, kFixUUpdateV };

enum class SweepParameter {
  kNOverMFixedV,      // fix-V regime: true-to-fake user ratio in the target cluster
  kNtOverNfTarget,    // fix-U regime: true-to-fake rating ratio, ratings in the target cluster
  kNtOverNfNonTarget, // fix-U regime: rating ratio, ratings in every non-target cluster
  kNOverM,            // fix-U regime: target-cluster population ratio at a fixed rating profile
};

std::string to_string(Regime r);
std::string to_string(SweepParameter p);
Regime regime_from_string(const std::string& s);
SweepParameter sweep_parameter_from_string(const std::string& s);

struct DatasetSource {
  // "demo" (built-in synthetic baseline), "movielens" (u.data layout),
  // "ratings-csv" (user_id,book_id,rating), or "goodreads-subset"
  // (ratings CSV reduced to the densest 1000 x 1682 block).
  std::string source = "demo";
  std::string path;
  int demo_items = 400;
  int demo_users_per_cluster = 250;
  std::uint64_t demo_seed = 7;
};

struct ExperimentConfig {
  int schema_version = 1;
  DatasetSource dataset;

  int latent_dim = 10;
  int clusters = 4;
  double lambda = 0.1;
  int users_per_cluster = 250;

  Regime regime = Regime::kFixVUpdateU;
  SweepParameter sweep_parameter = SweepParameter::kNOverMFixedV;
  std::vector<double> sweep_values = {0.5, 1.0, 1.5, 2.0, 2.5};

  // Per-cluster true-rating counts for the target item; a disengaged value
  // (nullopt, "Nt" in JSON) marks cells filled from the swept ratio.
  std::vector<std::optional<int>> target_profile = {5, 5, 5, 5};

  int fake_count = 100;  // m; also N_f since each fake rates the target once
  int replications = 50;
  int target_cluster = 2;
  double target_mean_threshold = 3.0;
  double filler_sigma = 0.1;
  std::optional<int> filler_count;  // default: fewest items rated by a true user
  bool enforce_fake_entry = false;
  double fake_rating = 5.0;
  double hit_threshold = 4.0;

  int max_sweeps = 100;
  double rel_tol = 1e-6;

  std::uint64_t root_seed = 1;
  std::string output_dir = "out";
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

// Baseline dataset state shared by every replication: parsed or synthesised
// ratings, their factorisation, clustering and per-cluster statistics.
struct BaselinePrep {
  RatingsMatrix ratings;
  FactorModel model;
  ClusterModel clusters;
  ClusterRatingStats stats;
  std::vector<double> global_means;
};

BaselinePrep prepare_baseline(const ExperimentConfig& config);

// Fix-V regime (update U): per replication, generate a dataset from the
// baseline distributions, factorise, cluster, inject distinguisher-filler
// fake users, re-solve every user column with V frozen, warm-start
// re-cluster, and measure relative change / leakage / fake-entry rate.
ExperimentReport run_regime1(const ExperimentConfig& config);

// Fix-U regime (update V): true raters of the target item are idealised to
// their cluster centres, fake columns sit exactly at the target centre, and
// the target item vector is updated with the rank-m block formula.
ExperimentReport run_regime2(const ExperimentConfig& config);

// Dispatches on config.regime.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Writes aggregate.csv, replications.csv, hits.csv, mechanics.csv (fix-U
// runs), manifest.json and optionally report.json into `dir`. Returns the
// paths written. Identical reports produce byte-identical files.
std::vector<std::string> emit_outputs(const ExperimentReport& report, const std::string& format,
                                      const std::string& dir);

}  // namespace poisonrec

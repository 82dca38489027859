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

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "poisonrec/clustering.hpp"
#include "poisonrec/factorization.hpp"

namespace poisonrec {

// Change in predicted rating relative to the maximum deviation possible:
//   (mu_f - mu_o) / |r_max - mu_o|
// Undefined (SaturatedItemError) when the item already sits at r_max.
double relative_change(double mu_o, double mu_f, double r_max = 5.0);

// Modified hit: the post-attack predicted rating reaches the recommendation
// threshold.
bool hit(double pred_after, double threshold = 4.0);

// Per-cluster relative change of the target item's predicted rating,
// computed from cluster centres and the item vector before and after.
std::vector<double> leakage_profile(const Eigen::MatrixXd& centers_before,
                                    const Eigen::VectorXd& item_before,
                                    const Eigen::MatrixXd& centers_after,
                                    const Eigen::VectorXd& item_after, double r_max = 5.0);

std::vector<double> leakage_profile(const FactorModel& before_model,
                                    const ClusterModel& before_clusters,
                                    const FactorModel& after_model,
                                    const ClusterModel& after_clusters, int target_item,
                                    double r_max = 5.0);

struct CorrDeltaPoint {
  int item;
  double correlation;  // Pearson correlation of V_j with V_{j*}
  double delta;        // change in the item's predicted rating in the target cluster
};

struct CorrDeltaSeries {
  std::vector<CorrDeltaPoint> points;
  std::vector<int> excluded_items;  // zero-variance item vectors
};

// Pairs every non-target item's vector correlation with the target item
// against the rating change induced by the target-cluster centre shift.
CorrDeltaSeries correlation_vs_delta(const Eigen::MatrixXd& item_factors, int target_item,
                                     const Eigen::VectorXd& center_before,
                                     const Eigen::VectorXd& center_after);

// Pearson correlation of two equally sized samples; NaN if either has zero
// variance.
double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Spearman rank correlation (average ranks on ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// ----- experiment report ---------------------------------------------------

struct ReplicationRecord {
  double param = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;

  int target_item = -1;
  int fake_count = 0;
  std::vector<double> mu_before;    // per cluster
  std::vector<double> mu_after;     // per cluster
  std::vector<double> rel_change;   // per cluster
  bool hit_before = false;          // target cluster
  bool hit_after = false;
  double entry_rate = 0.0;
  double spearman_corr_delta = 0.0;      // regime 1 only
  std::vector<double> feature_delta;     // regime 2 only, length d
};

struct SweepAggregate {
  double param = 0.0;
  int n_ok = 0;
  double mean = 0.0;    // target-cluster relative change
  double stddev = 0.0;  // sample standard deviation over replications
  double stderror = 0.0;
  std::vector<double> leakage_mean;  // per cluster
  double hit_before_rate = 0.0;
  double hit_after_rate = 0.0;
  double entry_rate_mean = 0.0;
  double spearman_mean = 0.0;
  std::vector<double> feature_delta_mean;
};

struct ExperimentReport {
  nlohmann::json config;  // full config echo, defaults included
  int target_cluster = 0;
  std::vector<double> sweep_values;
  std::vector<ReplicationRecord> replications;
  std::vector<SweepAggregate> aggregates;
  std::vector<std::string> warnings;
  Eigen::VectorXd target_center_mean;  // mean pre-attack target centre over replications
};

// Recomputes the aggregates from the per-replication records. Failed
// replications are excluded; an all-failed sweep point aggregates to NaN.
std::vector<SweepAggregate> aggregate_replications(const std::vector<double>& sweep_values,
                                                   const std::vector<ReplicationRecord>& reps,
                                                   int target_cluster);

nlohmann::json to_json(const ExperimentReport& report);

}  // namespace poisonrec

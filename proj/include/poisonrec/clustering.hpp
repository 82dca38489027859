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
#include <optional>
#include <vector>

#include "json.hpp"

namespace poisonrec {

// k-means result over user factor columns. Column g of `centers` is the
// cluster weight vector; assignment maps user index -> cluster index.
struct ClusterModel {
  int k = 0;
  Eigen::MatrixXd centers;      // d x k
  std::vector<int> assignment;  // size n_users
};

nlohmann::json to_json(const ClusterModel& model);
ClusterModel cluster_model_from_json(const nlohmann::json& j);

struct KMeansOptions {
  int max_iters = 100;
  std::uint64_t seed = 0;
  // Explicit initial centres (d x k). When absent, k-means++ seeding is used.
  std::optional<Eigen::MatrixXd> initial_centers;
  // Optional per-point pins: pinned[i] in [0, k) forces point i into that
  // cluster (it still contributes to the centre mean); -1 leaves it free.
  std::optional<std::vector<int>> pinned;
};

struct KMeansResult {
  ClusterModel model;
  std::vector<double> wcss_trace;  // within-cluster SSE after each iteration
  int iterations = 0;
  bool converged = false;
};

// Lloyd's iterations until the assignment is stable or max_iters is reached.
// Nearest-centre ties break toward the lowest cluster index; an emptied
// cluster is repaired by adopting the point farthest from its centre.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& options = {});

// Re-clusters with Lloyd's iterations initialised at previously converged
// centres, so membership changes reflect the new points rather than fresh
// random initial conditions. With no new points this is an exact fixed point.
KMeansResult warm_start_assign(const Eigen::MatrixXd& points,
                               const Eigen::MatrixXd& prior_centers, int max_iters = 100,
                               const std::optional<std::vector<int>>& pinned = std::nullopt);

}  // namespace poisonrec

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
#include "poisonrec/ratings.hpp"

namespace poisonrec {

// Latent-factor model: columns of user_factors / item_factors are per-user /
// per-item weight vectors of length d, and the predicted rating for (i, j)
// is the inner product of the two columns.
struct FactorModel {
  int d = 0;
  double lambda = 0.0;
  Eigen::MatrixXd user_factors;  // d x n_users
  Eigen::MatrixXd item_factors;  // d x n_items
};

nlohmann::json to_json(const FactorModel& model);
FactorModel factor_model_from_json(const nlohmann::json& j);

// Inner product of a user (or cluster) weight vector with an item vector.
// Predictions are deliberately not clamped to the rating range.
double predict(const Eigen::VectorXd& weight, const Eigen::VectorXd& item);

// Regularised squared-error cost over the observed entries:
//   sum (R_ij - U_i^T V_j)^2 + lambda * (sum ||U_i||^2 + sum ||V_j||^2)
double objective(const RatingsMatrix& ratings, const FactorModel& model);

// Ridge solve for one user given the item vectors of the items they rated:
//   (sum V_j V_j^T + lambda I)^-1 sum V_j R_ij
// Throws ColdStartError when no ratings are supplied.
Eigen::VectorXd solve_user(const Eigen::MatrixXd& rated_item_factors,
                           const Eigen::VectorXd& ratings, double lambda);

// Mirror image for one item given the vectors of the users who rated it.
Eigen::VectorXd solve_item(const Eigen::MatrixXd& rater_factors,
                           const Eigen::VectorXd& ratings, double lambda);

struct FactorizeOptions {
  int d = 10;
  double lambda = 0.1;
  int max_sweeps = 100;
  double rel_tol = 1e-6;  // stop when the relative objective decrease per sweep is below this
  std::uint64_t seed = 0;
  // Warm starts. When present they replace the seeded uniform(-0.5, 0.5) init.
  std::optional<Eigen::MatrixXd> init_user_factors;
  std::optional<Eigen::MatrixXd> init_item_factors;
};

struct FactorizeResult {
  FactorModel model;
  // objective_trace[0] is the initial objective, then one value per sweep.
  std::vector<double> objective_trace;
  int sweeps = 0;
  bool converged = false;
  // Users/items with no observed ratings; their columns are zero.
  std::vector<int> cold_users;
  std::vector<int> cold_items;
};

// Alternating least squares on the cost above: each sweep solves every user
// column given V, then every item column given U. The objective is
// non-increasing across sweeps.
FactorizeResult factorize(const RatingsMatrix& ratings, const FactorizeOptions& options);

// One fixed-V pass: re-solves every user column of `model` against the given
// ratings, leaving items untouched. Users with no ratings get zero columns
// (indices returned). Deterministic: identical inputs give identical columns.
Eigen::MatrixXd solve_all_users(const RatingsMatrix& ratings,
                                const Eigen::MatrixXd& item_factors, double lambda,
                                std::vector<int>* cold_users = nullptr);

}  // namespace poisonrec

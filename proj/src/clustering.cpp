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

#include "poisonrec/clustering.hpp"

#include <algorithm>
#include <limits>

#include "poisonrec/errors.hpp"
#include "poisonrec/rng.hpp"

namespace poisonrec {

namespace {

int nearest_center(const Eigen::MatrixXd& centers, const Eigen::VectorXd& point) {
  int best = 0;
  double best_d = (centers.col(0) - point).squaredNorm();
  for (int c = 1; c < centers.cols(); ++c) {
    const double d = (centers.col(c) - point).squaredNorm();
    if (d < best_d) {  // strict: ties keep the lowest index
      best_d = d;
      best = c;
    }
  }
  return best;
}

Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& points, int k, Rng& rng) {
  const Eigen::Index n = points.cols();
  Eigen::MatrixXd centers(points.rows(), k);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.col(0) = points.col(first(rng));

  Eigen::VectorXd dist = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], (points.col(i) - centers.col(c - 1)).squaredNorm());
    }
    const double total = dist.sum();
    if (total <= 0.0) {
      // All remaining points coincide with chosen centres; reuse any point.
      centers.col(c) = points.col(first(rng));
      continue;
    }
    double u = uniform_unit(rng) * total;
    Eigen::Index pick = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      u -= dist[i];
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    centers.col(c) = points.col(pick);
  }
  return centers;
}

void update_centers(const Eigen::MatrixXd& points, const std::vector<int>& assignment,
                    Eigen::MatrixXd& centers, std::vector<int>& sizes) {
  const int k = static_cast<int>(centers.cols());
  sizes.assign(static_cast<std::size_t>(k), 0);
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(centers.rows(), k);
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    const int c = assignment[static_cast<std::size_t>(i)];
    sums.col(c) += points.col(i);
    ++sizes[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] > 0) {
      centers.col(c) = sums.col(c) / sizes[static_cast<std::size_t>(c)];
    }
    // An empty cluster keeps its previous centre; repair happens upstream.
  }
}

double wcss(const Eigen::MatrixXd& points, const std::vector<int>& assignment,
            const Eigen::MatrixXd& centers) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    total += (points.col(i) - centers.col(assignment[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return total;
}

KMeansResult lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centers, int max_iters,
                   const std::vector<int>& pinned) {
  const Eigen::Index n = points.cols();
  const int k = static_cast<int>(centers.cols());

  KMeansResult result;
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  std::vector<int> sizes;

  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int pin = pinned.empty() ? -1 : pinned[static_cast<std::size_t>(i)];
      const int c = pin >= 0 ? pin : nearest_center(centers, points.col(i));
      if (c != assignment[static_cast<std::size_t>(i)]) {
        assignment[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }

    // Repair emptied clusters with the free point farthest from its centre.
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int a : assignment) ++counts[static_cast<std::size_t>(a)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index donor = -1;
      double worst = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int a = assignment[static_cast<std::size_t>(i)];
        const bool is_pinned = !pinned.empty() && pinned[static_cast<std::size_t>(i)] >= 0;
        if (is_pinned || counts[static_cast<std::size_t>(a)] <= 1) continue;
        const double d = (points.col(i) - centers.col(a)).squaredNorm();
        if (d > worst) {
          worst = d;
          donor = i;
        }
      }
      if (donor >= 0) {
        --counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(donor)])];
        assignment[static_cast<std::size_t>(donor)] = c;
        ++counts[static_cast<std::size_t>(c)];
        changed = true;
      }
    }

    update_centers(points, assignment, centers, sizes);
    result.wcss_trace.push_back(wcss(points, assignment, centers));
    result.iterations = iter + 1;
    if (!changed) {
      result.converged = true;
      break;
    }
  }

  result.model.k = k;
  result.model.centers = std::move(centers);
  result.model.assignment = std::move(assignment);
  return result;
}

std::vector<int> checked_pins(const std::optional<std::vector<int>>& pinned, Eigen::Index n,
                              int k) {
  if (!pinned.has_value()) return {};
  if (static_cast<Eigen::Index>(pinned->size()) != n) {
    throw InvalidInputError("kmeans: pinned assignment length mismatch");
  }
  for (int p : *pinned) {
    if (p < -1 || p >= k) throw InvalidInputError("kmeans: pinned cluster index out of range");
  }
  return *pinned;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& options) {
  const Eigen::Index n = points.cols();
  if (k < 1 || n < k) {
    throw InvalidInputError("kmeans: need n >= k >= 1");
  }
  if (!points.allFinite()) throw NumericalError("kmeans: non-finite points");

  Eigen::MatrixXd centers;
  if (options.initial_centers.has_value()) {
    if (options.initial_centers->rows() != points.rows() ||
        options.initial_centers->cols() != k) {
      throw InvalidInputError("kmeans: initial centres have wrong shape");
    }
    centers = *options.initial_centers;
  } else {
    Rng rng = make_rng(options.seed);
    centers = kmeanspp_seed(points, k, rng);
  }
  return lloyd(points, std::move(centers), options.max_iters,
               checked_pins(options.pinned, n, k));
}

KMeansResult warm_start_assign(const Eigen::MatrixXd& points,
                               const Eigen::MatrixXd& prior_centers, int max_iters,
                               const std::optional<std::vector<int>>& pinned) {
  if (prior_centers.rows() != points.rows()) {
    throw InvalidInputError("warm_start_assign: centre dimension mismatch");
  }
  const int k = static_cast<int>(prior_centers.cols());
  if (k < 1 || points.cols() < k) {
    throw InvalidInputError("warm_start_assign: need at least k points");
  }
  if (!points.allFinite() || !prior_centers.allFinite()) {
    throw NumericalError("warm_start_assign: non-finite input");
  }
  return lloyd(points, prior_centers, max_iters, checked_pins(pinned, points.cols(), k));
}

nlohmann::json to_json(const ClusterModel& model) {
  return nlohmann::json{
      {"k", model.k},
      {"d", model.centers.rows()},
      {"centers", std::vector<double>(model.centers.data(),
                                      model.centers.data() + model.centers.size())},
      {"assignment", model.assignment}};
}

ClusterModel cluster_model_from_json(const nlohmann::json& j) {
  ClusterModel model;
  model.k = j.at("k").get<int>();
  const auto d = j.at("d").get<Eigen::Index>();
  const auto centers = j.at("centers").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(centers.size()) != d * model.k) {
    throw InvalidInputError("cluster model JSON: centre size inconsistent");
  }
  model.centers = Eigen::Map<const Eigen::MatrixXd>(centers.data(), d, model.k);
  model.assignment = j.at("assignment").get<std::vector<int>>();
  return model;
}

}  // namespace poisonrec

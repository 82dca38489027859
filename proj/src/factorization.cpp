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

#include "poisonrec/factorization.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <atomic>
#include <cmath>
#include <iostream>

#include "poisonrec/errors.hpp"
#include "poisonrec/rng.hpp"

namespace poisonrec {

namespace {

std::atomic<long> g_llt_fallbacks{0};

// SPD solve via Cholesky; falls back to a pivoted LU with a one-line warning
// if the factorisation fails numerically.
Eigen::VectorXd solve_spd(Eigen::MatrixXd a, const Eigen::VectorXd& b) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) {
    return llt.solve(b);
  }
  if (g_llt_fallbacks.fetch_add(1) == 0) {
    std::cerr << "poisonrec: Cholesky factorisation failed, falling back to LU\n";
  }
  a = a.selfadjointView<Eigen::Lower>();  // materialise full symmetric matrix
  return a.fullPivLu().solve(b);
}

// lambda*I + F F^T accumulated in the lower triangle, plus RHS F r.
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& factors, const Eigen::VectorXd& ratings,
                            double lambda) {
  const Eigen::Index d = factors.rows();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(factors);
  gram.diagonal().array() += lambda;
  return solve_spd(std::move(gram), factors * ratings);
}

// Gathers factor columns and rating values for one side of the matrix.
void gather(const std::vector<std::pair<int, double>>& obs, const Eigen::MatrixXd& factors,
            Eigen::MatrixXd& cols, Eigen::VectorXd& vals) {
  const Eigen::Index n = static_cast<Eigen::Index>(obs.size());
  cols.resize(factors.rows(), n);
  vals.resize(n);
  for (Eigen::Index idx = 0; idx < n; ++idx) {
    cols.col(idx) = factors.col(obs[static_cast<std::size_t>(idx)].first);
    vals[idx] = obs[static_cast<std::size_t>(idx)].second;
  }
}

void check_solve_inputs(const Eigen::MatrixXd& factors, const Eigen::VectorXd& ratings,
                        double lambda, const char* side) {
  if (factors.cols() != ratings.size()) {
    throw InvalidInputError(std::string(side) + ": factor column count does not match ratings");
  }
  if (!(lambda > 0.0)) {
    throw InvalidInputError(std::string(side) + ": lambda must be positive");
  }
  if (!factors.allFinite() || !ratings.allFinite()) {
    throw NumericalError(std::string(side) + ": non-finite input");
  }
}

}  // namespace

double predict(const Eigen::VectorXd& weight, const Eigen::VectorXd& item) {
  if (weight.size() != item.size()) {
    throw InvalidInputError("predict: vector lengths differ");
  }
  return weight.dot(item);
}

double objective(const RatingsMatrix& ratings, const FactorModel& model) {
  double sq = 0.0;
  for (int u = 0; u < ratings.n_users(); ++u) {
    const auto col = model.user_factors.col(u);
    for (const auto& [item, value] : ratings.items_of(u)) {
      const double r = value - col.dot(model.item_factors.col(item));
      sq += r * r;
    }
  }
  return sq + model.lambda * (model.user_factors.squaredNorm() + model.item_factors.squaredNorm());
}

Eigen::VectorXd solve_user(const Eigen::MatrixXd& rated_item_factors,
                           const Eigen::VectorXd& ratings, double lambda) {
  if (rated_item_factors.cols() == 0) {
    throw ColdStartError("solve_user: user has no observed ratings");
  }
  check_solve_inputs(rated_item_factors, ratings, lambda, "solve_user");
  return ridge_solve(rated_item_factors, ratings, lambda);
}

Eigen::VectorXd solve_item(const Eigen::MatrixXd& rater_factors,
                           const Eigen::VectorXd& ratings, double lambda) {
  if (rater_factors.cols() == 0) {
    throw ColdStartError("solve_item: item has no observed ratings");
  }
  check_solve_inputs(rater_factors, ratings, lambda, "solve_item");
  return ridge_solve(rater_factors, ratings, lambda);
}

Eigen::MatrixXd solve_all_users(const RatingsMatrix& ratings,
                                const Eigen::MatrixXd& item_factors, double lambda,
                                std::vector<int>* cold_users) {
  Eigen::MatrixXd user_factors =
      Eigen::MatrixXd::Zero(item_factors.rows(), ratings.n_users());
  Eigen::MatrixXd cols;
  Eigen::VectorXd vals;
  for (int u = 0; u < ratings.n_users(); ++u) {
    const auto& obs = ratings.items_of(u);
    if (obs.empty()) {
      if (cold_users != nullptr) cold_users->push_back(u);
      continue;
    }
    gather(obs, item_factors, cols, vals);
    user_factors.col(u) = ridge_solve(cols, vals, lambda);
  }
  return user_factors;
}

FactorizeResult factorize(const RatingsMatrix& ratings, const FactorizeOptions& options) {
  if (ratings.n_entries() == 0) {
    throw InvalidInputError("factorize: ratings matrix has no entries");
  }
  if (options.d < 1) throw InvalidInputError("factorize: latent dimension must be >= 1");
  if (!(options.lambda > 0.0)) throw InvalidInputError("factorize: lambda must be positive");

  const int d = options.d;
  FactorizeResult result;
  result.model.d = d;
  result.model.lambda = options.lambda;

  auto init_matrix = [&](const std::optional<Eigen::MatrixXd>& given, int cols,
                         Rng& rng) -> Eigen::MatrixXd {
    if (given.has_value()) {
      if (given->rows() != d || given->cols() != cols) {
        throw InvalidInputError("factorize: warm-start matrix has wrong shape");
      }
      if (!given->allFinite()) throw NumericalError("factorize: non-finite warm start");
      return *given;
    }
    Eigen::MatrixXd m(d, cols);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = unif(rng);
    }
    return m;
  };

  Rng rng = make_rng(options.seed);
  result.model.user_factors = init_matrix(options.init_user_factors, ratings.n_users(), rng);
  result.model.item_factors = init_matrix(options.init_item_factors, ratings.n_items(), rng);

  double prev = objective(ratings, result.model);
  result.objective_trace.push_back(prev);

  Eigen::MatrixXd cols;
  Eigen::VectorXd vals;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    result.cold_users.clear();
    result.cold_items.clear();

    for (int u = 0; u < ratings.n_users(); ++u) {
      const auto& obs = ratings.items_of(u);
      if (obs.empty()) {
        result.model.user_factors.col(u).setZero();
        result.cold_users.push_back(u);
        continue;
      }
      gather(obs, result.model.item_factors, cols, vals);
      result.model.user_factors.col(u) = ridge_solve(cols, vals, options.lambda);
    }
    for (int j = 0; j < ratings.n_items(); ++j) {
      const auto& obs = ratings.users_of(j);
      if (obs.empty()) {
        result.model.item_factors.col(j).setZero();
        result.cold_items.push_back(j);
        continue;
      }
      gather(obs, result.model.user_factors, cols, vals);
      result.model.item_factors.col(j) = ridge_solve(cols, vals, options.lambda);
    }

    const double cur = objective(ratings, result.model);
    if (!std::isfinite(cur)) {
      throw NumericalError("factorize: objective became non-finite at sweep " +
                           std::to_string(sweep + 1));
    }
    result.objective_trace.push_back(cur);
    result.sweeps = sweep + 1;
    if (prev - cur < options.rel_tol * std::max(prev, 1e-300)) {
      result.converged = true;
      break;
    }
    prev = cur;
  }
  return result;
}

nlohmann::json to_json(const FactorModel& model) {
  auto flatten = [](const Eigen::MatrixXd& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
  };
  return nlohmann::json{{"d", model.d},
                        {"lambda", model.lambda},
                        {"n_users", model.user_factors.cols()},
                        {"n_items", model.item_factors.cols()},
                        {"user_factors", flatten(model.user_factors)},
                        {"item_factors", flatten(model.item_factors)}};
}

FactorModel factor_model_from_json(const nlohmann::json& j) {
  FactorModel model;
  model.d = j.at("d").get<int>();
  model.lambda = j.at("lambda").get<double>();
  const auto n_users = j.at("n_users").get<Eigen::Index>();
  const auto n_items = j.at("n_items").get<Eigen::Index>();
  const auto u = j.at("user_factors").get<std::vector<double>>();
  const auto v = j.at("item_factors").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(u.size()) != model.d * n_users ||
      static_cast<Eigen::Index>(v.size()) != model.d * n_items) {
    throw InvalidInputError("factor model JSON: matrix sizes inconsistent");
  }
  model.user_factors = Eigen::Map<const Eigen::MatrixXd>(u.data(), model.d, n_users);
  model.item_factors = Eigen::Map<const Eigen::MatrixXd>(v.data(), model.d, n_items);
  return model;
}

}  // namespace poisonrec

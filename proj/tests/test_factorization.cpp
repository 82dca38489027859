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

#include <cmath>
#include <random>

#include "doctest.h"
#include "poisonrec/errors.hpp"
#include "poisonrec/factorization.hpp"
#include "support/oracles.hpp"

using namespace poisonrec;
using poisonrec::testing::dense_ridge_oracle;

TEST_SUITE("factorization") {

TEST_CASE("predict is the plain inner product") {
  Eigen::VectorXd w(2), v(2);
  w << 1, 0;
  v << 3, 7;
  CHECK(predict(w, v) == doctest::Approx(3.0));
  CHECK(predict(Eigen::VectorXd::Zero(5), Eigen::VectorXd::Ones(5)) == 0.0);
  CHECK_THROWS_AS(predict(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)),
                  InvalidInputError);
}

TEST_CASE("predict on a published cluster weight vector against itself") {
  // d = 10 cluster weights; the self-product is the plain sum of squares.
  Eigen::VectorXd u2(10);
  u2 << 0.71, 0.61, -0.13, 0.08, 0.63, -0.04, 0.18, -0.01, -0.12, -0.13;
  double sum_sq = 0.0;
  for (int i = 0; i < u2.size(); ++i) sum_sq += u2[i] * u2[i];
  CHECK(predict(u2, u2) == doctest::Approx(sum_sq).epsilon(1e-12));
  CHECK(sum_sq > 0.0);
}

TEST_CASE("solve_user: single rated item on a basis vector") {
  // (V V^T + 0.5 I) x = V * 4 with V = e1 gives (4/1.5, 0, ...).
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(3, 1);
  v(0, 0) = 1.0;
  Eigen::VectorXd r(1);
  r << 4.0;
  const auto x = solve_user(v, r, 0.5);
  CHECK(x[0] == doctest::Approx(4.0 / 1.5).epsilon(1e-12));
  CHECK(x[1] == 0.0);
  CHECK(x[2] == 0.0);
  const auto oracle = dense_ridge_oracle(v, r, 0.5);
  CHECK((x - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("solve_user: zero ratings over an orthonormal span give the zero vector") {
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(4, 4);
  const auto x = solve_user(v, Eigen::VectorXd::Zero(4), 0.3);
  CHECK(x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solve_user: duplicated inputs give bit-identical results") {
  std::mt19937_64 rng(11);
  const auto v = poisonrec::testing::random_matrix(rng, 6, 9);
  const auto r = poisonrec::testing::random_vector(rng, 9, 1.0, 5.0);
  const auto a = solve_user(v, r, 0.1);
  const auto b = solve_user(v, r, 0.1);
  CHECK((a.array() == b.array()).all());
}

TEST_CASE("solve_user residual is tiny and matches the dense oracle") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 10);
    const int n = 1 + static_cast<int>(rng() % 20);
    const auto v = poisonrec::testing::random_matrix(rng, d, n);
    const auto r = poisonrec::testing::random_vector(rng, n, 1.0, 5.0);
    const auto x = solve_user(v, r, 0.1);
    const Eigen::MatrixXd a =
        v * v.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
    CHECK((a * x - v * r).norm() < 1e-10);
    CHECK((x - dense_ridge_oracle(v, r, 0.1)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("solve_user rejects a cold user") {
  CHECK_THROWS_AS(solve_user(Eigen::MatrixXd(3, 0), Eigen::VectorXd(0), 0.1), ColdStartError);
}

TEST_CASE("solve_item: single rater on a basis vector") {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(3, 1);
  u(0, 0) = 1.0;
  Eigen::VectorXd r(1);
  r << 5.0;
  const auto x = solve_item(u, r, 1.0);
  CHECK(x[0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(x[1] == 0.0);
}

TEST_CASE("solve_item: all-zero ratings give the zero vector") {
  std::mt19937_64 rng(13);
  const auto u = poisonrec::testing::random_matrix(rng, 4, 6);
  CHECK(solve_item(u, Eigen::VectorXd::Zero(6), 0.7).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("factorize: single entry with vanishing regulariser recovers the rating") {
  RatingsMatrix m(1, 1);
  m.add(0, 0, 4.0);
  FactorizeOptions opt;
  opt.d = 1;
  opt.lambda = 1e-9;
  opt.seed = 5;
  const auto fr = factorize(m, opt);
  CHECK(predict(fr.model.user_factors.col(0), fr.model.item_factors.col(0)) ==
        doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("factorize: rank-1 fully observed matrix is recovered") {
  // R = u^T v with entries inside the rating range.
  std::mt19937_64 rng(21);
  const int n_users = 20, n_items = 15;
  const auto u = poisonrec::testing::random_vector(rng, n_users, 1.0, 2.0);
  const auto v = poisonrec::testing::random_vector(rng, n_items, 1.0, 2.5);
  RatingsMatrix m(n_users, n_items);
  for (int i = 0; i < n_users; ++i) {
    for (int j = 0; j < n_items; ++j) m.add(i, j, u[i] * v[j]);
  }
  FactorizeOptions opt;
  opt.d = 1;
  opt.lambda = 1e-6;
  opt.seed = 3;
  const auto fr = factorize(m, opt);
  double sq = 0.0;
  for (int i = 0; i < n_users; ++i) {
    for (int j = 0; j < n_items; ++j) {
      const double err =
          u[i] * v[j] - predict(fr.model.user_factors.col(i), fr.model.item_factors.col(j));
      sq += err * err;
    }
  }
  CHECK(std::sqrt(sq / (n_users * n_items)) < 1e-3);
}

TEST_CASE("factorize: objective is monotone non-increasing across sweeps") {
  std::mt19937_64 rng(31);
  const auto m = poisonrec::testing::random_ratings(rng, 50, 50, 0.1);
  FactorizeOptions opt;
  opt.d = 5;
  opt.lambda = 0.1;
  opt.max_sweeps = 25;
  opt.rel_tol = 0.0;  // run all sweeps
  opt.seed = 17;
  const auto fr = factorize(m, opt);
  REQUIRE(fr.objective_trace.size() > 2);
  for (std::size_t i = 1; i < fr.objective_trace.size(); ++i) {
    CHECK(fr.objective_trace[i] <= fr.objective_trace[i - 1] * (1 + 1e-12));
  }
  CHECK(fr.objective_trace.back() ==
        doctest::Approx(objective(m, fr.model)).epsilon(1e-12));
}

TEST_CASE("factorize rejects empty input and bad options") {
  RatingsMatrix empty(3, 3);
  CHECK_THROWS_AS(factorize(empty, {}), InvalidInputError);
  RatingsMatrix m(1, 1);
  m.add(0, 0, 3.0);
  FactorizeOptions bad;
  bad.d = 0;
  CHECK_THROWS_AS(factorize(m, bad), InvalidInputError);
  bad.d = 2;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(factorize(m, bad), InvalidInputError);
}

TEST_CASE("factorize flags cold users and items with zero columns") {
  RatingsMatrix m(3, 3);
  m.add(0, 0, 3.0);
  m.add(1, 0, 4.0);
  m.add(1, 1, 2.0);  // user 2 and item 2 stay cold
  FactorizeOptions opt;
  opt.d = 2;
  opt.seed = 2;
  const auto fr = factorize(m, opt);
  CHECK(fr.cold_users == std::vector<int>{2});
  CHECK(fr.cold_items == std::vector<int>{2});
  CHECK(fr.model.user_factors.col(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fr.model.item_factors.col(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fixed-V pass leaves true users bit-identical after new users appear") {
  std::mt19937_64 rng(41);
  const auto m = poisonrec::testing::random_ratings(rng, 20, 12, 0.3);
  FactorizeOptions opt;
  opt.d = 4;
  opt.seed = 9;
  const auto fr = factorize(m, opt);

  // Same ratings plus two extra users.
  RatingsMatrix grown(22, 12);
  for (const auto& e : m.entries()) grown.add(e.user, e.item, e.value);
  grown.add(20, 0, 5.0);
  grown.add(20, 3, 4.0);
  grown.add(21, 1, 1.0);

  const auto before = solve_all_users(m, fr.model.item_factors, opt.lambda);
  const auto after = solve_all_users(grown, fr.model.item_factors, opt.lambda);
  for (int u = 0; u < m.n_users(); ++u) {
    CHECK((before.col(u).array() == after.col(u).array()).all());
  }
}

TEST_CASE("factor model round-trips through JSON") {
  std::mt19937_64 rng(51);
  FactorModel model;
  model.d = 3;
  model.lambda = 0.25;
  model.user_factors = poisonrec::testing::random_matrix(rng, 3, 5);
  model.item_factors = poisonrec::testing::random_matrix(rng, 3, 7);
  const auto back = factor_model_from_json(to_json(model));
  CHECK(back.d == model.d);
  CHECK(back.lambda == model.lambda);
  CHECK((back.user_factors - model.user_factors).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.item_factors - model.item_factors).cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE

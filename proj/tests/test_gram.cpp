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

#include <random>

#include "doctest.h"
#include "poisonrec/errors.hpp"
#include "poisonrec/factorization.hpp"
#include "poisonrec/gram.hpp"
#include "support/oracles.hpp"

using namespace poisonrec;
using poisonrec::testing::random_matrix;
using poisonrec::testing::random_vector;
using poisonrec::testing::smallest_eigenvalue;

TEST_SUITE("gram") {

TEST_CASE("zero raters invert the scaled identity") {
  const auto g = gram_inverse(Eigen::MatrixXd(3, 0), 2.0);
  CHECK((g.matrix() - 0.5 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(g.rater_count() == 0);
}

TEST_CASE("one basis-vector rater") {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(3, 1);
  f(0, 0) = 1.0;
  const auto g = gram_inverse(f, 1.0);
  Eigen::VectorXd expected(3);
  expected << 0.5, 1.0, 1.0;
  CHECK((g.matrix().diagonal() - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("random raters: positive definite with positive diagonals and exact inverse") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 9);
    const int n = static_cast<int>(rng() % 15);
    const auto f = random_matrix(rng, d, n, -1.0, 1.0);
    const auto g = gram_inverse(f, 0.1);
    CHECK(smallest_eigenvalue(g.matrix()) > 0.0);
    CHECK((g.matrix().diagonal().array() > 0.0).all());
    const Eigen::MatrixXd a =
        f * f.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
    CHECK((a * g.matrix() - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("constructor enforces the positive-definite invariants") {
  CHECK_THROWS_AS(GramInverse(-Eigen::MatrixXd::Identity(2, 2), 0.1, 0), NumericalError);
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(GramInverse(asym, 0.1, 0), NumericalError);
  CHECK_THROWS_AS(GramInverse(Eigen::MatrixXd::Identity(2, 2), 0.0, 0), InvalidInputError);
}

TEST_CASE("rank-1 update with the zero vector changes nothing") {
  const auto g = gram_inverse(Eigen::MatrixXd(4, 0), 1.0);
  const auto g2 = sherman_morrison_rank1(g, Eigen::VectorXd::Zero(4));
  CHECK((g2.matrix() - g.matrix()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g2.rater_count() == 1);
}

TEST_CASE("rank-1 update of the identity on a basis vector") {
  const auto g = gram_inverse(Eigen::MatrixXd(2, 0), 1.0);  // I2
  Eigen::VectorXd u(2);
  u << 1, 0;
  const auto g2 = sherman_morrison_rank1(g, u);
  Eigen::MatrixXd expected(2, 2);
  expected << 0.5, 0, 0, 1;
  CHECK((g2.matrix() - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("twenty incremental rank-1 updates equal the batch inverse") {
  std::mt19937_64 rng(6);
  const int d = 6;
  const auto raters = random_matrix(rng, d, 20, -1.0, 1.0);
  auto g = gram_inverse(Eigen::MatrixXd(d, 0), 0.5);
  for (int i = 0; i < 20; ++i) g = sherman_morrison_rank1(g, raters.col(i));
  const auto batch = gram_inverse(raters, 0.5);
  CHECK((g.matrix() - batch.matrix()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(g.rater_count() == batch.rater_count());
}

TEST_CASE("each rater addition never increases a diagonal entry") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 8);
    auto g = gram_inverse(random_matrix(rng, d, static_cast<int>(rng() % 5)), 0.2);
    for (int step = 0; step < 10; ++step) {
      const auto next = sherman_morrison_rank1(g, random_vector(rng, d, -1.0, 1.0));
      CHECK(((next.matrix().diagonal() - g.matrix().diagonal()).array() <= 1e-12).all());
      g = next;
    }
  }
}

TEST_CASE("block update is a no-op when fake ratings match current predictions") {
  std::mt19937_64 rng(8);
  const int d = 5, m = 7;
  const auto g = gram_inverse(random_matrix(rng, d, 10), 0.1);
  const auto x = random_matrix(rng, d, m);
  const auto v = random_vector(rng, d, -1.0, 1.0);
  const Eigen::VectorXd y = x.transpose() * v;
  const auto v2 = block_update_item(v, g, x, y);
  CHECK((v2 - v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identical fake columns collapse to the scalar-gain closed form") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 9);
    const int m = 1 + static_cast<int>(rng() % 50);
    const auto g = gram_inverse(random_matrix(rng, d, 8), 0.1);
    const auto u_t = random_vector(rng, d, -1.0, 1.0);
    const auto v = random_vector(rng, d, -1.0, 1.0);
    Eigen::MatrixXd x(d, m);
    for (int c = 0; c < m; ++c) x.col(c) = u_t;
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(m, 5.0);

    const auto general = block_update_item(v, g, x, y);
    const auto closed = block_update_item_identical(v, g, u_t, m, 5.0);
    CHECK((general - closed).cwiseAbs().maxCoeff() < 1e-10);

    // The gain really is the common row value of (I + X^T A^-1 X)^-1 (y - X^T v).
    const double gain = block_update_gain(g, u_t, m, 5.0, v);
    Eigen::MatrixXd cap = x.transpose() * g.matrix() * x;
    cap.diagonal().array() += 1.0;
    const Eigen::VectorXd bc = cap.colPivHouseholderQr().solve(y - x.transpose() * v);
    CHECK((bc.array() - gain).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("block update equals the full re-solve over true plus fake raters") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 10);
    const int n = static_cast<int>(rng() % 20);
    const int m = 1 + static_cast<int>(rng() % 40);
    const double lambda = 0.1;
    const auto tru = random_matrix(rng, d, n);
    const auto tru_ratings = random_vector(rng, n, 1.0, 5.0);
    const auto fake = random_matrix(rng, d, m);
    const auto fake_ratings = random_vector(rng, m, 1.0, 5.0);

    const auto g = gram_inverse(tru, lambda);
    const Eigen::VectorXd v = g.matrix() * (tru * tru_ratings);
    const auto updated = block_update_item(v, g, fake, fake_ratings);

    Eigen::MatrixXd all(d, n + m);
    all << tru, fake;
    Eigen::VectorXd all_ratings(n + m);
    all_ratings << tru_ratings, fake_ratings;
    const auto resolved = solve_item(all, all_ratings, lambda);
    CHECK((updated - resolved).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("block update validates dimensions") {
  const auto g = gram_inverse(Eigen::MatrixXd(3, 0), 1.0);
  CHECK_THROWS_AS(block_update_item(Eigen::VectorXd::Zero(3), g, Eigen::MatrixXd(2, 4),
                                    Eigen::VectorXd::Zero(4)),
                  InvalidInputError);
  CHECK_THROWS_AS(block_update_item(Eigen::VectorXd::Zero(3), g, Eigen::MatrixXd(3, 0),
                                    Eigen::VectorXd::Zero(0)),
                  InvalidInputError);
}

}  // TEST_SUITE

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
#include "poisonrec/metrics.hpp"
#include "support/oracles.hpp"

using namespace poisonrec;

TEST_SUITE("metrics") {

TEST_CASE("relative change against the maximum deviation") {
  CHECK(relative_change(3.0, 4.0) == doctest::Approx(0.5));
  CHECK(relative_change(3.0, 3.0) == doctest::Approx(0.0));
  CHECK(relative_change(2.0, 5.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(relative_change(5.0, 5.0), SaturatedItemError);
}

TEST_CASE("relative change preserves the direction of the shift") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(-1.0, 6.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double mu_o = unif(rng);
    const double mu_f = unif(rng);
    if (mu_o == 5.0) continue;
    const double rc = relative_change(mu_o, mu_f);
    CHECK((mu_f > mu_o) == (rc > 0.0));
  }
}

TEST_CASE("hit threshold is inclusive") {
  CHECK(hit(4.2));
  CHECK(hit(4.0));
  CHECK(!hit(3.99));
  CHECK(hit(3.0, 3.0));
}

TEST_CASE("leakage profile is pure centre/item arithmetic") {
  Eigen::MatrixXd centers(2, 3);
  centers << 1, 0, 1, 0, 1, 1;
  Eigen::VectorXd v_before(2), v_after(2);
  v_before << 2.5, 1.5;
  v_after << 3.0, 2.0;
  const auto leak = leakage_profile(centers, v_before, centers, v_after);
  REQUIRE(leak.size() == 3);
  for (int g = 0; g < 3; ++g) {
    const double mu_o = centers.col(g).dot(v_before);
    const double mu_f = centers.col(g).dot(v_after);
    CHECK(leak[static_cast<std::size_t>(g)] ==
          doctest::Approx((mu_f - mu_o) / std::abs(5.0 - mu_o)));
  }
}

TEST_CASE("identical before/after gives a zero leakage vector") {
  std::mt19937_64 rng(2);
  const auto centers = poisonrec::testing::random_matrix(rng, 4, 3);
  const auto v = poisonrec::testing::random_vector(rng, 4);
  for (double x : leakage_profile(centers, v, centers, v)) {
    CHECK(x == doctest::Approx(0.0));
  }
}

TEST_CASE("leakage rejects a changed cluster count") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 3);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(
      leakage_profile(a, Eigen::VectorXd::Zero(2), b, Eigen::VectorXd::Zero(2)),
      InvalidInputError);
}

TEST_CASE("pearson and spearman agree with hand values") {
  Eigen::VectorXd a(4), b(4);
  a << 1, 2, 3, 4;
  b << 2, 4, 6, 8;
  CHECK(pearson(a, b) == doctest::Approx(1.0));
  b << 8, 6, 4, 2;
  CHECK(pearson(a, b) == doctest::Approx(-1.0));
  CHECK(std::isnan(pearson(a, Eigen::VectorXd::Constant(4, 3.0))));

  CHECK(spearman({1, 2, 3, 4}, {10, 20, 25, 90}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  // Monotone in ranks even when values are nonlinear.
  CHECK(spearman({1, 2, 3, 4, 5}, {1, 8, 27, 64, 125}) == doctest::Approx(1.0));
}

TEST_CASE("correlation-delta series on simple geometry") {
  Eigen::MatrixXd v(3, 4);
  // item 0 = target copy, item 1 = target, item 2 orthogonal to the shift,
  // item 3 = constant vector (zero variance, excluded from the series).
  v.col(1) << 1.0, 2.0, 0.5;
  v.col(0) = v.col(1);
  v.col(2) << 0.0, 0.0, 3.0;
  v.col(3) << 1.0, 1.0, 1.0;
  Eigen::VectorXd before(3), after(3);
  before << 0.5, 0.5, 0.0;
  after = before;
  after[0] += 0.2;  // shift orthogonal to item 2

  const auto series = correlation_vs_delta(v, 1, before, after);
  REQUIRE(series.points.size() == 2);
  CHECK(series.excluded_items == std::vector<int>{3});
  CHECK(series.points[0].item == 0);
  CHECK(series.points[0].correlation == doctest::Approx(1.0));
  CHECK(series.points[0].delta ==
        doctest::Approx((after - before).dot(v.col(1))));
  CHECK(series.points[1].item == 2);
  CHECK(series.points[1].delta == doctest::Approx(0.0));
}

TEST_CASE("aggregates are recomputable from the per-replication values") {
  std::vector<ReplicationRecord> reps;
  const std::vector<double> values = {0.2, 0.4, 0.9};
  for (std::size_t i = 0; i < values.size(); ++i) {
    ReplicationRecord r;
    r.param = 1.0;
    r.rep = static_cast<int>(i);
    r.rel_change = {0.0, values[i]};
    r.mu_before = {1.0, 2.0};
    r.mu_after = {1.0, 3.0};
    r.hit_after = i > 0;
    r.entry_rate = 1.0;
    reps.push_back(r);
  }
  ReplicationRecord failed;
  failed.param = 1.0;
  failed.rep = 3;
  failed.failed = true;
  reps.push_back(failed);

  const auto aggs = aggregate_replications({1.0}, reps, 1);
  REQUIRE(aggs.size() == 1);
  const auto& a = aggs[0];
  CHECK(a.n_ok == 3);
  const double mean = (0.2 + 0.4 + 0.9) / 3.0;
  CHECK(a.mean == doctest::Approx(mean));
  const double var =
      ((0.2 - mean) * (0.2 - mean) + (0.4 - mean) * (0.4 - mean) + (0.9 - mean) * (0.9 - mean)) /
      2.0;
  CHECK(a.stddev == doctest::Approx(std::sqrt(var)));
  CHECK(a.stderror == doctest::Approx(std::sqrt(var / 3.0)));
  CHECK(a.hit_after_rate == doctest::Approx(2.0 / 3.0));
  CHECK(a.leakage_mean[1] == doctest::Approx(mean));

  // An all-failed point aggregates to NaN, never silently to zero.
  const auto empty = aggregate_replications({2.0}, reps, 1);
  CHECK(empty[0].n_ok == 0);
  CHECK(std::isnan(empty[0].mean));
}

}  // TEST_SUITE

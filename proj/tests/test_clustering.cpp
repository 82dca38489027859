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
#include "poisonrec/clustering.hpp"
#include "poisonrec/errors.hpp"
#include "support/oracles.hpp"

using namespace poisonrec;

namespace {

// Two well-separated clouds around +/- center_gap.
Eigen::MatrixXd two_clouds(std::mt19937_64& rng, int per_cloud, double gap) {
  Eigen::MatrixXd pts(2, 2 * per_cloud);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (int i = 0; i < per_cloud; ++i) {
    pts.col(i) << gap + noise(rng), noise(rng);
    pts.col(per_cloud + i) << -gap + noise(rng), noise(rng);
  }
  return pts;
}

}  // namespace

TEST_SUITE("clustering") {

TEST_CASE("two separated clouds are split perfectly with centres at the means") {
  std::mt19937_64 rng(3);
  const int per = 40;
  const auto pts = two_clouds(rng, per, 5.0);
  KMeansOptions opt;
  opt.seed = 1;
  const auto res = kmeans(pts, 2, opt);
  REQUIRE(res.converged);

  const int c0 = res.model.assignment[0];
  for (int i = 0; i < per; ++i) CHECK(res.model.assignment[i] == c0);
  for (int i = per; i < 2 * per; ++i) CHECK(res.model.assignment[i] != c0);

  const Eigen::VectorXd mean_a = pts.leftCols(per).rowwise().mean();
  CHECK((res.model.centers.col(c0) - mean_a).norm() < 1e-10);
}

TEST_CASE("n distinct points with k = n become singleton clusters") {
  Eigen::MatrixXd pts(2, 3);
  pts << 0, 5, 10, 0, 5, 10;
  const auto res = kmeans(pts, 3, {});
  std::vector<bool> seen(3, false);
  for (int i = 0; i < 3; ++i) {
    const int c = res.model.assignment[static_cast<std::size_t>(i)];
    CHECK(!seen[static_cast<std::size_t>(c)]);
    seen[static_cast<std::size_t>(c)] = true;
    CHECK((res.model.centers.col(c) - pts.col(i)).norm() < 1e-12);
  }
}

TEST_CASE("same seed reproduces the same assignment") {
  std::mt19937_64 rng(5);
  const auto pts = poisonrec::testing::random_matrix(rng, 4, 60, -2.0, 2.0);
  KMeansOptions opt;
  opt.seed = 42;
  const auto a = kmeans(pts, 4, opt);
  const auto b = kmeans(pts, 4, opt);
  CHECK(a.model.assignment == b.model.assignment);
}

TEST_CASE("uniform scaling leaves assignments unchanged") {
  std::mt19937_64 rng(6);
  const auto pts = poisonrec::testing::random_matrix(rng, 3, 50, -1.0, 1.0);
  KMeansOptions opt;
  opt.seed = 9;
  const auto a = kmeans(pts, 3, opt);
  const auto b = kmeans((2.5 * pts).eval(), 3, opt);
  CHECK(a.model.assignment == b.model.assignment);
}

TEST_CASE("within-cluster SSE never increases across iterations") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const auto pts = poisonrec::testing::random_matrix(rng, 3, 80, -1.0, 1.0);
    KMeansOptions opt;
    opt.seed = 100 + static_cast<std::uint64_t>(trial);
    const auto res = kmeans(pts, 4, opt);
    for (std::size_t i = 1; i < res.wcss_trace.size(); ++i) {
      CHECK(res.wcss_trace[i] <= res.wcss_trace[i - 1] * (1 + 1e-12));
    }
  }
}

TEST_CASE("at convergence every centre equals the mean of its members") {
  std::mt19937_64 rng(8);
  const auto pts = poisonrec::testing::random_matrix(rng, 4, 70, -1.0, 1.0);
  KMeansOptions opt;
  opt.seed = 4;
  const auto res = kmeans(pts, 3, opt);
  REQUIRE(res.converged);
  for (int c = 0; c < 3; ++c) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(4);
    int count = 0;
    for (int i = 0; i < pts.cols(); ++i) {
      if (res.model.assignment[static_cast<std::size_t>(i)] == c) {
        sum += pts.col(i);
        ++count;
      }
    }
    REQUIRE(count > 0);  // no empty clusters after convergence
    CHECK((res.model.centers.col(c) - sum / count).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("an emptied cluster is repaired with the farthest point") {
  // Two tight pairs plus initial centres that leave the third cluster empty.
  Eigen::MatrixXd pts(1, 4);
  pts << 0.0, 0.1, 10.0, 10.1;
  Eigen::MatrixXd init(1, 3);
  init << 0.05, 10.05, 100.0;  // third centre sees no points
  KMeansOptions opt;
  opt.initial_centers = init;
  const auto res = kmeans(pts, 3, opt);
  std::vector<int> counts(3, 0);
  for (int a : res.model.assignment) ++counts[static_cast<std::size_t>(a)];
  CHECK(counts[0] > 0);
  CHECK(counts[1] > 0);
  CHECK(counts[2] > 0);
}

TEST_CASE("kmeans validates inputs") {
  Eigen::MatrixXd pts(2, 3);
  pts.setZero();
  CHECK_THROWS_AS(kmeans(pts, 4, {}), InvalidInputError);
  CHECK_THROWS_AS(kmeans(pts, 0, {}), InvalidInputError);
}

TEST_CASE("warm start with no new users is an exact fixed point") {
  std::mt19937_64 rng(9);
  const auto pts = poisonrec::testing::random_matrix(rng, 3, 40, -1.0, 1.0);
  KMeansOptions opt;
  opt.seed = 11;
  const auto cold = kmeans(pts, 3, opt);
  REQUIRE(cold.converged);
  const auto warm = warm_start_assign(pts, cold.model.centers);
  CHECK(warm.model.assignment == cold.model.assignment);
  CHECK((warm.model.centers - cold.model.centers).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fake users placed exactly at the target centre leave it unchanged") {
  std::mt19937_64 rng(10);
  const auto pts = two_clouds(rng, 30, 4.0);
  KMeansOptions opt;
  opt.seed = 2;
  const auto cold = kmeans(pts, 2, opt);
  const int t = 0;
  const int m = 10;
  Eigen::MatrixXd grown(2, pts.cols() + m);
  grown << pts, cold.model.centers.col(t).replicate(1, m);
  const auto warm = warm_start_assign(grown, cold.model.centers);
  for (int i = 0; i < m; ++i) {
    CHECK(warm.model.assignment[static_cast<std::size_t>(pts.cols() + i)] == t);
  }
  CHECK((warm.model.centers.col(t) - cold.model.centers.col(t)).norm() < 1e-10);
}

TEST_CASE("fakes near the centre shift it by m * delta / (n + m)") {
  std::mt19937_64 rng(11);
  const int per = 50;
  const auto pts = two_clouds(rng, per, 4.0);
  KMeansOptions opt;
  opt.seed = 6;
  const auto cold = kmeans(pts, 2, opt);
  const int t = cold.model.assignment[0];

  Eigen::VectorXd delta(2);
  delta << 0.02, -0.03;
  const int m = 20;
  Eigen::MatrixXd grown(2, pts.cols() + m);
  grown << pts, (cold.model.centers.col(t) + delta).replicate(1, m);
  const auto warm = warm_start_assign(grown, cold.model.centers);
  const Eigen::VectorXd expected =
      cold.model.centers.col(t) + (static_cast<double>(m) / (per + m)) * delta;
  CHECK((warm.model.centers.col(t) - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pinned points stay in their pinned cluster and count toward its mean") {
  Eigen::MatrixXd pts(1, 5);
  pts << 0.0, 0.2, 10.0, 10.2, 9.8;
  Eigen::MatrixXd init(1, 2);
  init << 0.1, 10.0;
  std::vector<int> pins = {-1, -1, -1, -1, 0};  // last point forced into cluster 0
  const auto res = warm_start_assign(pts, init, 100, pins);
  CHECK(res.model.assignment[4] == 0);
  CHECK(res.model.centers(0, 0) == doctest::Approx((0.0 + 0.2 + 9.8) / 3.0));
}

TEST_CASE("cluster model round-trips through JSON") {
  ClusterModel model;
  model.k = 2;
  model.centers = Eigen::MatrixXd::Identity(3, 2);
  model.assignment = {0, 1, 1, 0};
  const auto back = cluster_model_from_json(to_json(model));
  CHECK(back.k == 2);
  CHECK(back.assignment == model.assignment);
  CHECK((back.centers - model.centers).cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE

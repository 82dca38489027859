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

#include "poisonrec/gram.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>
#include <utility>

#include "poisonrec/errors.hpp"

namespace poisonrec {

namespace {
constexpr double kSymmetryTol = 1e-10;
}

GramInverse::GramInverse(Eigen::MatrixXd inverse, double lambda, int rater_count)
    : inverse_(std::move(inverse)), lambda_(lambda), rater_count_(rater_count) {
  if (inverse_.rows() != inverse_.cols() || inverse_.rows() == 0) {
    throw InvalidInputError("gram inverse must be square and non-empty");
  }
  if (!(lambda_ > 0.0)) throw InvalidInputError("gram inverse requires lambda > 0");
  if (rater_count_ < 0) throw InvalidInputError("negative rater count");
  if (!inverse_.allFinite()) throw NumericalError("gram inverse has non-finite entries");

  const double scale = std::max(1.0, inverse_.cwiseAbs().maxCoeff());
  const double asym = (inverse_ - inverse_.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale) {
    throw NumericalError("gram inverse is not symmetric (max asymmetry " +
                         std::to_string(asym) + ")");
  }
  if ((inverse_.diagonal().array() <= 0.0).any()) {
    throw NumericalError("gram inverse has a non-positive diagonal entry");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inverse_, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw NumericalError("gram inverse is not positive definite");
  }
}

GramInverse gram_inverse(const Eigen::MatrixXd& rater_factors, double lambda) {
  if (!(lambda > 0.0)) throw InvalidInputError("gram_inverse: lambda must be positive");
  if (!rater_factors.allFinite()) throw NumericalError("gram_inverse: non-finite input");
  const Eigen::Index d = rater_factors.rows();
  if (d == 0) throw InvalidInputError("gram_inverse: empty factor dimension");

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(rater_factors);
  gram.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("gram_inverse: Cholesky factorisation failed");
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  // Symmetrise away round-off before the invariant checks.
  inv = ((inv + inv.transpose()) / 2.0).eval();
  return GramInverse(std::move(inv), lambda, static_cast<int>(rater_factors.cols()));
}

GramInverse sherman_morrison_rank1(const GramInverse& gram, const Eigen::VectorXd& u) {
  if (u.size() != gram.dim()) {
    throw InvalidInputError("sherman_morrison_rank1: vector length mismatch");
  }
  if (!u.allFinite()) throw InvalidInputError("sherman_morrison_rank1: non-finite vector");

  const Eigen::VectorXd au = gram.matrix() * u;
  const double denom = 1.0 + u.dot(au);
  if (denom <= 0.0) {
    throw NumericalError(
        "sherman_morrison_rank1: non-positive denominator, PD invariant violated");
  }
  Eigen::MatrixXd updated = gram.matrix() - (au * au.transpose()) / denom;
  updated = ((updated + updated.transpose()) / 2.0).eval();
  return GramInverse(std::move(updated), gram.lambda(), gram.rater_count() + 1);
}

Eigen::VectorXd block_update_item(const Eigen::VectorXd& item_vector, const GramInverse& gram,
                                  const Eigen::MatrixXd& fake_factors,
                                  const Eigen::VectorXd& fake_ratings) {
  const Eigen::Index m = fake_factors.cols();
  if (m < 1) throw InvalidInputError("block_update_item: need at least one fake rater");
  if (fake_factors.rows() != gram.dim() || item_vector.size() != gram.dim() ||
      fake_ratings.size() != m) {
    throw InvalidInputError("block_update_item: dimension mismatch");
  }
  if (!fake_factors.allFinite() || !fake_ratings.allFinite() || !item_vector.allFinite()) {
    throw NumericalError("block_update_item: non-finite input");
  }

  const Eigen::MatrixXd ainv_x = gram.matrix() * fake_factors;            // d x m
  Eigen::MatrixXd capacitance = fake_factors.transpose() * ainv_x;        // m x m
  capacitance.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(capacitance);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("block_update_item: capacitance factorisation failed");
  }
  const Eigen::VectorXd gap = fake_ratings - fake_factors.transpose() * item_vector;
  return item_vector + ainv_x * llt.solve(gap);
}

double block_update_gain(const GramInverse& gram, const Eigen::VectorXd& u_t, int m,
                         double y_value, const Eigen::VectorXd& item_vector) {
  if (m < 1) throw InvalidInputError("block_update_gain: need at least one fake rater");
  if (u_t.size() != gram.dim() || item_vector.size() != gram.dim()) {
    throw InvalidInputError("block_update_gain: dimension mismatch");
  }
  const double s = u_t.dot(gram.matrix() * u_t);
  return (y_value - u_t.dot(item_vector)) / (1.0 + static_cast<double>(m) * s);
}

Eigen::VectorXd block_update_item_identical(const Eigen::VectorXd& item_vector,
                                            const GramInverse& gram,
                                            const Eigen::VectorXd& u_t, int m, double y_value) {
  const double gain = block_update_gain(gram, u_t, m, y_value, item_vector);
  return item_vector + static_cast<double>(m) * gain * (gram.matrix() * u_t);
}

}  // namespace poisonrec

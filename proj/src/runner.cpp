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

#include "poisonrec/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "poisonrec/attack.hpp"
#include "poisonrec/errors.hpp"
#include "poisonrec/gram.hpp"
#include "poisonrec/ingest.hpp"
#include "poisonrec/mechanics.hpp"
#include "poisonrec/rng.hpp"

namespace poisonrec {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

int round_to_int(double x) { return static_cast<int>(std::llround(x)); }

}  // namespace

std::string to_string(Regime r) {
  return r == Regime::kFixVUpdateU ? "fix-V-update-U" : "fix-U-update-V";
}

std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::kNOverMFixedV:
      return "n_over_m_fixedV";
    case SweepParameter::kNtOverNfTarget:
      return "Nt_over_Nf_target";
    case SweepParameter::kNtOverNfNonTarget:
      return "Nt_over_Nf_nontarget";
    case SweepParameter::kNOverM:
      return "n_over_m";
  }
  throw InvalidInputError("unknown sweep parameter");
}

Regime regime_from_string(const std::string& s) {
  if (s == "fix-V-update-U") return Regime::kFixVUpdateU;
  if (s == "fix-U-update-V") return Regime::kFixUUpdateV;
  throw InvalidInputError("unknown regime '" + s + "'");
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
  if (s == "n_over_m_fixedV") return SweepParameter::kNOverMFixedV;
  if (s == "Nt_over_Nf_target") return SweepParameter::kNtOverNfTarget;
  if (s == "Nt_over_Nf_nontarget") return SweepParameter::kNtOverNfNonTarget;
  if (s == "n_over_m") return SweepParameter::kNOverM;
  throw InvalidInputError("unknown sweep parameter '" + s + "'");
}

void ExperimentConfig::validate() const {
  if (schema_version != 1) throw InvalidInputError("config: unsupported schema version");
  if (latent_dim < 1) throw InvalidInputError("config: latent_dim must be >= 1");
  if (clusters < 2) throw InvalidInputError("config: need at least 2 clusters");
  if (!(lambda > 0.0)) throw InvalidInputError("config: lambda must be positive");
  if (users_per_cluster < 250) {
    throw InvalidInputError("config: users_per_cluster must be >= 250");
  }
  if (replications < 1) throw InvalidInputError("config: replications must be >= 1");
  if (target_cluster < 0 || target_cluster >= clusters) {
    throw InvalidInputError("config: target_cluster out of range");
  }
  if (fake_count < 0) throw InvalidInputError("config: fake_count must be >= 0");
  if (filler_sigma < 0.0) throw InvalidInputError("config: filler_sigma must be >= 0");
  if (fake_rating < RatingsMatrix::kMinRating || fake_rating > RatingsMatrix::kMaxRating) {
    throw InvalidInputError("config: fake_rating outside [1, 5]");
  }
  if (filler_count.has_value() && *filler_count < 1) {
    throw InvalidInputError("config: filler_count must be >= 1 when set");
  }
  if (sweep_values.empty()) throw InvalidInputError("config: sweep_values is empty");
  for (std::size_t i = 0; i < sweep_values.size(); ++i) {
    if (!(sweep_values[i] > 0.0)) {
      throw InvalidInputError("config: sweep values must be positive");
    }
    if (i > 0 && sweep_values[i] <= sweep_values[i - 1]) {
      throw InvalidInputError("config: sweep values must be strictly increasing");
    }
  }
  if (static_cast<int>(target_profile.size()) != clusters) {
    throw InvalidInputError("config: target_profile needs one entry per cluster");
  }

  const bool regime1 = regime == Regime::kFixVUpdateU;
  if (regime1 && sweep_parameter != SweepParameter::kNOverMFixedV) {
    throw InvalidInputError("config: the fix-V regime sweeps n_over_m_fixedV");
  }
  if (!regime1 && sweep_parameter == SweepParameter::kNOverMFixedV) {
    throw InvalidInputError("config: n_over_m_fixedV requires the fix-V regime");
  }

  int swept_cells = 0;
  for (int g = 0; g < clusters; ++g) {
    const auto& cell = target_profile[static_cast<std::size_t>(g)];
    if (!cell.has_value()) {
      ++swept_cells;
      const bool is_target = g == target_cluster;
      if (sweep_parameter == SweepParameter::kNtOverNfTarget && !is_target) {
        throw InvalidInputError("config: Nt sweep cell outside the target cluster");
      }
      if (sweep_parameter == SweepParameter::kNtOverNfNonTarget && is_target) {
        throw InvalidInputError("config: non-target Nt sweep cell at the target cluster");
      }
      if (sweep_parameter == SweepParameter::kNOverMFixedV ||
          sweep_parameter == SweepParameter::kNOverM) {
        throw InvalidInputError("config: population sweeps need a fully fixed profile");
      }
    } else if (*cell < 0) {
      throw InvalidInputError("config: negative target profile count");
    }
  }
  if ((sweep_parameter == SweepParameter::kNtOverNfTarget ||
       sweep_parameter == SweepParameter::kNtOverNfNonTarget) &&
      swept_cells == 0) {
    throw InvalidInputError("config: rating-ratio sweep needs at least one 'Nt' cell");
  }

  if (dataset.source != "demo" && dataset.source != "movielens" &&
      dataset.source != "ratings-csv" && dataset.source != "goodreads-subset") {
    throw InvalidInputError("config: unknown dataset source '" + dataset.source + "'");
  }
  if (dataset.source != "demo" && dataset.path.empty()) {
    throw InvalidInputError("config: dataset path required for source " + dataset.source);
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json profile = nlohmann::json::array();
  for (const auto& cell : c.target_profile) {
    if (cell.has_value()) {
      profile.push_back(*cell);
    } else {
      profile.push_back("Nt");
    }
  }
  return nlohmann::json{
      {"schema_version", c.schema_version},
      {"dataset",
       {{"source", c.dataset.source},
        {"path", c.dataset.path},
        {"demo_items", c.dataset.demo_items},
        {"demo_users_per_cluster", c.dataset.demo_users_per_cluster},
        {"demo_seed", c.dataset.demo_seed}}},
      {"latent_dim", c.latent_dim},
      {"clusters", c.clusters},
      {"lambda", c.lambda},
      {"users_per_cluster", c.users_per_cluster},
      {"regime", to_string(c.regime)},
      {"sweep_parameter", to_string(c.sweep_parameter)},
      {"sweep_values", c.sweep_values},
      {"target_profile", profile},
      {"fake_count", c.fake_count},
      {"replications", c.replications},
      {"target_cluster", c.target_cluster},
      {"target_mean_threshold", c.target_mean_threshold},
      {"filler_sigma", c.filler_sigma},
      {"filler_count", c.filler_count.has_value() ? nlohmann::json(*c.filler_count)
                                                  : nlohmann::json(nullptr)},
      {"enforce_fake_entry", c.enforce_fake_entry},
      {"fake_rating", c.fake_rating},
      {"hit_threshold", c.hit_threshold},
      {"max_sweeps", c.max_sweeps},
      {"rel_tol", c.rel_tol},
      {"root_seed", c.root_seed},
      {"output_dir", c.output_dir},
      {"threads", c.threads}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.schema_version = j.value("schema_version", 1);
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    c.dataset.source = d.value("source", c.dataset.source);
    c.dataset.path = d.value("path", c.dataset.path);
    c.dataset.demo_items = d.value("demo_items", c.dataset.demo_items);
    c.dataset.demo_users_per_cluster =
        d.value("demo_users_per_cluster", c.dataset.demo_users_per_cluster);
    c.dataset.demo_seed = d.value("demo_seed", c.dataset.demo_seed);
  }
  c.latent_dim = j.value("latent_dim", c.latent_dim);
  c.clusters = j.value("clusters", c.clusters);
  c.lambda = j.value("lambda", c.lambda);
  c.users_per_cluster = j.value("users_per_cluster", c.users_per_cluster);
  if (j.contains("regime")) c.regime = regime_from_string(j.at("regime").get<std::string>());
  if (j.contains("sweep_parameter")) {
    c.sweep_parameter = sweep_parameter_from_string(j.at("sweep_parameter").get<std::string>());
  }
  if (j.contains("sweep_values")) c.sweep_values = j.at("sweep_values").get<std::vector<double>>();
  if (j.contains("target_profile")) {
    c.target_profile.clear();
    for (const auto& cell : j.at("target_profile")) {
      if (cell.is_string()) {
        if (cell.get<std::string>() != "Nt") {
          throw InvalidInputError("config: profile cells are numbers or \"Nt\"");
        }
        c.target_profile.push_back(std::nullopt);
      } else {
        c.target_profile.push_back(cell.get<int>());
      }
    }
  }
  c.fake_count = j.value("fake_count", c.fake_count);
  c.replications = j.value("replications", c.replications);
  c.target_cluster = j.value("target_cluster", c.target_cluster);
  c.target_mean_threshold = j.value("target_mean_threshold", c.target_mean_threshold);
  c.filler_sigma = j.value("filler_sigma", c.filler_sigma);
  if (j.contains("filler_count") && !j.at("filler_count").is_null()) {
    c.filler_count = j.at("filler_count").get<int>();
  }
  c.enforce_fake_entry = j.value("enforce_fake_entry", c.enforce_fake_entry);
  c.fake_rating = j.value("fake_rating", c.fake_rating);
  c.hit_threshold = j.value("hit_threshold", c.hit_threshold);
  c.max_sweeps = j.value("max_sweeps", c.max_sweeps);
  c.rel_tol = j.value("rel_tol", c.rel_tol);
  c.root_seed = j.value("root_seed", c.root_seed);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.threads = j.value("threads", c.threads);
  c.validate();
  return c;
}

BaselinePrep prepare_baseline(const ExperimentConfig& cfg) {
  cfg.validate();

  RatingsMatrix ratings(0, 0);
  std::vector<int> ground_truth;  // demo only
  if (cfg.dataset.source == "demo") {
    DemoBaselineConfig dc;
    dc.users_per_cluster = cfg.dataset.demo_users_per_cluster;
    dc.n_items = cfg.dataset.demo_items;
    dc.k = cfg.clusters;
    dc.seed = derive_seed(cfg.dataset.demo_seed, seed_stream::kDemoData);
    auto demo = demo_baseline(dc);
    ratings = std::move(demo.ratings);
    ground_truth = std::move(demo.block_of_user);
  } else if (cfg.dataset.source == "movielens") {
    ratings = parse_movielens(cfg.dataset.path).ratings;
  } else if (cfg.dataset.source == "ratings-csv") {
    ratings = parse_ratings_csv(cfg.dataset.path).ratings;
  } else {  // goodreads-subset
    auto parsed = parse_ratings_csv(cfg.dataset.path);
    const int users = std::min(1000, parsed.ratings.n_users());
    const int items = std::min(1682, parsed.ratings.n_items());
    ratings = dense_subset(parsed, users, items).ratings;
  }

  FactorizeOptions fo;
  fo.d = cfg.latent_dim;
  fo.lambda = cfg.lambda;
  fo.max_sweeps = cfg.max_sweeps;
  fo.rel_tol = cfg.rel_tol;
  fo.seed = derive_seed(cfg.root_seed, seed_stream::kFactorInit);
  auto fr = factorize(ratings, fo);

  KMeansResult km;
  if (!ground_truth.empty()) {
    // Warm start at the generating blocks' factor means so that cluster label
    // g coincides with block g.
    Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(cfg.latent_dim, cfg.clusters);
    std::vector<int> sizes(static_cast<std::size_t>(cfg.clusters), 0);
    for (int u = 0; u < ratings.n_users(); ++u) {
      const int g = ground_truth[static_cast<std::size_t>(u)];
      centers.col(g) += fr.model.user_factors.col(u);
      ++sizes[static_cast<std::size_t>(g)];
    }
    for (int g = 0; g < cfg.clusters; ++g) {
      if (sizes[static_cast<std::size_t>(g)] > 0) centers.col(g) /= sizes[static_cast<std::size_t>(g)];
    }
    km = warm_start_assign(fr.model.user_factors, centers);
  } else {
    KMeansOptions ko;
    ko.seed = derive_seed(cfg.root_seed, seed_stream::kKmeansInit);
    km = kmeans(fr.model.user_factors, cfg.clusters, ko);
  }

  auto stats = cluster_rating_stats(ratings, km.model);
  auto means = global_item_means(stats);
  return BaselinePrep{std::move(ratings), std::move(fr.model), std::move(km.model),
                      std::move(stats), std::move(means)};
}

namespace {

struct PointSetup {
  double param = 0.0;
  std::vector<int> users_per_cluster;
  std::vector<int> target_counts;
  int fake_count = 0;
};

PointSetup point_setup(const ExperimentConfig& cfg, double param) {
  PointSetup s;
  s.param = param;
  s.users_per_cluster.assign(static_cast<std::size_t>(cfg.clusters), cfg.users_per_cluster);
  s.fake_count = cfg.fake_count;

  switch (cfg.sweep_parameter) {
    case SweepParameter::kNOverMFixedV:
      // n fixed at the per-cluster floor; the ratio scales the fake block.
      if (cfg.fake_count > 0) {
        s.fake_count = round_to_int(static_cast<double>(cfg.users_per_cluster) / param);
      }
      break;
    case SweepParameter::kNOverM:
      s.users_per_cluster[static_cast<std::size_t>(cfg.target_cluster)] =
          round_to_int(param * static_cast<double>(cfg.fake_count));
      break;
    case SweepParameter::kNtOverNfTarget:
    case SweepParameter::kNtOverNfNonTarget:
      break;
  }

  s.target_counts.resize(static_cast<std::size_t>(cfg.clusters));
  for (int g = 0; g < cfg.clusters; ++g) {
    const auto& cell = cfg.target_profile[static_cast<std::size_t>(g)];
    s.target_counts[static_cast<std::size_t>(g)] =
        cell.has_value() ? *cell : round_to_int(param * static_cast<double>(cfg.fake_count));
  }
  return s;
}

int min_items_rated(const RatingsMatrix& m) {
  int best = m.n_items();
  for (int u = 0; u < m.n_users(); ++u) {
    best = std::min(best, static_cast<int>(m.items_of(u).size()));
  }
  return std::max(1, best);
}

struct GeneratedPrep {
  RatingsMatrix matrix;
  std::vector<int> cluster_of_user;
  FactorModel model;
  int target_item = -1;
};

// Shared first half of a replication: pick the target item from the baseline
// statistics, resample users around it, place its controlled ratings and
// re-factorise with warm starts from the baseline latent frame.
GeneratedPrep generate_and_factorize(const ExperimentConfig& cfg, const BaselinePrep& base,
                                     const PointSetup& setup, std::uint64_t rep_seed) {
  const int j_star = select_target_item(base.global_means, cfg.target_mean_threshold,
                                        derive_seed(rep_seed, seed_stream::kTargetSelect));
  auto gen = generate_users(base.stats, base.ratings, base.clusters, setup.users_per_cluster,
                            derive_seed(rep_seed, seed_stream::kGenerateUsers), j_star);
  auto matrix = place_target_item(gen.ratings, gen.cluster_of_user, j_star, setup.target_counts,
                                  base.stats, derive_seed(rep_seed, seed_stream::kPlaceTarget));

  FactorizeOptions fo;
  fo.d = cfg.latent_dim;
  fo.lambda = cfg.lambda;
  fo.max_sweeps = cfg.max_sweeps;
  fo.rel_tol = cfg.rel_tol;
  fo.seed = derive_seed(rep_seed, seed_stream::kFactorInit);
  Eigen::MatrixXd u0(cfg.latent_dim, matrix.n_users());
  for (int u = 0; u < matrix.n_users(); ++u) {
    u0.col(u) = base.clusters.centers.col(gen.cluster_of_user[static_cast<std::size_t>(u)]);
  }
  fo.init_user_factors = std::move(u0);
  fo.init_item_factors = base.model.item_factors;
  auto fr = factorize(matrix, fo);

  return GeneratedPrep{std::move(matrix), std::move(gen.cluster_of_user), std::move(fr.model),
                       j_star};
}

ReplicationRecord replicate_regime1(const ExperimentConfig& cfg, const BaselinePrep& base,
                                    const PointSetup& setup, int rep, std::uint64_t rep_seed,
                                    Eigen::VectorXd* pre_center_out) {
  ReplicationRecord rec;
  rec.param = setup.param;
  rec.rep = rep;
  rec.seed = rep_seed;
  rec.fake_count = setup.fake_count;

  auto prep = generate_and_factorize(cfg, base, setup, rep_seed);
  rec.target_item = prep.target_item;
  const Eigen::MatrixXd& v = prep.model.item_factors;
  const int t = cfg.target_cluster;

  // One fixed-V pass gives the pre-attack user columns that the post-attack
  // pass must reproduce bit-for-bit for every true user.
  const Eigen::MatrixXd u_pre = solve_all_users(prep.matrix, v, cfg.lambda);
  auto km_pre = warm_start_assign(u_pre, base.clusters.centers);
  *pre_center_out = km_pre.model.centers.col(t);

  const Eigen::VectorXd v_star = v.col(prep.target_item);
  rec.mu_before.resize(static_cast<std::size_t>(cfg.clusters));
  for (int g = 0; g < cfg.clusters; ++g) {
    rec.mu_before[static_cast<std::size_t>(g)] = km_pre.model.centers.col(g).dot(v_star);
  }
  rec.hit_before = hit(rec.mu_before[static_cast<std::size_t>(t)], cfg.hit_threshold);

  if (setup.fake_count == 0) {  // control run: no attack
    rec.mu_after = rec.mu_before;
    rec.rel_change.assign(static_cast<std::size_t>(cfg.clusters), 0.0);
    rec.hit_after = rec.hit_before;
    return rec;
  }

  auto gen_stats = cluster_rating_stats(prep.matrix, km_pre.model);
  const int wanted = cfg.filler_count.value_or(min_items_rated(prep.matrix));
  auto ranked = distinguisher_items(gen_stats, t, wanted + 1);
  std::vector<int> fillers;
  fillers.reserve(static_cast<std::size_t>(wanted));
  for (int item : ranked.items) {
    if (item == prep.target_item) continue;
    fillers.push_back(item);
    if (static_cast<int>(fillers.size()) == wanted) break;
  }
  if (fillers.empty()) {
    throw MissingStatisticError("regime 1: no usable filler items for the target cluster");
  }

  AttackSpec spec;
  spec.target_cluster = t;
  spec.target_item = prep.target_item;
  spec.fake_user_count = setup.fake_count;
  spec.filler_items = std::move(fillers);
  spec.filler_sigma = cfg.filler_sigma;
  spec.target_rating = cfg.fake_rating;
  spec.seed = derive_seed(rep_seed, seed_stream::kAttackRows);
  auto fakes = build_fake_profiles(spec, gen_stats);
  auto injected = inject(prep.matrix, fakes);

  const Eigen::MatrixXd u_post = solve_all_users(injected.matrix, v, cfg.lambda);
  for (int u = 0; u < prep.matrix.n_users(); ++u) {
    if (!(u_post.col(u).array() == u_pre.col(u).array()).all()) {
      throw NumericalError("regime 1: a true user's weight vector changed under fixed V");
    }
  }

  std::optional<std::vector<int>> pins;
  if (cfg.enforce_fake_entry) {
    std::vector<int> p(static_cast<std::size_t>(injected.matrix.n_users()), -1);
    for (int id : injected.fake_ids) p[static_cast<std::size_t>(id)] = t;
    pins = std::move(p);
  }
  auto km_post = warm_start_assign(u_post, km_pre.model.centers, 100, pins);
  rec.entry_rate = fake_entry_rate(km_post.model, injected.fake_ids, t);

  rec.mu_after.resize(static_cast<std::size_t>(cfg.clusters));
  rec.rel_change.resize(static_cast<std::size_t>(cfg.clusters));
  for (int g = 0; g < cfg.clusters; ++g) {
    rec.mu_after[static_cast<std::size_t>(g)] = km_post.model.centers.col(g).dot(v_star);
    rec.rel_change[static_cast<std::size_t>(g)] =
        relative_change(rec.mu_before[static_cast<std::size_t>(g)],
                        rec.mu_after[static_cast<std::size_t>(g)]);
  }
  rec.hit_after = hit(rec.mu_after[static_cast<std::size_t>(t)], cfg.hit_threshold);

  auto series = correlation_vs_delta(v, prep.target_item, km_pre.model.centers.col(t),
                                     km_post.model.centers.col(t));
  if (series.points.size() >= 2) {
    std::vector<double> corr, delta;
    corr.reserve(series.points.size());
    delta.reserve(series.points.size());
    for (const auto& p : series.points) {
      corr.push_back(p.correlation);
      delta.push_back(p.delta);
    }
    rec.spearman_corr_delta = spearman(corr, delta);
  }
  return rec;
}

ReplicationRecord replicate_regime2(const ExperimentConfig& cfg, const BaselinePrep& base,
                                    const PointSetup& setup, int rep, std::uint64_t rep_seed,
                                    Eigen::VectorXd* pre_center_out) {
  ReplicationRecord rec;
  rec.param = setup.param;
  rec.rep = rep;
  rec.seed = rep_seed;
  rec.fake_count = setup.fake_count;

  auto prep = generate_and_factorize(cfg, base, setup, rep_seed);
  rec.target_item = prep.target_item;
  const int t = cfg.target_cluster;

  auto km = warm_start_assign(prep.model.user_factors, base.clusters.centers);
  const Eigen::MatrixXd& centers = km.model.centers;
  *pre_center_out = centers.col(t);

  // Idealise the target item's true raters to their cluster weight vectors.
  const auto& raters = prep.matrix.users_of(prep.target_item);
  Eigen::MatrixXd rater_factors(cfg.latent_dim, static_cast<Eigen::Index>(raters.size()));
  Eigen::VectorXd rater_values(static_cast<Eigen::Index>(raters.size()));
  for (Eigen::Index i = 0; i < rater_factors.cols(); ++i) {
    const auto& [user, value] = raters[static_cast<std::size_t>(i)];
    rater_factors.col(i) =
        centers.col(prep.cluster_of_user[static_cast<std::size_t>(user)]);
    rater_values[i] = value;
  }
  const auto gram = gram_inverse(rater_factors, cfg.lambda);
  const Eigen::VectorXd v_before = gram.matrix() * (rater_factors * rater_values);

  rec.mu_before.resize(static_cast<std::size_t>(cfg.clusters));
  for (int g = 0; g < cfg.clusters; ++g) {
    rec.mu_before[static_cast<std::size_t>(g)] = centers.col(g).dot(v_before);
  }
  rec.hit_before = hit(rec.mu_before[static_cast<std::size_t>(t)], cfg.hit_threshold);

  if (setup.fake_count == 0) {
    rec.mu_after = rec.mu_before;
    rec.rel_change.assign(static_cast<std::size_t>(cfg.clusters), 0.0);
    rec.hit_after = rec.hit_before;
    return rec;
  }

  const Eigen::VectorXd u_t = centers.col(t);
  const double gain =
      block_update_gain(gram, u_t, setup.fake_count, cfg.fake_rating, v_before);
  const Eigen::VectorXd v_after =
      block_update_item_identical(v_before, gram, u_t, setup.fake_count, cfg.fake_rating);

  auto breakdown = decompose_update(gram, u_t, setup.fake_count, gain);
  rec.feature_delta.resize(breakdown.features.size());
  for (std::size_t k = 0; k < breakdown.features.size(); ++k) {
    rec.feature_delta[k] = breakdown.features[k].delta;
  }

  rec.entry_rate = 1.0;  // fake columns sit exactly at the target centre
  rec.mu_after.resize(static_cast<std::size_t>(cfg.clusters));
  rec.rel_change.resize(static_cast<std::size_t>(cfg.clusters));
  for (int g = 0; g < cfg.clusters; ++g) {
    rec.mu_after[static_cast<std::size_t>(g)] = centers.col(g).dot(v_after);
    rec.rel_change[static_cast<std::size_t>(g)] =
        relative_change(rec.mu_before[static_cast<std::size_t>(g)],
                        rec.mu_after[static_cast<std::size_t>(g)]);
  }
  rec.hit_after = hit(rec.mu_after[static_cast<std::size_t>(t)], cfg.hit_threshold);
  return rec;
}

ExperimentReport run(const ExperimentConfig& cfg, Regime regime) {
  cfg.validate();
  if (cfg.regime != regime) {
    throw InvalidInputError("config regime does not match the requested run");
  }
  const BaselinePrep base = prepare_baseline(cfg);

  ExperimentReport report;
  report.config = to_json(cfg);
  report.target_cluster = cfg.target_cluster;
  report.sweep_values = cfg.sweep_values;

  std::vector<PointSetup> setups;
  setups.reserve(cfg.sweep_values.size());
  for (double param : cfg.sweep_values) setups.push_back(point_setup(cfg, param));

  const std::size_t total =
      setups.size() * static_cast<std::size_t>(cfg.replications);
  report.replications.resize(total);
  std::vector<Eigen::VectorXd> pre_centers(total,
                                           Eigen::VectorXd::Zero(cfg.latent_dim));

  auto work = [&](std::size_t task) {
    const std::size_t pi = task / static_cast<std::size_t>(cfg.replications);
    const int rep = static_cast<int>(task % static_cast<std::size_t>(cfg.replications));
    // One seed per replication index, shared across sweep points: every point
    // attacks the same 50 generated datasets, so sweep comparisons are paired.
    const std::uint64_t rep_seed = derive_seed(cfg.root_seed, seed_stream::kReplication,
                                               static_cast<std::uint64_t>(rep));
    ReplicationRecord rec;
    try {
      rec = regime == Regime::kFixVUpdateU
                ? replicate_regime1(cfg, base, setups[pi], rep, rep_seed, &pre_centers[task])
                : replicate_regime2(cfg, base, setups[pi], rep, rep_seed, &pre_centers[task]);
    } catch (const std::exception& e) {
      rec = ReplicationRecord{};
      rec.param = setups[pi].param;
      rec.rep = rep;
      rec.seed = rep_seed;
      rec.failed = true;
      rec.error = e.what();
    }
    report.replications[task] = std::move(rec);
  };

  unsigned hw = std::thread::hardware_concurrency();
  const std::size_t n_threads = std::min<std::size_t>(
      total, cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::max(1u, hw));
  if (n_threads <= 1) {
    for (std::size_t task = 0; task < total; ++task) work(task);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t tix = 0; tix < n_threads; ++tix) {
      pool.emplace_back([&] {
        for (std::size_t task = next.fetch_add(1); task < total; task = next.fetch_add(1)) {
          work(task);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  report.target_center_mean = Eigen::VectorXd::Zero(cfg.latent_dim);
  int ok = 0;
  for (std::size_t task = 0; task < total; ++task) {
    const auto& rec = report.replications[task];
    if (rec.failed) {
      report.warnings.push_back("replication " + std::to_string(rec.rep) + " at param " +
                                fmt(rec.param) + " failed: " + rec.error);
      continue;
    }
    report.target_center_mean += pre_centers[task];
    ++ok;
  }
  if (ok > 0) report.target_center_mean /= static_cast<double>(ok);

  report.aggregates =
      aggregate_replications(report.sweep_values, report.replications, cfg.target_cluster);
  for (const auto& agg : report.aggregates) {
    if (agg.n_ok == 0) {
      report.warnings.push_back("sweep point " + fmt(agg.param) +
                                ": every replication failed, aggregate undefined");
    }
  }
  return report;
}

}  // namespace

ExperimentReport run_regime1(const ExperimentConfig& cfg) {
  return run(cfg, Regime::kFixVUpdateU);
}

ExperimentReport run_regime2(const ExperimentConfig& cfg) {
  return run(cfg, Regime::kFixUUpdateV);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  return cfg.regime == Regime::kFixVUpdateU ? run_regime1(cfg) : run_regime2(cfg);
}

std::vector<std::string> emit_outputs(const ExperimentReport& report, const std::string& format,
                                      const std::string& dir) {
  if (format != "csv" && format != "json") {
    throw InvalidInputError("emit_outputs: format must be 'csv' or 'json'");
  }
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());

  std::vector<std::string> files;
  auto open = [&](const std::string& name) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    files.push_back(path);
    return out;
  };

  {
    auto out = open("aggregate.csv");
    out << "param,mean,std,stderr\n";
    for (const auto& a : report.aggregates) {
      out << fmt(a.param) << ',' << fmt(a.mean) << ',' << fmt(a.stddev) << ','
          << fmt(a.stderror) << '\n';
    }
  }
  {
    auto out = open("replications.csv");
    out << "param,rep,cluster,mu_o,mu_f,rel_change,hit_before,hit_after\n";
    const double threshold = report.config.value("hit_threshold", 4.0);
    for (const auto& r : report.replications) {
      if (r.failed) continue;
      for (std::size_t g = 0; g < r.rel_change.size(); ++g) {
        out << fmt(r.param) << ',' << r.rep << ',' << g << ',' << fmt(r.mu_before[g]) << ','
            << fmt(r.mu_after[g]) << ',' << fmt(r.rel_change[g]) << ','
            << (hit(r.mu_before[g], threshold) ? 1 : 0) << ','
            << (hit(r.mu_after[g], threshold) ? 1 : 0) << '\n';
      }
    }
  }
  {
    auto out = open("hits.csv");
    out << "param,avg_hit_before,avg_hit_after\n";
    for (const auto& a : report.aggregates) {
      out << fmt(a.param) << ',' << fmt(a.hit_before_rate) << ',' << fmt(a.hit_after_rate)
          << '\n';
    }
  }

  const bool has_mechanics = std::any_of(
      report.aggregates.begin(), report.aggregates.end(),
      [](const SweepAggregate& a) { return !a.feature_delta_mean.empty(); });
  if (has_mechanics) {
    auto out = open("mechanics.csv");
    const Eigen::Index d = report.target_center_mean.size();
    out << "param";
    for (Eigen::Index k = 0; k < d; ++k) out << ",k" << k;
    out << '\n';
    out << "U_t";
    for (Eigen::Index k = 0; k < d; ++k) out << ',' << fmt(report.target_center_mean[k]);
    out << '\n';
    for (const auto& a : report.aggregates) {
      out << fmt(a.param);
      for (double v : a.feature_delta_mean) out << ',' << fmt(v);
      out << '\n';
    }
  }

  if (format == "json") {
    auto out = open("report.json");
    out << to_json(report).dump(2) << '\n';
  }

  {
    nlohmann::json manifest{{"schema_version", 1},
                            {"config", report.config},
                            {"warnings", report.warnings},
                            {"files", nlohmann::json::array()}};
    for (const auto& f : files) {
      manifest["files"].push_back(fs::path(f).filename().string());
    }
    manifest["files"].push_back("manifest.json");
    auto out = open("manifest.json");
    out << manifest.dump(2) << '\n';
  }
  return files;
}

}  // namespace poisonrec

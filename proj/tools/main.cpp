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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "poisonrec/attack.hpp"
#include "poisonrec/errors.hpp"
#include "poisonrec/ingest.hpp"
#include "poisonrec/mechanics.hpp"
#include "poisonrec/rng.hpp"
#include "poisonrec/runner.hpp"

namespace {

using poisonrec::ExperimentConfig;

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string field;
  while (std::getline(ss, field, ',')) {
    out.push_back(std::stod(field));
  }
  return out;
}

std::vector<long long> parse_ll_list(const std::string& csv) {
  std::vector<long long> out;
  std::stringstream ss(csv);
  std::string field;
  while (std::getline(ss, field, ',')) {
    out.push_back(std::stoll(field));
  }
  return out;
}

struct RunOverrides {
  std::string config_path;
  std::string out;
  std::string format = "csv";
  std::string dataset_source;
  std::string dataset_path;
  std::string sweep;
  std::string profile;
  int reps = -1;
  int threads = -1;
  int target_cluster = -1;
  int demo_items = -1;
  long long seed = -1;
};

void add_run_options(CLI::App* cmd, RunOverrides& o) {
  cmd->add_option("--config", o.config_path, "experiment config JSON file");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--format", o.format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--dataset", o.dataset_source,
                  "dataset source: demo, movielens, ratings-csv, goodreads-subset");
  cmd->add_option("--dataset-path", o.dataset_path, "path for file-backed sources");
  cmd->add_option("--sweep", o.sweep, "comma-separated sweep values, e.g. 0.5,1,1.5");
  cmd->add_option("--profile", o.profile,
                  "per-cluster target-item rating counts, e.g. 5,5,5,5 or 0,0,Nt,0");
  cmd->add_option("--reps", o.reps, "replications per sweep point");
  cmd->add_option("--threads", o.threads, "worker threads (0 = hardware)");
  cmd->add_option("--target-cluster", o.target_cluster, "cluster the adversary promotes into");
  cmd->add_option("--demo-items", o.demo_items, "item count of the demo baseline");
  cmd->add_option("--seed", o.seed, "root seed");
}

ExperimentConfig config_from(const RunOverrides& o, poisonrec::Regime regime,
                             poisonrec::SweepParameter default_sweep) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw poisonrec::IoError("cannot open config '" + o.config_path + "'");
    nlohmann::json j;
    in >> j;
    cfg = poisonrec::experiment_config_from_json(j);
  } else {
    cfg.regime = regime;
    cfg.sweep_parameter = default_sweep;
    if (regime == poisonrec::Regime::kFixUUpdateV) {
      cfg.sweep_values = {0.05, 0.5, 1.0, 1.75, 2.5};
      cfg.target_profile = {0, 0, std::nullopt, 0};
    }
  }
  cfg.regime = regime;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.dataset_source.empty()) cfg.dataset.source = o.dataset_source;
  if (!o.dataset_path.empty()) cfg.dataset.path = o.dataset_path;
  if (!o.sweep.empty()) cfg.sweep_values = parse_double_list(o.sweep);
  if (!o.profile.empty()) {
    cfg.target_profile.clear();
    std::stringstream ss(o.profile);
    std::string field;
    while (std::getline(ss, field, ',')) {
      if (field == "Nt") {
        cfg.target_profile.push_back(std::nullopt);
      } else {
        cfg.target_profile.push_back(std::stoi(field));
      }
    }
  }
  if (o.reps > 0) cfg.replications = o.reps;
  if (o.threads >= 0) cfg.threads = o.threads;
  if (o.target_cluster >= 0) cfg.target_cluster = o.target_cluster;
  if (o.demo_items > 0) cfg.dataset.demo_items = o.demo_items;
  if (o.seed >= 0) cfg.root_seed = static_cast<std::uint64_t>(o.seed);
  cfg.validate();
  return cfg;
}

int run_and_emit(const ExperimentConfig& cfg, const std::string& format) {
  auto report = poisonrec::run_experiment(cfg);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  auto files = poisonrec::emit_outputs(report, format, cfg.output_dir);
  // Console summary: one line per sweep point.
  for (const auto& a : report.aggregates) {
    std::printf("param=%-8g mean=%-10.4f std=%-9.4f stderr=%-9.4f hits(before/after)=%.2f/%.2f n=%d\n",
                a.param, a.mean, a.stddev, a.stderror, a.hit_before_rate, a.hit_after_rate,
                a.n_ok);
  }
  for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
  return 0;
}

int run_mechanics(double lambda, int dim, int raters, int mixed_raters, int fakes,
                  double fake_rating, long long seed, const std::string& schedule_csv,
                  const std::string& out_path) {
  using namespace poisonrec;
  Rng rng = make_rng(static_cast<std::uint64_t>(seed));
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  Eigen::VectorXd u_t(dim), u_g(dim);
  for (int i = 0; i < dim; ++i) u_t[i] = unif(rng);
  for (int i = 0; i < dim; ++i) u_g[i] = unif(rng);

  const GramInverse gram =
      mixed_raters > 0 ? mixed_cluster_gram_inverse(lambda, u_t, raters, u_g, mixed_raters)
                       : single_cluster_gram_inverse(lambda, u_t, raters);
  const auto report = sign_structure_report(gram, u_t);
  int non_uniform = 0;
  for (const auto& row : report.rows) non_uniform += row.uniform_opposition ? 0 : 1;
  std::printf("sign structure: %d/%zu rows with uniform opposition\n",
              static_cast<int>(report.rows.size()) - non_uniform, report.rows.size());

  // Representative pre-attack item vector: raters share u_t with mean rating 2.5.
  const Eigen::VectorXd v_before = gram.matrix() * (u_t * (2.5 * raters));
  const double gain = block_update_gain(gram, u_t, fakes, fake_rating, v_before);
  const auto breakdown = decompose_update(gram, u_t, fakes, gain);

  std::printf("m=%d K=%.6g\n", fakes, gain);
  std::printf("%3s %10s %12s %12s %12s %4s\n", "k", "u_t[k]", "diag", "offdiag", "delta", "case");
  for (std::size_t k = 0; k < breakdown.features.size(); ++k) {
    const auto& f = breakdown.features[k];
    std::printf("%3zu %10.4f %12.6f %12.6f %12.6f %4s\n", k, u_t[static_cast<Eigen::Index>(k)],
                f.diag_term, f.offdiag_sum, f.delta, update_case_name(f.label));
  }

  const auto schedule = schedule_csv.empty()
                            ? std::vector<long long>{10, 100, 1000, 10000, 100000, 1000000}
                            : parse_ll_list(schedule_csv);
  const auto target_norms = convergence_probe_target(lambda, u_t, schedule);
  const auto nontarget_norms = convergence_probe_nontarget(lambda, u_t, u_g, schedule);
  std::printf("%10s %16s %16s\n", "N", "|A^-1 u_t| tgt", "|A^-1 u_t| non");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    std::printf("%10lld %16.8g %16.8g\n", schedule[i], target_norms[i], nontarget_norms[i]);
  }

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open '" + out_path + "' for writing");
    out << "k,u_t,diag_term,offdiag_sum,delta,case,gamma\n";
    for (std::size_t k = 0; k < breakdown.features.size(); ++k) {
      const auto& f = breakdown.features[k];
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g,%.12g,%s,", k,
                    u_t[static_cast<Eigen::Index>(k)], f.diag_term, f.offdiag_sum, f.delta,
                    update_case_name(f.label));
      out << buf;
      if (f.gamma.has_value()) {
        std::snprintf(buf, sizeof(buf), "%.12g", *f.gamma);
        out << buf;
      }
      out << '\n';
    }
    std::printf("wrote %s\n", out_path.c_str());
  }
  return 0;
}

const char* error_kind(const std::exception& e) {
  using namespace poisonrec;
  if (dynamic_cast<const DuplicateEntryError*>(&e)) return "duplicate_entry";
  if (dynamic_cast<const InvalidInputError*>(&e)) return "invalid_input";
  if (dynamic_cast<const ParseError*>(&e)) return "parse_error";
  if (dynamic_cast<const ColdStartError*>(&e)) return "cold_start";
  if (dynamic_cast<const MissingStatisticError*>(&e)) return "missing_statistic";
  if (dynamic_cast<const NoCandidateError*>(&e)) return "no_candidate";
  if (dynamic_cast<const SaturatedItemError*>(&e)) return "saturated_item";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  return "internal";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"poisonrec: user-cluster targeted poisoning testbed for MF recommenders"};
  app.require_subcommand(1);

  RunOverrides r1, r2;
  auto* regime1 = app.add_subcommand(
      "regime1", "fix V, update U: attack shifts the target cluster centre");
  add_run_options(regime1, r1);
  auto* regime2 = app.add_subcommand(
      "regime2", "fix U, update V: attack shifts the target item vector");
  add_run_options(regime2, r2);

  auto* mech = app.add_subcommand("mechanics",
                                  "per-feature update decomposition, sign structure and "
                                  "convergence probe on a synthetic rater pool");
  double m_lambda = 0.1;
  int m_dim = 10, m_raters = 5, m_mixed = 0, m_fakes = 100;
  double m_fake_rating = 5.0;
  long long m_seed = 1;
  std::string m_schedule, m_out;
  mech->add_option("--lambda", m_lambda, "regulariser");
  mech->add_option("--dim", m_dim, "latent dimension");
  mech->add_option("--raters", m_raters, "true raters at the target centre");
  mech->add_option("--mixed-raters", m_mixed, "additional raters from another cluster");
  mech->add_option("--fakes", m_fakes, "fake raters");
  mech->add_option("--fake-rating", m_fake_rating, "rating the fakes give");
  mech->add_option("--seed", m_seed, "seed for the synthetic weight vectors");
  mech->add_option("--schedule", m_schedule, "comma-separated rating counts for the probe");
  mech->add_option("--out", m_out, "breakdown CSV path");

  auto* ingest = app.add_subcommand("ingest", "parse a ratings file into the canonical CSV");
  std::string in_path, in_format = "movielens", in_out;
  int in_top_users = 0, in_top_items = 0;
  ingest->add_option("--input", in_path, "input file")->required();
  ingest->add_option("--format", in_format, "movielens or csv")
      ->check(CLI::IsMember({"movielens", "csv"}));
  ingest->add_option("--out", in_out, "canonical CSV output path");
  ingest->add_option("--top-users", in_top_users, "keep only the most active users");
  ingest->add_option("--top-items", in_top_items, "keep only the most rated items");

  auto* synth = app.add_subcommand(
      "synthgen", "resample synthetic users from a baseline dataset's rating distributions");
  std::string s_input, s_out, s_assignment_out;
  bool s_demo = false;
  int s_users = 250, s_dim = 10, s_k = 4, s_demo_items = 400;
  double s_lambda = 0.1;
  long long s_seed = 1;
  synth->add_option("--input", s_input, "baseline ratings CSV");
  synth->add_flag("--demo", s_demo, "use the built-in demo baseline");
  synth->add_option("--out", s_out, "generated ratings CSV")->required();
  synth->add_option("--assignment-out", s_assignment_out, "ground-truth cluster CSV");
  synth->add_option("--users-per-cluster", s_users, "generated users per cluster (>= 250)");
  synth->add_option("--dim", s_dim, "latent dimension");
  synth->add_option("--clusters", s_k, "cluster count");
  synth->add_option("--lambda", s_lambda, "regulariser");
  synth->add_option("--demo-items", s_demo_items, "item count of the demo baseline");
  synth->add_option("--seed", s_seed, "root seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (regime1->parsed()) {
      return run_and_emit(config_from(r1, poisonrec::Regime::kFixVUpdateU,
                                      poisonrec::SweepParameter::kNOverMFixedV),
                          r1.format);
    }
    if (regime2->parsed()) {
      return run_and_emit(config_from(r2, poisonrec::Regime::kFixUUpdateV,
                                      poisonrec::SweepParameter::kNtOverNfTarget),
                          r2.format);
    }
    if (mech->parsed()) {
      return run_mechanics(m_lambda, m_dim, m_raters, m_mixed, m_fakes, m_fake_rating, m_seed,
                           m_schedule, m_out);
    }
    if (ingest->parsed()) {
      auto data = in_format == "movielens" ? poisonrec::parse_movielens(in_path)
                                           : poisonrec::parse_ratings_csv(in_path);
      if (in_top_users > 0 || in_top_items > 0) {
        const int users = in_top_users > 0 ? in_top_users : data.ratings.n_users();
        const int items = in_top_items > 0 ? in_top_items : data.ratings.n_items();
        data = poisonrec::dense_subset(data, users, items);
      }
      if (!in_out.empty()) poisonrec::write_ratings_csv(in_out, data);
      nlohmann::json summary{{"users", data.ratings.n_users()},
                             {"items", data.ratings.n_items()},
                             {"entries", data.ratings.n_entries()}};
      std::cout << summary.dump() << '\n';
      return 0;
    }
    if (synth->parsed()) {
      using namespace poisonrec;
      if (s_demo == s_input.empty() && !s_demo) {
        throw InvalidInputError("synthgen: pass --input FILE or --demo");
      }
      ExperimentConfig cfg;
      cfg.latent_dim = s_dim;
      cfg.clusters = s_k;
      cfg.lambda = s_lambda;
      cfg.users_per_cluster = std::max(250, s_users);
      cfg.root_seed = static_cast<std::uint64_t>(s_seed);
      cfg.dataset.source = s_demo ? "demo" : "ratings-csv";
      cfg.dataset.path = s_input;
      cfg.dataset.demo_items = s_demo_items;
      auto base = prepare_baseline(cfg);
      std::vector<int> per_cluster(static_cast<std::size_t>(s_k), s_users);
      auto gen = generate_users(base.stats, base.ratings, base.clusters, per_cluster,
                                derive_seed(cfg.root_seed, seed_stream::kGenerateUsers));
      write_ratings_csv(s_out, with_identity_ids(gen.ratings));
      if (!s_assignment_out.empty()) {
        std::ofstream out(s_assignment_out);
        if (!out) throw IoError("cannot open '" + s_assignment_out + "'");
        out << "user_id,cluster\n";
        for (std::size_t u = 0; u < gen.cluster_of_user.size(); ++u) {
          out << u << ',' << gen.cluster_of_user[u] << '\n';
        }
      }
      nlohmann::json summary{{"users", gen.ratings.n_users()},
                             {"items", gen.ratings.n_items()},
                             {"entries", gen.ratings.n_entries()}};
      std::cout << summary.dump() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", {{"type", error_kind(e)}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
  return 0;
}

/*
 * Copyright (c) 2026, The htrm Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "htrm/error.hpp"
#include "htrm/experiments.hpp"
#include "htrm/limit_laws.hpp"
#include "htrm/stats.hpp"

using namespace htrm;

namespace {

ExperimentConfig small(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.n = 200;
  c.trials = 12;
  c.master_seed = 7;
  c.reference_samples = 2000;
  c.rows = 60;
  c.cols = 120;
  return c;
}

std::string csv_of(const RunManifest& m) {
  std::ostringstream out;
  write_trials_csv(m, out);
  return out.str();
}

}  // namespace

TEST_CASE("KS statistic: hand-computed cases") {
  const CdfFn uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(ks_statistic({0.5}, uniform) == doctest::Approx(0.5));
  CHECK(ks_statistic({0.25, 0.75}, uniform) == doctest::Approx(0.25));
  // Every sample shifted by 0.1 above the uniform grid.
  std::vector<double> shifted;
  for (int i = 0; i < 10; ++i) shifted.push_back(std::min(1.0, (i + 0.5) / 10.0 + 0.1));
  CHECK(ks_statistic(shifted, uniform) == doctest::Approx(0.15));
  // A point mass at 2 matched by the exact atom gives zero distance.
  const CdfFn step = [](double x) { return x >= 2.0 ? 1.0 : 0.0; };
  const CdfFn step_left = [](double x) { return x > 2.0 ? 1.0 : 0.0; };
  CHECK(ks_statistic({2.0, 2.0, 2.0}, step, step_left) == 0.0);
  CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(ks_two_sample({1, 2}, {3, 4}) == 1.0);
  CHECK(ks_critical_1pct(100) == doctest::Approx(0.163));
}

TEST_CASE("mean and dispersion summaries") {
  const auto s = summarize({1, 2, 3, 4});
  CHECK(s.mean == 2.5);
  CHECK(s.variance == doctest::Approx(5.0 / 3.0));
  CHECK(s.standard_error == doctest::Approx(std::sqrt(5.0 / 12.0)));
  CHECK(index_of_dispersion({2, 2, 2, 2}) == 0.0);
  CHECK(index_of_dispersion({0, 2, 0, 2}) == doctest::Approx((4.0 / 3.0) / 1.0));
  CHECK(empirical_cdf({1, 2, 3, 4}, 2.5) == 0.5);
}

TEST_CASE("config validation and names") {
  ExperimentConfig c;
  CHECK_NOTHROW(validate(c));
  c.mu = 1.5;
  CHECK_THROWS_AS(validate(c), DomainError);
  c = {};
  c.trials = 0;
  CHECK_THROWS_AS(validate(c), DomainError);
  c = {};
  c.thresholds.clear();
  c.kind = ExperimentKind::point_process;
  CHECK_THROWS_AS(validate(c), DomainError);
  for (auto k : {ExperimentKind::edge_law, ExperimentKind::point_process, ExperimentKind::localization,
                 ExperimentKind::spike, ExperimentKind::covariance_edge, ExperimentKind::decomposition_check}) {
    CHECK(experiment_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(experiment_kind_from_string("bogus"), DomainError);
  ExperimentConfig g;
  g.law = LawFamily::gaussian;
  CHECK_THROWS_AS(tail_law(g), DomainError);
}

TEST_CASE("config JSON round trip") {
  ExperimentConfig c = small(ExperimentKind::decomposition_check);
  c.threshold_override = 3.0;
  c.cut_sweep = {0.1, 0.2};
  c.thetas = {0.5, 2.0};
  c.degree = 9;
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.threshold_override == 3.0);
  CHECK(back.degree == 9u);
}

TEST_CASE("edge-law run: columns, order and determinism across threads") {
  ExperimentConfig c = small(ExperimentKind::edge_law);
  c.k = 3;
  const RunManifest one = run_experiment(c);
  CHECK_FALSE(one.failed);
  CHECK(one.trials.rows.size() == c.trials);
  CHECK(one.has_score("ks_lambda_1"));
  CHECK(one.has_score("ks_joint_lambda_3"));
  CHECK(one.summary("order_violations") == 0.0);
  const auto l1 = one.column("lambda_1");
  const auto l2 = one.column("lambda_2");
  for (std::size_t i = 0; i < l1.size(); ++i) CHECK(l1[i] >= l2[i]);
  CHECK_FALSE(one.cdf_table.empty());

  c.threads = 4;
  const RunManifest four = run_experiment(c);
  CHECK(csv_of(one) == csv_of(four));
}

TEST_CASE("point-process run") {
  ExperimentConfig c = small(ExperimentKind::point_process);
  c.thresholds = {0.8, 1.5};
  c.k = 2;
  const RunManifest m = run_experiment(c);
  CHECK_FALSE(m.failed);
  CHECK(m.has_score("mean_count_0.8"));
  CHECK(m.has_score("dispersion_1.5"));
  CHECK(m.has_score("ks_T1_frechet"));
  CHECK(m.has_score("ks_T1_exact"));
  for (double t : m.column("T_1")) CHECK(t > 0.0);
}

TEST_CASE("localization run") {
  ExperimentConfig c = small(ExperimentKind::localization);
  c.c = 8.0;
  c.min_events = 1000;
  const RunManifest m = run_experiment(c);
  CHECK_FALSE(m.failed);
  // Too few trials for min_events: frequency is reported but not scored.
  CHECK_FALSE(m.has_score("event_frequency"));
  CHECK_FALSE(m.notes.empty());
  for (double e : m.column("event")) CHECK((e == 0.0 || e == 1.0));
}

TEST_CASE("spike run") {
  ExperimentConfig c = small(ExperimentKind::spike);
  c.thetas = {0.5, 2.0};
  c.trials = 4;
  const RunManifest m = run_experiment(c);
  CHECK_FALSE(m.failed);
  CHECK(m.has_score("mean_lambda_1_theta_2"));
  CHECK(m.has_score("mean_overlap_theta_0.5"));
  for (double o : m.column("overlap_theta_2")) CHECK((o >= 0.0 && o <= 1.0 + 1e-12));
}

TEST_CASE("covariance runs") {
  ExperimentConfig c = small(ExperimentKind::covariance_edge);
  c.law = LawFamily::gaussian;
  c.trials = 4;
  const RunManifest plant = run_experiment(c);
  CHECK_FALSE(plant.failed);
  CHECK(plant.has_score("relative_error"));
  CHECK(plant.has_score("f_alpha_residual"));
  CHECK(plant.summary("alpha") == doctest::Approx(2.0));
  const auto e = plant.column("lambda_1_E");
  const auto cov = plant.column("lambda_1_cov");
  for (std::size_t i = 0; i < e.size(); ++i) CHECK(cov[i] == doctest::Approx(e[i] * e[i]).epsilon(1e-8));

  c.law = LawFamily::crossover;
  c.mode = CovarianceMode::law;
  const RunManifest law = run_experiment(c);
  CHECK_FALSE(law.failed);
  CHECK(law.has_score("ks_lambda_1_cov"));
}

TEST_CASE("decomposition-check run") {
  ExperimentConfig c = small(ExperimentKind::decomposition_check);
  c.mu = 0.5;
  c.cut_sweep = {0.25, 0.5};
  const RunManifest m = run_experiment(c);
  CHECK_FALSE(m.failed);
  CHECK(m.score("small_violations") == 0.0);
  CHECK(m.score("cut_mismatch") == 0.0);
  for (int k = 1; k <= 4; ++k) CHECK(m.has_score("moment_" + std::to_string(k) + "_z"));
  CHECK(m.column("above_cut_0.25").size() == c.trials);
}

TEST_CASE("manifest JSON round trip") {
  ExperimentConfig c = small(ExperimentKind::point_process);
  c.trials = 3;
  const RunManifest m = run_experiment(c);
  const RunManifest back = manifest_from_json(manifest_to_json(m));
  CHECK(manifest_to_json(back) == manifest_to_json(m));
  CHECK(csv_of(back) == csv_of(m));
  CHECK(back.version == std::string(kArtifactVersion));
}

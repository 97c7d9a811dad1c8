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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "htrm/ensembles.hpp"
#include "htrm/tail_laws.hpp"

namespace htrm {

inline constexpr std::string_view kArtifactVersion = "htrm 1.0.0";

enum class ExperimentKind {
  edge_law,
  point_process,
  localization,
  spike,
  covariance_edge,
  decomposition_check,
};

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

enum class LawFamily { crossover, gaussian };

std::string_view to_string(LawFamily family);
LawFamily law_family_from_string(std::string_view name);

enum class CovarianceMode { plant, law };

std::string_view to_string(CovarianceMode mode);
CovarianceMode covariance_mode_from_string(std::string_view name);

/// Everything a run depends on. Defaults are recorded verbatim in the
/// manifest, so a manifest alone reproduces its run.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::edge_law;

  // Ensemble.
  EnsembleKind ensemble = EnsembleKind::sparse_wigner;
  std::size_t n = 1000;
  /// Sparsity exponent: p_n = n^mu (degree n^mu for graph ensembles).
  double mu = 1.0;
  /// Explicit degree k_n for band / regular_graph ensembles.
  std::optional<std::size_t> degree;
  double diagonal_variance = 1.0;

  // Entry law.
  LawFamily law = LawFamily::crossover;
  double c = 2.0;
  /// Defaults to 2(1 + 1/mu), or 4 for the covariance experiment.
  std::optional<double> tail_index;
  /// Defaults to default_crossover_point(c, tail_index).
  std::optional<double> crossover_point;

  // Harness.
  std::size_t trials = 100;
  std::size_t k = 1;
  std::uint64_t master_seed = 1;
  std::size_t threads = 1;
  double tol = 1e-10;

  // Edge law: size of the simulated Poisson reference sample.
  std::size_t reference_samples = 100000;

  // Localization.
  double eps = 0.15;
  double margin = 0.3;
  std::size_t min_events = 50;

  // Point process.
  std::vector<double> thresholds{1.0};

  // Spike.
  std::vector<double> thetas{2.0};

  // Covariance.
  std::size_t rows = 1500;
  std::size_t cols = 3000;
  CovarianceMode mode = CovarianceMode::plant;
  double plant_x = 1.2;

  // Decomposition.
  double log_exponent = 5.0;
  std::optional<double> threshold_override;
  double cut_level = 0.25;
  std::vector<double> cut_sweep;
  /// Replaces (log n)^-e as the "large entry" bound in the structural check.
  std::optional<double> structural_bound;
  double delta = 0.5;
  bool check_cut_norm = true;
};

/// Throws DomainError when a field is outside its domain.
void validate(const ExperimentConfig& config);

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Entry law of the Wigner / covariance samples.
EntryLaw entry_law(const ExperimentConfig& config);
/// The crossover law; throws DomainError for the Gaussian family.
TailLaw tail_law(const ExperimentConfig& config);
/// p_n = n^mu (n for dense_wigner).
double sparsity(const ExperimentConfig& config);
/// Degree of the graph ensembles: the configured one or round(n^mu), made
/// odd for the band ensemble.
std::size_t graph_degree(const ExperimentConfig& config);

/// One symmetric sample of the configured Wigner-type ensemble.
EnsembleSample sample_ensemble(const ExperimentConfig& config, Rng& rng);

struct TrialTable {
  std::vector<std::string> columns;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<double>> rows;
  std::vector<bool> excluded;
};

struct CdfPoint {
  double x = 0.0;
  double empirical = 0.0;
  double analytic = 0.0;
};

struct RunManifest {
  std::string version{kArtifactVersion};
  nlohmann::json config;
  ExperimentKind kind = ExperimentKind::edge_law;
  TrialTable trials;
  /// Scored quantities (KS distances, z-scores, gated means), in order.
  std::vector<std::pair<std::string, double>> scores;
  /// Descriptive statistics that are not scored.
  std::vector<std::pair<std::string, double>> summaries;
  std::vector<std::string> notes;
  std::string cdf_label;
  std::vector<CdfPoint> cdf_table;
  std::size_t excluded = 0;
  bool failed = false;
  std::string failure;
  double wall_clock_seconds = 0.0;

  /// Value of a named score or summary; throws DomainError if absent.
  double score(std::string_view name) const;
  double summary(std::string_view name) const;
  bool has_score(std::string_view name) const;
  /// Non-excluded values of one trial column.
  std::vector<double> column(std::string_view name) const;
};

RunManifest run_experiment(const ExperimentConfig& config);

RunManifest run_edge_law(const ExperimentConfig& config);
RunManifest run_point_process(const ExperimentConfig& config);
RunManifest run_localization(const ExperimentConfig& config);
RunManifest run_spike(const ExperimentConfig& config);
RunManifest run_covariance_edge(const ExperimentConfig& config);
RunManifest run_decomposition_check(const ExperimentConfig& config);

/// trial,seed,excluded,<columns...>; shortest round-trip decimals, so the
/// bytes depend only on the per-trial results.
void write_trials_csv(const RunManifest& manifest, std::ostream& out);

nlohmann::json manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);

}  // namespace htrm

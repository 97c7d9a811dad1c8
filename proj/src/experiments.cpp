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

#include "htrm/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "htrm/decomposition.hpp"
#include "htrm/error.hpp"
#include "htrm/limit_laws.hpp"
#include "htrm/spectral.hpp"
#include "htrm/stats.hpp"

namespace htrm {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename Enum, std::size_t N>
Enum enum_from(std::string_view name, const std::pair<Enum, std::string_view> (&table)[N],
               std::string_view what) {
  for (const auto& [value, label] : table) {
    if (label == name) return value;
  }
  throw DomainError(fmt::format("unknown {} '{}'", what, name));
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum value, const std::pair<Enum, std::string_view> (&table)[N]) {
  for (const auto& [v, label] : table) {
    if (v == value) return label;
  }
  return "unknown";
}

constexpr std::pair<ExperimentKind, std::string_view> kKindNames[] = {
    {ExperimentKind::edge_law, "edge_law"},
    {ExperimentKind::point_process, "point_process"},
    {ExperimentKind::localization, "localization"},
    {ExperimentKind::spike, "spike"},
    {ExperimentKind::covariance_edge, "covariance_edge"},
    {ExperimentKind::decomposition_check, "decomposition_check"},
};

constexpr std::pair<LawFamily, std::string_view> kLawNames[] = {
    {LawFamily::crossover, "crossover"},
    {LawFamily::gaussian, "gaussian"},
};

constexpr std::pair<CovarianceMode, std::string_view> kModeNames[] = {
    {CovarianceMode::plant, "plant"},
    {CovarianceMode::law, "law"},
};

/// Label of a real parameter inside a column or score name.
std::string tag(double x) { return fmt::format("{}", x); }

// ---------------------------------------------------------------------------
// Trial harness.

struct TrialOutcome {
  std::vector<double> values;
  bool excluded = false;
};

/// Runs body(index, rng) for every trial. Each trial owns an Rng seeded from
/// (master_seed, index), and results are stored by index, so the output does
/// not depend on the number of threads or on scheduling.
template <typename Body>
std::vector<TrialOutcome> run_trials(const ExperimentConfig& config, Body&& body) {
  std::vector<TrialOutcome> out(config.trials);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= config.trials) return;
      try {
        Rng rng(derive_seed(config.master_seed, i));
        out[i] = body(i, rng);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        stop.store(true);
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(config.threads, config.trials));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

RunManifest start_manifest(const ExperimentConfig& config, std::vector<std::string> columns) {
  RunManifest m;
  m.kind = config.kind;
  m.config = config_to_json(config);
  m.trials.columns = std::move(columns);
  return m;
}

/// Copies the outcomes into the manifest and applies the exclusion rule.
void collect(RunManifest& m, const ExperimentConfig& config, std::vector<TrialOutcome> outcomes) {
  const std::size_t width = m.trials.columns.size();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    if (o.values.size() != width) throw InternalError("trial produced a row of the wrong width");
    m.trials.seeds.push_back(derive_seed(config.master_seed, i));
    m.trials.rows.push_back(std::move(o.values));
    m.trials.excluded.push_back(o.excluded);
    if (o.excluded) ++m.excluded;
  }
  // More than 1% excluded trials fails the run.
  if (m.excluded * 100 > config.trials) {
    m.failed = true;
    m.failure = fmt::format("{} of {} trials excluded (eigensolver did not converge)",
                            m.excluded, config.trials);
  }
}

void add_score(RunManifest& m, std::string name, double value) {
  m.scores.emplace_back(std::move(name), value);
}

void add_summary(RunManifest& m, std::string name, double value) {
  m.summaries.emplace_back(std::move(name), value);
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

/// Plot-ready comparison on an even grid spanning the samples.
std::vector<CdfPoint> cdf_table(const std::vector<double>& sorted_samples, const CdfFn& cdf,
                                std::size_t points = 201) {
  std::vector<CdfPoint> table;
  if (sorted_samples.empty()) return table;
  const double lo = sorted_samples.front();
  const double hi = sorted_samples.back();
  const std::size_t count = hi > lo ? points : 1;
  for (std::size_t i = 0; i < count; ++i) {
    const double x =
        count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    table.push_back({x, empirical_cdf(sorted_samples, x), cdf(x)});
  }
  return table;
}

bool is_wigner_kind(EnsembleKind kind) {
  return kind == EnsembleKind::dense_wigner || kind == EnsembleKind::sparse_wigner ||
         kind == EnsembleKind::band || kind == EnsembleKind::regular_graph;
}

void require_kind(const ExperimentConfig& config, ExperimentKind kind) {
  validate(config);
  if (config.kind != kind) {
    throw DomainError(fmt::format("configuration is for '{}', not '{}'", to_string(config.kind),
                                  to_string(kind)));
  }
}

EigenOptions eigen_options(const ExperimentConfig& config, std::size_t k, bool vectors) {
  EigenOptions o;
  o.k = k;
  o.tol = config.tol;
  o.vectors = vectors;
  return o;
}

double linf(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? kNaN : j.get<double>();
}

}  // namespace

std::string_view to_string(ExperimentKind kind) { return enum_name(kind, kKindNames); }

ExperimentKind experiment_kind_from_string(std::string_view name) {
  return enum_from(name, kKindNames, "experiment kind");
}

std::string_view to_string(LawFamily family) { return enum_name(family, kLawNames); }

LawFamily law_family_from_string(std::string_view name) {
  return enum_from(name, kLawNames, "law family");
}

std::string_view to_string(CovarianceMode mode) { return enum_name(mode, kModeNames); }

CovarianceMode covariance_mode_from_string(std::string_view name) {
  return enum_from(name, kModeNames, "covariance mode");
}

// ---------------------------------------------------------------------------
// Configuration.

void validate(const ExperimentConfig& config) {
  if (config.trials < 1) throw DomainError("trials must be at least 1");
  if (config.k < 1) throw DomainError("k must be at least 1");
  if (config.threads < 1) throw DomainError("threads must be at least 1");
  if (!(config.tol > 0.0)) throw DomainError("tol must be positive");
  if (!(config.c > 0.0)) throw DomainError("tail constant c must be positive");
  if (!(config.mu > 0.0 && config.mu <= 1.0)) throw DomainError("mu must lie in (0, 1]");
  if (!(config.diagonal_variance >= 0.0)) throw DomainError("diagonal_variance must be >= 0");
  if (!(config.eps > 0.0)) throw DomainError("eps must be positive");
  if (!(config.margin >= 0.0)) throw DomainError("margin must be >= 0");
  if (!(config.cut_level >= 0.0)) throw DomainError("cut_level must be >= 0");
  if (!(config.delta > 0.0)) throw DomainError("delta must be positive");
  if (!(config.log_exponent > 0.0)) throw DomainError("log_exponent must be positive");
  if (config.threshold_override && !(*config.threshold_override > 0.0)) {
    throw DomainError("threshold_override must be positive");
  }
  if (config.structural_bound && !(*config.structural_bound > 0.0)) {
    throw DomainError("structural_bound must be positive");
  }
  for (double c : config.cut_sweep) {
    if (!(c >= 0.0)) throw DomainError("cut sweep levels must be >= 0");
  }
  for (double t : config.thresholds) {
    if (!(t > 0.0)) throw DomainError("count thresholds must be positive");
  }
  for (double th : config.thetas) {
    if (!(th > 0.0)) throw DomainError("spike values must be positive");
  }
  if (!(config.plant_x > 0.0)) throw DomainError("plant_x must be positive");
  if (config.kind == ExperimentKind::covariance_edge) {
    if (config.rows < 1 || config.cols < 1) throw DomainError("L and M must be at least 1");
  } else {
    if (config.n < 2) throw DomainError("n must be at least 2");
    if (!is_wigner_kind(config.ensemble)) {
      throw DomainError(fmt::format("ensemble '{}' is not a Wigner-type ensemble",
                                    to_string(config.ensemble)));
    }
  }
  if (config.kind == ExperimentKind::spike && config.thetas.empty()) {
    throw DomainError("spike experiment needs at least one theta");
  }
  if (config.kind == ExperimentKind::point_process && config.thresholds.empty()) {
    throw DomainError("point_process experiment needs at least one threshold");
  }
}

json config_to_json(const ExperimentConfig& c) {
  auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
  return json{
      {"kind", to_string(c.kind)},
      {"ensemble", std::string(to_string(c.ensemble))},
      {"n", c.n},
      {"mu", c.mu},
      {"degree", opt(c.degree)},
      {"diagonal_variance", c.diagonal_variance},
      {"law", to_string(c.law)},
      {"c", c.c},
      {"tail_index", opt(c.tail_index)},
      {"crossover_point", opt(c.crossover_point)},
      {"trials", c.trials},
      {"k", c.k},
      {"master_seed", c.master_seed},
      {"threads", c.threads},
      {"tol", c.tol},
      {"reference_samples", c.reference_samples},
      {"eps", c.eps},
      {"margin", c.margin},
      {"min_events", c.min_events},
      {"thresholds", c.thresholds},
      {"thetas", c.thetas},
      {"rows", c.rows},
      {"cols", c.cols},
      {"mode", to_string(c.mode)},
      {"plant_x", c.plant_x},
      {"log_exponent", c.log_exponent},
      {"threshold_override", opt(c.threshold_override)},
      {"cut_level", c.cut_level},
      {"cut_sweep", c.cut_sweep},
      {"structural_bound", opt(c.structural_bound)},
      {"delta", c.delta},
      {"check_cut_norm", c.check_cut_norm},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  auto get_opt = [&](const char* key, auto& field) {
    if (j.contains(key) && !j.at(key).is_null()) {
      field = j.at(key).get<typename std::decay_t<decltype(field)>::value_type>();
    }
  };
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  if (j.contains("kind")) c.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("ensemble")) {
    c.ensemble = ensemble_kind_from_string(j.at("ensemble").get<std::string>());
  }
  if (j.contains("law")) c.law = law_family_from_string(j.at("law").get<std::string>());
  if (j.contains("mode")) c.mode = covariance_mode_from_string(j.at("mode").get<std::string>());
  get("n", c.n);
  get("mu", c.mu);
  get_opt("degree", c.degree);
  get("diagonal_variance", c.diagonal_variance);
  get("c", c.c);
  get_opt("tail_index", c.tail_index);
  get_opt("crossover_point", c.crossover_point);
  get("trials", c.trials);
  get("k", c.k);
  get("master_seed", c.master_seed);
  get("threads", c.threads);
  get("tol", c.tol);
  get("reference_samples", c.reference_samples);
  get("eps", c.eps);
  get("margin", c.margin);
  get("min_events", c.min_events);
  get("thresholds", c.thresholds);
  get("thetas", c.thetas);
  get("rows", c.rows);
  get("cols", c.cols);
  get("plant_x", c.plant_x);
  get("log_exponent", c.log_exponent);
  get_opt("threshold_override", c.threshold_override);
  get("cut_level", c.cut_level);
  get("cut_sweep", c.cut_sweep);
  get_opt("structural_bound", c.structural_bound);
  get("delta", c.delta);
  get("check_cut_norm", c.check_cut_norm);
  return c;
}

TailLaw tail_law(const ExperimentConfig& config) {
  if (config.law != LawFamily::crossover) {
    throw DomainError(fmt::format("experiment '{}' needs the crossover law family",
                                  to_string(config.kind)));
  }
  const double beta = config.tail_index.value_or(
      config.kind == ExperimentKind::covariance_edge ? 4.0 : frechet_exponent(config.mu));
  const double x0 = config.crossover_point.value_or(default_crossover_point(config.c, beta));
  return build_crossover_law(config.c, beta, x0);
}

EntryLaw entry_law(const ExperimentConfig& config) {
  if (config.law == LawFamily::gaussian) return GaussianLaw{};
  return tail_law(config);
}

double sparsity(const ExperimentConfig& config) {
  if (config.ensemble == EnsembleKind::dense_wigner) return static_cast<double>(config.n);
  return std::min(static_cast<double>(config.n), std::pow(static_cast<double>(config.n), config.mu));
}

std::size_t graph_degree(const ExperimentConfig& config) {
  std::size_t k = config.degree.value_or(static_cast<std::size_t>(
      std::llround(std::pow(static_cast<double>(config.n), config.mu))));
  k = std::clamp<std::size_t>(k, 1, config.n);
  if (config.ensemble == EnsembleKind::band && k % 2 == 0) k = k + 1 <= config.n ? k + 1 : k - 1;
  return k;
}

EnsembleSample sample_ensemble(const ExperimentConfig& config, Rng& rng) {
  const EntryLaw law = entry_law(config);
  switch (config.ensemble) {
    case EnsembleKind::dense_wigner:
    case EnsembleKind::sparse_wigner:
      return sample_sparse_wigner(config.n, sparsity(config), law, rng,
                                  WignerOptions{config.diagonal_variance});
    case EnsembleKind::band:
      return sample_weighted_regular(circulant_regular_adjacency(config.n, graph_degree(config)),
                                     law, rng);
    case EnsembleKind::regular_graph: {
      const std::size_t k = graph_degree(config);
      if (k % 2 == 1) {
        return sample_weighted_regular(circulant_regular_adjacency(config.n, k), law, rng);
      }
      if (config.n % 2 == 1) {
        throw DomainError("even-degree regular graphs need an even number of vertices");
      }
      return sample_weighted_regular(matching_regular_adjacency(config.n, k, rng), law, rng);
    }
    default:
      throw DomainError(fmt::format("ensemble '{}' is not a Wigner-type ensemble",
                                    to_string(config.ensemble)));
  }
}

// ---------------------------------------------------------------------------
// Manifest accessors.

double RunManifest::score(std::string_view name) const {
  for (const auto& [k, v] : scores) {
    if (k == name) return v;
  }
  throw DomainError(fmt::format("manifest has no score '{}'", name));
}

double RunManifest::summary(std::string_view name) const {
  for (const auto& [k, v] : summaries) {
    if (k == name) return v;
  }
  throw DomainError(fmt::format("manifest has no summary '{}'", name));
}

bool RunManifest::has_score(std::string_view name) const {
  return std::any_of(scores.begin(), scores.end(), [&](const auto& s) { return s.first == name; });
}

std::vector<double> RunManifest::column(std::string_view name) const {
  const auto it = std::find(trials.columns.begin(), trials.columns.end(), name);
  if (it == trials.columns.end()) throw DomainError(fmt::format("no trial column '{}'", name));
  const auto idx = static_cast<std::size_t>(it - trials.columns.begin());
  std::vector<double> out;
  for (std::size_t i = 0; i < trials.rows.size(); ++i) {
    if (!trials.excluded[i]) out.push_back(trials.rows[i][idx]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiments.

RunManifest run_edge_law(const ExperimentConfig& config) {
  require_kind(config, ExperimentKind::edge_law);
  if (config.law != LawFamily::crossover) tail_law(config);  // throws with a clear message
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> columns;
  for (std::size_t j = 1; j <= config.k; ++j) columns.push_back(fmt::format("lambda_{}", j));
  columns.emplace_back("iterations");
  RunManifest m = start_manifest(config, columns);

  auto outcomes = run_trials(config, [&](std::size_t, Rng& rng) {
    const EnsembleSample s = sample_ensemble(config, rng);
    const SpectralResult r = top_k_eigs(s, eigen_options(config, config.k, false));
    TrialOutcome o;
    o.values = r.eigenvalues;
    o.values.push_back(r.iterations);
    o.excluded = !r.converged;
    return o;
  });
  collect(m, config, std::move(outcomes));

  std::size_t order_violations = 0;
  for (std::size_t i = 0; i < m.trials.rows.size(); ++i) {
    for (std::size_t j = 1; j < config.k; ++j) {
      if (m.trials.rows[i][j] > m.trials.rows[i][j - 1]) ++order_violations;
    }
  }
  add_summary(m, "order_violations", static_cast<double>(order_violations));

  // Reference sample of the top-k Poisson points pushed through f.
  std::vector<std::vector<double>> reference(config.k);
  if (config.reference_samples > 0) {
    Rng ref_rng(derive_seed(config.master_seed, std::numeric_limits<std::uint64_t>::max()));
    for (auto& r : reference) r.reserve(config.reference_samples);
    for (std::size_t s = 0; s < config.reference_samples; ++s) {
      const auto pts = simulate_poisson_top_k(static_cast<int>(config.k), config.c, config.mu, ref_rng);
      for (std::size_t j = 0; j < config.k; ++j) reference[j].push_back(f_bbp(pts[j]));
    }
    for (auto& r : reference) std::sort(r.begin(), r.end());
  }

  for (std::size_t j = 1; j <= config.k; ++j) {
    const auto values = sorted(m.column(fmt::format("lambda_{}", j)));
    if (values.empty()) continue;
    const LimitLaw law = LimitLaw::pushforward(config.c, config.mu, static_cast<int>(j));
    const double ks = ks_statistic(
        values, [&](double t) { return law.cdf(t); }, [&](double t) { return law.cdf_left(t); });
    add_score(m, fmt::format("ks_lambda_{}", j), ks);
    if (!reference[j - 1].empty()) {
      add_score(m, fmt::format("ks_joint_lambda_{}", j), ks_two_sample(values, reference[j - 1]));
    }
    const MeanSummary s = summarize(values);
    add_summary(m, fmt::format("mean_lambda_{}", j), s.mean);
    add_summary(m, fmt::format("atom_mass_lambda_{}", j), law.atom()->mass);
    if (j == 1) {
      m.cdf_label = "lambda_1";
      m.cdf_table = cdf_table(values, [&](double t) { return law.cdf(t); });
      add_summary(m, "ks_critical_1pct", ks_critical_1pct(values.size()));
    }
  }
  add_summary(m, "excluded", static_cast<double>(m.excluded));
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

RunManifest run_point_process(const ExperimentConfig& config) {
  require_kind(config, ExperimentKind::point_process);
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> columns;
  for (std::size_t j = 1; j <= config.k; ++j) columns.push_back(fmt::format("T_{}", j));
  for (double t : config.thresholds) columns.push_back("count_" + tag(t));
  RunManifest m = start_manifest(config, columns);

  auto outcomes = run_trials(config, [&](std::size_t, Rng& rng) {
    const EnsembleSample s = sample_ensemble(config, rng);
    std::vector<double> abs_values;
    abs_values.reserve(s.entries.size());
    for (const auto& t : s.entries) abs_values.push_back(std::abs(t.value));
    TrialOutcome o;
    const std::size_t top = std::min(config.k, abs_values.size());
    std::partial_sort(abs_values.begin(), abs_values.begin() + static_cast<std::ptrdiff_t>(top),
                      abs_values.end(), std::greater<>());
    for (std::size_t j = 0; j < config.k; ++j) o.values.push_back(j < top ? abs_values[j] : 0.0);
    for (double t : config.thresholds) {
      o.values.push_back(static_cast<double>(
          std::count_if(abs_values.begin(), abs_values.end(), [t](double a) { return a > t; })));
    }
    return o;
  });
  collect(m, config, std::move(outcomes));

  const bool exact = config.law == LawFamily::crossover &&
                     (config.ensemble == EnsembleKind::sparse_wigner ||
                      config.ensemble == EnsembleKind::dense_wigner) &&
                     config.diagonal_variance == 1.0;
  const double p_n = sparsity(config);
  for (double t : config.thresholds) {
    const auto counts = m.column("count_" + tag(t));
    const MeanSummary s = summarize(counts);
    const double expected = poisson_expected_count(t, config.c, config.mu);
    add_score(m, "mean_count_" + tag(t), s.mean);
    add_summary(m, "count_se_" + tag(t), s.standard_error);
    add_summary(m, "expected_count_" + tag(t), expected);
    if (s.standard_error > 0.0) add_score(m, "count_z_" + tag(t), (s.mean - expected) / s.standard_error);
    if (exact) {
      add_summary(m, "exact_expected_count_" + tag(t),
                  exact_expected_count(t, config.n, p_n, tail_law(config)));
    }
    if (counts.size() >= 2) {
      add_score(m, "dispersion_" + tag(t), index_of_dispersion(counts));
      add_summary(m, "dispersion_z_" + tag(t), dispersion_z(counts));
    }
  }

  const auto t1 = sorted(m.column("T_1"));
  const LimitLaw frechet = LimitLaw::frechet(config.c, config.mu);
  add_score(m, "ks_T1_frechet", ks_statistic(t1, [&](double x) { return frechet.cdf(x); }));
  add_summary(m, "ks_critical_1pct", ks_critical_1pct(t1.size()));
  if (exact) {
    const TailLaw law = tail_law(config);
    auto cdf = [&](double x) { return t1_exact_cdf(x, config.n, p_n, law); };
    add_score(m, "ks_T1_exact", ks_statistic(t1, cdf));
    m.cdf_label = "T_1";
    m.cdf_table = cdf_table(t1, cdf);
  } else {
    m.notes.emplace_back(
        "exact T1 law not scored: it needs the crossover law on a Wigner ensemble with unit diagonal variance");
    m.cdf_label = "T_1";
    m.cdf_table = cdf_table(t1, [&](double x) { return frechet.cdf(x); });
  }
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

RunManifest run_localization(const ExperimentConfig& config) {
  require_kind(config, ExperimentKind::localization);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t k_eigs = std::max<std::size_t>(config.k, 2);
  std::vector<std::string> columns;
  for (std::size_t j = 1; j <= k_eigs; ++j) columns.push_back(fmt::format("lambda_{}", j));
  for (const char* c : {"conditioned", "event", "squared_overlap", "target", "linf", "bulk_linf"}) {
    columns.emplace_back(c);
  }
  RunManifest m = start_manifest(config, columns);
  const double threshold = 2.0 + config.margin;

  auto outcomes = run_trials(config, [&](std::size_t, Rng& rng) {
    const EnsembleSample s = sample_ensemble(config, rng);
    const SpectralResult r = top_k_eigs(s, eigen_options(config, k_eigs, true));
    TrialOutcome o;
    o.excluded = !r.converged;
    o.values = r.eigenvalues;
    const double lambda = r.eigenvalues[config.k - 1];
    const Eigen::VectorXd& v = r.eigenvectors[config.k - 1];
    const bool conditioned = lambda > threshold;
    o.values.push_back(conditioned ? 1.0 : 0.0);
    if (conditioned) {
      const LocalizationResult loc = localization_event(v, lambda, config.eps);
      o.values.push_back(loc.holds ? 1.0 : 0.0);
      o.values.push_back(loc.squared_overlap);
      o.values.push_back(loc.target);
    } else {
      o.values.insert(o.values.end(), {0.0, kNaN, kNaN});
    }
    o.values.push_back(linf(v));
    // Bulk control: the second eigenvector when it sits inside the bulk.
    o.values.push_back(r.eigenvalues[1] < 2.0 ? linf(r.eigenvectors[1]) : kNaN);
    return o;
  });
  collect(m, config, std::move(outcomes));

  const auto conditioned = m.column("conditioned");
  const auto events = m.column("event");
  const auto linfs = m.column("linf");
  const auto bulk = m.column("bulk_linf");
  std::size_t count = 0;
  std::size_t hits = 0;
  double linf_sum = 0.0;
  for (std::size_t i = 0; i < conditioned.size(); ++i) {
    if (conditioned[i] != 1.0) continue;
    ++count;
    if (events[i] == 1.0) ++hits;
    linf_sum += linfs[i];
  }
  add_score(m, "conditioning_events", static_cast<double>(count));
  if (count >= config.min_events && count > 0) {
    add_score(m, "event_frequency", static_cast<double>(hits) / static_cast<double>(count));
    add_score(m, "mean_linf", linf_sum / static_cast<double>(count));
  } else {
    m.notes.push_back(fmt::format("insufficient conditioning events: {} < {}; no score", count,
                                  config.min_events));
    if (count > 0) {
      add_summary(m, "event_frequency", static_cast<double>(hits) / static_cast<double>(count));
      add_summary(m, "mean_linf", linf_sum / static_cast<double>(count));
    }
  }
  std::vector<double> bulk_values;
  for (double b : bulk) {
    if (std::isfinite(b)) bulk_values.push_back(b);
  }
  if (!bulk_values.empty()) {
    add_summary(m, "bulk_linf_mean", summarize(bulk_values).mean);
    add_summary(m, "bulk_linf_reference", 1.0 / std::sqrt(static_cast<double>(config.n)));
  }
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

RunManifest run_spike(const ExperimentConfig& config) {
  require_kind(config, ExperimentKind::spike);
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> columns;
  for (double th : config.thetas) {
    columns.push_back("lambda_1_theta_" + tag(th));
    columns.push_back("overlap_theta_" + tag(th));
  }
  RunManifest m = start_manifest(config, columns);

  auto outcomes = run_trials(config, [&](std::size_t, Rng& rng) {
    const EnsembleSample background = sample_ensemble(config, rng);
    TrialOutcome o;
    for (double th : config.thetas) {
      // A_d = theta (e_0 e_1^T + e_1 e_0^T) has eigenvalues +-theta with top
      // eigenvector (e_0 + e_1) / sqrt(2).
      const EnsembleSample s = plant_spike(background, {{0, 1, th}});
      const SpectralResult r = top_k_eigs(s, eigen_options(config, 1, true));
      if (!r.converged) o.excluded = true;
      const double ov = overlap(r.eigenvectors[0], 0, 1, 1);
      o.values.push_back(r.eigenvalues[0]);
      o.values.push_back(ov * ov);
    }
    return o;
  });
  collect(m, config, std::move(outcomes));

  for (double th : config.thetas) {
    const MeanSummary l = summarize(m.column("lambda_1_theta_" + tag(th)));
    const MeanSummary v = summarize(m.column("overlap_theta_" + tag(th)));
    add_score(m, "mean_lambda_1_theta_" + tag(th), l.mean);
    add_summary(m, "sd_lambda_1_theta_" + tag(th), std::sqrt(l.variance));
    add_summary(m, "predicted_lambda_1_theta_" + tag(th), f_bbp(th));
    add_score(m, "mean_overlap_theta_" + tag(th), v.mean);
    add_summary(m, "predicted_overlap_theta_" + tag(th), std::max(0.0, 1.0 - 1.0 / (th * th)));
  }
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

RunManifest run_covariance_edge(const ExperimentConfig& config) {
  require_kind(config, ExperimentKind::covariance_edge);
  const auto start = std::chrono::steady_clock::now();
  const double alpha = static_cast<double>(config.cols) / static_cast<double>(config.rows);
  const double total = static_cast<double>(config.rows + config.cols);
  const bool plant = config.mode == CovarianceMode::plant;
  const EntryLaw law = plant ? entry_law(config) : EntryLaw{tail_law(config)};
  RunManifest m = start_manifest(config, {"lambda_1_E", "lambda_1_cov"});

  auto outcomes = run_trials(config, [&](std::size_t, Rng& rng) {
    EnsembleSample factor = sample_covariance_factor(config.rows, config.cols, law, rng);
    if (plant) factor = plant_spike(std::move(factor), {{0, 0, config.plant_x * std::sqrt(total)}});
    const EnsembleSample e = symmetrize_covariance(factor);
    const SpectralResult r = top_k_eigs(e, eigen_options(config, 1, false));
    TrialOutcome o;
    o.excluded = !r.converged;
    o.values = {r.eigenvalues[0], r.eigenvalues[0] * r.eigenvalues[0]};
    return o;
  });
  collect(m, config, std::move(outcomes));

  const auto values = sorted(m.column("lambda_1_cov"));
  const double tau = tau_alpha(alpha);
  add_summary(m, "alpha", alpha);
  add_summary(m, "tau_alpha", tau);
  add_summary(m, "mp_edge", mp_upper_edge(alpha));
  if (plant) {
    const double z = f_alpha(config.plant_x, alpha);
    const double predicted = (1.0 + alpha) * z * z;
    const MeanSummary s = summarize(values);
    add_summary(m, "f_alpha", z);
    // Below tau_alpha the edge branch applies and there is no root to check.
    if (config.plant_x > tau) {
      add_score(m, "f_alpha_residual", falpha_residual(z, config.plant_x, alpha));
    }
    add_summary(m, "predicted_lambda_1_cov", predicted);
    add_score(m, "mean_lambda_1_cov", s.mean);
    add_score(m, "relative_error", std::abs(s.mean - predicted) / predicted);
    if (config.plant_x <= tau) m.notes.emplace_back("subcritical plant: prediction is the MP edge");
  } else {
    const LimitLaw limit = LimitLaw::covariance(config.c, alpha);
    add_score(m, "ks_lambda_1_cov",
              ks_statistic(
                  values, [&](double t) { return limit.cdf(t); },
                  [&](double t) { return limit.cdf_left(t); }));
    add_summary(m, "ks_critical_1pct", ks_critical_1pct(values.size()));
    add_summary(m, "atom_mass", limit.atom()->mass);
    m.cdf_label = "lambda_1_cov";
    m.cdf_table = cdf_table(values, [&](double t) { return limit.cdf(t); });
  }
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

RunManifest run_decomposition_check(const ExperimentConfig& config) {
  require_kind(config, ExperimentKind::decomposition_check);
  if (config.ensemble != EnsembleKind::sparse_wigner && config.ensemble != EnsembleKind::dense_wigner) {
    throw DomainError("decomposition_check runs on the (diluted) Wigner ensemble");
  }
  const auto start = std::chrono::steady_clock::now();
  const TailLaw law = tail_law(config);
  const double p_n = sparsity(config);
  SplitOptions options;
  options.log_exponent = config.log_exponent;
  options.threshold_override = config.threshold_override;
  options.cut_level = config.cut_level;

  std::vector<std::string> columns{"kept", "large", "small_violations", "cut_mismatch"};
  for (int p = 1; p <= 8; ++p) columns.push_back(fmt::format("power_sum_{}", p));
  for (const char* c : {"diagonal_exceed", "rows_with_two_large", "entries_above_delta",
                        "compensator_norm", "cut_norm"}) {
    columns.emplace_back(c);
  }
  for (double c : config.cut_sweep) columns.push_back("above_cut_" + tag(c));
  RunManifest m = start_manifest(config, columns);

  auto negated = [](EnsembleSample s) {
    for (auto& t : s.entries) t.value = -t.value;
    return s;
  };
  auto norm_of = [&](const EnsembleSample& s) {
    if (s.entries.empty()) return 0.0;
    const EigenOptions o = eigen_options(config, 1, false);
    const double top = top_k_eigs(s, o).eigenvalues[0];
    const double bottom = -top_k_eigs(negated(s), o).eigenvalues[0];
    return std::max(std::abs(top), std::abs(bottom));
  };

  auto outcomes = run_trials(config, [&](std::size_t, Rng& rng) {
    const LabeledSplit split = split_sample(config.n, p_n, law, rng, options);
    const EnsembleSample whole = split.reassemble();
    TrialOutcome o;
    std::size_t violations = 0;
    for (const auto& t : split.small_part.entries) {
      if (!(std::abs(t.value) < split.entry_bound)) ++violations;
    }
    // Above- and below-cut parts partition the large part entrywise.
    std::size_t mismatch = 0;
    {
      const auto& above = split.large_above_cut.entries;
      const auto& below = split.large_below_cut.entries;
      std::size_t a = 0;
      std::size_t b = 0;
      for (const auto& t : split.large_part.entries) {
        if (a < above.size() && above[a].row == t.row && above[a].col == t.col) {
          if (above[a].value != t.value) ++mismatch;
          ++a;
        } else if (b < below.size() && below[b].row == t.row && below[b].col == t.col) {
          if (below[b].value != t.value) ++mismatch;
          ++b;
        } else {
          ++mismatch;
        }
      }
      mismatch += (above.size() - a) + (below.size() - b);
    }
    o.values = {static_cast<double>(split.sites.size()), static_cast<double>(split.large_count()),
                static_cast<double>(violations), static_cast<double>(mismatch)};
    std::array<long double, 8> sums{};
    for (const auto& t : whole.entries) {
      const long double a = static_cast<long double>(t.value) * std::sqrt(static_cast<long double>(p_n));
      long double power = 1.0L;
      for (auto& s : sums) {
        power *= a;
        s += power;
      }
    }
    for (long double s : sums) o.values.push_back(static_cast<double>(s));
    const StructuralReport rep =
        config.structural_bound ? structural_check(whole, *config.structural_bound, config.delta)
                                : structural_check(split, config.delta);
    o.values.push_back(static_cast<double>(rep.diagonal_exceed));
    o.values.push_back(static_cast<double>(rep.rows_with_two_large));
    o.values.push_back(static_cast<double>(rep.entries_above_delta));
    o.values.push_back(config.check_cut_norm ? norm_of(split.compensator) : kNaN);
    o.values.push_back(config.check_cut_norm ? norm_of(split.large_below_cut) : kNaN);
    for (double c : config.cut_sweep) {
      o.values.push_back(static_cast<double>(std::count_if(
          split.large_part.entries.begin(), split.large_part.entries.end(),
          [c](const Triplet& t) { return std::abs(t.value) >= c; })));
    }
    return o;
  });
  collect(m, config, std::move(outcomes));

  auto total = [&](std::string_view name) {
    double s = 0.0;
    for (double v : m.column(name)) s += v;
    return s;
  };
  const double kept = total("kept");
  std::array<double, 9> pooled{};
  for (int p = 1; p <= 8; ++p) pooled[static_cast<std::size_t>(p)] = total(fmt::format("power_sum_{}", p)) / kept;
  for (int k = 1; k <= 4; ++k) {
    const double mean = pooled[static_cast<std::size_t>(k)];
    const double var = pooled[static_cast<std::size_t>(2 * k)] - mean * mean;
    const double se = std::sqrt(std::max(var, 0.0) / kept);
    double analytic = kNaN;
    try {
      analytic = moment(law, k);
    } catch (const DomainError&) {
      m.notes.push_back(fmt::format("moment {} of the entry law is infinite; not scored", k));
      continue;
    }
    add_summary(m, fmt::format("moment_{}_empirical", k), mean);
    add_summary(m, fmt::format("moment_{}_analytic", k), analytic);
    add_summary(m, fmt::format("moment_{}_se", k), se);
    add_score(m, fmt::format("moment_{}_z", k), se > 0.0 ? (mean - analytic) / se : 0.0);
  }

  const double threshold =
      config.threshold_override.value_or(std::sqrt(p_n) * std::pow(std::log(static_cast<double>(config.n)),
                                                                   -config.log_exponent));
  const double p_large = tail_prob(law, threshold);
  const double large = total("large");
  add_summary(m, "threshold", threshold);
  add_summary(m, "entry_bound", threshold / std::sqrt(p_n));
  add_summary(m, "threshold_overridden", config.threshold_override ? 1.0 : 0.0);
  add_summary(m, "large_fraction", large / kept);
  add_summary(m, "large_fraction_expected", p_large);
  const double label_se = std::sqrt(p_large * (1.0 - p_large) / kept);
  if (label_se > 0.0) add_score(m, "large_fraction_z", (large / kept - p_large) / label_se);
  add_score(m, "small_violations", total("small_violations"));
  add_score(m, "cut_mismatch", total("cut_mismatch"));
  const auto two = m.column("rows_with_two_large");
  add_score(m, "fraction_trials_two_large",
            static_cast<double>(std::count_if(two.begin(), two.end(), [](double v) { return v > 0; })) /
                static_cast<double>(two.size()));
  add_summary(m, "mean_diagonal_exceed", summarize(m.column("diagonal_exceed")).mean);
  add_summary(m, "mean_entries_above_delta", summarize(m.column("entries_above_delta")).mean);
  if (config.check_cut_norm) {
    const auto norms = m.column("cut_norm");
    add_summary(m, "max_cut_norm", *std::max_element(norms.begin(), norms.end()));
    const auto comp = m.column("compensator_norm");
    add_summary(m, "max_compensator_norm", *std::max_element(comp.begin(), comp.end()));
  }
  for (double c : config.cut_sweep) {
    add_summary(m, "mean_above_cut_" + tag(c), summarize(m.column("above_cut_" + tag(c))).mean);
  }
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

RunManifest run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::edge_law: return run_edge_law(config);
    case ExperimentKind::point_process: return run_point_process(config);
    case ExperimentKind::localization: return run_localization(config);
    case ExperimentKind::spike: return run_spike(config);
    case ExperimentKind::covariance_edge: return run_covariance_edge(config);
    case ExperimentKind::decomposition_check: return run_decomposition_check(config);
  }
  throw InternalError("unhandled experiment kind");
}

// ---------------------------------------------------------------------------
// Serialization.

void write_trials_csv(const RunManifest& m, std::ostream& out) {
  out << "trial,seed,excluded";
  for (const auto& c : m.trials.columns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < m.trials.rows.size(); ++i) {
    out << fmt::format("{},{},{}", i, m.trials.seeds[i], m.trials.excluded[i] ? 1 : 0);
    for (double v : m.trials.rows[i]) out << ',' << fmt::format("{}", v);
    out << '\n';
  }
}

json manifest_to_json(const RunManifest& m) {
  json rows = json::array();
  for (const auto& r : m.trials.rows) {
    json row = json::array();
    for (double v : r) row.push_back(number_or_null(v));
    rows.push_back(std::move(row));
  }
  json excluded = json::array();
  for (bool e : m.trials.excluded) excluded.push_back(e);
  auto pairs = [](const std::vector<std::pair<std::string, double>>& v) {
    json a = json::array();
    for (const auto& [k, x] : v) a.push_back(json{{"name", k}, {"value", number_or_null(x)}});
    return a;
  };
  json table = json::array();
  for (const auto& p : m.cdf_table) {
    table.push_back(json{{"x", p.x}, {"empirical", p.empirical}, {"analytic", p.analytic}});
  }
  return json{
      {"version", m.version},
      {"kind", to_string(m.kind)},
      {"config", m.config},
      {"trials", json{{"columns", m.trials.columns},
                      {"seeds", m.trials.seeds},
                      {"excluded", excluded},
                      {"rows", rows}}},
      {"scores", pairs(m.scores)},
      {"summaries", pairs(m.summaries)},
      {"notes", m.notes},
      {"cdf_label", m.cdf_label},
      {"cdf_table", table},
      {"excluded", m.excluded},
      {"failed", m.failed},
      {"failure", m.failure},
      {"wall_clock_seconds", m.wall_clock_seconds},
  };
}

RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.version = j.at("version").get<std::string>();
    m.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
    m.config = j.at("config");
    const json& t = j.at("trials");
    m.trials.columns = t.at("columns").get<std::vector<std::string>>();
    m.trials.seeds = t.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& e : t.at("excluded")) m.trials.excluded.push_back(e.get<bool>());
    for (const auto& r : t.at("rows")) {
      std::vector<double> row;
      for (const auto& v : r) row.push_back(number_from(v));
      m.trials.rows.push_back(std::move(row));
    }
    for (const auto& s : j.at("scores")) {
      m.scores.emplace_back(s.at("name").get<std::string>(), number_from(s.at("value")));
    }
    for (const auto& s : j.at("summaries")) {
      m.summaries.emplace_back(s.at("name").get<std::string>(), number_from(s.at("value")));
    }
    m.notes = j.at("notes").get<std::vector<std::string>>();
    m.cdf_label = j.at("cdf_label").get<std::string>();
    for (const auto& p : j.at("cdf_table")) {
      m.cdf_table.push_back({p.at("x").get<double>(), p.at("empirical").get<double>(),
                             p.at("analytic").get<double>()});
    }
    m.excluded = j.at("excluded").get<std::size_t>();
    m.failed = j.at("failed").get<bool>();
    m.failure = j.at("failure").get<std::string>();
    m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    return m;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed manifest: ") + e.what());
  }
}

}  // namespace htrm

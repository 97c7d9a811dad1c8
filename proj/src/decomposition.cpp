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

#include "htrm/decomposition.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "htrm/error.hpp"

namespace htrm {

namespace {

using Site = std::pair<std::uint32_t, std::uint32_t>;

EnsembleSample empty_like(EnsembleKind kind, std::size_t rows, std::size_t cols,
                          double scale, std::uint64_t seed) {
  EnsembleSample s;
  s.kind = kind;
  s.rows = rows;
  s.cols = cols;
  s.scale = scale;
  s.seed = seed;
  return s;
}

// Steps 2-6 on an already chosen site set.
LabeledSplit split_sites(std::vector<Site> sites, EnsembleSample shape,
                         double threshold, const TailLaw& law, Rng& rng,
                         const SplitOptions& options) {
  if (!(options.cut_level >= 0.0)) {
    throw DomainError(fmt::format("cut level must be >= 0 (got {})", options.cut_level));
  }
  LabeledSplit split;
  split.threshold = threshold;
  split.entry_bound = threshold * shape.scale;
  split.threshold_overridden = options.threshold_override.has_value();
  split.cut_level = options.cut_level;
  split.sites = std::move(sites);

  const double p_large = tail_prob(law, threshold);
  split.labels.reserve(split.sites.size());
  for (std::size_t s = 0; s < split.sites.size(); ++s) {
    split.labels.push_back(rng.uniform() < p_large ? SiteLabel::large
                                                    : SiteLabel::small);
  }

  split.small_part = shape;
  split.large_part = shape;
  split.compensator = shape;
  split.large_above_cut = shape;
  split.large_below_cut = shape;

  const std::size_t n_large = split.large_count();
  split.large_part.entries.reserve(n_large);
  for (std::size_t s = 0; s < split.sites.size(); ++s) {
    if (split.labels[s] != SiteLabel::large) continue;
    const auto [i, j] = split.sites[s];
    split.large_part.entries.push_back({i, j, sample_above(law, threshold, rng) * shape.scale});
  }

  split.small_part.entries.reserve(split.sites.size());
  split.compensator.entries.reserve(n_large);
  for (std::size_t s = 0; s < split.sites.size(); ++s) {
    const auto [i, j] = split.sites[s];
    const double v = sample_below(law, threshold, rng) * shape.scale;
    split.small_part.entries.push_back({i, j, v});
    if (split.labels[s] == SiteLabel::large) {
      split.compensator.entries.push_back({i, j, -v});
    }
  }

  for (const auto& t : split.large_part.entries) {
    if (std::abs(t.value) >= options.cut_level) {
      split.large_above_cut.entries.push_back(t);
    } else {
      split.large_below_cut.entries.push_back(t);
    }
  }
  return split;
}

double log_power(std::size_t n, double exponent) {
  return std::pow(std::log(static_cast<double>(n)), -exponent);
}

}  // namespace

std::size_t LabeledSplit::large_count() const {
  return static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), SiteLabel::large));
}

EnsembleSample LabeledSplit::reassemble() const {
  EnsembleSample out = small_part;
  std::size_t next_large = 0;
  for (std::size_t s = 0; s < sites.size(); ++s) {
    if (labels[s] != SiteLabel::large) continue;
    // small + compensator cancels exactly, leaving the large draw untouched.
    out.entries[s].value = (out.entries[s].value + compensator.entries[next_large].value) +
                           large_part.entries[next_large].value;
    ++next_large;
  }
  return out;
}

LabeledSplit split_sample(std::size_t n, double p_n, const TailLaw& law,
                          Rng& rng, const SplitOptions& options) {
  if (n < 2) throw DomainError("split_sample needs n >= 2");
  auto sites = sparsity_mask(n, p_n, rng);
  const double scale = 1.0 / std::sqrt(p_n);
  const double threshold = options.threshold_override.value_or(
      std::sqrt(p_n) * log_power(n, options.log_exponent));
  if (!(threshold > 0.0)) throw DomainError("split threshold must be positive");
  const auto kind = p_n >= static_cast<double>(n) ? EnsembleKind::dense_wigner
                                                  : EnsembleKind::sparse_wigner;
  return split_sites(std::move(sites), empty_like(kind, n, n, scale, rng.seed()),
                     threshold, law, rng, options);
}

LabeledSplit split_covariance(std::size_t rows, std::size_t cols,
                              const TailLaw& law, Rng& rng,
                              const SplitOptions& options) {
  if (rows == 0 || cols == 0) throw DomainError("covariance split needs L, M >= 1");
  const std::size_t total = rows + cols;
  std::vector<Site> sites;
  sites.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      sites.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    }
  }
  const double root_n = std::sqrt(static_cast<double>(total));
  const double threshold = options.threshold_override.value_or(
      root_n * log_power(total, options.log_exponent));
  if (!(threshold > 0.0)) throw DomainError("split threshold must be positive");
  return split_sites(std::move(sites),
                     empty_like(EnsembleKind::covariance_factor, rows, cols,
                                1.0 / root_n, rng.seed()),
                     threshold, law, rng, options);
}

StructuralReport structural_check(const EnsembleSample& sample, double bound,
                                  double delta) {
  StructuralReport report;
  std::vector<std::size_t> row_hits(sample.rows, 0);
  std::vector<std::size_t> col_hits(sample.symmetric() ? 0 : sample.cols, 0);
  for (const auto& t : sample.entries) {
    const double a = std::abs(t.value);
    if (a > delta) ++report.entries_above_delta;
    if (!(a > bound)) continue;
    ++row_hits[t.row];
    if (sample.symmetric()) {
      if (t.row == t.col) {
        ++report.diagonal_exceed;
      } else {
        ++row_hits[t.col];
      }
    } else {
      ++col_hits[t.col];
    }
  }
  auto two_or_more = [](const std::vector<std::size_t>& hits) {
    return static_cast<std::size_t>(
        std::count_if(hits.begin(), hits.end(), [](std::size_t h) { return h >= 2; }));
  };
  report.rows_with_two_large = two_or_more(row_hits) + two_or_more(col_hits);
  return report;
}

StructuralReport structural_check(const LabeledSplit& split, double delta) {
  return structural_check(split.reassemble(), split.entry_bound, delta);
}

std::vector<double> extreme_entries(const EnsembleSample& sample, double c0) {
  if (!(c0 > 0.0)) throw DomainError("extreme-entry level must be positive");
  std::vector<double> out;
  for (const auto& t : sample.entries) {
    const double a = std::abs(t.value);
    if (a >= c0) out.push_back(a);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

double t1_exact_cdf(double x, std::size_t n, double p_n, const TailLaw& law) {
  if (!(x > 0.0)) return 0.0;
  const double keep = std::min(1.0, p_n / static_cast<double>(n));
  const double q = keep * tail_prob(law, x * std::sqrt(p_n));
  const double sites = static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
  if (q >= 1.0) return 0.0;
  return std::exp(sites * std::log1p(-q));
}

double exact_expected_count(double x, std::size_t n, double p_n,
                            const TailLaw& law) {
  const double keep = std::min(1.0, p_n / static_cast<double>(n));
  const double sites = static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
  return sites * keep * tail_prob(law, x * std::sqrt(p_n));
}

}  // namespace htrm

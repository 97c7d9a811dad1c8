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
#include <optional>
#include <vector>

#include "htrm/ensembles.hpp"
#include "htrm/rng.hpp"
#include "htrm/tail_laws.hpp"

namespace htrm {

enum class SiteLabel : std::uint8_t { small, large };

struct SplitOptions {
  /// Exponent e in the entry bound (log n)^-e.
  double log_exponent = 5.0;
  /// Replaces Q_n = sqrt(p_n) (log n)^-e when set (in units of the raw entry
  /// a, before the 1/sqrt(p_n) scaling).
  std::optional<double> threshold_override;
  double cut_level = 0.25;
};

/// Small part + large part + compensator decomposition of one sample.
///
/// All five component samples share the kept-site set `sites`; a component
/// stores an entry only where it is structurally nonzero.
struct LabeledSplit {
  /// Q in units of the raw entry a.
  double threshold = 0.0;
  /// Q times the entry scale: the bound every small-part entry respects.
  double entry_bound = 0.0;
  bool threshold_overridden = false;
  double cut_level = 0.0;

  std::vector<std::pair<std::uint32_t, std::uint32_t>> sites;
  std::vector<SiteLabel> labels;

  EnsembleSample small_part;
  EnsembleSample large_part;
  EnsembleSample compensator;
  EnsembleSample large_above_cut;
  EnsembleSample large_below_cut;

  std::size_t large_count() const;
  /// small_part + large_part + compensator, one entry per kept site.
  EnsembleSample reassemble() const;
};

/// Resampling of a diluted Wigner matrix:
///   1. Bernoulli(p_n/n) sparsity mask on the upper triangle;
///   2. label each kept site S with probability P(|a| < Q), else L;
///   3. draw L sites from the law of a given |a| > Q;
///   4. large part = those draws / sqrt(p_n);
///   5. small part = fresh draws from the law of a given |a| < Q at every
///      kept site, / sqrt(p_n);
///   6. compensator = minus the small part on L sites;
/// then the large part is cut at `cut_level` (|v| >= c goes above).
LabeledSplit split_sample(std::size_t n, double p_n, const TailLaw& law,
                          Rng& rng, const SplitOptions& options = {});

/// Same procedure for an L x M covariance factor with directed labels:
/// every one of the L*M sites is kept, Q = sqrt(N) (log N)^-e and the entry
/// scale is 1/sqrt(N), N = L + M.
LabeledSplit split_covariance(std::size_t rows, std::size_t cols,
                              const TailLaw& law, Rng& rng,
                              const SplitOptions& options = {});

struct StructuralReport {
  /// Diagonal entries with |value| > bound.
  std::size_t diagonal_exceed = 0;
  /// Rows holding at least two entries with |value| > bound.
  std::size_t rows_with_two_large = 0;
  /// Entries (upper triangle) with |value| > delta.
  std::size_t entries_above_delta = 0;
};

StructuralReport structural_check(const EnsembleSample& sample, double bound,
                                  double delta);
/// Uses the split's own entry bound on the reassembled matrix.
StructuralReport structural_check(const LabeledSplit& split, double delta);

/// Absolute values of stored entries with |value| >= c0, descending.
std::vector<double> extreme_entries(const EnsembleSample& sample, double c0);

/// Exact P(T1 <= x) for a diluted Wigner sample: the product over the
/// n(n+1)/2 upper-triangle sites of 1 - (p_n/n) P(|a| > x sqrt(p_n)).
double t1_exact_cdf(double x, std::size_t n, double p_n, const TailLaw& law);

/// Exact expected number of upper-triangle entries with |value| > x.
double exact_expected_count(double x, std::size_t n, double p_n,
                            const TailLaw& law);

}  // namespace htrm

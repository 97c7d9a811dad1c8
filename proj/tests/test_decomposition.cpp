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

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include <doctest.h>

#include "htrm/decomposition.hpp"
#include "htrm/error.hpp"
#include "htrm/spectral.hpp"
#include "htrm/stats.hpp"
#include "htrm/tail_laws.hpp"

using namespace htrm;

namespace {

std::uint64_t key(const Triplet& t) { return (std::uint64_t{t.row} << 32) | t.col; }

std::map<std::uint64_t, double> as_map(const EnsembleSample& s) {
  std::map<std::uint64_t, double> m;
  for (const auto& t : s.entries) m[key(t)] = t.value;
  return m;
}

}  // namespace

TEST_CASE("split: reassembly carries the large draw at L sites and the small draw at S sites") {
  const TailLaw law = build_crossover_law(2.0, 4.0, 3.0);
  Rng rng(31);
  SplitOptions o;
  o.threshold_override = 1.0;  // a nontrivial split at this size
  const LabeledSplit split = split_sample(300, 60.0, law, rng, o);
  const auto small = as_map(split.small_part);
  const auto large = as_map(split.large_part);
  const auto comp = as_map(split.compensator);
  const auto whole = as_map(split.reassemble());
  REQUIRE(whole.size() == split.sites.size());
  std::size_t n_large = 0;
  for (std::size_t s = 0; s < split.sites.size(); ++s) {
    const std::uint64_t k = (std::uint64_t{split.sites[s].first} << 32) | split.sites[s].second;
    if (split.labels[s] == SiteLabel::large) {
      ++n_large;
      CHECK(whole.at(k) == large.at(k));
      CHECK(comp.at(k) == -small.at(k));
      CHECK(std::abs(large.at(k)) > split.entry_bound);
    } else {
      CHECK(whole.at(k) == small.at(k));
      CHECK(!comp.contains(k));
      CHECK(!large.contains(k));
    }
  }
  CHECK(n_large == split.large_count());
  CHECK(n_large > 0);
}

TEST_CASE("split: every small-part entry is below the bound (log n)^-5") {
  const TailLaw law = build_crossover_law(2.0, 6.0, 3.0);
  Rng rng(32);
  const std::size_t n = 1000;
  const LabeledSplit split = split_sample(n, std::sqrt(1000.0), law, rng);
  const double bound = std::pow(std::log(1000.0), -5.0);
  CHECK(split.entry_bound == doctest::Approx(bound).epsilon(1e-13));
  CHECK(!split.threshold_overridden);
  for (const auto& t : split.small_part.entries) CHECK(std::abs(t.value) < bound);
}

TEST_CASE("split: the cut partitions the large part exactly") {
  const TailLaw law = build_crossover_law(2.0, 4.0, 3.0);
  Rng rng(33);
  SplitOptions o;
  o.threshold_override = 0.5;
  o.cut_level = 0.25;
  const LabeledSplit split = split_sample(400, 400.0, law, rng, o);
  auto above = as_map(split.large_above_cut);
  auto below = as_map(split.large_below_cut);
  CHECK(above.size() + below.size() == split.large_part.entries.size());
  for (const auto& t : split.large_part.entries) {
    const double sum = (above.contains(key(t)) ? above[key(t)] : 0.0) +
                       (below.contains(key(t)) ? below[key(t)] : 0.0);
    CHECK(sum == t.value);
  }
  for (const auto& [k, v] : above) CHECK(std::abs(v) >= 0.25);
  for (const auto& [k, v] : below) CHECK(std::abs(v) < 0.25);
}

TEST_CASE("split: label frequency matches tail_prob(Q) within binomial 3 sigma") {
  const TailLaw law = build_crossover_law(2.0, 4.0, 3.0);
  Rng rng(34);
  SplitOptions o;
  o.threshold_override = 1.2;
  const LabeledSplit split = split_sample(500, 500.0, law, rng, o);
  const double p = tail_prob(law, 1.2);
  const double m = static_cast<double>(split.sites.size());
  CHECK(std::abs(split.large_count() / m - p) < 3.0 * std::sqrt(p * (1 - p) / m));
}

TEST_CASE("split: reassembled entries follow the unconditional law") {
  const TailLaw law = build_crossover_law(2.0, 4.0, 3.0);
  Rng rng(35);
  SplitOptions o;
  o.threshold_override = 1.0;
  const LabeledSplit split = split_sample(450, 450.0, law, rng, o);
  std::vector<double> raw;
  for (const auto& t : split.reassemble().entries) raw.push_back(t.value * std::sqrt(450.0));
  REQUIRE(raw.size() > 100000);
  std::sort(raw.begin(), raw.end());
  CHECK(ks_statistic(raw, [&](double x) { return cdf(law, x); }) < ks_critical_1pct(raw.size()));
}

TEST_CASE("split: compensator norm is at most the bound when no row holds two L sites") {
  const TailLaw law = build_crossover_law(2.0, 4.0, 3.0);
  SplitOptions o;
  o.threshold_override = 25.0;  // L sites rare enough for the event
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const LabeledSplit split = split_sample(300, 300.0, law, rng, o);
    const StructuralReport rep = structural_check(split.large_part, 0.0, 1e9);
    if (rep.rows_with_two_large > 0 || split.compensator.entries.empty()) continue;
    ++checked;
    CHECK(operator_norm(split.compensator) <= split.entry_bound * (1.0 + 1e-9));
  }
  CHECK(checked > 0);
}

TEST_CASE("structural check: trivial cases") {
  EnsembleSample zero;
  zero.kind = EnsembleKind::dense_wigner;
  zero.rows = zero.cols = 10;
  StructuralReport r = structural_check(zero, 1e-3, 0.5);
  CHECK(r.diagonal_exceed == 0);
  CHECK(r.rows_with_two_large == 0);
  CHECK(r.entries_above_delta == 0);
  zero.entries.push_back({2, 5, 7.0});
  r = structural_check(zero, 1e-3, 0.5);
  CHECK(r.entries_above_delta == 1);
  CHECK(r.rows_with_two_large == 0);
  zero.entries.push_back({5, 5, 3.0});
  r = structural_check(zero, 1e-3, 0.5);
  CHECK(r.diagonal_exceed == 1);
  CHECK(r.rows_with_two_large == 1);  // row 5 holds (2,5) and (5,5)
}

TEST_CASE("structural check: two-large rows become rarer as n grows") {
  // mu = 1/2 law (beta = 6); a fixed bound of 0.7 on the scaled entries.
  // Below n = 500 the bound 0.7 n^(1/4) still sits in the body of the law and
  // the trend is not yet monotone.
  const TailLaw law = build_crossover_law(2.0, 6.0, 3.0);
  std::vector<double> fractions;
  for (std::size_t n : {500u, 1000u, 2000u}) {
    int hits = 0;
    const int trials = 300;
    for (int t = 0; t < trials; ++t) {
      Rng rng(derive_seed(n, static_cast<std::uint64_t>(t)));
      const EnsembleSample s = sample_sparse_wigner(n, std::sqrt(static_cast<double>(n)), law, rng);
      if (structural_check(s, 0.7, 1.0).rows_with_two_large > 0) ++hits;
    }
    fractions.push_back(hits / static_cast<double>(trials));
  }
  CHECK(fractions[0] > fractions[1]);
  CHECK(fractions[1] > fractions[2]);
  CHECK(fractions[2] < 0.15);
}

TEST_CASE("extreme entries and the exact T1 law") {
  const TailLaw law = build_crossover_law(2.0, 4.0, 3.0);
  Rng rng(36);
  const EnsembleSample s = sample_sparse_wigner(100, 100.0, law, rng);
  const auto top = extreme_entries(s, 0.3);
  CHECK(std::is_sorted(top.begin(), top.end(), std::greater<>()));
  for (double v : top) CHECK(v >= 0.3);
  CHECK(extreme_entries(s, 1e6).empty());
  CHECK_THROWS_AS(extreme_entries(s, 0.0), DomainError);

  // Product formula: for x sqrt(p) beyond x0 the per-site factor is
  // 1 - (p/n) c (x sqrt p)^-4.
  const std::size_t n = 500;
  const double p = 500.0;
  const double x = 0.5;
  const double q = 2.0 * std::pow(x * std::sqrt(p), -4.0);
  const double sites = n * (n + 1) / 2.0;
  CHECK(t1_exact_cdf(x, n, p, law) == doctest::Approx(std::pow(1.0 - q, sites)).epsilon(1e-12));
  CHECK(exact_expected_count(x, n, p, law) == doctest::Approx(sites * q).epsilon(1e-14));
  // Large-n limit of the expected count above c0 is (c/2) c0^-4.
  CHECK(exact_expected_count(1.0, 100000, 100000.0, law) ==
        doctest::Approx(1.0).epsilon(2e-5));
}

TEST_CASE("covariance split uses directed labels over all L*M sites") {
  const TailLaw law = build_crossover_law(2.0, 4.0, 3.0);
  Rng rng(37);
  SplitOptions o;
  o.threshold_override = 1.0;
  const LabeledSplit split = split_covariance(20, 30, law, rng, o);
  CHECK(split.sites.size() == 600);
  CHECK(split.small_part.kind == EnsembleKind::covariance_factor);
  CHECK(split.small_part.scale == doctest::Approx(1.0 / std::sqrt(50.0)));
  const auto whole = split.reassemble();
  CHECK(whole.entries.size() == 600);
}

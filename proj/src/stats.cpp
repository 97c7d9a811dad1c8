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

#include "htrm/stats.hpp"

#include <algorithm>
#include <cmath>

#include "htrm/error.hpp"

namespace htrm {

double ks_statistic(const std::vector<double>& sorted_samples, const CdfFn& cdf,
                    const CdfFn& cdf_left) {
  if (sorted_samples.empty()) throw DomainError("KS statistic needs at least one sample");
  const double m = static_cast<double>(sorted_samples.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < sorted_samples.size()) {
    // Group ties so the empirical jump at an atom is taken as a whole.
    std::size_t j = i;
    while (j < sorted_samples.size() && sorted_samples[j] == sorted_samples[i]) ++j;
    const double x = sorted_samples[i];
    const double below = static_cast<double>(i) / m;
    const double at = static_cast<double>(j) / m;
    const double f = cdf(x);
    const double f_left = cdf_left ? cdf_left(x) : f;
    d = std::max({d, std::abs(at - f), std::abs(below - f_left)});
    i = j;
  }
  return d;
}

double ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw DomainError("two-sample KS needs non-empty samples");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_1pct(std::size_t m) {
  if (m == 0) throw DomainError("critical value needs a positive sample size");
  return 1.63 / std::sqrt(static_cast<double>(m));
}

MeanSummary summarize(const std::vector<double>& values) {
  MeanSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / static_cast<double>(s.count - 1);
    s.standard_error = std::sqrt(s.variance / static_cast<double>(s.count));
  }
  return s;
}

double index_of_dispersion(const std::vector<double>& counts) {
  const MeanSummary s = summarize(counts);
  if (s.count < 2) throw DomainError("dispersion index needs at least two counts");
  if (s.mean <= 0.0) return 0.0;
  return s.variance / s.mean;
}

double dispersion_z(const std::vector<double>& counts) {
  const double d = index_of_dispersion(counts);
  return (d - 1.0) * std::sqrt((static_cast<double>(counts.size()) - 1.0) / 2.0);
}

double empirical_cdf(const std::vector<double>& sorted_samples, double x) {
  if (sorted_samples.empty()) return 0.0;
  const auto it = std::upper_bound(sorted_samples.begin(), sorted_samples.end(), x);
  return static_cast<double>(it - sorted_samples.begin()) / static_cast<double>(sorted_samples.size());
}

}  // namespace htrm

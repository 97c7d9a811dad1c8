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

#include <functional>
#include <vector>

namespace htrm {

using CdfFn = std::function<double(double)>;

/// sup_x |F_m(x) - F(x)| for ascending samples. cdf_left, when given, is the
/// left limit of the analytic CDF; it is compared against the empirical CDF
/// just below each sample point so atoms are handled exactly.
double ks_statistic(const std::vector<double>& sorted_samples, const CdfFn& cdf,
                    const CdfFn& cdf_left = {});

/// sup_x |F_m(x) - G_k(x)| between two ascending samples.
double ks_two_sample(const std::vector<double>& a, const std::vector<double>& b);

/// Asymptotic 1% Kolmogorov critical value 1.63 / sqrt(m).
double ks_critical_1pct(std::size_t m);

struct MeanSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double standard_error = 0.0;
  std::size_t count = 0;
};

MeanSummary summarize(const std::vector<double>& values);

/// Sample variance over sample mean; 1 for Poisson counts.
double index_of_dispersion(const std::vector<double>& counts);

/// z-score of the dispersion index against its Poisson null,
/// (D - 1) * sqrt((m - 1) / 2).
double dispersion_z(const std::vector<double>& counts);

/// Empirical CDF of ascending samples at x (right-continuous).
double empirical_cdf(const std::vector<double>& sorted_samples, double x);

}  // namespace htrm

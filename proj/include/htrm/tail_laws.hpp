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
#include <string>
#include <variant>
#include <vector>

#include "htrm/rng.hpp"

namespace htrm {

/// Symmetric, mean-zero, unit-variance law whose absolute value is exactly
/// Pareto beyond the crossover point:
///
///   P(|a| > x) = tail_constant * x^(-tail_index)   for all x >= crossover_point.
///
/// Below the crossover the law is a symmetric uniform body on
/// [-body_scale, body_scale] carrying the remaining mass; body_scale is fixed
/// by the unit-variance condition. Build instances with build_crossover_law().
struct TailLaw {
  double tail_constant = 0.0;
  double tail_index = 4.0;
  double crossover_point = 3.0;
  double body_scale = 1.7320508075688772;

  /// P(|a| > crossover_point).
  double tail_mass() const;
  /// E[a^2 ; |a| > crossover_point].
  double tail_variance() const;
};

/// Validates (c, beta, x0) and solves for the body scale. Throws DomainError
/// for beta <= 2, c < 0, x0 <= 0, c * x0^-beta > 1, or when the tail alone
/// leaves no room for a unit-variance body below x0.
TailLaw build_crossover_law(double c, double beta, double x0);

/// Smallest x0 >= 3 at which the tail uses at most 80% of the variance.
double default_crossover_point(double c, double beta);

/// Exact P(|a| > x) for x >= 0.
double tail_prob(const TailLaw& law, double x);

/// Exact P(a <= x).
double cdf(const TailLaw& law, double x);

/// Generalized inverse of the survival function of |a|: the smallest x >= 0
/// with tail_prob(x) <= s, for s in (0, 1].
double survival_inverse(const TailLaw& law, double s);

/// E[a^k] for k in 1..4 (odd moments vanish). Throws when the moment is
/// infinite.
double moment(const TailLaw& law, int k);

double sample(const TailLaw& law, Rng& rng);

/// Draw from the law of a conditioned on |a| > q (inverse CDF on the upper
/// region of the survival function).
double sample_above(const TailLaw& law, double q, Rng& rng);

/// Draw from the law of a conditioned on |a| < q.
double sample_below(const TailLaw& law, double q, Rng& rng);

/// Standard normal entries, used for light-tailed backgrounds.
struct GaussianLaw {};

using EntryLaw = std::variant<TailLaw, GaussianLaw>;

double sample(const EntryLaw& law, Rng& rng);
double cdf(const EntryLaw& law, double x);
std::string describe(const EntryLaw& law);

/// Super-polynomial tail profile. Holds an increasing g and a > 1 and
/// defines h through h(a * sqrt(log(x)^g(x))) = x. Inversion goes through a
/// log-spaced lookup table refined by bisection.
class SuperPolyTail {
 public:
  using Profile = std::function<double(double)>;

  /// Table covers x in [x_min, x_max]; g must be positive and increasing
  /// there.
  SuperPolyTail(Profile g, double a, double x_min = 20.0, double x_max = 1e300,
                std::size_t table_size = 4096);

  /// The canonical profile g(x) = log log x * log log log x.
  static SuperPolyTail canonical(double a);

  double a() const { return a_; }
  double g(double x) const { return g_(x); }

  /// a * sqrt(log(x)^g(x)), the map that h inverts.
  double h_inverse(double x) const;
  /// h(y): the x with h_inverse(x) = y. Throws DomainError outside the
  /// tabulated range.
  double h_eval(double y) const;

  double y_min() const;
  double y_max() const;

 private:
  double log_forward(double log_x) const;

  Profile g_;
  double a_;
  std::vector<double> log_x_;
  std::vector<double> log_y_;
};

}  // namespace htrm

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
#include <vector>

#include <doctest.h>

#include "htrm/error.hpp"
#include "htrm/rng.hpp"
#include "htrm/stats.hpp"
#include "htrm/tail_laws.hpp"

using namespace htrm;

namespace {

// Composite Simpson rule, an oracle independent of the library quadrature.
template <typename F>
double simpson(F&& f, double a, double b, int panels = 20000) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double tail_mass_of(const TailLaw& law) {
  return law.tail_constant * std::pow(law.crossover_point, -law.tail_index);
}

// E|a|^k: body by Simpson on [0, s]; tail by Simpson after x = x0 / u, which
// turns the Pareto integral into c beta x0^(k - beta) u^(beta - k - 1) on (0, 1].
double abs_moment_oracle(const TailLaw& law, int k) {
  const double s = law.body_scale;
  const double body_density = (1.0 - tail_mass_of(law)) / s;
  const double body = simpson([&](double x) { return std::pow(x, k) * body_density; }, 0.0, s);
  const double x0 = law.crossover_point;
  const double beta = law.tail_index;
  const double c = law.tail_constant;
  const double tail = simpson(
      [&](double u) { return c * beta * std::pow(x0, k - beta) * std::pow(u, beta - k - 1.0); }, 0.0,
      1.0);
  return body + tail;
}

}  // namespace

TEST_CASE("crossover law: tail is exactly Pareto beyond the crossover point") {
  const TailLaw law = build_crossover_law(2.0, 4.0, 3.0);
  CHECK(tail_prob(law, 3.0) == doctest::Approx(2.0 / 81.0).epsilon(1e-15));
  for (double x : {3.0, 3.5, 5.0, 10.0, 123.0, 1e4}) {
    CHECK(std::pow(x, 4.0) * tail_prob(law, x) == doctest::Approx(2.0).epsilon(1e-14));
  }
  CHECK(tail_prob(law, 0.0) == 1.0);
}

TEST_CASE("crossover law: unit variance by an independent quadrature") {
  for (double c : {0.5, 2.0, 4.0}) {
    const TailLaw law = build_crossover_law(c, 4.0, 3.0);
    CHECK(abs_moment_oracle(law, 2) == doctest::Approx(1.0).epsilon(1e-10));
  }
  const TailLaw six = build_crossover_law(2.0, 6.0, 3.0);
  CHECK(abs_moment_oracle(six, 2) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("crossover law: zero tail constant leaves the uniform body") {
  const TailLaw law = build_crossover_law(0.0, 4.0, 3.0);
  CHECK(law.body_scale == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(tail_prob(law, 2.0) == 0.0);
  CHECK(moment(law, 2) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("crossover law: parameter validation") {
  CHECK_THROWS_AS(build_crossover_law(2.0, 2.0, 3.0), DomainError);
  CHECK_THROWS_AS(build_crossover_law(-1.0, 4.0, 3.0), DomainError);
  CHECK_THROWS_AS(build_crossover_law(2.0, 4.0, 0.0), DomainError);
  // Tail mass above one.
  CHECK_THROWS_AS(build_crossover_law(200.0, 4.0, 1.0), DomainError);
  // Tail variance 2 c / x0^2 = 2 * 8 / 9 > 1: infeasible.
  CHECK_THROWS_AS(build_crossover_law(8.0, 4.0, 3.0), DomainError);
  // The default rule moves x0 out far enough.
  CHECK_NOTHROW(build_crossover_law(8.0, 4.0, default_crossover_point(8.0, 4.0)));
  CHECK(default_crossover_point(2.0, 4.0) == 3.0);
}

TEST_CASE("tail_prob in the body region matches quadrature of the density") {
  const TailLaw law = build_crossover_law(2.0, 4.0, 3.0);
  const double s = law.body_scale;
  const double pt = tail_mass_of(law);
  for (double x : {0.1, 0.5, 1.0, 1.5}) {
    if (x >= s) continue;
    const double body = simpson([&](double) { return (1.0 - pt) / s; }, x, s, 200);
    CHECK(tail_prob(law, x) == doctest::Approx(body + pt).epsilon(1e-12));
  }
  // Between the body and the crossover only the tail mass remains.
  if (s < 2.9) CHECK(tail_prob(law, 2.95) == doctest::Approx(pt).epsilon(1e-15));
}

TEST_CASE("cdf and survival inverse are consistent") {
  const TailLaw law = build_crossover_law(2.0, 4.0, 3.0);
  CHECK(cdf(law, 0.0) == doctest::Approx(0.5));
  for (double x : {0.3, 1.0, 3.0, 7.0}) {
    CHECK(cdf(law, x) + cdf(law, -x) == doctest::Approx(1.0).epsilon(1e-15));
  }
  for (double s : {0.9, 0.5, 0.05, 0.02, 1e-3, 1e-8}) {
    CHECK(tail_prob(law, survival_inverse(law, s)) == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("analytic moments agree with the quadrature oracle") {
  const TailLaw law = build_crossover_law(2.0, 6.0, 3.0);
  CHECK(moment(law, 1) == 0.0);
  CHECK(moment(law, 3) == 0.0);
  CHECK(moment(law, 2) == doctest::Approx(abs_moment_oracle(law, 2)).epsilon(1e-10));
  CHECK(moment(law, 4) == doctest::Approx(abs_moment_oracle(law, 4)).epsilon(1e-8));
  const TailLaw four = build_crossover_law(2.0, 4.0, 3.0);
  CHECK_THROWS_AS(moment(four, 4), DomainError);
}

TEST_CASE("sampling: moments, tail frequency and KS") {
  const TailLaw law = build_crossover_law(2.0, 4.0, 3.0);
  Rng rng(20260101);
  const int m = 1000000;
  std::vector<double> draws(m);
  for (auto& d : draws) d = sample(law, rng);
  double mean = 0.0;
  for (double d : draws) mean += d;
  mean /= m;
  double var = 0.0;
  std::size_t above5 = 0;
  for (double d : draws) {
    var += (d - mean) * (d - mean);
    if (std::abs(d) > 5.0) ++above5;
  }
  var /= (m - 1);
  CHECK(std::abs(mean) < 0.005);
  CHECK(std::abs(var - 1.0) < 0.01);
  const double p = 2.0 * std::pow(5.0, -4.0);
  const double frac = static_cast<double>(above5) / m;
  CHECK(std::abs(frac - p) < 3.0 * std::sqrt(p * (1 - p) / m));

  std::vector<double> first(draws.begin(), draws.begin() + 100000);
  std::sort(first.begin(), first.end());
  CHECK(ks_statistic(first, [&](double x) { return cdf(law, x); }) < ks_critical_1pct(first.size()));
}

TEST_CASE("conditional sampling respects the threshold and the conditional law") {
  const TailLaw law = build_crossover_law(2.0, 4.0, 3.0);
  Rng rng(5);
  for (double q : {0.5, 2.0, 4.0}) {
    std::vector<double> above;
    std::vector<double> below;
    for (int i = 0; i < 20000; ++i) {
      above.push_back(std::abs(sample_above(law, q, rng)));
      below.push_back(std::abs(sample_below(law, q, rng)));
    }
    CHECK(*std::min_element(above.begin(), above.end()) > q);
    CHECK(*std::max_element(below.begin(), below.end()) < q);
    std::sort(above.begin(), above.end());
    std::sort(below.begin(), below.end());
    const double pq = tail_prob(law, q);
    const double ks_above =
        ks_statistic(above, [&](double x) { return x <= q ? 0.0 : 1.0 - tail_prob(law, x) / pq; });
    const double ks_below = ks_statistic(
        below, [&](double x) { return x >= q ? 1.0 : (1.0 - tail_prob(law, x)) / (1.0 - pq); });
    CHECK(ks_above < ks_critical_1pct(above.size()));
    CHECK(ks_below < ks_critical_1pct(below.size()));
  }
}

TEST_CASE("sampling is deterministic given the seed") {
  const TailLaw law = build_crossover_law(2.0, 4.0, 3.0);
  Rng a(99);
  Rng b(99);
  for (int i = 0; i < 1000; ++i) CHECK(sample(law, a) == sample(law, b));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

TEST_CASE("entry law variant: Gaussian and crossover share an interface") {
  const EntryLaw g = GaussianLaw{};
  CHECK(cdf(g, 0.0) == doctest::Approx(0.5));
  CHECK(cdf(g, 1.0) == doctest::Approx(0.5 * std::erfc(-1.0 / std::sqrt(2.0))).epsilon(1e-14));
  const EntryLaw t = build_crossover_law(2.0, 4.0, 3.0);
  CHECK(describe(t).find("crossover") != std::string::npos);
}

TEST_CASE("super-polynomial tail: h and its inverse") {
  const SuperPolyTail sp = SuperPolyTail::canonical(2.0);
  for (double x : {1e2, 1e4, 1e6}) {
    CHECK(sp.h_eval(sp.h_inverse(x)) == doctest::Approx(x).epsilon(1e-8));
  }
  for (double y : {sp.y_min() * 1.5, std::sqrt(sp.y_min() * sp.y_max()), sp.y_max() / 3.0}) {
    CHECK(sp.h_inverse(sp.h_eval(y)) == doctest::Approx(y).epsilon(1e-8));
  }
  double prev = 0.0;
  for (double y = sp.y_min() * 1.01; y < sp.y_max() && y < 1e200; y *= 7.0) {
    const double x = sp.h_eval(y);
    CHECK(x > prev);
    prev = x;
  }
  CHECK_THROWS_AS(sp.h_eval(sp.y_min() / 2.0), DomainError);
  CHECK_THROWS_AS(SuperPolyTail::canonical(1.0), DomainError);
}

TEST_CASE("super-polynomial tail: the canonical profile meets both growth conditions") {
  const SuperPolyTail sp = SuperPolyTail::canonical(2.0);
  double prev_lower = 0.0;
  double prev_upper = 1e300;
  for (int e = 10; e <= 100; e += 10) {
    const double lx = e * std::log(10.0);
    const double x = std::exp(lx);
    const double ll = std::log(lx);
    const double lower = sp.g(x) / ll;     // must grow without bound
    const double upper = sp.g(x) * ll / lx;  // must vanish
    CHECK(lower > prev_lower);
    CHECK(upper < prev_upper);
    prev_lower = lower;
    prev_upper = upper;
  }
  CHECK(prev_upper < 0.25);
}

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

#include "htrm/tail_laws.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "htrm/error.hpp"

namespace htrm {

double TailLaw::tail_mass() const {
  return tail_constant * std::pow(crossover_point, -tail_index);
}

double TailLaw::tail_variance() const {
  return tail_constant * tail_index / (tail_index - 2.0) *
         std::pow(crossover_point, 2.0 - tail_index);
}

TailLaw build_crossover_law(double c, double beta, double x0) {
  if (!(beta > 2.0)) {
    throw DomainError(fmt::format("tail index must exceed 2 (got {})", beta));
  }
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw DomainError(fmt::format("tail constant must be >= 0 (got {})", c));
  }
  if (!(x0 > 0.0)) {
    throw DomainError(fmt::format("crossover point must be > 0 (got {})", x0));
  }
  TailLaw law;
  law.tail_constant = c;
  law.tail_index = beta;
  law.crossover_point = x0;

  const double mass = law.tail_mass();
  if (mass > 1.0) {
    throw DomainError(fmt::format(
        "tail mass c*x0^-beta = {} exceeds 1; raise the crossover point", mass));
  }
  const double tail_var = law.tail_variance();
  if (!(tail_var < 1.0) || !(mass < 1.0)) {
    throw DomainError(fmt::format(
        "infeasible variance: tail beyond x0={} already carries variance {}; "
        "raise the crossover point",
        x0, tail_var));
  }
  // Uniform body on [-s, s] holds mass (1 - mass) and variance s^2 / 3.
  law.body_scale = std::sqrt(3.0 * (1.0 - tail_var) / (1.0 - mass));
  if (law.body_scale > x0) {
    throw DomainError(fmt::format(
        "infeasible variance: body scale {} would extend past x0={}; lower the "
        "crossover point or raise c",
        law.body_scale, x0));
  }
  return law;
}

double default_crossover_point(double c, double beta) {
  if (!(beta > 2.0)) {
    throw DomainError(fmt::format("tail index must exceed 2 (got {})", beta));
  }
  const double needed =
      std::pow(c * beta / ((beta - 2.0) * 0.8), 1.0 / (beta - 2.0));
  return std::max(3.0, needed);
}

double tail_prob(const TailLaw& law, double x) {
  if (x <= 0.0) return 1.0;
  if (x >= law.crossover_point) {
    return law.tail_constant * std::pow(x, -law.tail_index);
  }
  const double mass = law.tail_mass();
  if (x < law.body_scale) {
    return mass + (1.0 - mass) * (1.0 - x / law.body_scale);
  }
  return mass;
}

double cdf(const TailLaw& law, double x) {
  if (x >= 0.0) return 1.0 - 0.5 * tail_prob(law, x);
  return 0.5 * tail_prob(law, -x);
}

double survival_inverse(const TailLaw& law, double s) {
  const double mass = law.tail_mass();
  if (s <= mass) {
    return std::pow(law.tail_constant / s, 1.0 / law.tail_index);
  }
  return law.body_scale * (1.0 - (s - mass) / (1.0 - mass));
}

double moment(const TailLaw& law, int k) {
  if (k < 1) throw DomainError("moment order must be >= 1");
  if (k % 2 == 1) return 0.0;
  if (!(law.tail_index > k) && law.tail_constant > 0.0) {
    throw DomainError(
        fmt::format("moment {} is infinite for tail index {}", k, law.tail_index));
  }
  const double beta = law.tail_index;
  const double tail = law.tail_constant > 0.0
                          ? law.tail_constant * beta / (beta - k) *
                                std::pow(law.crossover_point, k - beta)
                          : 0.0;
  const double body =
      (1.0 - law.tail_mass()) * std::pow(law.body_scale, k) / (k + 1.0);
  return tail + body;
}

double sample(const TailLaw& law, Rng& rng) {
  const double magnitude = survival_inverse(law, rng.uniform());
  return rng.coin() ? -magnitude : magnitude;
}

double sample_above(const TailLaw& law, double q, Rng& rng) {
  const double upper = tail_prob(law, q);
  if (!(upper > 0.0)) {
    throw DomainError(fmt::format("P(|a| > {}) is zero; cannot condition", q));
  }
  const double magnitude = survival_inverse(law, rng.uniform() * upper);
  return rng.coin() ? -magnitude : magnitude;
}

double sample_below(const TailLaw& law, double q, Rng& rng) {
  const double lower = tail_prob(law, q);
  if (!(lower < 1.0)) {
    throw DomainError(fmt::format("P(|a| < {}) is zero; cannot condition", q));
  }
  const double magnitude =
      survival_inverse(law, lower + rng.uniform() * (1.0 - lower));
  return rng.coin() ? -magnitude : magnitude;
}

double sample(const EntryLaw& law, Rng& rng) {
  return std::visit(
      [&rng](const auto& l) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(l)>, GaussianLaw>) {
          return rng.normal();
        } else {
          return sample(l, rng);
        }
      },
      law);
}

double cdf(const EntryLaw& law, double x) {
  if (const auto* tail = std::get_if<TailLaw>(&law)) return cdf(*tail, x);
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

std::string describe(const EntryLaw& law) {
  if (const auto* t = std::get_if<TailLaw>(&law)) {
    return fmt::format("crossover(c={}, beta={}, x0={}, body={})",
                       t->tail_constant, t->tail_index, t->crossover_point,
                       t->body_scale);
  }
  return "gaussian";
}

SuperPolyTail::SuperPolyTail(Profile g, double a, double x_min, double x_max,
                             std::size_t table_size)
    : g_(std::move(g)), a_(a) {
  if (!(a > 1.0)) throw DomainError("super-polynomial tail requires a > 1");
  if (!(x_min > std::exp(1.0)) || !(x_max > x_min) || table_size < 2) {
    throw DomainError("invalid super-polynomial table range");
  }
  const double lo = std::log(x_min);
  const double hi = std::log(x_max);
  log_x_.resize(table_size);
  log_y_.resize(table_size);
  for (std::size_t i = 0; i < table_size; ++i) {
    log_x_[i] = lo + (hi - lo) * static_cast<double>(i) /
                         static_cast<double>(table_size - 1);
    log_y_[i] = log_forward(log_x_[i]);
    if (!std::isfinite(log_y_[i]) || (i > 0 && !(log_y_[i] > log_y_[i - 1]))) {
      throw DomainError("profile g must be finite and increasing on the table");
    }
  }
}

SuperPolyTail SuperPolyTail::canonical(double a) {
  return SuperPolyTail(
      [](double x) {
        const double ll = std::log(std::log(x));
        return ll * std::log(ll);
      },
      a);
}

double SuperPolyTail::log_forward(double log_x) const {
  const double x = std::exp(log_x);
  return std::log(a_) + 0.5 * g_(x) * std::log(log_x);
}

double SuperPolyTail::h_inverse(double x) const {
  const double lx = std::log(x);
  if (!(lx >= log_x_.front()) || !(lx <= log_x_.back())) {
    throw DomainError(fmt::format("x={} outside the tabulated range", x));
  }
  return std::exp(log_forward(lx));
}

double SuperPolyTail::h_eval(double y) const {
  const double ly = std::log(y);
  if (!(ly >= log_y_.front()) || !(ly <= log_y_.back())) {
    throw DomainError(fmt::format("y={} outside the tabulated range", y));
  }
  const auto it = std::lower_bound(log_y_.begin(), log_y_.end(), ly);
  const auto idx = static_cast<std::size_t>(it - log_y_.begin());
  if (idx < log_y_.size() && log_y_[idx] == ly) return std::exp(log_x_[idx]);
  double lo = log_x_[idx - 1];
  double hi = log_x_[idx];
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * std::abs(hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (log_forward(mid) < ly) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

double SuperPolyTail::y_min() const { return std::exp(log_y_.front()); }
double SuperPolyTail::y_max() const { return std::exp(log_y_.back()); }

}  // namespace htrm

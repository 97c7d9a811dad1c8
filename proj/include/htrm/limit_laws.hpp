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

#include <optional>
#include <string>
#include <vector>

#include "htrm/rng.hpp"
#include "htrm/tail_laws.hpp"

namespace htrm {

/// Fréchet exponent 2(1 + 1/mu) attached to the sparsity exponent mu.
double frechet_exponent(double mu);

/// f(x) = x + 1/x for x >= 1 and 2 for 0 < x < 1.
double f_bbp(double x);

/// Inverse of f on [1, inf): (lambda + sqrt(lambda^2 - 4)) / 2.
double f_inverse(double lambda);

/// P(xi <= x) = exp(-c x^(-beta) / 2) with beta = 2(1 + 1/mu).
double frechet_cdf(double x, double c, double mu);
double frechet_quantile(double u, double c, double mu);

/// Law of f(xi): zero below 2, an atom of mass exp(-c/2) at 2, continuous
/// above.
double lambda1_cdf(double t, double c, double mu);

/// Expected number of Poisson points in [c0, inf): (c/2) c0^(-beta).
double poisson_expected_count(double c0, double c, double mu);

/// P(zeta_k <= x) for the k-th largest Poisson point, i.e. the probability
/// that fewer than k points land above x.
double poisson_kth_cdf(double x, int k, double c, double mu);

/// The k largest points of the Poisson process, drawn through exponential
/// spacings: zeta_j = (2 Gamma_j / c)^(-1/beta).
std::vector<double> simulate_poisson_top_k(int k, double c, double mu, Rng& rng);

/// Marchenko-Pastur support edges a = (1 - sqrt(alpha))^2, b = (1 + sqrt(alpha))^2.
double mp_lower_edge(double alpha);
double mp_upper_edge(double alpha);

/// Absolutely continuous part sqrt((b - x)(x - a)) / (2 pi x) on [a, b].
double mp_density(double x, double alpha);

/// G(z) = integral of pi_alpha(dx) / (z - x) for real z >= b, by substitution
/// quadrature; for alpha < 1 the atom of mass 1 - alpha at the origin is
/// included. Throws DomainError for z < b.
double mp_stieltjes(double z, double alpha);

/// Closed form (z + 1 - alpha - sqrt((z - a)(z - b))) / (2z), valid on z >= b.
double mp_stieltjes_closed(double z, double alpha);

/// Transform of the companion law (1 - 1/alpha) delta_0 + pi_alpha / alpha:
/// the spectral law of S* S / L when S S* / L follows pi_alpha.
double companion_stieltjes(double w, double alpha);

/// Left side of the F_alpha equation:
/// z^2 (1+alpha)^2 G_alpha((1+alpha) z^2) G~_alpha((1+alpha) z^2),
/// defined for z at or beyond the edge (1 + sqrt(alpha)) / sqrt(1 + alpha).
double falpha_lhs(double z, double alpha);

/// Edge value (1 + sqrt(alpha)) / sqrt(1 + alpha).
double falpha_edge(double alpha);

double tau_alpha(double alpha);

/// Root z of falpha_lhs(z) = 1/x^2 for x > tau_alpha, the edge value otherwise.
double f_alpha(double x, double alpha);

/// |falpha_lhs(z) - 1/x^2|.
double falpha_residual(double z, double x, double alpha);

/// P(xi_{c,alpha} <= x) = exp(-c alpha x^-4 / (1+alpha)^2).
double xi_cov_cdf(double x, double c, double alpha);

/// Law of (1 + alpha) F_alpha(xi_{c,alpha})^2: atom at (1 + sqrt(alpha))^2
/// of mass P(xi <= tau_alpha), continuous above.
double covariance_edge_cdf(double t, double c, double alpha);

/// f(a) for the super-polynomial regime.
double super_poly_limit(const SuperPolyTail& sp);

enum class LimitKind { frechet_mu, pushforward_f, poisson_intensity, covariance_edge };

std::string to_string(LimitKind kind);
LimitKind limit_kind_from_string(const std::string& name);

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

/// A one-dimensional limit law with CDF, left limit and generalized inverse.
///  - frechet_mu: xi_c^mu;
///  - pushforward_f: f(zeta_k) (k = 1 gives the law of f(xi_c^mu));
///  - poisson_intensity: zeta_k, the k-th largest Poisson point;
///  - covariance_edge: (1+alpha) F_alpha(xi_{c,alpha})^2.
class LimitLaw {
 public:
  static LimitLaw frechet(double c, double mu);
  static LimitLaw pushforward(double c, double mu, int k = 1);
  static LimitLaw poisson_point(double c, double mu, int k);
  static LimitLaw covariance(double c, double alpha);

  LimitKind kind() const { return kind_; }
  double c() const { return c_; }
  double mu() const { return mu_; }
  double alpha() const { return alpha_; }
  int k() const { return k_; }

  double cdf(double t) const;
  /// lim_{s -> t-} cdf(s).
  double cdf_left(double t) const;
  /// Smallest t with cdf(t) >= u, for u in (0, 1).
  double quantile(double u) const;
  std::optional<Atom> atom() const;

 private:
  LimitLaw(LimitKind kind, double c, double mu, double alpha, int k);

  LimitKind kind_;
  double c_;
  double mu_;
  double alpha_;
  int k_;
};

}  // namespace htrm

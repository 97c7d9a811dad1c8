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

#include "htrm/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "htrm/error.hpp"
#include "htrm/quadrature.hpp"

namespace htrm {
namespace {

void check_c_mu(double c, double mu) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("tail constant c must be positive");
  if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("sparsity exponent mu must lie in (0, 1]");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("aspect ratio alpha must be positive");
}

void check_unit(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
}

// The F_alpha equation is invariant under alpha -> 1/alpha at fixed z.
double canonical_alpha(double alpha) { return alpha >= 1.0 ? alpha : 1.0 / alpha; }

// Appends geometrically spaced breakpoints origin + sign * scale * 2^j that
// stay inside the half-interval, so a near-singular endpoint is resolved.
void graded_points(std::vector<double>& points, double origin, double sign, double scale) {
  const double half = std::numbers::pi / 4.0;
  if (!(scale > 0.0) || scale >= half) return;
  for (double s = scale; s < half; s *= 2.0) points.push_back(origin + sign * s);
}

// Smallest t in [lo, hi] (expanding hi as needed) with cdf(t) >= u, by
// bisection on a monotone function.
template <typename Cdf>
double bisect_quantile(Cdf&& cdf, double u, double lo, double hi) {
  for (int i = 0; i < 2000 && cdf(hi) < u; ++i) hi *= 2.0;
  if (cdf(hi) < u) throw InternalError("quantile bracket failure");
  for (int i = 0; i < 400 && hi - lo > 1e-15 * std::abs(hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) >= u) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace

double frechet_exponent(double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("sparsity exponent mu must lie in (0, 1]");
  return 2.0 * (1.0 + 1.0 / mu);
}

double f_bbp(double x) {
  if (!(x > 0.0)) throw DomainError("f is defined for positive arguments only");
  return x >= 1.0 ? x + 1.0 / x : 2.0;
}

double f_inverse(double lambda) {
  if (!(lambda >= 2.0)) throw DomainError("f_inverse requires lambda >= 2");
  return 0.5 * (lambda + std::sqrt((lambda - 2.0) * (lambda + 2.0)));
}

double frechet_cdf(double x, double c, double mu) {
  check_c_mu(c, mu);
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return std::exp(-0.5 * c * std::pow(x, -frechet_exponent(mu)));
}

double frechet_quantile(double u, double c, double mu) {
  check_c_mu(c, mu);
  check_unit(u);
  return std::pow(-2.0 * std::log(u) / c, -1.0 / frechet_exponent(mu));
}

double lambda1_cdf(double t, double c, double mu) {
  check_c_mu(c, mu);
  if (t < 2.0) return 0.0;
  return frechet_cdf(f_inverse(t), c, mu);
}

double poisson_expected_count(double c0, double c, double mu) {
  check_c_mu(c, mu);
  if (!(c0 > 0.0)) throw DomainError("count threshold must be positive");
  return 0.5 * c * std::pow(c0, -frechet_exponent(mu));
}

double poisson_kth_cdf(double x, int k, double c, double mu) {
  check_c_mu(c, mu);
  if (k < 1) throw DomainError("point index k must be at least 1");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double m = poisson_expected_count(x, c, mu);
  double term = std::exp(-m);
  double sum = term;
  for (int j = 1; j < k; ++j) {
    term *= m / j;
    sum += term;
  }
  return std::min(sum, 1.0);
}

std::vector<double> simulate_poisson_top_k(int k, double c, double mu, Rng& rng) {
  check_c_mu(c, mu);
  if (k < 1) throw DomainError("point count k must be at least 1");
  const double beta = frechet_exponent(mu);
  std::vector<double> points(static_cast<std::size_t>(k));
  double gamma = 0.0;
  for (auto& p : points) {
    gamma += -std::log(rng.uniform());
    p = std::pow(2.0 * gamma / c, -1.0 / beta);
  }
  return points;
}

double mp_lower_edge(double alpha) {
  check_alpha(alpha);
  const double r = 1.0 - std::sqrt(alpha);
  return r * r;
}

double mp_upper_edge(double alpha) {
  check_alpha(alpha);
  const double r = 1.0 + std::sqrt(alpha);
  return r * r;
}

double mp_density(double x, double alpha) {
  const double a = mp_lower_edge(alpha);
  const double b = mp_upper_edge(alpha);
  if (x <= a || x >= b || x <= 0.0) return 0.0;
  return std::sqrt((b - x) * (x - a)) / (2.0 * std::numbers::pi * x);
}

double mp_stieltjes(double z, double alpha) {
  const double a = mp_lower_edge(alpha);
  const double b = mp_upper_edge(alpha);
  if (!(z >= b)) throw DomainError("Stieltjes transform requested inside the spectrum support");
  // x = b - 2h sin^2(phi) = a + 2h cos^2(phi) with 2h = b - a maps [0, pi/2]
  // onto the support and cancels both square-root endpoints.
  const double h = 2.0 * std::sqrt(alpha);
  const double gap = z - b;
  auto integrand = [&](double phi) {
    const double s = std::sin(phi);
    const double c = std::cos(phi);
    const double s2 = s * s;
    const double c2 = c * c;
    return (4.0 * h * h / std::numbers::pi) * s2 * c2 /
           ((gap + 2.0 * h * s2) * (a + 2.0 * h * c2));
  };
  // Grade the panels towards phi = 0 when z is close to b, and towards
  // phi = pi/2 when the lower edge is close to the origin.
  std::vector<double> points{0.0, std::numbers::pi / 2.0};
  graded_points(points, 0.0, 1.0, std::sqrt(gap / (2.0 * h)));
  graded_points(points, std::numbers::pi / 2.0, -1.0, std::sqrt(a / (2.0 * h)));
  std::sort(points.begin(), points.end());
  const auto& rule = gauss_legendre_200();
  double g = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i + 1] > points[i]) g += integrate(rule, points[i], points[i + 1], integrand);
  }
  if (!std::isfinite(g)) throw InternalError("Stieltjes quadrature produced a non-finite value");
  if (alpha < 1.0) g += (1.0 - alpha) / z;
  return g;
}

double mp_stieltjes_closed(double z, double alpha) {
  const double a = mp_lower_edge(alpha);
  const double b = mp_upper_edge(alpha);
  if (!(z >= b)) throw DomainError("Stieltjes transform requested inside the spectrum support");
  return (z + 1.0 - alpha - std::sqrt((z - a) * (z - b))) / (2.0 * z);
}

double companion_stieltjes(double w, double alpha) {
  check_alpha(alpha);
  return (1.0 - 1.0 / alpha) / w + mp_stieltjes(w, alpha) / alpha;
}

double falpha_edge(double alpha) {
  check_alpha(alpha);
  return (1.0 + std::sqrt(alpha)) / std::sqrt(1.0 + alpha);
}

double falpha_lhs(double z, double alpha) {
  check_alpha(alpha);
  const double al = canonical_alpha(alpha);
  const double w = (1.0 + al) * z * z;
  const double b = mp_upper_edge(al);
  // Rounding in (1 + alpha) z^2 must not push the exact edge inside the support.
  const double w_eval = (w < b && w > b * (1.0 - 1e-13)) ? b : w;
  if (!(w_eval >= b)) throw DomainError("F_alpha equation evaluated below the edge");
  const double onep = 1.0 + al;
  return z * z * onep * onep * mp_stieltjes(w_eval, al) * companion_stieltjes(w_eval, al);
}

double tau_alpha(double alpha) {
  const double al = canonical_alpha(alpha);
  const double lhs = falpha_lhs(falpha_edge(al), al);
  if (!(lhs > 0.0) || !std::isfinite(lhs)) throw InternalError("tau_alpha: edge transform failed");
  return 1.0 / std::sqrt(lhs);
}

double f_alpha(double x, double alpha) {
  if (!(x > 0.0)) throw DomainError("F_alpha requires x > 0");
  const double al = canonical_alpha(alpha);
  const double edge = falpha_edge(al);
  if (x <= tau_alpha(al)) return edge;
  const double target = 1.0 / (x * x);
  double lo = edge * (1.0 + 1e-12);
  if (falpha_lhs(lo, al) <= target) return lo;
  double hi = std::max(edge + 1.0, 2.0 * x + 2.0);
  for (int i = 0; i < 200 && falpha_lhs(hi, al) > target; ++i) hi *= 2.0;
  if (falpha_lhs(hi, al) > target) throw InternalError("F_alpha bracket failure");
  for (int i = 0; i < 400 && hi - lo > 2e-16 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (falpha_lhs(mid, al) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double z = 0.5 * (lo + hi);
  if (falpha_residual(z, x, al) > 1e-9) throw InternalError("F_alpha root failed the residual check");
  return z;
}

double falpha_residual(double z, double x, double alpha) {
  return std::abs(falpha_lhs(z, alpha) - 1.0 / (x * x));
}

double xi_cov_cdf(double x, double c, double alpha) {
  check_alpha(alpha);
  if (!(c > 0.0)) throw DomainError("tail constant c must be positive");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double k = c * alpha / ((1.0 + alpha) * (1.0 + alpha));
  return std::exp(-k * std::pow(x, -4.0));
}

double covariance_edge_cdf(double t, double c, double alpha) {
  check_alpha(alpha);
  if (!(c > 0.0)) throw DomainError("tail constant c must be positive");
  const double edge = mp_upper_edge(alpha);
  if (t < edge) return 0.0;
  if (std::isinf(t)) return 1.0;
  if (t == edge) return xi_cov_cdf(tau_alpha(alpha), c, alpha);
  // (1+alpha) F_alpha(x)^2 = t  <=>  x = 1 / sqrt(lhs(sqrt(t / (1+alpha)))).
  const double z = std::sqrt(t / (1.0 + alpha));
  const double lhs = falpha_lhs(std::max(z, falpha_edge(alpha)), alpha);
  return xi_cov_cdf(1.0 / std::sqrt(lhs), c, alpha);
}

double super_poly_limit(const SuperPolyTail& sp) {
  if (!(sp.a() > 1.0)) throw DomainError("super-polynomial limit needs a > 1");
  return f_bbp(sp.a());
}

std::string to_string(LimitKind kind) {
  switch (kind) {
    case LimitKind::frechet_mu: return "frechet";
    case LimitKind::pushforward_f: return "lambda";
    case LimitKind::poisson_intensity: return "poisson";
    case LimitKind::covariance_edge: return "covariance";
  }
  return "unknown";
}

LimitKind limit_kind_from_string(const std::string& name) {
  if (name == "frechet") return LimitKind::frechet_mu;
  if (name == "lambda" || name == "pushforward") return LimitKind::pushforward_f;
  if (name == "poisson") return LimitKind::poisson_intensity;
  if (name == "covariance") return LimitKind::covariance_edge;
  throw DomainError("unknown limit law '" + name + "'");
}

LimitLaw::LimitLaw(LimitKind kind, double c, double mu, double alpha, int k)
    : kind_(kind), c_(c), mu_(mu), alpha_(alpha), k_(k) {
  if (k_ < 1) throw DomainError("point index k must be at least 1");
  if (kind_ == LimitKind::covariance_edge) {
    check_alpha(alpha_);
    if (!(c_ > 0.0)) throw DomainError("tail constant c must be positive");
  } else {
    check_c_mu(c_, mu_);
  }
}

LimitLaw LimitLaw::frechet(double c, double mu) { return {LimitKind::frechet_mu, c, mu, 1.0, 1}; }

LimitLaw LimitLaw::pushforward(double c, double mu, int k) {
  return {LimitKind::pushforward_f, c, mu, 1.0, k};
}

LimitLaw LimitLaw::poisson_point(double c, double mu, int k) {
  return {LimitKind::poisson_intensity, c, mu, 1.0, k};
}

LimitLaw LimitLaw::covariance(double c, double alpha) {
  return {LimitKind::covariance_edge, c, 1.0, alpha, 1};
}

double LimitLaw::cdf(double t) const {
  switch (kind_) {
    case LimitKind::frechet_mu: return frechet_cdf(t, c_, mu_);
    case LimitKind::poisson_intensity: return poisson_kth_cdf(t, k_, c_, mu_);
    case LimitKind::pushforward_f:
      return t < 2.0 ? 0.0 : poisson_kth_cdf(f_inverse(t), k_, c_, mu_);
    case LimitKind::covariance_edge: return covariance_edge_cdf(t, c_, alpha_);
  }
  return 0.0;
}

double LimitLaw::cdf_left(double t) const {
  if (const auto a = atom(); a && t == a->location) return 0.0;
  return cdf(t);
}

std::optional<Atom> LimitLaw::atom() const {
  switch (kind_) {
    case LimitKind::pushforward_f: return Atom{2.0, poisson_kth_cdf(1.0, k_, c_, mu_)};
    case LimitKind::covariance_edge:
      return Atom{mp_upper_edge(alpha_), xi_cov_cdf(tau_alpha(alpha_), c_, alpha_)};
    default: return std::nullopt;
  }
}

double LimitLaw::quantile(double u) const {
  check_unit(u);
  switch (kind_) {
    case LimitKind::frechet_mu: return frechet_quantile(u, c_, mu_);
    case LimitKind::poisson_intensity: {
      if (k_ == 1) return frechet_quantile(u, c_, mu_);
      return bisect_quantile([&](double x) { return cdf(x); }, u, 0.0, 1.0);
    }
    case LimitKind::pushforward_f: {
      const double mass = poisson_kth_cdf(1.0, k_, c_, mu_);
      if (u <= mass) return 2.0;
      const double x = k_ == 1 ? frechet_quantile(u, c_, mu_)
                               : bisect_quantile(
                                     [&](double y) { return poisson_kth_cdf(y, k_, c_, mu_); },
                                     u, 1.0, 2.0);
      return f_bbp(std::max(x, 1.0));
    }
    case LimitKind::covariance_edge: {
      const double mass = atom()->mass;
      if (u <= mass) return mp_upper_edge(alpha_);
      const double kk = c_ * alpha_ / ((1.0 + alpha_) * (1.0 + alpha_));
      const double x = std::pow(-kk / std::log(u), 0.25);
      const double z = f_alpha(x, alpha_);
      return (1.0 + alpha_) * z * z;
    }
  }
  return 0.0;
}

}  // namespace htrm

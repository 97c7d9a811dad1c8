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

#include "htrm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "htrm/error.hpp"
#include "htrm/rng.hpp"

namespace htrm {

void DenseOperator::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  y.noalias() = m_ * x;
}

SparseOperator::SparseOperator(const EnsembleSample& sample) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(sample.entries.size() * 2);
  for (const auto& t : sample.entries) {
    trips.emplace_back(t.row, t.col, t.value);
    if (t.row != t.col) trips.emplace_back(t.col, t.row, t.value);
  }
  m_.resize(static_cast<Eigen::Index>(sample.rows), static_cast<Eigen::Index>(sample.cols));
  m_.setFromTriplets(trips.begin(), trips.end());
}

void SparseOperator::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  y.noalias() = m_ * x;
}

void BlockCovarianceOperator::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  const Eigen::Index L = b_.rows();
  const Eigen::Index M = b_.cols();
  y.resize(L + M);
  y.head(L).noalias() = b_ * x.tail(M);
  y.tail(M).noalias() = b_.transpose() * x.head(L);
}

std::unique_ptr<SymmetricOperator> make_operator(const EnsembleSample& sample) {
  if (!sample.symmetric()) {
    throw DomainError("eigensolvers need a symmetric sample; symmetrize the factor first");
  }
  if (sample.kind == EnsembleKind::symmetrized_covariance && sample.block_rows > 0) {
    return std::make_unique<BlockCovarianceOperator>(off_diagonal_block(sample));
  }
  if (sample.rows <= kDenseLimit) return std::make_unique<DenseOperator>(to_dense(sample));
  return std::make_unique<SparseOperator>(sample);
}

namespace {

Eigen::VectorXd random_unit(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v / v.norm();
}

// Two passes of classical Gram-Schmidt against the first `cols` columns.
void orthogonalize(const Eigen::MatrixXd& basis, Eigen::Index cols, Eigen::VectorXd& w) {
  if (cols == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd h = basis.leftCols(cols).transpose() * w;
    w.noalias() -= basis.leftCols(cols) * h;
  }
}

void orient(Eigen::VectorXd& v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v(idx) < 0.0) v = -v;
}

void finish_gaps(SpectralResult& r, double tol) {
  r.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < r.eigenvalues.size(); ++i) {
    r.min_gap = std::min(r.min_gap, r.eigenvalues[i - 1] - r.eigenvalues[i]);
  }
  r.near_degenerate = r.min_gap < 1e3 * tol;
}

}  // namespace

SpectralResult lanczos_top_k(const SymmetricOperator& op, const EigenOptions& options) {
  const Eigen::Index n = op.dim();
  const auto k = static_cast<Eigen::Index>(options.k);
  if (k == 0 || k > n) {
    throw DomainError(fmt::format("requested {} eigenpairs of a {}x{} matrix", k, n, n));
  }
  if (!(options.tol > 0.0)) throw DomainError("eigensolver tolerance must be positive");

  Eigen::Index max_dim = options.max_iterations > 0
                             ? static_cast<Eigen::Index>(options.max_iterations)
                             : Eigen::Index{1000};
  max_dim = std::clamp(max_dim, std::min(n, k + 1), n);

  Rng rng(mix64(options.start_seed) ^ static_cast<std::uint64_t>(n));
  Eigen::MatrixXd basis(n, max_dim);
  basis.col(0) = random_unit(n, rng);
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples basis columns j and j+1
  alpha.reserve(static_cast<std::size_t>(max_dim));
  beta.reserve(static_cast<std::size_t>(max_dim));

  Eigen::VectorXd w(n);
  double norm_estimate = 0.0;
  SpectralResult result;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  Eigen::Index dim = 0;
  Eigen::Index next_check = std::max<Eigen::Index>(k, 5);
  bool converged = false;

  for (Eigen::Index j = 0;; ++j) {
    op.apply(basis.col(j), w);
    double a = basis.col(j).dot(w);
    w.noalias() -= a * basis.col(j);
    if (j > 0) w.noalias() -= beta[static_cast<std::size_t>(j - 1)] * basis.col(j - 1);
    // Fold the reorthogonalization correction back into the diagonal.
    const double correction = basis.col(j).dot(w);
    a += correction;
    w.noalias() -= correction * basis.col(j);
    orthogonalize(basis, j + 1, w);
    alpha.push_back(a);
    const double b = w.norm();
    norm_estimate = std::max(norm_estimate, std::abs(a) + b);
    dim = j + 1;

    const bool exhausted = dim == n;
    const bool breakdown = b <= 1e-12 * std::max(1.0, norm_estimate);
    const bool at_cap = dim == max_dim;

    if (dim >= k && (dim >= next_check || exhausted || at_cap)) {
      Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), dim);
      Eigen::VectorXd sub(std::max<Eigen::Index>(dim - 1, 0));
      for (Eigen::Index i = 0; i + 1 < dim; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      converged = true;
      for (Eigen::Index r = 0; r < k; ++r) {
        const double est = std::abs(b * tri.eigenvectors()(dim - 1, dim - 1 - r));
        if (!(est <= options.tol) && !exhausted) converged = false;
      }
      // An exhausted Krylov space can hide eigenvalues; never stop on a
      // breakdown alone.
      if (breakdown && !exhausted) converged = false;
      next_check = dim + std::max<Eigen::Index>(5, dim / 5);
      if (converged || at_cap || exhausted) break;
    } else if (at_cap || exhausted) {
      break;
    }

    if (breakdown) {
      Eigen::VectorXd fresh = random_unit(n, rng);
      orthogonalize(basis, dim, fresh);
      double fn = fresh.norm();
      for (int tries = 0; tries < 8 && fn < 1e-8; ++tries) {
        fresh = random_unit(n, rng);
        orthogonalize(basis, dim, fresh);
        fn = fresh.norm();
      }
      if (fn < 1e-8) throw InternalError("Lanczos restart failed to find a new direction");
      beta.push_back(0.0);
      basis.col(dim) = fresh / fn;
    } else {
      beta.push_back(b);
      basis.col(dim) = w / b;
    }
  }

  result.iterations = static_cast<int>(dim);
  result.converged = converged;
  result.method = SolveMethod::lanczos;
  const double b_last = w.norm();
  for (Eigen::Index r = 0; r < k; ++r) {
    const Eigen::Index col = dim - 1 - r;
    result.eigenvalues.push_back(tri.eigenvalues()(col));
    if (options.vectors) {
      Eigen::VectorXd y = basis.leftCols(dim) * tri.eigenvectors().col(col);
      y /= y.norm();
      orient(y);
      Eigen::VectorXd ay(n);
      op.apply(y, ay);
      result.residuals.push_back((ay - result.eigenvalues.back() * y).norm());
      result.eigenvectors.push_back(std::move(y));
    } else {
      result.residuals.push_back(
          dim == n ? 0.0 : std::abs(b_last * tri.eigenvectors()(dim - 1, col)));
    }
  }
  finish_gaps(result, options.tol);
  return result;
}

SpectralResult dense_top_k(const Eigen::MatrixXd& m, std::size_t k, bool vectors) {
  const Eigen::Index n = m.rows();
  if (k == 0 || static_cast<Eigen::Index>(k) > n) {
    throw DomainError(fmt::format("requested {} eigenpairs of a {}x{} matrix", k, n, n));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      m, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw InternalError("dense eigensolver failed");
  SpectralResult r;
  r.method = SolveMethod::dense;
  r.converged = true;
  for (std::size_t i = 0; i < k; ++i) {
    const Eigen::Index col = n - 1 - static_cast<Eigen::Index>(i);
    r.eigenvalues.push_back(es.eigenvalues()(col));
    if (vectors) {
      Eigen::VectorXd y = es.eigenvectors().col(col);
      orient(y);
      r.residuals.push_back((m * y - r.eigenvalues.back() * y).norm());
      r.eigenvectors.push_back(std::move(y));
    } else {
      r.residuals.push_back(0.0);
    }
  }
  finish_gaps(r, 1e-12);
  return r;
}

SpectralResult top_k_eigs(const EnsembleSample& sample, const EigenOptions& options) {
  if (!sample.symmetric()) {
    throw DomainError("top_k_eigs needs a symmetric sample");
  }
  if (options.k == 0 || options.k > sample.rows) {
    throw DomainError(fmt::format("requested {} eigenpairs of a {}x{} matrix", options.k,
                                  sample.rows, sample.rows));
  }
  const auto op = make_operator(sample);
  SpectralResult r = lanczos_top_k(*op, options);
  if (!r.converged && options.dense_fallback && sample.rows <= kDenseLimit) {
    const int iterations = r.iterations;
    r = dense_top_k(to_dense(sample), options.k, options.vectors);
    r.iterations = iterations;
    r.method = SolveMethod::dense_fallback;
    finish_gaps(r, options.tol);
  }
  return r;
}

double operator_norm(const SymmetricOperator& op, double tol, int max_iterations) {
  const Eigen::Index n = op.dim();
  Rng rng(0x6e6f726dULL ^ static_cast<std::uint64_t>(n));
  Eigen::VectorXd x = random_unit(n, rng);
  Eigen::VectorXd y(n);
  Eigen::VectorXd z(n);
  double estimate = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    op.apply(x, y);
    const double current = y.norm();  // sqrt(x^T A^2 x)
    if (current == 0.0) return 0.0;
    op.apply(y, z);
    const double zn = z.norm();
    if (zn == 0.0) return current;
    x = z / zn;
    if (it > 0 && std::abs(current - estimate) <= tol * current) return current;
    estimate = current;
  }
  return estimate;
}

double operator_norm(const EnsembleSample& sample, double tol) {
  return operator_norm(*make_operator(sample), tol);
}

double overlap(const Eigen::VectorXd& v, std::size_t i, std::size_t j, int sign) {
  const auto n = static_cast<std::size_t>(v.size());
  if (i >= n || j >= n) throw DomainError(fmt::format("index out of range for length {}", n));
  if (i == j) throw DomainError("overlap needs two distinct indices");
  const double s = sign >= 0 ? 1.0 : -1.0;
  return std::abs(v(static_cast<Eigen::Index>(i)) + s * v(static_cast<Eigen::Index>(j))) /
         std::sqrt(2.0);
}

double localization_target(double lambda) {
  if (!(lambda > 2.0)) {
    throw DomainError(fmt::format("localization needs an outlier lambda > 2 (got {})", lambda));
  }
  const double root = lambda + std::sqrt(lambda * lambda - 4.0);
  return 1.0 - 4.0 / (root * root);
}

LocalizationResult localization_event(const Eigen::VectorXd& v, double lambda, double eps) {
  if (v.size() < 2) throw DomainError("localization needs a vector of length >= 2");
  if (!(eps > 0.0)) throw DomainError("localization tolerance must be positive");
  LocalizationResult r;
  r.target = localization_target(lambda);

  Eigen::Index first = 0;
  Eigen::Index second = -1;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(first))) {
      second = first;
      first = i;
    } else if (second < 0 || std::abs(v(i)) > std::abs(v(second))) {
      second = i;
    }
  }
  r.i = static_cast<std::size_t>(std::min(first, second));
  r.j = static_cast<std::size_t>(std::max(first, second));
  r.sign = v(first) * v(second) >= 0.0 ? 1 : -1;
  const double ov = overlap(v, r.i, r.j, r.sign);
  r.squared_overlap = ov * ov;
  r.holds = r.squared_overlap >= r.target * (1.0 - eps) &&
            r.squared_overlap <= r.target * (1.0 + eps);
  return r;
}

MatrixParameters bvh_parameters(const VarianceProfile& profile) {
  if (profile.n == 0) throw DomainError("variance profile needs n >= 1");
  if (!(profile.offdiag_variance >= 0.0) || !(profile.diag_variance >= 0.0)) {
    throw DomainError("variance profile has a negative variance");
  }
  if (!(profile.entry_bound >= 0.0)) throw DomainError("entry bound must be >= 0");
  const double n = static_cast<double>(profile.n);
  const double off = profile.n > 1 ? profile.offdiag_variance : 0.0;
  const double diag = profile.diag_variance;
  MatrixParameters p;
  p.sigma = std::sqrt((n - 1.0) * off + diag);
  // sup over unit v, w of Var<v, X w>; attained at v = w, either spread
  // evenly over all coordinates or concentrated on one.
  p.sigma_star = std::sqrt(std::max(2.0 * off * (1.0 - 1.0 / n) + diag / n, diag));
  p.v = std::sqrt(std::max(2.0 * off, diag));
  p.r = profile.entry_bound;
  const double log_n = std::log(n);
  p.universality_gate = log_n * log_n * p.r;
  return p;
}

}  // namespace htrm

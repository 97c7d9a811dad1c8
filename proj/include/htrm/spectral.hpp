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
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "htrm/ensembles.hpp"

namespace htrm {

/// Real symmetric linear map, the only thing Lanczos needs.
class SymmetricOperator {
 public:
  virtual ~SymmetricOperator() = default;
  virtual Eigen::Index dim() const = 0;
  virtual void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const = 0;
};

class DenseOperator final : public SymmetricOperator {
 public:
  explicit DenseOperator(Eigen::MatrixXd m) : m_(std::move(m)) {}
  Eigen::Index dim() const override { return m_.rows(); }
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const override;
  const Eigen::MatrixXd& matrix() const { return m_; }

 private:
  Eigen::MatrixXd m_;
};

class SparseOperator final : public SymmetricOperator {
 public:
  explicit SparseOperator(const EnsembleSample& sample);
  Eigen::Index dim() const override { return m_.rows(); }
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const override;

 private:
  Eigen::SparseMatrix<double, Eigen::RowMajor> m_;
};

/// [[0, B], [B^T, 0]] applied blockwise from the dense L x M block B.
class BlockCovarianceOperator final : public SymmetricOperator {
 public:
  explicit BlockCovarianceOperator(Eigen::MatrixXd block) : b_(std::move(block)) {}
  Eigen::Index dim() const override { return b_.rows() + b_.cols(); }
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const override;

 private:
  Eigen::MatrixXd b_;
};

/// Samples up to this dimension are materialized densely.
inline constexpr std::size_t kDenseLimit = 2048;

/// Picks the cheapest operator for the sample: a blockwise operator for
/// symmetrized covariance, a dense matrix up to kDenseLimit, CSR above.
std::unique_ptr<SymmetricOperator> make_operator(const EnsembleSample& sample);

enum class SolveMethod { lanczos, dense, dense_fallback };

struct SpectralResult {
  /// Descending.
  std::vector<double> eigenvalues;
  /// Unit vectors, empty unless requested.
  std::vector<Eigen::VectorXd> eigenvectors;
  /// ||A v - lambda v|| per pair (Ritz estimate when vectors were not formed).
  std::vector<double> residuals;
  int iterations = 0;
  bool converged = false;
  SolveMethod method = SolveMethod::lanczos;
  /// Smallest gap between consecutive reported eigenvalues.
  double min_gap = 0.0;
  /// Set when min_gap is below 1e3 * tol: the top eigenvalues are
  /// numerically degenerate and their eigenvectors are not individually
  /// determined.
  bool near_degenerate = false;
};

struct EigenOptions {
  std::size_t k = 1;
  double tol = 1e-10;
  bool vectors = false;
  /// Krylov dimension cap; 0 picks min(n, 1000).
  std::size_t max_iterations = 0;
  /// Fall back to a dense solve when Lanczos stalls and n <= kDenseLimit.
  bool dense_fallback = true;
  /// Seed of the deterministic start vector.
  std::uint64_t start_seed = 0x5eed;
};

/// k algebraically largest eigenpairs by Lanczos with full (two-pass)
/// reorthogonalization. An exhausted Krylov space is restarted with a fresh
/// vector orthogonal to the basis, which recovers repeated eigenvalues.
SpectralResult lanczos_top_k(const SymmetricOperator& op, const EigenOptions& options);

/// Direct solve of a dense symmetric matrix.
SpectralResult dense_top_k(const Eigen::MatrixXd& m, std::size_t k, bool vectors);

/// Top-k eigenpairs of a symmetric sample. Throws DomainError for k = 0,
/// k > n or non-symmetric kinds.
SpectralResult top_k_eigs(const EnsembleSample& sample, const EigenOptions& options);

/// Operator norm max |lambda| by power iteration on A^2, stopped when the
/// relative change of the estimate drops below tol.
double operator_norm(const SymmetricOperator& op, double tol = 1e-8,
                     int max_iterations = 100000);
double operator_norm(const EnsembleSample& sample, double tol = 1e-8);

/// |v_i + sign * v_j| / sqrt(2). Throws DomainError for i == j or an index
/// out of range.
double overlap(const Eigen::VectorXd& v, std::size_t i, std::size_t j, int sign);

/// 1 - 4 / (lambda + sqrt(lambda^2 - 4))^2, the limiting squared overlap of
/// an outlier eigenvector with its two-site vector.
double localization_target(double lambda);

struct LocalizationResult {
  bool holds = false;
  std::size_t i = 0;
  std::size_t j = 0;
  int sign = 1;
  double squared_overlap = 0.0;
  double target = 0.0;
};

/// Checks whether the best two-site vector (delta_i + D delta_j)/sqrt(2),
/// taken on the two largest |coordinates| of v, has squared overlap within
/// target * [1 - eps, 1 + eps]. Throws DomainError for lambda <= 2.
LocalizationResult localization_event(const Eigen::VectorXd& v, double lambda,
                                      double eps);

/// Independent-entry variance profile of a symmetric random matrix.
struct VarianceProfile {
  std::size_t n = 0;
  double offdiag_variance = 0.0;
  double diag_variance = 0.0;
  /// Almost-sure bound on |entry|; +inf when unbounded.
  double entry_bound = 0.0;
};

struct MatrixParameters {
  double sigma = 0.0;
  double sigma_star = 0.0;
  double v = 0.0;
  double r = 0.0;
  /// (log n)^2 * R, which must be small for universality to apply.
  double universality_gate = 0.0;
};

/// Closed-form sigma, sigma_*, v, R of an independent-entry profile. Throws
/// DomainError for n = 0 or negative variances.
MatrixParameters bvh_parameters(const VarianceProfile& profile);

}  // namespace htrm
